"""Eigensolver for the fourth-order beam operator with rotational-spring ends.

The pencil comes from the energy form of (eta u'')'' = mu * rho * u with the
essential condition u = 0 and the natural condition
2*(alpha+beta)*u' + u'' = 0 at both ends:

    a(u, v) = int eta u'' v'' dx
              + 2*eta*(alpha+beta)*u'*v' |_{x=pi}
              - 2*eta*(alpha+beta)*u'*v' |_{x=0},
    b(u, v) = int rho u v dx.

Discretization is the classical cubic Hermite beam element on the uniform
grid: two degrees of freedom per node (value and slope), Gauss quadrature
that integrates the element forms exactly for linearly interpolated
coefficients, and the boundary springs acting directly on the end slope
degrees of freedom.  The eigenvalue design order is 4 and holds with active
springs; `diagnostics.convergence_study` measures it.

Returned mode samples are re-orthonormalized (symmetric Loewdin pass) in the
discrete trapezoid rho-inner product of the grid, so the spectrum is
orthonormal to round-off in the same measure the transforms use.  Shift-invert
Ritz values inherit the condition number of the stiff pencil, so eigenvalues
are recovered from the element-wise energy quotient, which sums positive
terms and is free of cancellation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as spla

from .coefficients import CoefficientProfile, SpatialGrid, resample_profile
from .errors import DiscretizationTooCoarse, EigensolveFailure, InsufficientModes

DESIGN_ORDER = 4
MIN_RESOLUTION = 16
CLUSTER_RTOL = 1e-6
ORTHONORMALITY_TOL = 1e-8
BOUNDARY_TOL = 1e-8

# Gauss-Legendre rules on [0, 1]: 2 points integrate the stiffness integrand
# (quadratic shapes times linear coefficient) exactly, 4 points do the mass.
_GAUSS_STIFF = (
    np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)]),
    np.array([0.5, 0.5]),
)
_G4 = np.sqrt(3.0 / 7.0 - 2.0 / 7.0 * np.sqrt(6.0 / 5.0))
_G4B = np.sqrt(3.0 / 7.0 + 2.0 / 7.0 * np.sqrt(6.0 / 5.0))
_W4 = (18.0 + np.sqrt(30.0)) / 36.0
_W4B = (18.0 - np.sqrt(30.0)) / 36.0
_GAUSS_MASS = (
    0.5 * (1.0 + np.array([-_G4B, -_G4, _G4, _G4B])),
    0.5 * np.array([_W4B, _W4, _W4, _W4B]),
)


@dataclass(frozen=True)
class BeamSpectrum:
    """Ascending eigenvalues with rho-orthonormal eigenfunction samples."""

    mu: np.ndarray
    phi: np.ndarray    # (nodes, count), boundary rows are zero
    grid: SpatialGrid
    rho: np.ndarray
    profile_id: str
    phi_x: np.ndarray | None = None  # slope samples when the solver provides them

    @property
    def count(self) -> int:
        return self.mu.size


@dataclass(frozen=True)
class AsymptoticFit:
    """Least-squares fit of mu_n = n^4 + 2*n^2*a + b_n."""

    a: float
    b: np.ndarray
    fit_range: tuple
    fit_rms: float


def _shape_value(xi: float, h: float) -> np.ndarray:
    """Hermite cubic shapes (u1, th1, u2, th2) at local coordinate xi."""
    return np.array([
        1.0 - 3.0 * xi**2 + 2.0 * xi**3,
        h * (xi - 2.0 * xi**2 + xi**3),
        3.0 * xi**2 - 2.0 * xi**3,
        h * (-(xi**2) + xi**3),
    ])


def _shape_curvature(xi: float, h: float) -> np.ndarray:
    """Second x-derivatives of the Hermite shapes at xi (already / h^2)."""
    return np.array([
        (-6.0 + 12.0 * xi) / h**2,
        (-4.0 + 6.0 * xi) / h,
        (6.0 - 12.0 * xi) / h**2,
        (-2.0 + 6.0 * xi) / h,
    ])


@dataclass(frozen=True)
class _Pencil:
    """Assembled Hermite pencil with the pieces of the energy form.

    `energy_value` re-evaluates the stiffness form element by element as a
    sum of positive Gauss-point terms, which stays accurate where summing
    the assembled rows (entries of size 1/h^3) would cancel catastrophically.
    """

    stiffness: sparse.csc_matrix
    mass: sparse.csc_matrix
    free: np.ndarray           # free global DOF indices
    resolution: int
    spacing: float
    eta: np.ndarray
    springs: tuple             # of (free-DOF index, coefficient)

    def energy_value(self, vec: np.ndarray) -> float:
        full = np.zeros(2 * (self.resolution + 1))
        full[self.free] = vec
        h = self.spacing
        points, weights = _GAUSS_STIFF
        total = 0.0
        for xi, wq in zip(points, weights):
            curv = _shape_curvature(xi, h)
            dofs = full.reshape(-1, 2)
            u1, t1 = dofs[:-1, 0], dofs[:-1, 1]
            u2, t2 = dofs[1:, 0], dofs[1:, 1]
            kappa = curv[0] * u1 + curv[1] * t1 + curv[2] * u2 + curv[3] * t2
            eta_q = self.eta[:-1] * (1.0 - xi) + self.eta[1:] * xi
            total += wq * h * float(np.dot(eta_q, kappa * kappa))
        for idx, coef in self.springs:
            total += coef * float(vec[idx]) ** 2
        return total


def _assemble_pencil(profile: CoefficientProfile) -> _Pencil:
    grid = profile.grid
    h = grid.spacing()
    R = grid.resolution
    ndof = 2 * (R + 1)

    k_rows, k_cols, k_vals = [], [], []
    m_rows, m_cols, m_vals = [], [], []
    local_dofs = np.empty(4, dtype=int)
    for e in range(R):
        local_dofs[:] = (2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3)
        ke = np.zeros((4, 4))
        for xi, wq in zip(*_GAUSS_STIFF):
            eta_q = profile.eta[e] * (1.0 - xi) + profile.eta[e + 1] * xi
            curv = _shape_curvature(xi, h)
            ke += (wq * h * eta_q) * np.outer(curv, curv)
        me = np.zeros((4, 4))
        for xi, wq in zip(*_GAUSS_MASS):
            rho_q = profile.rho[e] * (1.0 - xi) + profile.rho[e + 1] * xi
            shape = _shape_value(xi, h)
            me += (wq * h * rho_q) * np.outer(shape, shape)
        for a in range(4):
            for b in range(4):
                k_rows.append(local_dofs[a])
                k_cols.append(local_dofs[b])
                k_vals.append(ke[a, b])
                m_rows.append(local_dofs[a])
                m_cols.append(local_dofs[b])
                m_vals.append(me[a, b])

    K = sparse.coo_matrix((k_vals, (k_rows, k_cols)), shape=(ndof, ndof)).tocsr()
    M = sparse.coo_matrix((m_vals, (m_rows, m_cols)), shape=(ndof, ndof)).tocsr()

    # rotational springs act on the end slope DOFs
    spring0 = -2.0 * profile.eta[0] * (profile.alpha[0] + profile.beta[0])
    springR = 2.0 * profile.eta[-1] * (profile.alpha[-1] + profile.beta[-1])
    for idx, coef in ((1, spring0), (2 * R + 1, springR)):
        if coef != 0.0:
            K = K + sparse.coo_matrix(([coef], ([idx], [idx])), shape=(ndof, ndof)).tocsr()

    free = np.array([i for i in range(ndof) if i not in (0, 2 * R)])
    K = K[free][:, free]
    M = M[free][:, free]
    K = 0.5 * (K + K.T)
    M = 0.5 * (M + M.T)

    springs = []
    if spring0 != 0.0:
        springs.append((0, spring0))          # slope DOF at x = 0 is free index 0
    if springR != 0.0:
        springs.append((free.size - 1, springR))  # slope DOF at x = pi is last
    return _Pencil(
        stiffness=K.tocsc(),
        mass=M.tocsc(),
        free=free,
        resolution=R,
        spacing=h,
        eta=profile.eta,
        springs=tuple(springs),
    )


def _smallest_modes(pencil: _Pencil, count: int):
    n = pencil.mass.shape[0]
    v0 = np.full(n, 1.0 / np.sqrt(n))
    try:
        vals, vecs = spla.eigsh(
            pencil.stiffness, k=count, M=pencil.mass, sigma=0.0, which="LM", v0=v0
        )
    except Exception as exc:  # ArpackError, LU failure, singular pencil
        raise EigensolveFailure(f"generalized eigensolve failed: {exc}") from exc
    mass_norms = np.sqrt(np.einsum("ij,ij->j", vecs, pencil.mass @ vecs))
    vecs = vecs / mass_norms
    # shift-invert Ritz values carry the LU condition-number error of the
    # stiff pencil; the eigenvectors do not, so take the cancellation-free
    # energy quotient instead
    vals = np.array([pencil.energy_value(vecs[:, j]) for j in range(count)])
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def _split_samples(pencil: _Pencil, vecs: np.ndarray):
    """Expand free-DOF columns to value and slope samples on all nodes."""
    R = pencil.resolution
    count = vecs.shape[1]
    full = np.zeros((2 * (R + 1), count))
    full[pencil.free, :] = vecs
    return full[0::2, :].copy(), full[1::2, :].copy()


def _loewdin_orthonormalize(phi, phi_x, dweights):
    """Symmetric orthonormalization in the grid rho-inner product.

    The element mass and the grid trapezoid rule agree to high order but not
    to round-off; this pass moves the modes the minimal distance needed to
    make the sampled Gram matrix the exact identity, applying the same mixing
    to the slope samples.
    """
    gram = phi.T @ (phi * dweights[:, None])
    evals, evecs = np.linalg.eigh(gram)
    if np.min(evals) <= 0.0:
        raise EigensolveFailure("sampled modes are numerically dependent")
    inv_root = evecs @ np.diag(1.0 / np.sqrt(evals)) @ evecs.T
    return phi @ inv_root, phi_x @ inv_root


def _orthonormalize_clusters(mu, phi, phi_x, dweights):
    """Gram-Schmidt inside near-degenerate eigenvalue clusters.

    Cluster detection is scale relative: |mu_i - mu_j| <= 1e-6 * (1 + |mu_i|).
    """
    count = mu.size
    start = 0
    while start < count:
        stop = start + 1
        while stop < count and abs(mu[stop] - mu[stop - 1]) <= CLUSTER_RTOL * (1.0 + abs(mu[stop])):
            stop += 1
        if stop - start > 1:
            for j in range(start, stop):
                v = phi[:, j]
                vx = phi_x[:, j]
                for k in range(start, j):
                    proj = np.dot(phi[:, k] * dweights, v)
                    v = v - proj * phi[:, k]
                    vx = vx - proj * phi_x[:, k]
                nrm = np.sqrt(np.dot(v * dweights, v))
                if nrm == 0.0:
                    raise EigensolveFailure("degenerate cluster collapsed during orthogonalization")
                phi[:, j] = v / nrm
                phi_x[:, j] = vx / nrm
        start = stop
    return phi, phi_x


def _fix_signs(phi, phi_x):
    """Gauge each mode so that the slope at x = 0 is positive."""
    for j in range(phi.shape[1]):
        slope = phi_x[0, j]
        if slope < 0.0 or (slope == 0.0 and phi[1, j] < 0.0):
            phi[:, j] = -phi[:, j]
            phi_x[:, j] = -phi_x[:, j]
    return phi, phi_x


def validate_spectrum(spectrum: BeamSpectrum) -> None:
    """Check the normalization, boundary and sup-bound invariants."""
    dw = spectrum.rho * spectrum.grid.weights
    gram = spectrum.phi.T @ (spectrum.phi * dw[:, None])
    dev = float(np.max(np.abs(gram - np.eye(spectrum.count))))
    if dev > ORTHONORMALITY_TOL:
        raise EigensolveFailure(f"orthonormality deviation {dev:.3e} exceeds {ORTHONORMALITY_TOL}")
    edge = max(float(np.max(np.abs(spectrum.phi[0]))), float(np.max(np.abs(spectrum.phi[-1]))))
    if edge > BOUNDARY_TOL:
        raise EigensolveFailure(f"boundary values {edge:.3e} exceed {BOUNDARY_TOL}")
    if np.min(spectrum.rho) > 1.0 and np.max(np.abs(spectrum.phi)) >= 1.0:
        raise EigensolveFailure("normalized mode exceeded the sup bound |phi| < 1 with rho > 1")


def solve_eigenproblem(
    profile: CoefficientProfile, count: int, resolution: int | None = None
) -> BeamSpectrum:
    """Compute the `count` smallest modes of (eta u'')'' = mu rho u.

    Parameters
    ----------
    profile : CoefficientProfile
        Coefficients sampled on a uniform grid.
    count : int
        Number of eigenpairs, at most resolution/4.
    resolution : int, optional
        Resample the profile onto this resolution before solving.

    Returns
    -------
    BeamSpectrum with ascending mu, modes orthonormal in the grid rho-inner
    product, zero boundary values and the sign gauge phi'(0) > 0.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if resolution is not None and resolution != profile.grid.resolution:
        profile = resample_profile(profile, resolution)
    R = profile.grid.resolution
    if R < MIN_RESOLUTION:
        raise DiscretizationTooCoarse(f"resolution {R} is below the minimum {MIN_RESOLUTION}")
    if count > R / 4:
        raise DiscretizationTooCoarse(
            f"count {count} exceeds resolution/4 = {R / 4:.0f}; refine the grid"
        )

    pencil = _assemble_pencil(profile)
    mu, vecs = _smallest_modes(pencil, count)
    if mu[0] <= 0.0:
        raise EigensolveFailure(
            f"pencil is not positive definite on the constrained subspace (mu_1 = {mu[0]:.6g})"
        )

    phi, phi_x = _split_samples(pencil, vecs)
    dweights = profile.rho * profile.grid.weights
    phi, phi_x = _loewdin_orthonormalize(phi, phi_x, dweights)
    phi, phi_x = _orthonormalize_clusters(mu.copy(), phi, phi_x, dweights)
    phi, phi_x = _fix_signs(phi, phi_x)

    spectrum = BeamSpectrum(
        mu=mu, phi=phi, grid=profile.grid, rho=profile.rho,
        profile_id=profile.profile_id, phi_x=phi_x,
    )
    validate_spectrum(spectrum)
    return spectrum


def check_orthonormality(spectrum: BeamSpectrum) -> float:
    """Max deviation of the rho-weighted Gram matrix from the identity."""
    dw = spectrum.rho * spectrum.grid.weights
    gram = spectrum.phi.T @ (spectrum.phi * dw[:, None])
    return float(np.max(np.abs(gram - np.eye(spectrum.count))))


def rayleigh_residuals(spectrum: BeamSpectrum, profile: CoefficientProfile) -> np.ndarray:
    """Relative mismatch between each mu_n and its energy-form quotient.

    Uses the stored value and slope samples, so the check is an independent
    re-evaluation of the assembled forms rather than a copy of the solve.
    """
    if spectrum.phi_x is None:
        raise ValueError("spectrum carries no slope samples")
    pencil = _assemble_pencil(profile)
    out = np.empty(spectrum.count)
    for j in range(spectrum.count):
        full = np.empty(2 * (pencil.resolution + 1))
        full[0::2] = spectrum.phi[:, j]
        full[1::2] = spectrum.phi_x[:, j]
        vec = full[pencil.free]
        energy = pencil.energy_value(vec)
        mass = float(vec @ (pencil.mass @ vec))
        out[j] = abs(energy / mass - spectrum.mu[j]) / abs(spectrum.mu[j])
    return out


def fit_asymptotics(spectrum: BeamSpectrum, n_min: int) -> AsymptoticFit:
    """Least squares of (mu_n - n^4) against 2 n^2 with intercept, n >= n_min.

    b_n = mu_n - n^4 - 2 n^2 a is returned for every mode; the fit range and
    the residual RMS of the regression stage are reported alongside.
    """
    count = spectrum.count
    n = np.arange(1, count + 1, dtype=float)
    sel = n >= n_min
    if int(sel.sum()) < 5:
        raise InsufficientModes(
            f"need at least 5 modes with n >= {n_min}; spectrum holds {count}"
        )
    y = spectrum.mu - n**4
    X = np.column_stack([2.0 * n[sel] ** 2, np.ones(int(sel.sum()))])
    coef, *_ = np.linalg.lstsq(X, y[sel], rcond=None)
    a = float(coef[0])
    b = y - 2.0 * a * n**2
    fit_rms = float(np.sqrt(np.mean((y[sel] - X @ coef) ** 2)))
    return AsymptoticFit(a=a, b=b, fit_range=(int(n_min), count), fit_rms=fit_rms)
