"""Regularized continuation solver for the semilinear beam equation.

The target equation on the truncation is

    (beam operator) u + g(u) = f_hat,      f_hat = f / rho,

solved through the family (beam operator) u + eps*u + g(u) = f_hat with a
decreasing eps schedule and warm starts.  Each regularized problem is solved
by a diagonal Newton iteration: the Jacobian is the spectral value plus eps
plus the basis-diagonal projection of g', with g' taken by centered finite
differences; steps are damped by halving and a damped Picard sweep
u <- (L + eps I)^{-1} (f_hat - g(u)) acts as the fallback when Newton stalls.

Along the schedule the solver records eps*|u|, |L u|, the rho-weighted L1
norm and the sup norm; on inputs inside the theory these stay bounded, and a
blowup of any of them aborts the continuation with a diagnostic instead of
letting it run to the end of the schedule.

The nonlinearity is assumed monotone non-decreasing and bounded; a
non-increasing g is handled internally through the sign flip u -> -u.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .coefficients import CoefficientProfile
from .eigensolver import BeamSpectrum
from .errors import A3Unverified, MonitorBlowup, NonConvergence, ShapeMismatch
from .spectral_operator import LambdaLattice, assemble_lattice, project_null, project_range
from .transforms import (
    FourierField,
    FrequencySpec,
    PhysicalField,
    analyze,
    l1_norm,
    sup_norm,
    synthesize,
    zero_field,
)

PROBE_POINTS = 10_000
PROBE_SPAN = 50.0
TAIL_POINT = 1e6
LIMIT_CONSISTENCY_TOL = 1e-3
MONOTONE_SLACK = 1e-12


@dataclass(frozen=True)
class Nonlinearity:
    """Scalar monotone bounded nonlinearity with declared limits at infinity."""

    g: Callable
    bound: float
    limit_neg: float
    limit_pos: float
    monotone_direction: str = "non-decreasing"

    def __call__(self, values):
        return self.g(values)

    @classmethod
    def checked(cls, g, bound, limit_neg, limit_pos, monotone_direction="non-decreasing"):
        obj = cls(
            g=g,
            bound=float(bound),
            limit_neg=float(limit_neg),
            limit_pos=float(limit_pos),
            monotone_direction=monotone_direction,
        )
        obj.validate()
        return obj

    def validate(self) -> None:
        """Probe monotonicity, the bound and the declared limits on samples."""
        if self.monotone_direction not in ("non-decreasing", "non-increasing"):
            raise ValueError(f"unknown monotone direction {self.monotone_direction!r}")
        if self.bound <= 0.0:
            raise ValueError("bound must be positive")
        probe = np.linspace(-PROBE_SPAN, PROBE_SPAN, PROBE_POINTS)
        gv = np.asarray(self.g(probe), dtype=float)
        if gv.shape != probe.shape:
            raise ValueError("g must act elementwise on arrays")
        steps = np.diff(gv)
        slack = MONOTONE_SLACK * max(1.0, float(np.max(np.abs(gv))))
        if self.monotone_direction == "non-decreasing" and np.any(steps < -slack):
            raise ValueError("g is not non-decreasing on the probe grid")
        if self.monotone_direction == "non-increasing" and np.any(steps > slack):
            raise ValueError("g is not non-increasing on the probe grid")
        if float(np.max(np.abs(gv))) >= self.bound:
            raise ValueError(f"|g| reached {np.max(np.abs(gv)):.6g}, not below bound {self.bound}")
        tail_lo = float(self.g(np.array([-TAIL_POINT]))[0])
        tail_hi = float(self.g(np.array([TAIL_POINT]))[0])
        if abs(tail_lo - self.limit_neg) > LIMIT_CONSISTENCY_TOL:
            raise ValueError(f"g(-inf) declared {self.limit_neg}, tail sample {tail_lo:.6g}")
        if abs(tail_hi - self.limit_pos) > LIMIT_CONSISTENCY_TOL:
            raise ValueError(f"g(+inf) declared {self.limit_pos}, tail sample {tail_hi:.6g}")


def zero_nonlinearity() -> Nonlinearity:
    """Identically zero g, useful for linear runs (waive the forcing check)."""
    return Nonlinearity(g=lambda v: np.zeros_like(np.asarray(v, dtype=float)),
                        bound=1e-12, limit_neg=0.0, limit_pos=0.0)


def tanh_nonlinearity(amplitude: float) -> Nonlinearity:
    """g(u) = amplitude * tanh(u); direction and limits follow the sign."""
    amp = float(amplitude)
    if amp == 0.0:
        return zero_nonlinearity()
    direction = "non-decreasing" if amp > 0.0 else "non-increasing"
    return Nonlinearity.checked(
        g=lambda v, _a=amp: _a * np.tanh(v),
        bound=abs(amp) * (1.0 + 1e-9),
        limit_neg=-amp,
        limit_pos=amp,
        monotone_direction=direction,
    )


@dataclass(frozen=True)
class SolveContext:
    """Bundle of the discrete objects every solver operation needs."""

    profile: CoefficientProfile
    spectrum: BeamSpectrum
    freq: FrequencySpec
    lattice: LambdaLattice
    time_nodes: int
    oversample: int = 2

    @classmethod
    def build(cls, profile, spectrum, freq, lattice=None, time_nodes=None, oversample=2):
        if lattice is None:
            lattice = assemble_lattice(spectrum, freq)
        if time_nodes is None:
            time_nodes = 2 * freq.m_max + 2
        return cls(profile=profile, spectrum=spectrum, freq=freq, lattice=lattice,
                   time_nodes=int(time_nodes), oversample=int(oversample))

    def zero(self) -> FourierField:
        return zero_field(self.freq.m_max, self.spectrum.count)

    def to_physical(self, u: FourierField, oversampled: bool = False) -> PhysicalField:
        nt = self.time_nodes * (self.oversample if oversampled else 1)
        return synthesize(u, self.spectrum, self.freq, time_nodes=nt)

    def to_coeff(self, fld: PhysicalField) -> FourierField:
        return analyze(fld, self.spectrum, self.profile, self.freq)

    def nonlinear_coeff(self, u: FourierField, g: Nonlinearity) -> FourierField:
        """Coefficients of g(u): pointwise evaluation on the oversampled grid."""
        phys = self.to_physical(u, oversampled=True)
        gvals = np.asarray(g(phys.values), dtype=float)
        gfield = PhysicalField(values=gvals, times=phys.times, period=phys.period, grid=phys.grid)
        return self.to_coeff(gfield)

    def jacobian_diagonal(self, u: FourierField, g: Nonlinearity) -> np.ndarray:
        """Basis-diagonal projection of g'(u), one value per spatial mode.

        The temporal factor |phi_m(t)|^2 = 1/T makes the diagonal independent
        of m, so a single time average per n suffices.
        """
        phys = self.to_physical(u, oversampled=True)
        v = phys.values
        step = 1e-6 * (1.0 + np.abs(v))
        gprime = (np.asarray(g(v + step), float) - np.asarray(g(v - step), float)) / (2.0 * step)
        wx = self.profile.rho * self.profile.grid.weights
        return np.mean(gprime @ (self.spectrum.phi**2 * wx[:, None]), axis=0)


@dataclass(frozen=True)
class ForcingSpec:
    """Forcing f_hat with its range / null splitting and the margin for A3."""

    f_hat: PhysicalField
    f_hat_coeff: FourierField
    f_star: FourierField
    f_star_star: PhysicalField
    margin: float


@dataclass
class SolverConfig:
    """Tolerances and schedule for the regularized continuation."""

    tol: float = 1e-10
    max_iters: int = 80
    max_halvings: int = 30
    picard_damping: float = 0.5
    stall_limit: int = 3
    eps_start: float = 1e-1
    eps_ratio: float = 0.5
    eps_stop: float = 1e-6
    limit_tol: float = 1e-6
    final_tol: float = 1e-5
    blowup_factor: float = 10.0
    blowup_floor: float = 1e-8
    waive_a3: bool = False
    denom_floor: float = 1e-12

    def epsilon_schedule(self) -> list:
        if not (0.0 < self.eps_ratio < 1.0):
            raise ValueError("eps_ratio must lie in (0, 1)")
        if not (0.0 < self.eps_stop <= self.eps_start):
            raise ValueError("need 0 < eps_stop <= eps_start")
        schedule = []
        eps = self.eps_start
        while eps >= self.eps_stop * (1.0 - 1e-12):
            schedule.append(eps)
            eps *= self.eps_ratio
        return schedule


@dataclass(frozen=True)
class TraceStep:
    eps: float
    u_eps: FourierField
    residual_norm: float
    eps_times_norm: float
    L_u_norm: float
    l1_norm: float
    sup_norm: float


@dataclass
class SolveTrace:
    epsilon_schedule: list
    steps: list
    converged: bool
    u: FourierField | None
    range_residual: float | None = None
    null_residual: float | None = None
    a3_report: dict | None = None


def decompose_forcing(f_hat: PhysicalField, ctx: SolveContext, margin: float = 0.05) -> ForcingSpec:
    """Split f_hat into its range projection and the synthesized null part."""
    if margin <= 0.0:
        raise ValueError("margin must be positive")
    coeff = ctx.to_coeff(f_hat)
    f_star = project_range(coeff, ctx.lattice)
    null_part = project_null(coeff, ctx.lattice)
    f_star_star = synthesize(null_part, ctx.spectrum, ctx.freq, time_nodes=ctx.time_nodes)
    return ForcingSpec(
        f_hat=f_hat, f_hat_coeff=coeff, f_star=f_star, f_star_star=f_star_star, margin=float(margin)
    )


def forcing_from_physical(f: PhysicalField, ctx: SolveContext, margin: float = 0.05) -> ForcingSpec:
    """Ingest a raw forcing f by converting it to f_hat = f / rho first."""
    fhat = PhysicalField(
        values=f.values / ctx.profile.rho[None, :], times=f.times, period=f.period, grid=f.grid
    )
    return decompose_forcing(fhat, ctx, margin=margin)


def check_A3(spec: ForcingSpec, g: Nonlinearity):
    """Pointwise test that f** sits inside the limit interval with the margin.

    Returns (verdict, report); the worst margin is the smallest slack to the
    margin-shrunk interval over the physical grid.
    """
    lo_limit = min(g.limit_neg, g.limit_pos)
    hi_limit = max(g.limit_neg, g.limit_pos)
    lower = lo_limit + spec.margin
    upper = hi_limit - spec.margin
    vals = spec.f_star_star.values
    worst = float(min(np.min(vals - lower), np.min(upper - vals)))
    verdict = bool(worst >= 0.0)
    report = {
        "a3_holds": verdict,
        "worst_margin": worst,
        "margin": spec.margin,
        "limit_interval_lo": lo_limit,
        "limit_interval_hi": hi_limit,
        "f_star_star_min": float(np.min(vals)),
        "f_star_star_max": float(np.max(vals)),
    }
    return verdict, report


def residual(
    u: FourierField, eps: float, spec: ForcingSpec, g: Nonlinearity, ctx: SolveContext
) -> FourierField:
    """F(u) = L u + eps u + g(u) - f_hat on the truncation."""
    if u.coeff.shape != ctx.lattice.values.shape:
        raise ShapeMismatch("iterate does not match the lattice truncation")
    lin = (ctx.lattice.values + eps) * u.coeff
    gn = ctx.nonlinear_coeff(u, g)
    return FourierField(lin + gn.coeff - spec.f_hat_coeff.coeff)


def _guarded(denom: np.ndarray, floor: float) -> np.ndarray:
    out = denom.copy()
    tiny = np.abs(out) < floor
    out[tiny] = np.where(out[tiny] >= 0.0, floor, -floor)
    return out


def _orient(spec: ForcingSpec, g: Nonlinearity):
    """Reduce a non-increasing g to the non-decreasing case via u -> -u."""
    if g.monotone_direction != "non-increasing":
        return spec, g, 1.0
    flipped_g = Nonlinearity(
        g=lambda v, _g=g.g: -np.asarray(_g(-np.asarray(v, dtype=float)), dtype=float),
        bound=g.bound,
        limit_neg=-g.limit_pos,
        limit_pos=-g.limit_neg,
        monotone_direction="non-decreasing",
    )
    flipped_spec = ForcingSpec(
        f_hat=PhysicalField(values=-spec.f_hat.values, times=spec.f_hat.times,
                            period=spec.f_hat.period, grid=spec.f_hat.grid),
        f_hat_coeff=FourierField(-spec.f_hat_coeff.coeff),
        f_star=FourierField(-spec.f_star.coeff),
        f_star_star=PhysicalField(values=-spec.f_star_star.values, times=spec.f_star_star.times,
                                  period=spec.f_star_star.period, grid=spec.f_star_star.grid),
        margin=spec.margin,
    )
    return flipped_spec, flipped_g, -1.0


def solve_regularized(
    eps: float,
    spec: ForcingSpec,
    g: Nonlinearity,
    config: SolverConfig,
    ctx: SolveContext,
    u0: FourierField | None = None,
) -> FourierField:
    """Solve L u + eps u + g(u) = f_hat to the configured residual tolerance."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    spec, g, sign = _orient(spec, g)
    if not config.waive_a3:
        ok, report = check_A3(spec, g)
        if not ok:
            raise A3Unverified(
                f"forcing decomposition check failed (worst margin {report['worst_margin']:.6g}); "
                "set waive_a3 to proceed anyway"
            )
    u = FourierField(sign * u0.coeff) if u0 is not None else ctx.zero()

    r = residual(u, eps, spec, g, ctx)
    rnorm = r.norm()
    best = rnorm
    stalls = 0
    for _ in range(config.max_iters):
        if rnorm <= config.tol:
            return FourierField(sign * u.coeff)
        diag = ctx.jacobian_diagonal(u, g)
        denom = _guarded(ctx.lattice.values + eps + diag[None, :], config.denom_floor)
        du = -r.coeff / denom

        accepted = False
        step = 1.0
        for _ in range(config.max_halvings):
            cand = FourierField(u.coeff + step * du)
            rc = residual(cand, eps, spec, g, ctx)
            if rc.norm() < rnorm:
                u, r, rnorm = cand, rc, rc.norm()
                accepted = True
                break
            step *= 0.5

        if not accepted:
            # damped Picard fallback: u <- (1-theta) u + theta (L+eps)^(-1)(f_hat - g(u))
            gn = ctx.nonlinear_coeff(u, g)
            pic = (spec.f_hat_coeff.coeff - gn.coeff) / _guarded(
                ctx.lattice.values + eps, config.denom_floor
            )
            theta = config.picard_damping
            cand = FourierField((1.0 - theta) * u.coeff + theta * pic)
            rc = residual(cand, eps, spec, g, ctx)
            if rc.norm() < rnorm:
                u, r, rnorm = cand, rc, rc.norm()
                stalls = 0
            else:
                stalls += 1
                if stalls >= config.stall_limit:
                    break
        best = min(best, rnorm)
    if rnorm <= config.tol:
        return FourierField(sign * u.coeff)
    raise NonConvergence(
        f"regularized solve at eps = {eps:.3e} stopped with residual {rnorm:.3e} "
        f"(tolerance {config.tol:.1e})",
        best_residual=best,
    )


_MONITORS = ("eps_times_norm", "L_u_norm", "l1_norm", "sup_norm")


def continuation_solve(
    spec: ForcingSpec,
    g: Nonlinearity,
    config: SolverConfig,
    ctx: SolveContext,
    u0: FourierField | None = None,
) -> SolveTrace:
    """Drive eps down the schedule with warm starts and monitored bounds.

    Convergence is declared when consecutive iterates differ by at most
    limit_tol * (1 + |u|); the final iterate must then pass the eps = 0
    residual test on range modes and the null-mode balance, both at final_tol.
    """
    oriented_spec, oriented_g, sign = _orient(spec, g)
    verdict, a3_report = check_A3(oriented_spec, oriented_g)
    if not verdict and not config.waive_a3:
        raise A3Unverified(
            f"forcing decomposition check failed (worst margin {a3_report['worst_margin']:.6g}); "
            "set waive_a3 to proceed anyway"
        )

    schedule = config.epsilon_schedule()
    inner = replace(config, waive_a3=True)
    trace = SolveTrace(epsilon_schedule=schedule, steps=[], converged=False, u=None,
                       a3_report=a3_report)

    u = u0 if u0 is not None else ctx.zero()  # user frame throughout the loop
    prev = None
    baselines = None
    converged = False
    for eps in schedule:
        try:
            u = FourierField(
                sign * solve_regularized(eps, oriented_spec, oriented_g, inner, ctx,
                                         u0=FourierField(sign * u.coeff)).coeff
            )
        except NonConvergence as exc:
            exc.trace = trace
            raise
        oriented_u = FourierField(sign * u.coeff)
        rnorm = residual(oriented_u, eps, oriented_spec, oriented_g, ctx).norm()
        phys = ctx.to_physical(u)
        step_record = TraceStep(
            eps=eps,
            u_eps=u,
            residual_norm=rnorm,
            eps_times_norm=eps * u.norm(),
            L_u_norm=FourierField(ctx.lattice.values * u.coeff).norm(),
            l1_norm=l1_norm(phys, ctx.profile),
            sup_norm=sup_norm(phys),
        )
        trace.steps.append(step_record)

        monitors = {name: getattr(step_record, name) for name in _MONITORS}
        if baselines is None:
            baselines = {
                name: max(value, config.blowup_floor) for name, value in monitors.items()
            }
        else:
            for name, value in monitors.items():
                if value > config.blowup_factor * baselines[name]:
                    raise MonitorBlowup(
                        f"monitor {name} grew to {value:.6g} at eps = {eps:.3e}, "
                        f"over {config.blowup_factor:g} times its first-step value "
                        f"{baselines[name]:.6g}; the configuration is outside the "
                        "bounded-monitor regime",
                        trace=trace,
                    )

        if prev is not None:
            gap = float(np.sqrt(np.sum(np.abs(u.coeff - prev.coeff) ** 2)))
            if gap <= config.limit_tol * (1.0 + u.norm()):
                converged = True
                break
        prev = u

    if not converged:
        raise NonConvergence(
            "epsilon schedule exhausted before consecutive iterates settled "
            f"(limit_tol {config.limit_tol:.1e})",
            trace=trace,
        )

    r0 = residual(FourierField(sign * u.coeff), 0.0, oriented_spec, oriented_g, ctx)
    range_residual = project_range(r0, ctx.lattice).norm()
    null_residual = project_null(r0, ctx.lattice).norm()
    trace.range_residual = range_residual
    trace.null_residual = null_residual
    if range_residual > config.final_tol or null_residual > config.final_tol:
        raise NonConvergence(
            f"limit residual test failed: range {range_residual:.3e}, "
            f"null balance {null_residual:.3e}, tolerance {config.final_tol:.1e}",
            trace=trace,
        )
    trace.converged = True
    trace.u = u
    return trace


def weak_residual(
    u: FourierField,
    f: PhysicalField,
    g: Nonlinearity,
    profile: CoefficientProfile,
    ctx: SolveContext,
) -> float:
    """Max weak-form defect over all truncated test functions.

    Test functions are the basis products, so the spatial and temporal
    derivatives reduce to the eigenvalue relations and no numerical
    differentiation is involved; u and g(u) are projected back through the
    quadrature rather than taken from the coefficient array.
    """
    fhat = PhysicalField(values=f.values / profile.rho[None, :], times=f.times,
                         period=f.period, grid=f.grid)
    fh = analyze(fhat, ctx.spectrum, profile, ctx.freq).coeff
    uq = ctx.to_coeff(ctx.to_physical(u)).coeff
    gq = ctx.nonlinear_coeff(u, g).coeff
    defect = ctx.lattice.values * uq + gq - fh
    return float(np.max(np.abs(defect)))
