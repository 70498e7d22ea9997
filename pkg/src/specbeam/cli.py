"""Command line driver: eigen, lattice, solve, verify and manufactured runs.

Each subcommand reads one JSON config, writes delimited tables plus rendered
figures into the output directory, and finishes with a key-value report.
Errors exit non-zero after printing one machine-readable line to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import diagnostics, figures, reference, reports
from .eigensolver import check_orthonormality, fit_asymptotics, rayleigh_residuals, solve_eigenproblem
from .errors import ConfigError, MonitorBlowup, NonConvergence, SpecbeamError
from .nonlinear_solver import continuation_solve, decompose_forcing, weak_residual
from .spectral_operator import apply_L, lattice_rows, tail_sum
from .transforms import FourierField, synthesize

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specbeam",
        description="Spectral toolkit for time-periodic vibrations of a variable "
        "coefficient beam",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("eigen", "solve the beam eigenproblem and export the spectrum table"),
        ("lattice", "add the space-time classification, tail sum and bound checks"),
        ("solve", "run the regularized continuation solve on the configured forcing"),
        ("verify", "run the diagnostics suite and the constant-coefficient battery"),
        ("manufactured", "recover a configured manufactured solution and report the error"),
    ):
        cmd = sub.add_parser(name, help=helptext)
        cmd.add_argument("--config", required=True, help="path to the JSON run config")
        cmd.add_argument("--out", required=True, help="output directory")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument(
            "--strict-a2",
            action=argparse.BooleanOptionalAction,
            default=None,
            help="override the strict coefficient assumptions flag",
        )
        cmd.add_argument(
            "--figures",
            action=argparse.BooleanOptionalAction,
            default=True,
            help="render figures next to the tables",
        )
    return parser


def _provenance(cfg, profile, freq, count, null_tol, seed) -> dict:
    return {
        "schema_version": cfgmod.SCHEMA_VERSION,
        "config_hash": cfgmod.config_hash(cfg),
        "seed": seed,
        "resolution": profile.grid.resolution,
        "strict_a2": profile.strict_a2,
        "n_modes": count,
        "m_max": freq.m_max,
        "p": freq.p,
        "q": freq.q,
        "null_tol": null_tol if null_tol is not None else "auto",
    }


def _eigen_stage(cfg, strict_override):
    profile = cfgmod.make_profile(cfg, strict_override)
    freq = cfgmod.make_frequency(cfg)
    count = cfgmod.spectrum_count(cfg)
    spectrum = solve_eigenproblem(profile, count)
    n_min = cfgmod.fit_n_min(cfg)
    fit = None
    if count - n_min + 1 >= 5:
        fit = fit_asymptotics(spectrum, n_min)
    return profile, freq, spectrum, fit


def _write_eigen_outputs(outdir, meta, spectrum, profile, fit, want_figures):
    b_values = fit.b if fit is not None else np.full(spectrum.count, np.nan)
    rows = [
        (n + 1, float(spectrum.mu[n]), float(b_values[n]))
        for n in range(spectrum.count)
    ]
    reports.write_table(outdir / "eigen.csv", ("n", "mu", "b_n"), rows, meta)
    if want_figures:
        figures.save_eigen_figure(spectrum, fit, outdir / "eigen.png")
    body = {
        "profile_id": spectrum.profile_id,
        "calibration_shift": profile.calibration_shift,
        "mu_first": float(spectrum.mu[0]),
        "mu_last": float(spectrum.mu[-1]),
        "orthonormality_deviation": check_orthonormality(spectrum),
        "rayleigh_residual_max": float(np.max(rayleigh_residuals(spectrum, profile))),
    }
    if fit is not None:
        body.update(
            {
                "fit_a": fit.a,
                "fit_range": fit.fit_range,
                "fit_rms": fit.fit_rms,
                "b_abs_max": float(np.max(np.abs(fit.b[fit.fit_range[0] - 1 :]))),
            }
        )
    return body


def cmd_eigen(cfg, outdir, args, seed) -> int:
    profile, freq, spectrum, fit = _eigen_stage(cfg, args.strict_a2)
    meta = _provenance(cfg, profile, freq, spectrum.count, cfgmod.null_tolerance(cfg), seed)
    body = _write_eigen_outputs(outdir, meta, spectrum, profile, fit, args.figures)
    reports.write_report(outdir / "report.txt", meta, body)
    return EXIT_OK


def cmd_lattice(cfg, outdir, args, seed) -> int:
    profile, freq, spectrum, fit = _eigen_stage(cfg, args.strict_a2)
    ctx = cfgmod.make_context(cfg, profile, spectrum, freq)
    lattice = ctx.lattice
    meta = _provenance(cfg, profile, freq, spectrum.count, lattice.null_tol, seed)

    body = _write_eigen_outputs(outdir, meta, spectrum, profile, fit, args.figures)
    reports.write_table(
        outdir / "lattice.csv", ("m", "n", "lambda", "null"), lattice_rows(lattice), meta
    )
    if args.figures:
        figures.save_lattice_figure(lattice, outdir / "lattice.png")

    tail = tail_sum(lattice)
    trials = int(cfg.get("diagnostics", {}).get("trials", 100))
    bounds = diagnostics.verify_inverse_bounds(lattice, trials=trials, seed=seed)
    body.update(
        {
            "delta": lattice.delta,
            "gamma": lattice.gamma,
            "null_count": lattice.null_count,
            "null_tol": lattice.null_tol,
            "tail_sum": tail.total,
            "sup_constant": tail.sup_constant,
        }
    )
    body.update({f"bounds_{k}": v for k, v in bounds.to_dict().items()})
    reports.write_report(outdir / "report.txt", meta, body)
    return EXIT_OK


def _write_trace_outputs(outdir, meta, trace, ctx, want_figures):
    rows = [
        (
            s.eps,
            s.residual_norm,
            s.eps_times_norm,
            s.L_u_norm,
            s.l1_norm,
            s.sup_norm,
        )
        for s in trace.steps
    ]
    reports.write_table(
        outdir / "trace.csv",
        ("eps", "residual", "eps_norm_u", "L_u_norm", "l1_norm", "sup_norm"),
        rows,
        meta,
    )
    if want_figures and trace.steps:
        figures.save_trace_figure(trace, outdir / "trace.png")
    if trace.u is not None:
        field = ctx.to_physical(trace.u)
        field_rows = [
            (float(t), float(x), float(field.values[j, k]))
            for j, t in enumerate(field.times)
            for k, x in enumerate(field.grid.nodes)
        ]
        reports.write_table(outdir / "field.csv", ("t", "x", "value"), field_rows, meta)
        if want_figures:
            figures.save_field_figure(field, outdir / "field.png")


def cmd_solve(cfg, outdir, args, seed) -> int:
    profile, freq, spectrum, _ = _eigen_stage(cfg, args.strict_a2)
    ctx = cfgmod.make_context(cfg, profile, spectrum, freq)
    meta = _provenance(cfg, profile, freq, spectrum.count, ctx.lattice.null_tol, seed)
    g = cfgmod.make_nonlinearity(cfg)
    spec = cfgmod.make_forcing(cfg, ctx)
    solver_config = cfgmod.make_solver_config(cfg)
    try:
        trace = continuation_solve(spec, g, solver_config, ctx)
    except (NonConvergence, MonitorBlowup) as exc:
        if exc.trace is not None:
            _write_trace_outputs(outdir, meta, exc.trace, ctx, args.figures)
            reports.write_report(
                outdir / "report.txt",
                meta,
                {"converged": False, "diagnostic": type(exc).__name__, "detail": str(exc)},
            )
        raise
    _write_trace_outputs(outdir, meta, trace, ctx, args.figures)
    last = trace.steps[-1]
    reports.write_report(
        outdir / "report.txt",
        meta,
        {
            "converged": trace.converged,
            "steps": len(trace.steps),
            "final_eps": last.eps,
            "final_residual": last.residual_norm,
            "final_eps_norm_u": last.eps_times_norm,
            "range_residual": trace.range_residual,
            "null_balance_residual": trace.null_residual,
            "a3_holds": trace.a3_report["a3_holds"],
            "a3_worst_margin": trace.a3_report["worst_margin"],
        },
    )
    return EXIT_OK


def cmd_manufactured(cfg, outdir, args, seed) -> int:
    profile, freq, spectrum, _ = _eigen_stage(cfg, args.strict_a2)
    ctx = cfgmod.make_context(cfg, profile, spectrum, freq)
    meta = _provenance(cfg, profile, freq, spectrum.count, ctx.lattice.null_tol, seed)
    g = cfgmod.make_nonlinearity(cfg)
    target = cfgmod.make_manufactured_target(cfg, ctx)

    forcing_coeff = FourierField(
        apply_L(target, ctx.lattice).coeff + ctx.nonlinear_coeff(target, g).coeff
    )
    f_hat = synthesize(forcing_coeff, spectrum, freq, time_nodes=ctx.time_nodes)
    margin = float(cfg.get("forcing", {}).get("margin", 0.05))
    spec = decompose_forcing(f_hat, ctx, margin=margin)
    solver_config = cfgmod.make_solver_config(cfg)

    trace = continuation_solve(spec, g, solver_config, ctx)
    _write_trace_outputs(outdir, meta, trace, ctx, args.figures)
    recovery = float(np.sqrt(np.sum(np.abs(trace.u.coeff - target.coeff) ** 2)))
    f_raw = ctx.to_physical(forcing_coeff)
    f_parent = type(f_raw)(
        values=f_raw.values * profile.rho[None, :],
        times=f_raw.times,
        period=f_raw.period,
        grid=f_raw.grid,
    )
    weak = weak_residual(trace.u, f_parent, g, profile, ctx)
    reports.write_report(
        outdir / "report.txt",
        meta,
        {
            "converged": trace.converged,
            "recovery_error": recovery,
            "weak_residual": weak,
            "range_residual": trace.range_residual,
            "null_balance_residual": trace.null_residual,
            "final_eps": trace.steps[-1].eps,
        },
    )
    return EXIT_OK


def cmd_verify(cfg, outdir, args, seed) -> int:
    checks = {}

    # constant-coefficient eigen battery against mu_n = n^4
    resolution = int(cfg.get("coefficients", {}).get("resolution", 512))
    profile = reference.constant_profile(resolution)
    spectrum = solve_eigenproblem(profile, 10)
    n = np.arange(1, 11, dtype=float)
    eigen_err = float(np.max(np.abs(spectrum.mu - n**4) / n**4))
    checks["eigen_oracle_max_rel_err"] = eigen_err
    checks["eigen_oracle_pass"] = eigen_err <= 1e-6

    # lattice classification against the exact enumeration
    freq = cfgmod.make_frequency(cfg)
    count = cfgmod.spectrum_count(cfg)
    expected = reference.enumerate_constant_lattice(count, freq.m_max, freq.p, freq.q)
    oracle_profile, oracle_spectrum = reference.pinned_constant_spectrum(count, resolution)
    ctx = cfgmod.make_context(cfg, oracle_profile, oracle_spectrum, freq)
    lattice = ctx.lattice
    meta = _provenance(cfg, oracle_profile, freq, count, lattice.null_tol, seed)
    reports.write_table(
        outdir / "lattice.csv", ("m", "n", "lambda", "null"), lattice_rows(lattice), meta
    )
    if args.figures:
        figures.save_lattice_figure(lattice, outdir / "lattice.png")
    null_set = {
        (m, nn) for m, nn, _, is_null in lattice_rows(lattice) if is_null
    }
    checks["delta"] = lattice.delta
    checks["gamma"] = lattice.gamma
    checks["null_count"] = lattice.null_count
    checks["classification_pass"] = (
        null_set == expected["null_modes"]
        and abs(lattice.delta - float(expected["delta"])) <= 1e-9
        and abs(lattice.gamma - float(expected["gamma"])) <= 1e-9
    )

    # tail sum against the exact rational value
    tail = tail_sum(lattice)
    checks["tail_sum"] = tail.total
    checks["tail_exact"] = float(expected["tail_sum"])
    checks["tail_pass"] = abs(tail.total - float(expected["tail_sum"])) <= 1e-9 * tail.total

    # inverse bound suite
    trials = int(cfg.get("diagnostics", {}).get("trials", 100))
    try:
        bounds = diagnostics.verify_inverse_bounds(lattice, trials=trials, seed=seed)
        checks["bounds_pass"] = True
        checks["bounds_worst_norm_ratio"] = bounds.worst_norm_ratio
        checks["bounds_worst_pairing_ratio"] = bounds.worst_pairing_ratio
        checks["bounds_worst_sup_ratio"] = bounds.worst_sup_ratio
        checks["bounds_delta_witness"] = bounds.delta_witness_ratio
        checks["bounds_gamma_witness"] = bounds.gamma_witness_ratio
    except SpecbeamError as exc:
        checks["bounds_pass"] = False
        checks["bounds_error"] = str(exc)

    # compactness decay of the finite-rank truncations
    decay = diagnostics.compactness_decay(lattice, ranks=(4, 8, 16))
    checks["compactness_norms"] = decay.discarded_norms
    checks["compactness_pass"] = decay.norm_monotone and decay.bound_monotone

    # convergence order of the discretization against its design order
    study = diagnostics.convergence_study(
        reference.constant_profile(256), 3, resolutions=(64, 128, 256)
    )
    observed = study.entries[0].order
    checks["convergence_order"] = observed
    checks["convergence_order_pass"] = (
        observed is not None and abs(observed - study.design_order) <= 0.3
    )

    # resonance structure probe on a deeper analytic spectrum
    _, spectrum10 = reference.pinned_constant_spectrum(10, resolution)
    lattice10 = cfgmod.assemble_lattice(spectrum10, freq)
    probe = diagnostics.rationality_probe(
        fit_asymptotics(spectrum10, 3), freq, spectrum10, lattice10
    )
    checks["rationality_verdict"] = probe.verdict
    checks["rationality_pass"] = (
        "accumulation" in probe.verdict and probe.factorization_residual <= 1e-9
    )

    # transform round trip on a seeded random band-limited field
    rng = np.random.default_rng(seed)
    from .diagnostics import random_range_field
    from .transforms import analyze

    trial = random_range_field(lattice, rng)
    phys = synthesize(trial, oracle_spectrum, freq)
    back = analyze(phys, oracle_spectrum, oracle_profile, freq)
    roundtrip = float(np.max(np.abs(back.coeff - trial.coeff)))
    checks["transform_roundtrip"] = roundtrip
    checks["transform_pass"] = roundtrip <= 1e-10

    passed = all(bool(v) for k, v in checks.items() if k.endswith("_pass"))
    checks["all_pass"] = passed
    reports.write_report(outdir / "report.txt", meta, checks)
    sys.stdout.write(reports.render_report(meta, checks))
    if not passed:
        failed = sorted(k for k, v in checks.items() if k.endswith("_pass") and not v)
        payload = {"type": "VerificationFailed", "message": f"checks failed: {failed}"}
        print(f"ERROR {json.dumps(payload)}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


_COMMANDS = {
    "eigen": cmd_eigen,
    "lattice": cmd_lattice,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "manufactured": cmd_manufactured,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = cfgmod.load_config(args.config)
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg, outdir, args, seed)
    except SpecbeamError as exc:
        payload = {"type": type(exc).__name__, "message": str(exc)}
        print(f"ERROR {json.dumps(payload)}", file=sys.stderr)
        return EXIT_CONFIG if isinstance(exc, ConfigError) else EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
