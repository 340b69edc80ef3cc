"""Command-line front end.

Subcommands:
    checks     run the built-in identity battery (fast self-test)
    simulate   advect the configured vorticity past the plate
    sweep      run the thick-obstacle family and the convergence metrics
    jump       tabulate the tangential jump along the plate
    export     sample a velocity field to CSV

Every subcommand exits 0 exactly when its assertions hold.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from .conformal import epsilon_map, segment_map
from .geometry import Side
from .jump import (distributional_curl_check, endpoint_coefficient,
                   jump_mass, pure_circulation_jump, sample_jump_table)
from .kernels import VelocityEvaluator, contour_circulation, harmonic_field
from .limits import CutoffField
from .harness import (RunConfig, config_digest, default_config, export_field,
                      load_config, run_experiment, write_rows)
from .testfuncs import RadialPlateau
from .transport import conservation_report, discretize, run

__all__ = ["main"]


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    updates = {}
    if getattr(args, "dt", None) is not None:
        updates["time_step"] = args.dt
    if getattr(args, "grid", None) is not None:
        updates["grid_spacing"] = args.grid
        updates["blob_radius"] = 2.0 * args.grid
    if getattr(args, "eps", None):
        updates["eps_values"] = tuple(args.eps)
    return dataclasses.replace(cfg, **updates) if updates else cfg


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else default_config()
    return _apply_overrides(cfg, args)


def _outdir(args) -> str:
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def _report(name: str, ok: bool, detail: str) -> bool:
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return ok


def cmd_checks(args) -> int:
    ok = True
    base = segment_map()
    rng = np.random.default_rng(7)

    z = rng.normal(size=200) + 1j * rng.normal(size=200)
    z = z[np.abs(z.imag) > 1e-3][:100]
    w = base.forward(z)
    err = float(np.max(np.abs(base.inverse(w) - z)))
    ok &= _report("map round trip", err < 1e-10, f"max gap {err:.2e}")

    pos = np.array([[0.3, 1.1], [-0.8, 0.9], [0.1, -1.4]])
    s = np.array([0.7, -0.4, 0.25])
    ev = VelocityEvaluator(base, pos, s, alpha=float(np.sum(s)) + 0.3,
                           blob_radius=0.05)
    theta = rng.uniform(0, 2 * np.pi, 400)
    wb = np.exp(1j * theta)
    from ._pairsum import induced_sum
    S = induced_sum(wb, ev.z_src, ev.strengths, ev.delta)
    S = S + ev.alpha * wb
    normal = np.abs(np.real(np.conj(1j * S) * wb))
    tmax = float(np.max(normal))
    ok &= _report("boundary tangency", tmax < 1e-10, f"max normal flow {tmax:.2e}")

    gam = pure_circulation_jump(np.array([0.0, 0.5]))
    evc = VelocityEvaluator(base, np.zeros((0, 2)), np.zeros(0), alpha=1.0)
    g0 = float(np.real(evc.side_velocity_batch([0.0], Side.DOWN)
                       - evc.side_velocity_batch([0.0], Side.UP))[0])
    jerr = abs(g0 - gam[0])
    ok &= _report("pure circulation jump", jerr < 1e-12,
                  f"density gap at center {jerr:.2e}")

    emap = epsilon_map(base, 0.1)
    cut = CutoffField(emap)
    zz = emap.inverse(np.exp(1j * rng.uniform(0, 2 * np.pi, 200))
                      * rng.uniform(1.0 + 1e-6, 1.2, 200))
    h = np.array([complex(*harmonic_field(emap, complex(p))) for p in zz])
    g = cut.gradient(zz)
    dot = float(np.max(np.abs(np.real(np.conj(h) * g))))
    ok &= _report("cutoff orthogonality", dot < 1e-11,
                  f"max circulation leak {dot:.2e}")

    circ = contour_circulation(lambda p: ev.velocity_z(p), radius=6.0)
    cerr = abs(circ - ev.alpha)
    ok &= _report("far circulation", cerr < 1e-3, f"contour vs alpha {cerr:.2e}")

    return 0 if ok else 1


def cmd_simulate(args) -> int:
    cfg = _load(args)
    if cfg.vorticity is None:
        print("config has no vorticity to advect", file=sys.stderr)
        return 1
    out = _outdir(args)
    digest = config_digest(cfg)
    base = segment_map()
    sample = discretize(cfg.vorticity, cfg.grid_spacing, cfg.blob_radius)
    traj = run(base, sample, cfg.gamma, cfg.t_end, cfg.time_step,
               snapshot_times=cfg.snapshot_times)
    rows = [{"time": float(t), "support_radius": float(r), "max_speed": float(v),
             "sum_strength": float(ss), "config_sha256": digest}
            for t, r, v, ss in zip(traj.times, traj.support_radius,
                                   traj.max_speed, traj.sum_strength)]
    write_rows(os.path.join(out, "run_summary.csv"), rows)
    final = traj.final_positions
    vrows = [{"x": float(p[0]), "y": float(p[1]), "strength": float(sv),
              "config_sha256": digest}
             for p, sv in zip(final, sample.strengths)]
    write_rows(os.path.join(out, "final_vortices.csv"), vrows)
    rep = conservation_report(traj)
    print(f"advected {sample.n} vortices to t={cfg.t_end}")
    print(f"strength drift {rep.sum_drift:.3e}, support "
          f"{rep.support_initial:.3f} -> {rep.support_final:.3f}, "
          f"envelope ok: {rep.envelope_ok}")
    return 0 if rep.ok else 1


def cmd_sweep(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    bundle = run_experiment(cfg)
    write_rows(os.path.join(out, "metrics.csv"), bundle.metric_rows())
    fit_rows = []
    for t, fit in sorted(bundle.l2_fits.items()):
        fit_rows.append({"metric": "l2_ball_error", "time": t,
                         "exponent": fit.exponent, "stderr": fit.stderr,
                         "config_sha256": bundle.digest})
    for t, fit in sorted(bundle.flux_fits.items()):
        fit_rows.append({"metric": "flux_l1", "time": t,
                         "exponent": fit.exponent, "stderr": fit.stderr,
                         "config_sha256": bundle.digest})
    write_rows(os.path.join(out, "fits.csv"), fit_rows)

    ok = all(rep.ok for rep in bundle.conservation.values())
    for t in bundle.sweep.snapshot_times:
        series = bundle.sweep.series("l2", t)
        mono = all(b < a for a, b in zip(series, series[1:]))
        ok &= mono
        print(f"t={t}: l2 errors {['%.4f' % v for v in series]} "
              f"({'decreasing' if mono else 'NOT decreasing'}), "
              f"{bundle.l2_fits[t]}")
    print(f"wrote metrics.csv and fits.csv to {out}")
    return 0 if ok else 1


def cmd_jump(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    digest = config_digest(cfg)
    base = segment_map()
    if cfg.vorticity is None:
        ev = VelocityEvaluator(base, np.zeros((0, 2)), np.zeros(0), cfg.gamma)
    else:
        sample = discretize(cfg.vorticity, cfg.grid_spacing, cfg.blob_radius)
        ev = VelocityEvaluator.for_sample(base, sample, cfg.gamma)
    table = sample_jump_table(ev, n=args.samples)
    rows = [{"s": a, "density": g, "near_tip": int(f), "config_sha256": digest}
            for a, g, f in table.rows()]
    write_rows(os.path.join(out, "jump_table.csv"), rows)
    mass = jump_mass(ev)
    c_right = endpoint_coefficient(ev, +1)
    c_left = endpoint_coefficient(ev, -1)
    print(f"jump mass {mass:.6f}, tip strength right {c_right[0]:.4f} "
          f"(slope {c_right[1]:.3f}), left {c_left[0]:.4f} (slope {c_left[1]:.3f})")
    if cfg.vorticity is None and cfg.gamma != 0.0:
        ref = cfg.gamma * pure_circulation_jump(table.s)
        err = float(np.max(np.abs(table.density - ref)))
        print(f"closed-form gap {err:.3e}")
        return 0 if err < 1e-10 * max(1.0, abs(cfg.gamma)) else 1
    phi = RadialPlateau(center=(0.0, 0.0), r0=2.5, r1=3.5)
    res, scale, _ = distributional_curl_check(ev, phi, n=96)
    print(f"curl identity residual {res:.3e} (scale {scale:.3e})")
    return 0 if res <= 0.02 * scale else 1


def cmd_export(args) -> int:
    cfg = load_config(args.config) if args.config else default_config()
    base = segment_map()
    cmap = epsilon_map(base, args.eps) if args.eps else base
    if cfg.vorticity is None:
        ev = VelocityEvaluator(cmap, np.zeros((0, 2)), np.zeros(0), cfg.gamma)
    else:
        sample = discretize(cfg.vorticity, cfg.grid_spacing, cfg.blob_radius)
        ev = VelocityEvaluator.for_sample(cmap, sample, cfg.gamma)
    n = export_field(args.out, ev, extent=args.extent, n=args.grid_n,
                     digest=config_digest(cfg))
    print(f"wrote {n} field samples to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="slitflow",
        description="vortex dynamics outside a flat plate and its thickened family")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("checks", help="run the built-in identity battery")
    p.set_defaults(func=cmd_checks)

    def common(p):
        p.add_argument("--config", help="JSON config file (defaults built in)")
        p.add_argument("--out", help="output directory", default=None)
        p.add_argument("--dt", type=float, help="override time step")
        p.add_argument("--grid", type=float,
                       help="override vortex grid spacing (blob radius follows)")

    p = sub.add_parser("simulate", help="advect vorticity past the plate")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="thick-obstacle family convergence study")
    common(p)
    p.add_argument("--eps", type=float, nargs="+",
                   help="override obstacle thickness ladder")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("jump", help="tabulate the plate jump density")
    common(p)
    p.add_argument("--samples", type=int, default=201)
    p.set_defaults(func=cmd_jump)

    p = sub.add_parser("export", help="sample a velocity field to CSV")
    p.add_argument("--config", help="JSON config file (defaults built in)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--eps", type=float, default=0.0,
                   help="obstacle thickness (0 = the plate itself)")
    p.add_argument("--grid-n", type=int, default=80, dest="grid_n")
    p.add_argument("--extent", type=float, default=3.0)
    p.set_defaults(func=cmd_export)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
