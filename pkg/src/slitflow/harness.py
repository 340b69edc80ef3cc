"""Experiment orchestration: validated run configuration, the matched
thick-obstacle/plate sweep, metric tables, and deterministic CSV output.

Everything downstream of a config is a pure function of it; each emitted
row carries the config's sha256 digest so tables can be traced back.
"""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .conformal import ConformalMap, SEGMENT_EXTERIOR, epsilon_map, segment_map
from .kernels import VelocityEvaluator
from .limits import (CutoffField, EpsilonSweep, ball_nodes, extension_consistency,
                     flux_norm, l2loc_velocity_error, transition_measure)
from .transport import (InitialVorticity, conservation_report, discretize, run)

__all__ = [
    "RunConfig",
    "parse_config",
    "load_config",
    "default_config",
    "config_digest",
    "ResultBundle",
    "run_experiment",
    "FitResult",
    "fit_exponent",
    "write_rows",
    "export_field",
]


@dataclass(frozen=True)
class RunConfig:
    """Validated experiment description.  Derived quantities (total
    circulation in particular) are always recomputed, never stored."""

    gamma: float = 0.5
    vorticity: Optional[InitialVorticity] = InitialVorticity()
    grid_spacing: float = 0.05
    blob_radius: float = 0.1
    time_step: float = 0.01
    t_end: float = 0.5
    eps_values: tuple = (0.2, 0.1, 0.05, 0.025)
    snapshot_times: tuple = (0.25, 0.5)
    ball_radius: float = 3.0

    def __post_init__(self):
        for name in ("grid_spacing", "blob_radius", "time_step", "t_end"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.blob_radius < self.grid_spacing:
            raise ValueError("blob_radius must be at least grid_spacing")
        if self.ball_radius <= 1.0:
            raise ValueError("ball_radius must exceed the plate half-length 1")
        ev = tuple(float(e) for e in self.eps_values)
        if any(e <= 0 for e in ev):
            raise ValueError("eps_values must be positive")
        if any(b >= a for a, b in zip(ev, ev[1:])):
            raise ValueError("eps_values must be strictly decreasing")
        object.__setattr__(self, "eps_values", ev)
        st = tuple(float(t) for t in self.snapshot_times)
        for t in st:
            if not (0.0 < t <= self.t_end + 1e-12):
                raise ValueError(f"snapshot time {t} outside (0, t_end]")
            k = round(t / self.time_step)
            if abs(k * self.time_step - t) > 1e-9:
                raise ValueError(f"snapshot time {t} not on the step grid")
        object.__setattr__(self, "snapshot_times", st)

    def as_dict(self) -> dict:
        v = self.vorticity
        return {
            "flow": {
                "gamma": self.gamma,
                "vorticity": None if v is None else {
                    "center": list(v.center), "radius": v.radius,
                    "amplitude": v.amplitude, "power": v.power,
                },
            },
            "discretization": {
                "grid_spacing": self.grid_spacing,
                "blob_radius": self.blob_radius,
                "time_step": self.time_step,
                "t_end": self.t_end,
            },
            "sweep": {
                "eps_values": list(self.eps_values),
                "snapshot_times": list(self.snapshot_times),
                "ball_radius": self.ball_radius,
            },
        }


def _take(mapping: dict, path: str, allowed: set) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        key = sorted(unknown)[0]
        raise ValueError(f"unknown config key '{key}' in {path}")


def parse_config(data: dict) -> RunConfig:
    """Build a RunConfig from a plain dict, rejecting unknown keys loudly."""
    if not isinstance(data, dict):
        raise ValueError("config root must be a mapping")
    _take(data, "top level", {"flow", "discretization", "sweep"})
    kwargs = {}

    flow = data.get("flow", {})
    _take(flow, "flow", {"gamma", "vorticity"})
    if "gamma" in flow:
        kwargs["gamma"] = float(flow["gamma"])
    if "vorticity" in flow:
        vort = flow["vorticity"]
        if vort is None:
            kwargs["vorticity"] = None
        else:
            _take(vort, "flow.vorticity", {"center", "radius", "amplitude", "power"})
            defaults = InitialVorticity()
            kwargs["vorticity"] = InitialVorticity(
                center=tuple(vort.get("center", defaults.center)),
                radius=float(vort.get("radius", defaults.radius)),
                amplitude=float(vort.get("amplitude", defaults.amplitude)),
                power=int(vort.get("power", defaults.power)),
            )

    disc = data.get("discretization", {})
    _take(disc, "discretization", {"grid_spacing", "blob_radius", "time_step", "t_end"})
    for src, dst in (("grid_spacing", "grid_spacing"), ("blob_radius", "blob_radius"),
                     ("time_step", "time_step"), ("t_end", "t_end")):
        if src in disc:
            kwargs[dst] = float(disc[src])
    if "grid_spacing" in disc and "blob_radius" not in disc:
        kwargs["blob_radius"] = 2.0 * float(disc["grid_spacing"])

    sweep = data.get("sweep", {})
    _take(sweep, "sweep", {"eps_values", "snapshot_times", "ball_radius"})
    if "eps_values" in sweep:
        kwargs["eps_values"] = tuple(float(e) for e in sweep["eps_values"])
    if "snapshot_times" in sweep:
        kwargs["snapshot_times"] = tuple(float(t) for t in sweep["snapshot_times"])
    if "ball_radius" in sweep:
        kwargs["ball_radius"] = float(sweep["ball_radius"])

    return RunConfig(**kwargs)


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(json.load(fh))


def default_config() -> RunConfig:
    return RunConfig()


def config_digest(cfg: RunConfig) -> str:
    blob = json.dumps(cfg.as_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# -- fitting -------------------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    exponent: float
    stderr: float
    prefactor: float

    def __str__(self):
        return f"exponent {self.exponent:.3f} +/- {self.stderr:.3f}"


def fit_exponent(scales: Sequence[float], values: Sequence[float]) -> FitResult:
    """Least-squares slope of log(value) against log(scale)."""
    x = np.log(np.asarray(scales, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    if x.size < 2:
        raise ValueError("need at least two points to fit a rate")
    if x.size == 2:
        slope = (y[1] - y[0]) / (x[1] - x[0])
        return FitResult(float(slope), float("nan"), float(np.exp(y[0] - slope * x[0])))
    coeffs, cov = np.polyfit(x, y, 1, cov=True)
    return FitResult(float(coeffs[0]), float(np.sqrt(cov[0, 0])),
                     float(np.exp(coeffs[1])))


# -- the sweep -----------------------------------------------------------------


@dataclass
class ResultBundle:
    config: RunConfig
    digest: str
    sweep: EpsilonSweep
    conservation: dict            # run label -> ConservationReport
    l2_fits: dict                 # snapshot time -> FitResult
    flux_fits: dict

    def metric_rows(self) -> list[dict]:
        rows = []
        sw = self.sweep
        for eps in sw.eps_values:
            for t in sw.snapshot_times:
                rows.append({
                    "eps": eps,
                    "time": t,
                    "l2_ball_error": sw.l2_errors[(eps, t)],
                    "flux_l1": sw.flux_norms[(eps, t)],
                    "extension_l2": sw.extension_gaps[(eps, t)],
                    "transition_area": sw.transition_measures[eps],
                    "config_sha256": self.digest,
                })
        return rows


def run_experiment(cfg: RunConfig, record_full: bool = False,
                   base: Optional[ConformalMap] = None) -> ResultBundle:
    """Advect the same initial vorticity outside each thickened obstacle and
    outside the plate, then measure how fast the thick flows approach the
    plate flow."""
    if cfg.vorticity is None:
        raise ValueError("run_experiment needs an initial vorticity")
    if base is None:
        base = segment_map()
    digest = config_digest(cfg)
    sample = discretize(cfg.vorticity, cfg.grid_spacing, cfg.blob_radius)

    limit_traj = run(base, sample, cfg.gamma, cfg.t_end, cfg.time_step,
                     snapshot_times=cfg.snapshot_times, record_full=record_full)
    conservation = {"limit": conservation_report(limit_traj)}

    trajectories = {}
    for eps in cfg.eps_values:
        emap = epsilon_map(base, eps)
        traj = run(emap, sample, cfg.gamma, cfg.t_end, cfg.time_step,
                   snapshot_times=cfg.snapshot_times, record_full=record_full)
        trajectories[eps] = traj
        conservation[f"eps={eps!r}"] = conservation_report(traj)

    # metrics are always measured at t = 0 as well: the initial fields already
    # differ across the family, and that gap anchors every convergence series
    times = (0.0,) + (cfg.snapshot_times if cfg.snapshot_times else (cfg.t_end,))
    nodes = ball_nodes(cfg.ball_radius)
    l2_errors, fluxes, gaps, areas = {}, {}, {}, {}
    for eps in cfg.eps_values:
        emap = epsilon_map(base, eps)
        cutoff = CutoffField(emap)
        areas[eps] = transition_measure(emap)
        for t in times:
            ev_eps = VelocityEvaluator.for_sample(
                emap, sample.moved(trajectories[eps].snapshots[t]), cfg.gamma)
            ev_lim = VelocityEvaluator.for_sample(
                base, sample.moved(limit_traj.snapshots[t]), cfg.gamma)
            l2_errors[(eps, t)] = l2loc_velocity_error(
                ev_eps, cutoff, ev_lim, cfg.ball_radius, nodes=nodes)
            fluxes[(eps, t)] = flux_norm(ev_eps, cutoff)
            gaps[(eps, t)] = extension_consistency(ev_eps, cutoff)

    sweep = EpsilonSweep(
        eps_values=tuple(cfg.eps_values), trajectories=trajectories,
        limit_trajectory=limit_traj, snapshot_times=tuple(times),
        l2_errors=l2_errors, flux_norms=fluxes, extension_gaps=gaps,
        transition_measures=areas,
    )
    l2_fits = {t: fit_exponent(cfg.eps_values, sweep.series("l2", t)) for t in times}
    flux_fits = {t: fit_exponent(cfg.eps_values, sweep.series("flux", t)) for t in times}
    return ResultBundle(cfg, digest, sweep, conservation, l2_fits, flux_fits)


# -- output --------------------------------------------------------------------


def _format_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (np.floating,)):
        return repr(float(v))
    return str(v)


def write_rows(path, rows: Sequence[dict]) -> None:
    """CSV with repr-formatted floats: identical runs give identical bytes."""
    if not rows:
        raise ValueError("refusing to write an empty table")
    header = list(rows[0].keys())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(row[k]) for k in header])


def export_field(path, ev: VelocityEvaluator, extent: float = 3.0,
                 n: int = 80, digest: str = "") -> int:
    """Sample the velocity on a midpoint grid and write it as CSV.

    Rows inside the obstacle keep NaN velocities and are flagged; the
    on_cut flag marks points on the plate segment itself (never hit by the
    midpoint grid, but recorded so downstream tools can filter).  Returns
    the number of rows written.
    """
    h = 2.0 * extent / n
    coords = -extent + (np.arange(n) + 0.5) * h
    xx, yy = np.meshgrid(coords, coords, indexing="ij")
    z = (xx + 1j * yy).ravel()
    on_cut = (np.abs(z.imag) < 1e-14) & (np.abs(z.real) <= 1.0)
    if ev.cmap.domain_tag == SEGMENT_EXTERIOR:
        inside = on_cut.copy()
    else:
        inside = np.abs(ev.cmap.forward(z)) < 1.0
    u = np.full(z.shape, np.nan + 0j)
    ok = ~(inside | on_cut)
    u[ok] = ev.velocity_z(z[ok])
    rows = []
    for i in range(z.size):
        rows.append({
            "x": float(z[i].real), "y": float(z[i].imag),
            "ux": float(u[i].real), "uy": float(u[i].imag),
            "on_cut": int(on_cut[i]), "inside_obstacle": int(inside[i]),
            "config_sha256": digest,
        })
    write_rows(path, rows)
    return len(rows)
