"""The shrinking-obstacle limit: cutoff fields, transition-zone integrals,
and the metrics that compare a thick-obstacle flow with the plate flow.

The cutoff is Phi((|T_eps(x)| - 1)/eps) with Phi a C-infinity smoothstep
rising across [1, 2]; it vanishes on the obstacle and equals 1 outside the
mapped annulus 1 <= |T_eps| <= 1 + 2 eps.  Its gradient is parallel to the
outward normal, hence exactly orthogonal to the circulation field.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import simpson

from .conformal import ConformalMap, epsilon_map, as_complex
from .kernels import VelocityEvaluator
from .transport import Trajectory

__all__ = [
    "cutoff_profile",
    "cutoff_profile_deriv",
    "CutoffField",
    "cutoff_eval",
    "cutoff_grad",
    "transition_measure",
    "flux_norm",
    "extension_consistency",
    "l2loc_velocity_error",
    "ball_nodes",
    "MapFamilyRow",
    "map_family_report",
    "weak_residual",
    "moment_rate_proxy",
    "EpsilonSweep",
]

TWO_PI = 2.0 * np.pi


def _psi(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0.0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _psi_deriv(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0.0
    out[pos] = np.exp(-1.0 / t[pos]) / (t[pos] * t[pos])
    return out


def cutoff_profile(s):
    """C-infinity ramp: 0 for s <= 1, 1 for s >= 2."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    a = _psi(s - 1.0)
    b = _psi(2.0 - s)
    den = a + b
    den[den == 0.0] = 1.0  # only happens where a = b = 0, i.e. s <= 1
    out = a / den
    out[s >= 2.0] = 1.0
    out[s <= 1.0] = 0.0
    return out


def cutoff_profile_deriv(s):
    s = np.atleast_1d(np.asarray(s, dtype=float))
    a = _psi(s - 1.0)
    b = _psi(2.0 - s)
    da = _psi_deriv(s - 1.0)
    db = _psi_deriv(2.0 - s)
    den = (a + b) ** 2
    den[den == 0.0] = 1.0
    out = (da * b + a * db) / den
    out[(s <= 1.0) | (s >= 2.0)] = 0.0
    return out


@dataclass(frozen=True)
class CutoffField:
    """Phi((|T_eps| - 1)/eps) for a thick-obstacle map (eps > 0 required)."""

    cmap: ConformalMap

    def __post_init__(self):
        if self.cmap.eps <= 0:
            raise ValueError("cutoff needs a thick-obstacle map (eps > 0)")

    @property
    def eps(self) -> float:
        return self.cmap.eps

    def value(self, points) -> np.ndarray:
        w = self.cmap.forward(np.atleast_1d(as_complex(points)))
        return self.value_from_mapped(w)

    def value_from_mapped(self, w) -> np.ndarray:
        m = np.abs(np.atleast_1d(np.asarray(w, dtype=complex)))
        return cutoff_profile((m - 1.0) / self.eps)

    def gradient(self, points) -> np.ndarray:
        """Complex gradient (g1 + i g2); supported on the transition annulus."""
        z = np.atleast_1d(as_complex(points))
        w = self.cmap.forward(z)
        dT = self.cmap.dforward(z)
        return self._grad(w, dT)

    def gradient_from_mapped(self, w) -> np.ndarray:
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        dT = 1.0 / self.cmap.dinverse(w)
        return self._grad(w, dT)

    def _grad(self, w, dT):
        m = np.abs(w)
        scale = cutoff_profile_deriv((m - 1.0) / self.eps) / (self.eps * m)
        return scale * (np.conj(dT) * w)


def cutoff_eval(cutoff: CutoffField, x) -> float:
    return float(cutoff.value(x)[0])


def cutoff_grad(cutoff: CutoffField, x) -> np.ndarray:
    g = complex(cutoff.gradient(x)[0])
    return np.array([g.real, g.imag])


# -- quadrature over the transition annulus, pulled back to the disk plane ----


def annulus_nodes(cmap: ConformalMap, n_r: int = 24, n_t: int = 256):
    """Nodes/weights integrating plane integrals over {1 <= |T_eps| <= 1+2eps}.

    Returns (w, weight) with w mapped-plane nodes; for any plane density f,
    sum(f(inverse(w)) * weight) approximates its integral over the annulus
    preimage.  weight already carries the inverse-map area factor.
    """
    eps = cmap.eps
    if eps <= 0:
        raise ValueError("annulus quadrature needs eps > 0")
    gl_x, gl_w = np.polynomial.legendre.leggauss(n_r)
    r = 1.0 + eps * (gl_x + 1.0)            # [1, 1 + 2 eps]
    wr = eps * gl_w
    theta = (np.arange(n_t) + 0.5) * (TWO_PI / n_t)
    w = (r[:, None] * np.exp(1j * theta[None, :])).ravel()
    area = np.abs(cmap.dinverse(w)) ** 2
    weight = (r[:, None] * wr[:, None] * np.full((1, n_t), TWO_PI / n_t)).ravel() * area
    return w, weight


def transition_measure(cmap: ConformalMap, n_r: int = 24, n_t: int = 256) -> float:
    """Plane area of the cutoff transition zone; scales like eps."""
    _, weight = annulus_nodes(cmap, n_r, n_t)
    return float(np.sum(weight))


def flux_norm(ev: VelocityEvaluator, cutoff: CutoffField,
              n_r: int = 24, n_t: int = 256) -> float:
    """L1 norm of u . grad(Phi), the flow leaking across the cutoff ramp."""
    w, weight = annulus_nodes(cutoff.cmap, n_r, n_t)
    u = ev.velocity_from_mapped(w)
    g = cutoff.gradient_from_mapped(w)
    dots = np.real(np.conj(u) * g)
    return float(np.sum(np.abs(dots) * weight))


def extension_consistency(ev: VelocityEvaluator, cutoff: CutoffField,
                          n_r: int = 24, n_t: int = 256) -> float:
    """L2 gap between the velocity and its cutoff truncation."""
    w, weight = annulus_nodes(cutoff.cmap, n_r, n_t)
    u = ev.velocity_from_mapped(w)
    phi = cutoff.value_from_mapped(w)
    return float(np.sqrt(np.sum((1.0 - phi) ** 2 * np.abs(u) ** 2 * weight)))


# -- velocity comparison on a fixed ball --------------------------------------

_DEFAULT_PANELS = (0.0, 0.7, 0.9, 0.98, 1.03, 1.12, 1.35, 1.8, 3.0)


def ball_nodes(radius: float = 3.0, panels: Sequence[float] = _DEFAULT_PANELS,
               n_per_panel: int = 24, n_t: int = 384):
    """Polar quadrature nodes on B(0, radius), radially clustered near the
    unit ring where plate-flow fields are roughest.  Angles avoid both axes.
    """
    panels = [p * radius / panels[-1] for p in panels]
    gl_x, gl_w = np.polynomial.legendre.leggauss(n_per_panel)
    rs, ws = [], []
    for a, b in zip(panels[:-1], panels[1:]):
        rs.append(0.5 * (b - a) * (gl_x + 1.0) + a)
        ws.append(0.5 * (b - a) * gl_w)
    r = np.concatenate(rs)
    wr = np.concatenate(ws)
    theta = (np.arange(n_t) + 0.5) * (TWO_PI / n_t)
    z = (r[:, None] * np.exp(1j * theta[None, :])).ravel()
    weight = (r * wr)[:, None] * np.full((1, n_t), TWO_PI / n_t)
    return z, weight.ravel()


def l2loc_velocity_error(ev_eps: VelocityEvaluator, cutoff: CutoffField,
                         ev_limit: VelocityEvaluator, radius: float = 3.0,
                         nodes=None) -> float:
    """|| Phi u_eps - u ||_{L2(ball)} with the truncated field extended by 0.

    The two evaluators must describe the same vortex data at the same time.
    """
    if nodes is None:
        nodes = ball_nodes(radius)
    z, weight = nodes
    w_eps = cutoff.cmap.forward(z)
    phi = cutoff.value_from_mapped(w_eps)
    u_eps = np.zeros_like(z)
    live = phi > 0.0
    if np.any(live):
        u_eps[live] = ev_eps.velocity_from_mapped(w_eps[live])
    diff = phi * u_eps - ev_limit.velocity_z(z)
    return float(np.sqrt(np.sum(np.abs(diff) ** 2 * weight)))


# -- the family of maps itself -------------------------------------------------


@dataclass(frozen=True)
class MapFamilyRow:
    eps: float
    sup_gap: float            # sup over sample of |T_eps - T|
    sup_gap_formula: float    # eps/(1+eps) * sup |T| on the same sample
    inv_jac_sup: float        # sup of the inverse-map area factor
    l3_gap: float             # || DT_eps - DT ||_L3 on the masked ball
    far_deriv_sup: float      # sup of |T_eps'| on far-field samples


def _masked_ball_samples(base: ConformalMap, eps: float, radius: float):
    z, weight = ball_nodes(radius, n_per_panel=20, n_t=256)
    w = base.forward(z)
    keep = np.abs(w) > (1.0 + eps) * (1.0 + 1e-12)
    return z[keep], weight[keep], w[keep]


def map_family_report(base: ConformalMap, eps_values: Sequence[float],
                      radius: float = 5.0) -> list[MapFamilyRow]:
    """Per-eps uniformity checks for the shrinking-obstacle family."""
    rows = []
    far = np.concatenate([r * np.exp(1j * (np.arange(32) + 0.5) * (TWO_PI / 32))
                          for r in np.geomspace(10.0, 100.0, 7)])
    for eps in eps_values:
        emap = epsilon_map(base, eps)
        z, _, w = _masked_ball_samples(base, eps, radius)
        gap = np.abs(emap.forward(z) - w)
        sup_gap = float(np.max(gap))
        formula = eps / (1.0 + eps) * float(np.max(np.abs(w)))
        rr = np.geomspace(1.0, 8.0, 64)
        th = (np.arange(128) + 0.5) * (TWO_PI / 128)
        grid = (rr[:, None] * np.exp(1j * th[None, :])).ravel()
        inv_jac = float(np.max(np.abs(emap.dinverse(grid)) ** 2))
        zb, wb, _ = _masked_ball_samples(base, eps, radius)
        db = np.abs(emap.dforward(zb) - base.dforward(zb)) * np.sqrt(2.0)
        l3 = float(np.sum(db ** 3 * wb) ** (1.0 / 3.0))
        far_sup = float(np.max(np.abs(emap.dforward(far))))
        rows.append(MapFamilyRow(float(eps), sup_gap, formula, inv_jac, l3, far_sup))
    return rows


# -- weak form of the transport equation --------------------------------------


def _bump_integral(omega0, phi0, n_r: int = 96, n_t: int = 192) -> float:
    """Dense quadrature of omega0 against a spatial slice of a test function."""
    gl_x, gl_w = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * omega0.radius * (gl_x + 1.0)
    wr = 0.5 * omega0.radius * gl_w
    theta = (np.arange(n_t) + 0.5) * (TWO_PI / n_t)
    c = complex(omega0.center[0], omega0.center[1])
    z = c + (r[:, None] * np.exp(1j * theta[None, :]))
    vals = omega0.value(z.ravel()) * phi0(z.ravel())
    weight = ((r * wr)[:, None] * np.full((1, n_t), TWO_PI / n_t)).ravel()
    return float(np.sum(vals * weight))


def weak_residual(traj: Trajectory, test, omega0=None) -> float:
    """Residual of the weak vorticity-transport identity along a recorded run.

    Integrates sum_j s_j (phi_t + grad phi . u_j) over time (composite
    Simpson on the step grid) and adds the initial pairing; the latter uses
    a dense quadrature of omega0 when given, otherwise the particle sum.
    The test function must vanish before the run ends.
    """
    if traj.full_positions is None or traj.full_velocities is None:
        raise ValueError("weak_residual needs a run recorded with record_full=True")
    t_end = traj.times[-1]
    if float(test.window.value(t_end)) != 0.0:
        raise ValueError("test function must vanish at the final time")
    s = traj.sample.strengths
    a = np.empty(traj.times.shape[0])
    for k, t in enumerate(traj.times):
        z = as_complex(traj.full_positions[k])
        u = as_complex(traj.full_velocities[k])
        g = test.gradient(t, z)
        a[k] = float(np.sum(s * (test.dt(t, z) + np.real(np.conj(g) * u))))
    integral = float(simpson(a, dx=traj.dt))
    z0 = as_complex(traj.full_positions[0])
    if omega0 is None:
        initial = float(np.sum(s * test.value(0.0, z0)))
    else:
        initial = _bump_integral(omega0, lambda pts: test.value(0.0, pts))
    return integral + initial


def moment_rate_proxy(traj: Trajectory, chi, cutoff: Optional[CutoffField] = None) -> float:
    """Max over time of |d/dt of the truncated chi-moment of vorticity|.

    Uniform boundedness of this proxy along the eps sweep is the sanity
    check that time derivatives stay tame as the obstacle shrinks.
    """
    if traj.full_positions is None:
        raise ValueError("moment_rate_proxy needs record_full=True")
    s = traj.sample.strengths
    worst = 0.0
    for k in range(traj.times.shape[0]):
        z = as_complex(traj.full_positions[k])
        u = as_complex(traj.full_velocities[k])
        g = chi.gradient(z)
        if cutoff is not None:
            phi = cutoff.value(z)
            g = phi * g + chi.value(z) * cutoff.gradient(z)
        val = float(np.sum(s * np.real(np.conj(g) * u)))
        worst = max(worst, abs(val))
    return worst


@dataclass
class EpsilonSweep:
    """Results of matched thick-obstacle runs plus the plate-limit run."""

    eps_values: tuple
    trajectories: dict          # eps -> Trajectory
    limit_trajectory: Trajectory
    snapshot_times: tuple
    l2_errors: dict             # (eps, t) -> float
    flux_norms: dict            # (eps, t) -> float
    extension_gaps: dict        # (eps, t) -> float
    transition_measures: dict   # eps -> float

    def series(self, table: str, t: float) -> list[float]:
        src = {"l2": self.l2_errors, "flux": self.flux_norms,
               "extension": self.extension_gaps}[table]
        return [src[(e, t)] for e in self.eps_values]
