"""Smooth compactly supported test functions for weak-form checks.

Plateau bumps are built from the C^3 polynomial smoothstep
S(t) = t^4 (35 - 84 t + 70 t^2 - 20 t^3); value 1 inside an inner radius,
0 outside an outer one, with analytic gradients throughout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conformal import as_complex

__all__ = ["smoothstep", "smoothstep_deriv", "RadialPlateau", "BoxPlateau",
           "TimeWindow", "SpaceTimeTest"]


def smoothstep(t):
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t ** 4 * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)))


def smoothstep_deriv(t):
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    tc = np.clip(t, 0.0, 1.0)
    d = tc ** 3 * (140.0 + tc * (-420.0 + tc * (420.0 - 140.0 * tc)))
    return np.where(inside, d, 0.0)


@dataclass(frozen=True)
class RadialPlateau:
    """phi = 1 on |x-c| <= r0, 0 beyond r1, smooth ramp between."""

    center: tuple[float, float] = (0.0, 0.0)
    r0: float = 1.5
    r1: float = 2.5

    def __post_init__(self):
        if not (0.0 <= self.r0 < self.r1):
            raise ValueError("need 0 <= r0 < r1")

    def _c(self) -> complex:
        return complex(self.center[0], self.center[1])

    def value(self, points) -> np.ndarray:
        z = np.atleast_1d(as_complex(points))
        r = np.abs(z - self._c())
        return smoothstep((self.r1 - r) / (self.r1 - self.r0))

    def gradient(self, points) -> np.ndarray:
        """Complex-valued gradient (g1 + i g2)."""
        z = np.atleast_1d(as_complex(points))
        d = z - self._c()
        r = np.abs(d)
        w = self.r1 - self.r0
        ds = smoothstep_deriv((self.r1 - r) / w) * (-1.0 / w)
        safe = np.where(r > 0, r, 1.0)
        return ds * d / safe

    @property
    def reach(self) -> float:
        return float(np.hypot(*self.center) + self.r1)


def _edge_profile(t, a0, a1, b1, b0):
    """1 on [a1, b1], 0 outside (a0, b0), smooth ramps on both shoulders."""
    up = smoothstep((t - a0) / (a1 - a0)) if a1 > a0 else np.ones_like(t)
    down = smoothstep((b0 - t) / (b0 - b1)) if b0 > b1 else np.ones_like(t)
    return up * down


def _edge_profile_deriv(t, a0, a1, b1, b0):
    up = smoothstep((t - a0) / (a1 - a0)) if a1 > a0 else np.ones_like(t)
    down = smoothstep((b0 - t) / (b0 - b1)) if b0 > b1 else np.ones_like(t)
    dup = smoothstep_deriv((t - a0) / (a1 - a0)) / (a1 - a0) if a1 > a0 else 0.0
    ddown = -smoothstep_deriv((b0 - t) / (b0 - b1)) / (b0 - b1) if b0 > b1 else 0.0
    return dup * down + up * ddown


@dataclass(frozen=True)
class BoxPlateau:
    """Tensor-product plateau: 1 on [x_in] x [y_in], 0 outside [x_out] x [y_out]."""

    x_outer: tuple[float, float]
    x_inner: tuple[float, float]
    y_outer: tuple[float, float]
    y_inner: tuple[float, float]

    def value(self, points) -> np.ndarray:
        z = np.atleast_1d(as_complex(points))
        fx = _edge_profile(z.real, self.x_outer[0], self.x_inner[0],
                           self.x_inner[1], self.x_outer[1])
        fy = _edge_profile(z.imag, self.y_outer[0], self.y_inner[0],
                           self.y_inner[1], self.y_outer[1])
        return fx * fy

    def gradient(self, points) -> np.ndarray:
        z = np.atleast_1d(as_complex(points))
        fx = _edge_profile(z.real, self.x_outer[0], self.x_inner[0],
                           self.x_inner[1], self.x_outer[1])
        fy = _edge_profile(z.imag, self.y_outer[0], self.y_inner[0],
                           self.y_inner[1], self.y_outer[1])
        dfx = _edge_profile_deriv(z.real, self.x_outer[0], self.x_inner[0],
                                  self.x_inner[1], self.x_outer[1])
        dfy = _edge_profile_deriv(z.imag, self.y_outer[0], self.y_inner[0],
                                  self.y_inner[1], self.y_outer[1])
        return dfx * fy + 1j * (fx * dfy)

    @property
    def reach(self) -> float:
        return float(max(np.abs(self.x_outer).max(), np.abs(self.y_outer).max()) * np.sqrt(2.0))


@dataclass(frozen=True)
class TimeWindow:
    """eta(t) = 1 up to t_hold, smooth decay to 0 at t_off, 0 afterwards."""

    t_hold: float
    t_off: float

    def __post_init__(self):
        if not (0.0 <= self.t_hold < self.t_off):
            raise ValueError("need 0 <= t_hold < t_off")

    def value(self, t):
        return smoothstep((self.t_off - np.asarray(t, dtype=float))
                          / (self.t_off - self.t_hold))

    def deriv(self, t):
        return -smoothstep_deriv((self.t_off - np.asarray(t, dtype=float))
                                 / (self.t_off - self.t_hold)) / (self.t_off - self.t_hold)


@dataclass(frozen=True)
class SpaceTimeTest:
    """Separable space-time test function eta(t) chi(x)."""

    space: object   # value / gradient
    window: TimeWindow

    def value(self, t, points):
        return float(self.window.value(t)) * self.space.value(points)

    def dt(self, t, points):
        return float(self.window.deriv(t)) * self.space.value(points)

    def gradient(self, t, points):
        return float(self.window.value(t)) * self.space.gradient(points)
