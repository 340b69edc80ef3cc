"""Planar open arcs and the canonical flat plate.

An obstacle is an injective C^2 arc in the plane; the canonical one is the
straight plate from (-1, 0) to (1, 0).  Points just off an arc carry a side
label ("up" is the side the rotated tangent points into).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

__all__ = [
    "Side",
    "JordanArc",
    "SidePoint",
    "segment_arc",
    "arc_from_config",
    "tangent_normal",
    "arclength",
]

_INJECTIVITY_SAMPLES = 1024


class Side(str, enum.Enum):
    UP = "up"
    DOWN = "down"

    @classmethod
    def parse(cls, value) -> "Side":
        if isinstance(value, Side):
            return value
        if isinstance(value, str) and value.lower() in ("up", "down"):
            return cls(value.lower())
        raise ValueError(f"side must be 'up' or 'down', got {value!r}")


def _rot90(v: np.ndarray) -> np.ndarray:
    # counterclockwise quarter turn
    return np.array([-v[1], v[0]], dtype=float)


@dataclass(frozen=True)
class JordanArc:
    """Injective arc t in [0,1] -> R^2 with an explicit derivative.

    Injectivity and a nonvanishing derivative are checked on a fixed sample
    grid at construction; the check is a guard, not a proof.
    """

    param: Callable[[float], np.ndarray]
    deriv: Callable[[float], np.ndarray]
    name: str = "arc"
    _validated: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        ts = np.linspace(0.0, 1.0, _INJECTIVITY_SAMPLES)
        pts = np.array([self.param(t) for t in ts], dtype=float)
        if pts.shape != (_INJECTIVITY_SAMPLES, 2):
            raise ValueError("arc parametrization must return 2-vectors")
        if not np.all(np.isfinite(pts)):
            raise ValueError("arc parametrization produced non-finite points")
        n = _INJECTIVITY_SAMPLES
        # a vanishing derivative is diagnosed first: it also makes samples
        # cluster, which would otherwise masquerade as a self-crossing
        if self.deriv is not None:
            for t in ts[:: n // 32]:
                dv = np.asarray(self.deriv(t), dtype=float)
                if np.hypot(dv[0], dv[1]) < 1e-12:
                    raise ValueError("singular parametrization: zero derivative")
        # pairwise separation: nonadjacent samples must stay apart
        d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
        np.fill_diagonal(d2, np.inf)
        idx = np.arange(n - 1)
        adj = d2[idx, idx + 1].copy()
        d2[idx, idx + 1] = np.inf
        d2[idx + 1, idx] = np.inf
        scale = max(np.max(adj), 1e-30)
        if np.min(d2) < 0.25 * scale:
            raise ValueError("arc fails the sampled injectivity check")

    def point(self, t: float) -> np.ndarray:
        return np.asarray(self.param(float(t)), dtype=float)

    @property
    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return self.point(0.0), self.point(1.0)


def segment_arc() -> JordanArc:
    """The flat plate: t -> (2t - 1, 0), endpoints (-1,0) and (1,0)."""
    return JordanArc(
        param=lambda t: np.array([2.0 * t - 1.0, 0.0]),
        deriv=lambda t: np.array([2.0, 0.0]),
        name="segment",
    )


def _sampled_arc(points: np.ndarray) -> JordanArc:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("sampled arc needs an (n, 2) array with n >= 2")
    n = pts.shape[0]
    knots = np.linspace(0.0, 1.0, n)

    def param(t: float) -> np.ndarray:
        t = min(max(float(t), 0.0), 1.0)
        i = min(int(t * (n - 1)), n - 2)
        w = t * (n - 1) - i
        return (1.0 - w) * pts[i] + w * pts[i + 1]

    def deriv(t: float) -> np.ndarray:
        t = min(max(float(t), 0.0), 1.0)
        i = min(int(t * (n - 1)), n - 2)
        return (pts[i + 1] - pts[i]) * (n - 1)

    del knots
    return JordanArc(param=param, deriv=deriv, name="sampled")


def arc_from_config(cfg: dict) -> JordanArc:
    """Build an arc from {"kind": "segment"} or {"kind": "sampled", "points": [...]}."""
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ValueError("arc config must be a dict with a 'kind' key")
    kind = cfg["kind"]
    extra = set(cfg) - {"kind", "points"}
    if extra:
        raise ValueError(f"unknown arc config keys: {sorted(extra)}")
    if kind == "segment":
        if "points" in cfg:
            raise ValueError("'segment' arc takes no points")
        return segment_arc()
    if kind == "sampled":
        if "points" not in cfg:
            raise ValueError("'sampled' arc requires points")
        return _sampled_arc(np.asarray(cfg["points"], dtype=float))
    raise ValueError(f"unknown arc kind {kind!r}")


def tangent_normal(arc: JordanArc, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Unit tangent and unit normal at parameter t.

    The normal is the tangent rotated by +90 degrees; the side it points
    into is the "up" side of the arc.
    """
    dv = np.asarray(arc.deriv(float(t)), dtype=float)
    speed = np.hypot(dv[0], dv[1])
    if speed < 1e-12:
        raise ValueError("singular parametrization: zero derivative")
    tau = dv / speed
    return tau, _rot90(tau)


def arclength(arc: JordanArc, t0: float = 0.0, t1: float = 1.0) -> float:
    """Arc length between parameters t0 <= t1 by adaptive quadrature."""
    t0, t1 = float(t0), float(t1)
    if not (0.0 <= t0 <= t1 <= 1.0):
        raise ValueError("need 0 <= t0 <= t1 <= 1")
    if t0 == t1:
        return 0.0
    val, _ = quad(lambda t: float(np.hypot(*arc.deriv(t))), t0, t1, limit=200)
    return float(val)


@dataclass(frozen=True)
class SidePoint:
    """A point at offset rho from the arc on a given side.

    s is the arc parameter in [0, 1]; rho > 0 is the offset along the
    (side-signed) unit normal.
    """

    s: float
    side: Side
    rho: float

    def __post_init__(self):
        object.__setattr__(self, "side", Side.parse(self.side))
        if not (0.0 <= self.s <= 1.0):
            raise ValueError("s must lie in [0, 1]")
        if self.rho <= 0:
            raise ValueError("rho must be positive")

    def position(self, arc: JordanArc) -> np.ndarray:
        _, nrm = tangent_normal(arc, self.s)
        sgn = 1.0 if self.side is Side.UP else -1.0
        return arc.point(self.s) + sgn * self.rho * nrm
