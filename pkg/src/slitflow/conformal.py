"""Conformal maps from obstacle exteriors onto the exterior of the unit disk.

Conventions, shared by every map here:

* the plane is identified with C; a point (x1, x2) is the complex x1 + i*x2,
* ``forward`` sends the fluid domain into {|w| >= 1}, obstacle boundary to
  the unit circle, infinity to infinity with real positive derivative there,
* ``inverse`` undoes it, ``dforward``/``dinverse`` are complex derivatives.

The flat-plate map is w = x + sqrt(x^2 - 1) with the principal square root
(argument in (-pi, pi]); the branch sign is + on {Re x > 0} and on the
positive imaginary axis, - on {Re x < 0} and on the negative imaginary axis.
That choice glues continuously across the imaginary axis and sends the slit
exterior onto {|w| > 1}.  Shrinking obstacles are modelled by dividing a
base map by (1 + eps): the boundary becomes the preimage of the circle of
radius 1 + eps (for the plate, an ellipse with semi-axes
((1+eps) + 1/(1+eps))/2 and ((1+eps) - 1/(1+eps))/2).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import Side

__all__ = [
    "ConformalMap",
    "BranchedPoint",
    "joukowski",
    "joukowski_deriv",
    "segment_exterior_map",
    "segment_map_derivative",
    "side_limit_map",
    "side_limit_derivative",
    "segment_map",
    "disk_identity_map",
    "epsilon_map",
    "map_from_config",
    "register_map_provider",
    "as_complex",
    "as_point",
]

CUT_TOL = 1e-12

SEGMENT_EXTERIOR = "segment_exterior"
DISK_EXTERIOR = "unit_disk_exterior"
EPSILON_OBSTACLE = "epsilon_obstacle"


def as_complex(x) -> np.ndarray | complex:
    """Accept (..., 2) float arrays, 2-sequences, or complex; return complex."""
    if isinstance(x, (complex, float, int, np.complexfloating, np.floating, np.integer)):
        return complex(x)
    a = np.asarray(x)
    if np.iscomplexobj(a):
        return a
    if a.ndim >= 1 and a.shape[-1] == 2:
        return a[..., 0] + 1j * a[..., 1]
    raise ValueError(f"cannot interpret shape {a.shape} as plane points")


def as_point(z) -> np.ndarray:
    z = np.asarray(z)
    return np.stack([z.real, z.imag], axis=-1).astype(float)


@dataclass(frozen=True)
class BranchedPoint:
    """Image of a point under the plate map, tagged with the branch used."""

    value: complex
    branch: str  # "+" or "-"


def joukowski(z):
    """w -> (w + 1/w)/2; collapses the unit circle onto the plate [-1, 1]."""
    z = np.asarray(z, dtype=complex) if not np.isscalar(z) else complex(z)
    if np.any(np.asarray(z) == 0):
        raise ZeroDivisionError("joukowski is singular at 0")
    return 0.5 * (z + 1.0 / z)


def joukowski_deriv(z):
    z = np.asarray(z, dtype=complex) if not np.isscalar(z) else complex(z)
    if np.any(np.asarray(z) == 0):
        raise ZeroDivisionError("joukowski is singular at 0")
    return 0.5 * (1.0 - 1.0 / (z * z))


def _branch_plus_mask(z: np.ndarray) -> np.ndarray:
    re = z.real
    return (re > 0) | ((re == 0) & (z.imag > 0))


def _on_cut_mask(z: np.ndarray, tol: float = CUT_TOL) -> np.ndarray:
    return (np.abs(z.imag) <= tol) & (np.abs(z.real) <= 1.0 + tol)


def _principal_root(z):
    """sqrt(z^2 - 1) with the branch cut pinned to arg = pi.

    For purely imaginary z the argument z^2 - 1 is a negative real; a signed
    zero in its imaginary part (e.g. from (-1j)**2) would silently pick the
    arg = -pi side, so exact zeros are normalized to +0 before the sqrt.
    """
    q = z * z - 1.0
    q = np.where(q.imag == 0.0, q.real + 0.0j, q)
    return np.sqrt(q)


def _slit_forward(z):
    """Vectorized plate map; raises on points within CUT_TOL of the plate."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if np.any(_on_cut_mask(z)):
        raise ValueError("point lies on the cut; use side_limit_map for sided values")
    root = _principal_root(z)
    sign = np.where(_branch_plus_mask(z), 1.0, -1.0)
    w = z + sign * root
    return w[0] if scalar else w


def _slit_dforward(z):
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if np.any(_on_cut_mask(z)):
        raise ValueError("point lies on the cut; use side_limit_derivative")
    root = _principal_root(z)
    sign = np.where(_branch_plus_mask(z), 1.0, -1.0)
    d = 1.0 + sign * z / root
    return d[0] if scalar else d


def segment_exterior_map(x) -> BranchedPoint:
    """Map one plate-exterior point, reporting which branch applied.

    x = 1.25 -> 2 on branch "+"; x = 0.5i lands at i(1 + sqrt(5))/2.
    """
    z = complex(as_complex(x))
    w = _slit_forward(z)
    branch = "+" if bool(_branch_plus_mask(np.atleast_1d(np.asarray(z)))[0]) else "-"
    if abs(w) < 1.0 - 1e-12:
        raise ValueError("branch selection produced an interior value")
    return BranchedPoint(value=complex(w), branch=branch)


def _complex_to_jacobian(d: complex) -> np.ndarray:
    # holomorphic derivative a+ib as the real 2x2 matrix [[a,-b],[b,a]]
    a, b = d.real, d.imag
    return np.array([[a, -b], [b, a]], dtype=float)


def segment_map_derivative(x) -> np.ndarray:
    """Real 2x2 Jacobian of the plate map at an off-plate point."""
    return _complex_to_jacobian(complex(_slit_dforward(complex(as_complex(x)))))


def side_limit_map(s: float, side) -> complex:
    """Boundary value on the open plate from above or below.

    Up-side of s is s + i sqrt(1-s^2); the two sides cover the unit circle.
    """
    side = Side.parse(side)
    s = float(s)
    if abs(abs(s) - 1.0) <= CUT_TOL:
        raise ValueError("endpoint: side limits are defined on the open plate")
    if abs(s) > 1.0:
        raise ValueError("s must lie in (-1, 1)")
    root = np.sqrt(1.0 - s * s)
    return complex(s, root if side is Side.UP else -root)


def side_limit_derivative(s: float, side) -> complex:
    """One-sided limit of the plate-map derivative on the open plate.

    From above it is 1 - i s/sqrt(1-s^2); from below the conjugate.
    """
    side = Side.parse(side)
    s = float(s)
    if abs(abs(s) - 1.0) <= CUT_TOL:
        raise ValueError("endpoint: side limits are defined on the open plate")
    if abs(s) > 1.0:
        raise ValueError("s must lie in (-1, 1)")
    q = s / np.sqrt(1.0 - s * s)
    return complex(1.0, -q) if side is Side.UP else complex(1.0, q)


@dataclass(frozen=True)
class ConformalMap:
    """Exterior uniformizer packaged with its derivatives and domain tag."""

    forward: Callable
    inverse: Callable
    dforward: Callable
    dinverse: Callable
    domain_tag: str
    eps: float = 0.0
    side_value: Optional[Callable] = None
    side_derivative: Optional[Callable] = None

    def jacobian(self, x) -> np.ndarray:
        return _complex_to_jacobian(complex(self.dforward(as_complex(x))))

    def jac_det(self, x) -> float:
        d = complex(self.dforward(as_complex(x)))
        return float(d.real * d.real + d.imag * d.imag)

    def boundary_point(self, theta):
        """Physical boundary point whose image is exp(i theta)."""
        theta = np.asarray(theta, dtype=float)
        return self.inverse(np.exp(1j * theta))

    @property
    def has_sides(self) -> bool:
        return self.side_value is not None


def segment_map() -> ConformalMap:
    return ConformalMap(
        forward=_slit_forward,
        inverse=joukowski,
        dforward=_slit_dforward,
        dinverse=joukowski_deriv,
        domain_tag=SEGMENT_EXTERIOR,
        eps=0.0,
        side_value=side_limit_map,
        side_derivative=side_limit_derivative,
    )


def disk_identity_map() -> ConformalMap:
    ident = lambda z: np.asarray(z, dtype=complex) if not np.isscalar(z) else complex(z)
    one = lambda z: np.ones_like(np.asarray(z, dtype=complex)) if not np.isscalar(z) else 1.0 + 0j
    return ConformalMap(
        forward=ident,
        inverse=ident,
        dforward=one,
        dinverse=one,
        domain_tag=DISK_EXTERIOR,
        eps=0.0,
    )


def epsilon_map(base: ConformalMap, eps: float) -> ConformalMap:
    """Thickened obstacle: forward map divided by (1 + eps).

    The new boundary is the base-map preimage of the circle |w| = 1 + eps.
    """
    eps = float(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    r = 1.0 + eps

    return ConformalMap(
        forward=lambda z: base.forward(z) / r,
        inverse=lambda w: base.inverse(np.asarray(w, dtype=complex) * r)
        if not np.isscalar(w)
        else base.inverse(complex(w) * r),
        dforward=lambda z: base.dforward(z) / r,
        dinverse=lambda w: r * base.dinverse(np.asarray(w, dtype=complex) * r)
        if not np.isscalar(w)
        else r * base.dinverse(complex(w) * r),
        domain_tag=EPSILON_OBSTACLE,
        eps=eps,
    )


_MAP_PROVIDERS: dict[str, Callable[[], ConformalMap]] = {
    "segment": segment_map,
    "disk": disk_identity_map,
}


def register_map_provider(name: str, factory: Callable[[], ConformalMap]) -> None:
    """Hook for user-supplied exterior maps of other arcs.

    A registered factory must honor the module conventions: |forward| >= 1
    on its domain, boundary onto the unit circle, infinity to infinity.
    """
    if not callable(factory):
        raise ValueError("factory must be callable")
    _MAP_PROVIDERS[str(name)] = factory


def map_from_config(cfg) -> ConformalMap:
    """"segment" | "disk" | {"epsilon": {"base": <name>, "eps": <float>}}."""
    if isinstance(cfg, str):
        if cfg not in _MAP_PROVIDERS:
            raise ValueError(f"unknown map {cfg!r}; known: {sorted(_MAP_PROVIDERS)}")
        return _MAP_PROVIDERS[cfg]()
    if isinstance(cfg, dict) and set(cfg) == {"epsilon"}:
        sub = cfg["epsilon"]
        extra = set(sub) - {"base", "eps"}
        if extra:
            raise ValueError(f"unknown epsilon-map keys: {sorted(extra)}")
        base = map_from_config(sub.get("base", "segment"))
        return epsilon_map(base, float(sub["eps"]))
    raise ValueError(f"unrecognized map config {cfg!r}")
