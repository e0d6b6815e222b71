"""Problem instances: exponent, right-hand-side families, structural hypotheses.

The right-hand sides f are bounded-from-below, locally Lipschitz functions.
Two structural hypotheses matter for the quantitative checks:

* a gradient bound  |Df(y)| <= f0 (1 + |y|^(alpha-1))  (for alpha >= 1, or a
  plain bound for alpha < 1), and
* two-sided power growth  f0^-1 (|y|^alpha + 1) <= f(y) <= f0 (|y|^alpha + 1).

When both hold, bounded-from-below solutions of the ergodic equation grow
like |y|^gamma with gamma = alpha/theta + 1, which is what the growth checks
measure.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .grid import Field, Grid

__all__ = [
    "ProblemSpec",
    "RhsFunction",
    "PowerRhs",
    "PurePowerRhs",
    "BlendRhs",
    "TabulatedRhs",
    "HypothesisReport",
    "make_power_rhs",
    "make_pure_power_rhs",
    "make_tabulated_rhs",
    "blend_rhs",
    "validate_hypotheses",
]


def _as_points(points, m: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if m == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
        pts = pts[..., None]
    if pts.shape[-1] != m:
        raise ValueError(f"points have trailing dimension {pts.shape[-1]}, expected {m}")
    return pts


class RhsFunction:
    """Common interface of the right-hand-side families.

    Concrete instances are immutable after construction and safe to share
    across concurrent solver instances.
    """

    form: str = ""
    alpha: Optional[float] = None
    f0: Optional[float] = None
    shift: float = 0.0

    def evaluate(self, points) -> np.ndarray:
        """Values at an array of points with trailing dimension m.

        A flat array is interpreted as a sequence of 1-d points; use
        value_at for one point of any dimension.
        """
        raise NotImplementedError

    def gradient(self, points) -> np.ndarray:
        raise NotImplementedError

    def value_at(self, point) -> float:
        p = np.atleast_1d(np.asarray(point, dtype=float))
        return float(self.evaluate(p[None, :])[0])

    def gradient_at(self, point) -> np.ndarray:
        p = np.atleast_1d(np.asarray(point, dtype=float))
        return np.asarray(self.gradient(p[None, :])[0])

    def min_value(self) -> float:
        raise NotImplementedError

    def radial_value(self, t: np.ndarray, m: int) -> np.ndarray:
        """f along the first coordinate axis; exact for the radial families."""
        t = np.asarray(t, dtype=float)
        pts = np.zeros(t.shape + (m,))
        pts[..., 0] = t
        return self.evaluate(pts)

    def descriptor(self) -> dict:
        raise NotImplementedError

    def on_grid(self, grid: Grid) -> np.ndarray:
        return self.evaluate(grid.points()).reshape(grid.shape)


@dataclass(frozen=True)
class PowerRhs(RhsFunction):
    """Smooth power family f(y) = c (1 + |y|^2)^(alpha/2) + shift.

    The regularized form keeps Df Lipschitz near the origin even for
    alpha < 2, which the plain power |y|^alpha does not.
    """

    coeff: float = 1.0
    alpha: float = 2.0
    shift: float = 0.0
    f0: Optional[float] = None
    form: str = field(default="power", init=False)

    def evaluate(self, points) -> np.ndarray:
        pts = _as_points(points, pts_m(points))
        r2 = np.sum(pts**2, axis=-1)
        return self.coeff * (1.0 + r2) ** (self.alpha / 2.0) + self.shift

    def gradient(self, points) -> np.ndarray:
        pts = _as_points(points, pts_m(points))
        r2 = np.sum(pts**2, axis=-1)
        fac = self.coeff * self.alpha * (1.0 + r2) ** (self.alpha / 2.0 - 1.0)
        return fac[..., None] * pts

    def min_value(self) -> float:
        return self.coeff + self.shift

    def descriptor(self) -> dict:
        return {"form": "power", "coeff": self.coeff, "alpha": self.alpha, "shift": self.shift}


@dataclass(frozen=True)
class PurePowerRhs(RhsFunction):
    """Homogeneous family f(y) = c |y|^alpha + shift, alpha >= 1.

    Exact homogeneity is what the dilation law for the critical value needs;
    for alpha in [1, 2) the gradient at the origin is taken to be 0.
    """

    coeff: float = 1.0
    alpha: float = 2.0
    shift: float = 0.0
    f0: Optional[float] = None
    form: str = field(default="pure_power", init=False)

    def evaluate(self, points) -> np.ndarray:
        pts = _as_points(points, pts_m(points))
        r = np.sqrt(np.sum(pts**2, axis=-1))
        return self.coeff * r**self.alpha + self.shift

    def gradient(self, points) -> np.ndarray:
        pts = _as_points(points, pts_m(points))
        r = np.sqrt(np.sum(pts**2, axis=-1))
        safe = np.maximum(r, 1e-300)
        fac = self.coeff * self.alpha * safe ** (self.alpha - 2.0)
        out = fac[..., None] * pts
        return np.where((r == 0.0)[..., None], 0.0, out)

    def min_value(self) -> float:
        return self.shift

    def descriptor(self) -> dict:
        return {"form": "pure_power", "coeff": self.coeff, "alpha": self.alpha, "shift": self.shift}


@dataclass(frozen=True)
class BlendRhs(RhsFunction):
    """Pointwise convex combination t*f1 + (1-t)*f2."""

    f1: RhsFunction = None
    f2: RhsFunction = None
    t: float = 0.5
    alpha: Optional[float] = None
    f0: Optional[float] = None
    shift: float = 0.0
    form: str = field(default="blend", init=False)

    def evaluate(self, points) -> np.ndarray:
        return self.t * self.f1.evaluate(points) + (1.0 - self.t) * self.f2.evaluate(points)

    def gradient(self, points) -> np.ndarray:
        return self.t * self.f1.gradient(points) + (1.0 - self.t) * self.f2.gradient(points)

    def min_value(self) -> float:
        # both parametric families attain their minimum at the origin
        return self.t * self.f1.min_value() + (1.0 - self.t) * self.f2.min_value()

    def descriptor(self) -> dict:
        return {
            "form": "blend",
            "t": self.t,
            "f1": self.f1.descriptor(),
            "f2": self.f2.descriptor(),
        }


@dataclass(frozen=True, eq=False)
class TabulatedRhs(RhsFunction):
    """Values and gradient sampled on a grid; evaluable only at grid nodes."""

    grid: Grid = None
    values: np.ndarray = None
    grads: np.ndarray = None  # shape (m, *grid.shape)
    alpha: Optional[float] = None
    f0: Optional[float] = None
    shift: float = 0.0
    form: str = field(default="tabulated", init=False)

    def evaluate(self, points) -> np.ndarray:
        pts = _as_points(points, self.grid.m)
        flat = pts.reshape(-1, self.grid.m)
        out = np.empty(flat.shape[0])
        for k, p in enumerate(flat):
            out[k] = self.values[self.grid.index_of(p)]
        return out.reshape(pts.shape[:-1])

    def gradient(self, points) -> np.ndarray:
        pts = _as_points(points, self.grid.m)
        flat = pts.reshape(-1, self.grid.m)
        out = np.empty((flat.shape[0], self.grid.m))
        for k, p in enumerate(flat):
            idx = self.grid.index_of(p)
            out[k] = [self.grads[a][idx] for a in range(self.grid.m)]
        return out.reshape(pts.shape[:-1] + (self.grid.m,))

    def min_value(self) -> float:
        return float(np.min(self.values))

    def descriptor(self) -> dict:
        return {"form": "tabulated", "m": self.grid.m, "radius": self.grid.radius, "h": self.grid.h}


def pts_m(points) -> int:
    """Trailing dimension of a point array (1 for a flat 1-d array)."""
    pts = np.asarray(points, dtype=float)
    return 1 if pts.ndim <= 1 else pts.shape[-1]


# -- hypothesis scans --------------------------------------------------------


def _radial_samples(extra_max: float = 1e6) -> np.ndarray:
    near = np.linspace(0.0, 20.0, 8001)
    far = np.geomspace(20.0, extra_max, 1500)
    return np.concatenate([near, far])


def _growth_constant(rhs: RhsFunction, alpha: float, m: int = 1) -> Optional[float]:
    """Smallest f0 with f0^-1 (t^alpha + 1) <= f <= f0 (t^alpha + 1) on the scan range.

    Valid for the radial families; returns None when f is not strictly
    positive (the lower bound is then unattainable).
    """
    t = _radial_samples()
    fv = rhs.radial_value(t, m)
    if np.min(fv) <= 0:
        return None
    base = t**alpha + 1.0
    hi = float(np.max(fv / base))
    lo = float(np.max(base / fv))
    return max(hi, lo)


# -- factories ----------------------------------------------------------------


def make_power_rhs(c: float, alpha: float, shift: float = 0.0) -> PowerRhs:
    """Smooth power right-hand side c (1 + |y|^2)^(alpha/2) + shift.

    Records the smallest growth constant f0 valid on the scan range whenever
    f stays positive (always true for shift >= 0).
    """
    if not c > 0:
        raise ValueError(f"coefficient must be positive, got {c}")
    if alpha < 0:
        raise ValueError(f"growth exponent must be >= 0, got {alpha}")
    rhs = PowerRhs(coeff=float(c), alpha=float(alpha), shift=float(shift))
    f0 = _growth_constant(rhs, alpha) if alpha > 0 else None
    return replace(rhs, f0=f0)


def make_pure_power_rhs(c: float, alpha: float, shift: float = 0.0) -> PurePowerRhs:
    """Homogeneous right-hand side c |y|^alpha + shift with alpha >= 1."""
    if not c > 0:
        raise ValueError(f"coefficient must be positive, got {c}")
    if alpha < 1:
        raise ValueError(f"pure power form needs alpha >= 1 (got {alpha}); use the smooth form")
    rhs = PurePowerRhs(coeff=float(c), alpha=float(alpha), shift=float(shift))
    f0 = _growth_constant(rhs, alpha)
    return replace(rhs, f0=f0)


def make_tabulated_rhs(grid: Grid, values: np.ndarray, grads: np.ndarray) -> TabulatedRhs:
    values = np.asarray(values, dtype=float).reshape(grid.shape)
    grads = np.asarray(grads, dtype=float).reshape((grid.m,) + grid.shape)
    if not (np.isfinite(values).all() and np.isfinite(grads).all()):
        raise ValueError("tabulated data must be finite")
    return TabulatedRhs(grid=grid, values=values, grads=grads)


def blend_rhs(f1: RhsFunction, f2: RhsFunction, t: float) -> RhsFunction:
    """Pointwise t*f1 + (1-t)*f2 with blended gradient."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"blend weight must lie in [0, 1], got {t}")
    if t == 1.0:
        return f1
    if t == 0.0:
        return f2
    alpha = None
    if f1.alpha is not None and f2.alpha is not None:
        alpha = max(f1.alpha, f2.alpha)
    return BlendRhs(f1=f1, f2=f2, t=float(t), alpha=alpha)


# -- hypothesis report ---------------------------------------------------------


@dataclass(frozen=True)
class HypothesisReport:
    """Structural flags; None means undetermined (never guessed)."""

    bounded_below: Optional[bool]
    coercive: Optional[bool]
    h0: Optional[bool]
    h1: Optional[bool]
    gamma: Optional[float]
    f0: Optional[float]


def validate_hypotheses(rhs: RhsFunction, theta: float) -> HypothesisReport:
    """Report boundedness, coercivity, the two growth hypotheses, and gamma.

    gamma = alpha/theta + 1 is the predicted growth exponent of bounded-from-
    below solutions. For tabulated data the flags that would require knowledge
    beyond the grid are reported as undetermined; coercivity is judged
    empirically on the outermost grid shell.
    """
    if not theta > 1:
        raise ValueError(f"exponent theta must exceed 1, got {theta}")

    if isinstance(rhs, TabulatedRhs):
        shell = rhs.grid.boundary_shell_mask()
        vmin = float(np.min(rhs.values))
        argmin = np.unravel_index(np.argmin(rhs.values), rhs.grid.shape)
        interior_min = not rhs.grid.is_boundary(argmin)
        coercive = bool(interior_min and np.min(rhs.values[shell]) > vmin)
        return HypothesisReport(
            bounded_below=None,  # finite on the grid, unknown beyond it
            coercive=coercive,
            h0=None,
            h1=None,
            gamma=None,
            f0=None,
        )

    alpha = rhs.alpha
    gamma = alpha / theta + 1.0 if alpha is not None else None
    coercive = alpha is not None and alpha > 0
    f0 = rhs.f0
    if f0 is None and alpha is not None and alpha > 0 and rhs.min_value() > 0:
        f0 = _growth_constant(rhs, alpha)
    h1 = bool(alpha is not None and alpha > 0 and f0 is not None)
    if isinstance(rhs, PurePowerRhs):
        h0 = alpha >= 1
    elif isinstance(rhs, PowerRhs):
        h0 = True
    elif isinstance(rhs, BlendRhs):
        sub = [validate_hypotheses(g, theta).h0 for g in (rhs.f1, rhs.f2)]
        h0 = None if any(s is None for s in sub) else all(sub)
    else:
        h0 = None
    return HypothesisReport(
        bounded_below=True,
        coercive=coercive,
        h0=h0,
        h1=h1,
        gamma=gamma,
        f0=f0,
    )


# -- problem spec ---------------------------------------------------------------


@dataclass(frozen=True)
class ProblemSpec:
    """Full instance: -1/2 Lap(phi) + (1/theta)|D phi|^theta = f - lambda on [-R, R]^m."""

    theta: float
    m: int
    rhs: RhsFunction
    radius: float
    h: float
    anchor: Optional[tuple[float, ...]] = None

    def __post_init__(self) -> None:
        if not self.theta > 1:
            raise ValueError(f"exponent theta must exceed 1, got {self.theta}")
        grid = Grid(self.m, self.radius, self.h)  # validates radius/h
        anchor = self.anchor if self.anchor is not None else (0.0,) * self.m
        anchor = tuple(float(a) for a in anchor)
        grid.index_of(anchor)  # must be a node inside the box
        object.__setattr__(self, "anchor", anchor)

    @property
    def theta_star(self) -> float:
        """Conjugate exponent: 1/theta + 1/theta_star = 1."""
        return self.theta / (self.theta - 1.0)

    @property
    def grid(self) -> Grid:
        return Grid(self.m, self.radius, self.h)

    @property
    def anchor_index(self) -> tuple[int, ...]:
        return self.grid.index_of(self.anchor)

    def f_field(self) -> Field:
        g = self.grid
        return Field(g, self.rhs.on_grid(g))
