"""Monotone finite-difference discretization of G[phi] = -1/2 Lap(phi) + (1/theta)|D phi|^theta - f.

Gradient terms use Godunov upwinding: per axis the slope candidate is

    g_i = max(backward_diff, -forward_diff, 0),

which for the radial convex Hamiltonian H(p) = (1/theta)|p|^theta is the exact
Godunov flux per axis and yields a monotone (degenerate-elliptic) scheme.

Boundary handling:

* ``state_constraint``: at boundary nodes every stencil arm that would leave
  the grid is dropped, from both the Laplacian and the Hamiltonian, so only
  interior information enters. This is the discrete counterpart of "no data
  prescribed on the boundary".
* ``dirichlet``: the operator is evaluated at interior nodes only; boundary
  nodes carry the data residual phi - g.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .grid import Field, Grid
from .problem import ProblemSpec

__all__ = [
    "DiscreteOperator",
    "UpwindState",
    "upwind_state",
    "laplacian_values",
    "godunov_gradient",
    "apply_operator",
    "optimal_drift",
    "drift_field",
    "hopf_cole_residual",
    "linearize",
]

# |p|^(theta-2) is unbounded at p=0 for theta < 2; derivative denominators
# clamp |p| below to keep Jacobian entries finite without moving iterates.
GRADIENT_CLAMP = 1e-10

STATE_CONSTRAINT = "state_constraint"
DIRICHLET = "dirichlet"


def _axis_slice(m: int, axis: int, sl: slice) -> tuple:
    out = [slice(None)] * m
    out[axis] = sl
    return tuple(out)


@dataclass
class UpwindState:
    """Per-axis Godunov slopes of a field.

    g[a]      nonnegative upwind candidate along axis a
    p[a]      signed upwind derivative along axis a (backward branch on ties)
    back[a]   True where the backward difference is the active candidate
    fwd[a]    True where the forward difference is the active candidate
    mag       Euclidean magnitude of g across axes
    """

    g: np.ndarray
    p: np.ndarray
    back: np.ndarray
    fwd: np.ndarray
    mag: np.ndarray


def upwind_state(values: np.ndarray, h: float) -> UpwindState:
    """Godunov upwind slopes at every node; out-of-grid arms are excluded.

    At interior nodes this has both one-sided differences available, so the
    same arrays serve the Dirichlet policy (which only reads interior rows).
    """
    m = values.ndim
    shape = values.shape
    g = np.empty((m,) + shape)
    p = np.empty((m,) + shape)
    back = np.empty((m,) + shape, dtype=bool)
    fwd = np.empty((m,) + shape, dtype=bool)
    for a in range(m):
        d = np.diff(values, axis=a) / h
        pad = list(shape)
        pad[a] = 1
        ninf = np.full(pad, -np.inf)
        cb = np.concatenate([ninf, d], axis=a)  # backward difference
        cf = np.concatenate([-d, ninf], axis=a)  # minus forward difference
        active_b = (cb >= cf) & (cb > 0)
        active_f = (cf > cb) & (cf > 0)
        ga = np.where(active_b, cb, np.where(active_f, cf, 0.0))
        pa = np.where(active_b, cb, np.where(active_f, -cf, 0.0))
        g[a] = ga
        p[a] = pa
        back[a] = active_b
        fwd[a] = active_f
    mag = np.sqrt(np.sum(g**2, axis=0))
    return UpwindState(g=g, p=p, back=back, fwd=fwd, mag=mag)


def laplacian_values(values: np.ndarray, h: float) -> np.ndarray:
    """Discrete Laplacian with out-of-grid arms dropped at boundary nodes.

    Interior nodes get the standard central second difference; a boundary node
    keeps only the inward contributions (u(x +- h e) - u(x)) / h^2.
    """
    m = values.ndim
    shape = values.shape
    lap = np.zeros(shape)
    for a in range(m):
        d = np.diff(values, axis=a) / h
        pad = list(shape)
        pad[a] = 1
        zeros = np.zeros(pad)
        right = np.concatenate([d, zeros], axis=a)
        left = np.concatenate([zeros, d], axis=a)
        lap += (right - left) / h
    return lap


@dataclass
class DiscreteOperator:
    """Discretization of the operator for one problem instance.

    boundary_policy is ``state_constraint`` (operator defined at every node,
    truncated stencils on the boundary) or ``dirichlet`` (operator defined at
    interior nodes, boundary rows carry phi - boundary_data).
    """

    spec: ProblemSpec
    boundary_policy: str = STATE_CONSTRAINT
    boundary_data: Optional[Field] = None

    def __post_init__(self) -> None:
        if self.boundary_policy not in (STATE_CONSTRAINT, DIRICHLET):
            raise ValueError(f"unknown boundary policy {self.boundary_policy!r}")
        if self.boundary_policy == DIRICHLET and self.boundary_data is None:
            raise ValueError("dirichlet policy requires boundary data")
        self._f = self.spec.f_field().values

    @property
    def grid(self) -> Grid:
        return self.spec.grid

    @property
    def f_values(self) -> np.ndarray:
        return self._f

    def residual_values(self, values: np.ndarray, lam: float) -> np.ndarray:
        """-1/2 Lap + (1/theta) |upwind gradient|^theta - f + lambda, grid-shaped."""
        theta = self.spec.theta
        h = self.spec.h
        state = upwind_state(values, h)
        res = -0.5 * laplacian_values(values, h) + state.mag**theta / theta - self._f + lam
        if self.boundary_policy == DIRICHLET:
            shell = self.grid.boundary_shell_mask()
            res[shell] = values[shell] - self.boundary_data.values[shell]
        return res

    def jacobian(self, values: np.ndarray) -> sp.csr_matrix:
        """Derivative of the node residuals with respect to the node values.

        Under the Dirichlet policy the matrix is restricted to interior rows
        and columns (boundary values are data, not unknowns).
        """
        theta = self.spec.theta
        h = self.spec.h
        grid = self.grid
        shape = values.shape
        n = values.size
        flat = np.arange(n).reshape(shape)
        state = upwind_state(values, h)
        magc = np.maximum(state.mag, GRADIENT_CLAMP)

        rows: list[np.ndarray] = []
        cols: list[np.ndarray] = []
        data: list[np.ndarray] = []

        def add(r, c, v):
            rows.append(np.asarray(r).ravel())
            cols.append(np.asarray(c).ravel())
            data.append(np.asarray(v).ravel())

        inv_h2 = 1.0 / h**2
        m = grid.m
        for a in range(m):
            lo = _axis_slice(m, a, slice(None, -1))
            hi = _axis_slice(m, a, slice(1, None))
            # -1/2 Lap: each available arm couples a node pair symmetrically
            add(flat[lo], flat[hi], np.full(flat[lo].size, -0.5 * inv_h2))
            add(flat[lo], flat[lo], np.full(flat[lo].size, 0.5 * inv_h2))
            add(flat[hi], flat[lo], np.full(flat[hi].size, -0.5 * inv_h2))
            add(flat[hi], flat[hi], np.full(flat[hi].size, 0.5 * inv_h2))

            # Hamiltonian: d/dg (1/theta) mag^theta = mag^(theta-2) g per axis,
            # routed through the active one-sided difference
            w = magc ** (theta - 2.0) * state.g[a]
            minus = np.full(shape, -1, dtype=np.int64)
            minus[hi] = flat[lo]
            plus = np.full(shape, -1, dtype=np.int64)
            plus[lo] = flat[hi]

            mb = state.back[a]
            add(flat[mb], flat[mb], w[mb] / h)
            add(flat[mb], minus[mb], -w[mb] / h)
            mf = state.fwd[a]
            add(flat[mf], flat[mf], w[mf] / h)
            add(flat[mf], plus[mf], -w[mf] / h)

        jac = sp.coo_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
        ).tocsr()

        if self.boundary_policy == DIRICHLET:
            interior = flat[grid.interior_mask()].ravel()
            jac = jac[interior, :][:, interior]
        return jac


def godunov_gradient(
    field: Field,
    node,
    boundary_policy: str = STATE_CONSTRAINT,
    boundary_data: Optional[Field] = None,
) -> tuple[np.ndarray, float]:
    """Per-axis upwind slope vector and its magnitude at one node."""
    grid = field.grid
    node = grid.node_tuple(node)
    if boundary_policy == DIRICHLET:
        if boundary_data is None:
            raise ValueError("dirichlet policy requires boundary data")
        if grid.is_boundary(node):
            raise ValueError(f"operator undefined at boundary node {node} under dirichlet policy")
    elif boundary_policy != STATE_CONSTRAINT:
        raise ValueError(f"unknown boundary policy {boundary_policy!r}")
    state = upwind_state(field.values, grid.h)
    g = np.array([state.g[a][node] for a in range(grid.m)])
    return g, float(state.mag[node])


def apply_operator(op: DiscreteOperator, phi: Field, lam: float) -> Field:
    """Residual field of G_h[phi] + lambda under the operator's policy."""
    if phi.grid != op.grid:
        raise ValueError("field grid does not match the operator grid")
    return Field(op.grid, op.residual_values(phi.values, float(lam)))


def drift_field(values: np.ndarray, h: float, theta: float) -> np.ndarray:
    """Maximizing drift b* = |p|^(theta-2) p of the upwind gradient, shape (m, ...)."""
    state = upwind_state(values, h)
    magc = np.maximum(state.mag, GRADIENT_CLAMP)
    return magc ** (theta - 2.0) * state.p


def optimal_drift(phi: Field, node, theta: float) -> np.ndarray:
    """Drift vector attaining the Legendre dual of the Hamiltonian at one node.

    Satisfies b.p - (1/theta*) |b|^theta* = (1/theta) |p|^theta with p the
    signed upwind gradient; p = 0 gives b = 0 for every theta > 1.
    """
    node = phi.grid.node_tuple(node)
    b = drift_field(phi.values, phi.grid.h, theta)
    return np.array([b[a][node] for a in range(phi.grid.m)])


def hopf_cole_residual(phi: Field, lam: float, spec: ProblemSpec) -> Field:
    """Residual of the transformed equation satisfied by z = -exp(-phi).

    Centered differences throughout; this is a diagnostic for smooth fields,
    not a monotone solver ingredient. Boundary entries are set to zero.
    """
    if phi.grid != spec.grid:
        raise ValueError("field grid does not match the problem grid")
    vals = phi.values
    if float(np.min(vals)) < -700.0:
        raise OverflowError(
            "exp(-phi) overflows for min(phi) < -700; renormalize phi by adding a constant"
        )
    z = -np.exp(-vals)
    h = spec.h
    m = spec.m
    grid = spec.grid
    interior = grid.interior_mask()

    lap = np.zeros_like(z)
    grad_sq = np.zeros_like(z)
    dz = np.zeros((m,) + z.shape)
    for a in range(m):
        up = _axis_slice(m, a, slice(2, None))
        mid = _axis_slice(m, a, slice(1, -1))
        dn = _axis_slice(m, a, slice(None, -2))
        lap[mid] += (z[up] - 2.0 * z[mid] + z[dn]) / h**2
        dz[a][mid] = (z[up] - z[dn]) / (2.0 * h)
    grad_sq = np.sum(dz**2, axis=0)

    f = spec.f_field().values
    q = np.sqrt(grad_sq) / np.abs(z)  # |Dz/z|
    theta = spec.theta
    res = -0.5 * lap + z * (0.5 * q**2 - q**theta / theta + f - lam)
    out = np.zeros_like(res)
    out[interior] = res[interior]
    return Field(grid, out)


def linearize(op: DiscreteOperator, phi: Field, lam: float) -> sp.csr_matrix:
    """Sparse Jacobian of apply_operator at phi (lambda enters affinely).

    Godunov ties differentiate through the backward branch; for theta < 2 the
    gradient-magnitude factor is clamped below at GRADIENT_CLAMP.
    """
    if phi.grid != op.grid:
        raise ValueError("field grid does not match the operator grid")
    return op.jacobian(phi.values)
