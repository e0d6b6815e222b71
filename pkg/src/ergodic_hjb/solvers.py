"""Solver routes to the ergodic pair (lambda, phi) and their plumbing.

Routes implemented here:

* ``solve_dirichlet``      fixed lambda, boundary data prescribed; damped Newton
* ``solve_discounted``     discount term eps*phi replaces lambda; eps*phi(anchor)
                           estimates the critical value as eps -> 0
* ``solve_ergodic``        state-constraint problem on the box; three methods:
                           augmented Newton, relative value iteration, policy
                           iteration (all fixed points of the same discrete system)
* ``parabolic_march``      explicit monotone march of u_t = 1/2 Lap u - H(Du) + f;
                           u/t and the per-step increments approach the critical value
* ``estimate_lambda_star`` outer loop over expanding radii with a monotonicity
                           audit and an exponential extrapolation heuristic
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.integrate import cumulative_trapezoid
from scipy.ndimage import uniform_filter
from scipy.optimize import curve_fit
from scipy.sparse.linalg import spsolve

from .grid import Field, Grid, dump_json
from .problem import ProblemSpec
from .scheme import (
    DIRICHLET,
    STATE_CONSTRAINT,
    DiscreteOperator,
    drift_field,
    laplacian_values,
    upwind_state,
)

__all__ = [
    "SolverError",
    "NoSolutionSuspected",
    "TimeStepError",
    "TraceRecord",
    "ConvergenceTrace",
    "ErgodicSolution",
    "ParabolicMarch",
    "LambdaStarEstimate",
    "InteriorMinimumReport",
    "solve_dirichlet",
    "solve_discounted",
    "solve_ergodic",
    "interior_minimum_check",
    "parabolic_march",
    "estimate_lambda_star",
    "discounted_lambda_path",
    "eikonal_initial_guess",
    "random_smooth_field",
    "scheme_error_estimate",
]

BACKTRACK_FLOOR = 2.0**-20
STALL_WINDOW = 20


class SolverError(RuntimeError):
    """Iteration failed to reach its tolerance within the budget."""

    def __init__(self, message: str, trace: "ConvergenceTrace | None" = None):
        super().__init__(message)
        self.trace = trace


class NoSolutionSuspected(SolverError):
    """Newton stagnated; consistent with lambda above the critical value.

    This is a diagnostic, not a proof of nonexistence.
    """


class TimeStepError(SolverError):
    """Explicit march blew up; retry with a smaller time step."""


@dataclass
class TraceRecord:
    iteration: int
    residual_sup: float
    lambda_estimate: Optional[float] = None
    step_size: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "residual_sup": self.residual_sup,
            "lambda_estimate": self.lambda_estimate,
            "step_size": self.step_size,
        }


@dataclass
class ConvergenceTrace:
    records: list[TraceRecord] = field(default_factory=list)
    wall_time_s: float = 0.0
    termination: str = ""

    def to_jsonl(self) -> str:
        lines = [dump_json(r.to_dict()) for r in self.records]
        lines.append(dump_json({"event": "done", "termination": self.termination}))
        return "\n".join(lines) + "\n"


@dataclass
class ErgodicSolution:
    lam: float
    phi: Field
    residual_sup: float
    trace: ConvergenceTrace
    method: str
    spec: ProblemSpec
    boundary_policy: str = STATE_CONSTRAINT
    tol: float = 0.0


@dataclass
class ParabolicMarch:
    lambda_hat: float
    rate_stats: list[tuple[float, float, float, float]]  # (t, min, mean, max)
    profile: Field  # u(., T) - u(anchor, T)
    n_steps: int
    trace: ConvergenceTrace


@dataclass
class InteriorMinimumReport:
    location: tuple[float, ...]
    f_value: float
    lambda_value: float
    distance_to_boundary: float
    verdict: str  # "pass" | "fail" | "n/a"


@dataclass
class LambdaStarEstimate:
    lambda_star: float
    lambda_final: float
    rows: list[dict]
    monotone: bool
    slack: float
    fit_params: Optional[tuple[float, float, float]]


class _Stagnation(Exception):
    def __init__(self, records, x=None):
        self.records = records
        self.x = x


def _sup(v: np.ndarray) -> float:
    return float(np.max(np.abs(v)))


def _damped_newton(
    residual_fn: Callable[[np.ndarray], np.ndarray],
    jacobian_fn: Callable[[np.ndarray], sp.spmatrix],
    x0: np.ndarray,
    tol: float,
    max_iter: int,
    lam_of: Optional[Callable[[np.ndarray], float]] = None,
) -> tuple[np.ndarray, list[TraceRecord]]:
    """Damped Newton with backtracking; raises _Stagnation when no damped step helps.

    The line search decreases the Euclidean residual norm (the Newton direction
    is always a descent direction for it, unlike for the sup norm, which jams
    at upwind kinks); convergence is still declared on the sup norm.
    """
    x = np.asarray(x0, dtype=float).copy()
    f = residual_fn(x)
    r = _sup(f)
    merit = float(np.linalg.norm(f))
    records = [TraceRecord(0, r, lam_of(x) if lam_of else None, None)]
    best = merit
    stall = 0
    for it in range(1, max_iter + 1):
        if r <= tol:
            return x, records
        jac = jacobian_fn(x)
        delta = spsolve(jac.tocsc(), -f)
        if not np.all(np.isfinite(delta)):
            raise _Stagnation(records, x)
        s = 1.0
        accepted = False
        while s >= BACKTRACK_FLOOR:
            xt = x + s * delta
            ft = residual_fn(xt)
            mt = float(np.linalg.norm(ft))
            if np.isfinite(mt) and mt < merit * (1.0 - 1e-4 * s):
                accepted = True
                break
            s *= 0.5
        if not accepted:
            raise _Stagnation(records, x)
        x, f, merit = xt, ft, mt
        r = _sup(f)
        records.append(TraceRecord(it, r, lam_of(x) if lam_of else None, s))
        if merit >= best * (1.0 - 1e-12):
            stall += 1
            if stall >= STALL_WINDOW:
                raise _Stagnation(records, x)
        else:
            best = merit
            stall = 0
    if r <= tol:
        return x, records
    raise SolverError(
        f"newton did not reach tolerance {tol:g} within {max_iter} iterations (residual {r:.3e})",
        ConvergenceTrace(records=records, termination="max_iterations"),
    )


# -- Dirichlet route -----------------------------------------------------------


def solve_dirichlet(
    spec: ProblemSpec,
    lam: float,
    boundary_data: Field,
    initial_guess: Optional[Field] = None,
    tol: float = 1e-8,
    max_iter: int = 150,
) -> Field:
    """Solve G_h[phi] + lambda = 0 at interior nodes with phi = data on the boundary.

    Stagnation of the damped Newton iteration raises NoSolutionSuspected,
    consistent with lambda exceeding the critical value.
    """
    grid = spec.grid
    op = DiscreteOperator(spec, boundary_policy=DIRICHLET, boundary_data=boundary_data)
    shell = grid.boundary_shell_mask()
    interior = grid.interior_mask()

    full = np.array(boundary_data.values, dtype=float)
    if initial_guess is not None:
        full[interior] = initial_guess.values[interior]
    else:
        full[interior] = 0.0

    def assemble(x: np.ndarray) -> np.ndarray:
        vals = full.copy()
        vals[interior] = x
        return vals

    def residual_fn(x: np.ndarray) -> np.ndarray:
        return op.residual_values(assemble(x), lam)[interior]

    def jacobian_fn(x: np.ndarray) -> sp.spmatrix:
        return op.jacobian(assemble(x))

    start = time.perf_counter()
    try:
        x, records = _damped_newton(residual_fn, jacobian_fn, full[interior], tol, max_iter)
    except _Stagnation as stag:
        trace = ConvergenceTrace(
            records=stag.records,
            wall_time_s=time.perf_counter() - start,
            termination="stagnated",
        )
        raise NoSolutionSuspected(
            f"newton stagnated at lambda={lam:g}; no solution suspected", trace
        ) from None
    except SolverError as exc:
        # budget exhausted while still far from tolerance: same diagnostic as
        # a stall, consistent with lambda above the critical value
        residual = exc.trace.records[-1].residual_sup if exc.trace else np.inf
        if residual > 1e3 * tol:
            raise NoSolutionSuspected(
                f"newton made no useful progress at lambda={lam:g}; no solution suspected",
                exc.trace,
            ) from None
        raise
    vals = assemble(x)
    vals[shell] = boundary_data.values[shell]
    return Field(grid, vals)


# -- discounted route ----------------------------------------------------------


def solve_discounted(
    spec: ProblemSpec,
    epsilon: float,
    initial_guess: Optional[Field] = None,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> Field:
    """Solve -1/2 Lap phi + H(D phi) + eps*phi = f under the state-constraint policy.

    Returns the un-normalized field; eps*phi(anchor) estimates the critical value.
    """
    if not epsilon > 0:
        raise ValueError(f"discount rate must be positive, got {epsilon}")
    grid = spec.grid
    op = DiscreteOperator(spec, boundary_policy=STATE_CONSTRAINT)
    n = grid.n_nodes
    eye = sp.identity(n, format="csr") * epsilon

    def residual_fn(x: np.ndarray) -> np.ndarray:
        vals = x.reshape(grid.shape)
        return (op.residual_values(vals, 0.0) + epsilon * vals).ravel()

    def jacobian_fn(x: np.ndarray) -> sp.spmatrix:
        return op.jacobian(x.reshape(grid.shape)) + eye

    x0 = initial_guess.values.ravel() if initial_guess is not None else np.zeros(n)
    start = time.perf_counter()
    try:
        x, records = _damped_newton(residual_fn, jacobian_fn, x0, tol, max_iter)
    except _Stagnation as stag:
        trace = ConvergenceTrace(
            records=stag.records,
            wall_time_s=time.perf_counter() - start,
            termination="stagnated",
        )
        raise SolverError(f"discounted solve stagnated at eps={epsilon:g}", trace) from None
    return Field(grid, x.reshape(grid.shape))


def discounted_lambda_path(
    spec: ProblemSpec,
    eps_list: list[float],
    tol: float = 1e-8,
) -> tuple[list[dict], float]:
    """eps*phi_eps(anchor) along a discount schedule plus the linear extrapolation to eps=0.

    Successive solves are warm-started through the 1/eps scaling of the fields.
    """
    anchor = spec.anchor_index
    rows = []
    guess: Optional[Field] = None
    lam_prev = None
    eps_prev = None
    for eps in eps_list:
        if guess is not None and lam_prev is not None:
            shifted = guess.values + lam_prev * (1.0 / eps - 1.0 / eps_prev)
            guess = Field(spec.grid, shifted)
        phi = solve_discounted(spec, eps, initial_guess=guess, tol=tol)
        lam_eps = eps * phi.at(anchor)
        op = DiscreteOperator(spec, boundary_policy=STATE_CONSTRAINT)
        res = _sup(op.residual_values(phi.values, 0.0) + eps * phi.values)
        rows.append({"epsilon": eps, "lambda": lam_eps, "residual_sup": res})
        guess, lam_prev, eps_prev = phi, lam_eps, eps
    eps_arr = np.array([r["epsilon"] for r in rows])
    lam_arr = np.array([r["lambda"] for r in rows])
    if len(rows) >= 2:
        slope, intercept = np.polyfit(eps_arr, lam_arr, 1)
        extrapolated = float(intercept)
    else:
        extrapolated = float(lam_arr[-1])
    return rows, extrapolated


# -- state-constraint ergodic routes --------------------------------------------


def _finalize(
    spec: ProblemSpec,
    values: np.ndarray,
    lam: float,
    records: list[TraceRecord],
    wall: float,
    method: str,
    tol: float,
    termination: str = "converged",
) -> ErgodicSolution:
    grid = spec.grid
    anchor = spec.anchor_index
    vals = values - values[anchor]
    op = DiscreteOperator(spec, boundary_policy=STATE_CONSTRAINT)
    res = _sup(op.residual_values(vals, lam))
    records = list(records)
    records.append(TraceRecord(records[-1].iteration + 1 if records else 0, res, lam, None))
    trace = ConvergenceTrace(records=records, wall_time_s=wall, termination=termination)
    phi = Field(grid, vals)
    if not phi.is_finite():
        raise SolverError("solution contains non-finite values", trace)
    return ErgodicSolution(
        lam=float(lam),
        phi=phi,
        residual_sup=res,
        trace=trace,
        method=method,
        spec=spec,
        boundary_policy=STATE_CONSTRAINT,
        tol=tol,
    )


def _march_steps(values: np.ndarray, h: float, theta: float, m: int, f: np.ndarray, n_steps: int) -> np.ndarray:
    """A batch of explicit monotone march steps (globalization helper)."""
    u = values.copy()
    dt = None
    for step in range(n_steps):
        rate, mag = _march_rate(u, h, theta, f)
        if not np.all(np.isfinite(rate)):
            break
        if step % 50 == 0:
            dt = _stable_dt(mag, theta, h, m)
        u = u + dt * rate
    return u


def _solve_newton_augmented(
    spec: ProblemSpec, initial_guess: Optional[Field], tol: float, max_iter: int
) -> ErgodicSolution:
    """Newton on the (N+1)-unknown system {G_h[phi] + lambda = 0, phi(anchor) = 0}.

    The anchor constraint removes the additive-constant rank deficiency. When
    the semismooth iteration jams on an upwind kink configuration, a batch of
    explicit monotone march steps moves the iterate off the kink manifold and
    Newton restarts from there.
    """
    grid = spec.grid
    op = DiscreteOperator(spec, boundary_policy=STATE_CONSTRAINT)
    n = grid.n_nodes
    anchor_flat = int(np.ravel_multi_index(spec.anchor_index, grid.shape))
    ones_col = sp.csr_matrix(np.ones((n, 1)))
    anchor_row = sp.csr_matrix(([1.0], ([0], [anchor_flat])), shape=(1, n))
    zero11 = sp.csr_matrix((1, 1))

    def residual_fn(x: np.ndarray) -> np.ndarray:
        vals = x[:n].reshape(grid.shape)
        lam = x[n]
        pde = op.residual_values(vals, lam).ravel()
        return np.concatenate([pde, [vals.reshape(-1)[anchor_flat]]])

    def jacobian_fn(x: np.ndarray) -> sp.spmatrix:
        jac = op.jacobian(x[:n].reshape(grid.shape))
        return sp.bmat([[jac, ones_col], [anchor_row, zero11]], format="csr")

    x0 = np.zeros(n + 1)
    if initial_guess is not None:
        x0[:n] = initial_guess.values.ravel()
    start = time.perf_counter()
    all_records: list[TraceRecord] = []
    for attempt in range(4):
        try:
            x, records = _damped_newton(
                residual_fn, jacobian_fn, x0, 0.5 * tol, max_iter, lam_of=lambda z: float(z[n])
            )
            all_records.extend(records)
            wall = time.perf_counter() - start
            return _finalize(
                spec, x[:n].reshape(grid.shape), float(x[n]), all_records, wall,
                "newton_augmented", tol,
            )
        except _Stagnation as stag:
            all_records.extend(stag.records)
            if attempt == 3 or stag.x is None:
                break
            u = _march_steps(
                stag.x[:n].reshape(grid.shape), spec.h, spec.theta, spec.m, op.f_values, 2000
            )
            if not np.all(np.isfinite(u)):
                break
            rate, _ = _march_rate(u, spec.h, spec.theta, op.f_values)
            x0 = np.concatenate([(u - u.reshape(-1)[anchor_flat]).ravel(), [float(rate.mean())]])
    trace = ConvergenceTrace(
        records=all_records,
        wall_time_s=time.perf_counter() - start,
        termination="stagnated",
    )
    reached = all_records[-1].residual_sup if all_records else np.inf
    raise SolverError(
        f"augmented newton stagnated at residual {reached:.3e} (tolerance {tol:g}); "
        "if the residual sits at the rounding floor of the 1/h^2-scale stencil sums, "
        "the requested tolerance is not attainable at this resolution",
        trace,
    ) from None


def _stable_dt(mag: np.ndarray, theta: float, h: float, m: int) -> float:
    """0.9 / (m/h^2 + max|p|^(theta-1) m/h): keeps the explicit update monotone."""
    maxp = float(np.max(mag))
    lip = maxp ** (theta - 1.0) if maxp > 0 else 0.0
    return 0.9 / (m / h**2 + lip * m / h)


def _march_rate(values: np.ndarray, h: float, theta: float, f: np.ndarray):
    state = upwind_state(values, h)
    rate = 0.5 * laplacian_values(values, h) - state.mag**theta / theta + f
    return rate, state.mag


def _solve_rvi(
    spec: ProblemSpec,
    initial_guess: Optional[Field],
    tol: float,
    max_steps: int,
    record_every: int = 500,
) -> ErgodicSolution:
    """March u <- u + dt (1/2 Lap u - H(Du) + f) until the increments flatten.

    The spread (max - min) of the per-step increment bounds the residual of the
    returned pair, so it doubles as the stopping test.
    """
    grid = spec.grid
    f = spec.f_field().values
    u = (
        initial_guess.values.astype(float).copy()
        if initial_guess is not None
        else np.zeros(grid.shape)
    )
    theta, h, m = spec.theta, spec.h, spec.m
    records: list[TraceRecord] = []
    start = time.perf_counter()
    dt = None
    rate = None
    for step in range(max_steps):
        rate, mag = _march_rate(u, h, theta, f)
        if not np.all(np.isfinite(rate)):
            raise TimeStepError(
                "relative value iteration blew up; reduce the time step or check the data",
                ConvergenceTrace(records=records, termination="blow_up"),
            )
        if step % 50 == 0:
            dt = _stable_dt(mag, theta, h, m)
        span = float(rate.max() - rate.min())
        if step % record_every == 0:
            records.append(TraceRecord(step, span, float(rate.mean()), dt))
        if span <= 0.5 * tol:
            break
        u = u + dt * rate
    else:
        raise SolverError(
            f"relative value iteration: increment spread {span:.3e} above tolerance "
            f"after {max_steps} steps",
            ConvergenceTrace(records=records, termination="max_iterations"),
        )
    lam = float(rate.mean())
    wall = time.perf_counter() - start
    return _finalize(spec, u, lam, records, wall, "relative_value_iteration", tol)


def _drift_matrix(grid: Grid, h: float, b: np.ndarray) -> sp.csr_matrix:
    """-1/2 Lap + upwind(b . D) with state-constraint truncation of outward arms."""
    shape = grid.shape
    n = grid.n_nodes
    m = grid.m
    flat = np.arange(n).reshape(shape)
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    data: list[np.ndarray] = []

    def add(r, c, v):
        rows.append(np.asarray(r).ravel())
        cols.append(np.asarray(c).ravel())
        data.append(np.asarray(v).ravel())

    inv_h2 = 1.0 / h**2
    for a in range(m):
        lo = tuple(slice(None) if i != a else slice(None, -1) for i in range(m))
        hi = tuple(slice(None) if i != a else slice(1, None) for i in range(m))
        add(flat[lo], flat[hi], np.full(flat[lo].size, -0.5 * inv_h2))
        add(flat[lo], flat[lo], np.full(flat[lo].size, 0.5 * inv_h2))
        add(flat[hi], flat[lo], np.full(flat[hi].size, -0.5 * inv_h2))
        add(flat[hi], flat[hi], np.full(flat[hi].size, 0.5 * inv_h2))

        bp = np.maximum(b[a], 0.0)
        bm = np.minimum(b[a], 0.0)
        # outward arms at the box faces are dropped (only interior information)
        first = tuple(slice(None) if i != a else slice(0, 1) for i in range(m))
        last = tuple(slice(None) if i != a else slice(-1, None) for i in range(m))
        bp = bp.copy()
        bp[first] = 0.0
        bm = bm.copy()
        bm[last] = 0.0

        # bp * backward difference: (u(x) - u(x-h)) / h
        add(flat[hi], flat[hi], bp[hi] / h)
        add(flat[hi], flat[lo], -bp[hi] / h)
        # bm * forward difference: (u(x+h) - u(x)) / h
        add(flat[lo], flat[lo], -bm[lo] / h)
        add(flat[lo], flat[hi], bm[lo] / h)

    return sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()


def _solve_policy_iteration(
    spec: ProblemSpec, initial_guess: Optional[Field], tol: float, max_iter: int
) -> ErgodicSolution:
    """Alternate drift improvement with linear ergodic solves (Howard's method).

    Policy evaluation solves -1/2 Lap phi + b . D phi (upwinded) = f + L*(b) - lambda
    with phi(anchor) = 0, where L*(b) = (1/theta*) |b|^theta* is the Legendre dual
    of the Hamiltonian: substituting the maximizing drift into
    H(p) = sup_b [b.p - L*(b)] moves L*(b) to the right-hand side with a plus sign.
    """
    grid = spec.grid
    op = DiscreteOperator(spec, boundary_policy=STATE_CONSTRAINT)
    f = op.f_values
    n = grid.n_nodes
    theta = spec.theta
    theta_star = spec.theta_star
    h = spec.h
    anchor_flat = int(np.ravel_multi_index(spec.anchor_index, grid.shape))
    ones_col = sp.csr_matrix(np.ones((n, 1)))
    anchor_row = sp.csr_matrix(([1.0], ([0], [anchor_flat])), shape=(1, n))
    zero11 = sp.csr_matrix((1, 1))

    vals = (
        initial_guess.values.astype(float).copy()
        if initial_guess is not None
        else np.zeros(grid.shape)
    )
    b = drift_field(vals, h, theta)
    records: list[TraceRecord] = []
    start = time.perf_counter()
    lam = 0.0
    for it in range(1, max_iter + 1):
        a_mat = _drift_matrix(grid, h, b)
        rhs = (f + np.linalg.norm(b, axis=0) ** theta_star / theta_star).ravel()
        aug = sp.bmat([[a_mat, ones_col], [anchor_row, zero11]], format="csc")
        sol = spsolve(aug, np.concatenate([rhs, [0.0]]))
        vals = sol[:n].reshape(grid.shape)
        lam = float(sol[n])
        res = _sup(op.residual_values(vals, lam))
        records.append(TraceRecord(it, res, lam, None))
        if res <= 0.5 * tol:
            wall = time.perf_counter() - start
            return _finalize(spec, vals, lam, records, wall, "policy_iteration", tol)
        b = drift_field(vals, h, theta)
    raise SolverError(
        f"policy iteration did not reach tolerance {tol:g} within {max_iter} sweeps",
        ConvergenceTrace(records=records, termination="max_iterations"),
    )


def solve_ergodic(
    spec: ProblemSpec,
    initial_guess: Optional[Field] = None,
    method: str = "newton_augmented",
    tol: float = 1e-8,
    max_iter: Optional[int] = None,
) -> ErgodicSolution:
    """State-constraint ergodic solve on the box; phi(anchor) = 0 exactly.

    All three methods converge to the same discrete fixed point; they differ
    in robustness and cost. The returned residual_sup is the sup norm of the
    operator applied to the normalized solution.
    """
    if not np.isfinite(spec.rhs.min_value()):
        raise ValueError("right-hand side must be bounded from below on the box")
    if method == "newton_augmented":
        return _solve_newton_augmented(spec, initial_guess, tol, max_iter or 300)
    if method == "relative_value_iteration":
        return _solve_rvi(spec, initial_guess, tol, max_iter or 2_000_000)
    if method == "policy_iteration":
        return _solve_policy_iteration(spec, initial_guess, tol, max_iter or 100)
    raise ValueError(f"unknown method {method!r}")


def interior_minimum_check(sol: ErgodicSolution, tol: float = 1e-6) -> InteriorMinimumReport:
    """Locate the minimizer of phi and test interiority plus f(argmin) <= lambda.

    Only meaningful for state-constraint solutions of coercive problems;
    other boundary policies report "n/a".
    """
    grid = sol.phi.grid
    argmin = np.unravel_index(np.argmin(sol.phi.values), grid.shape)
    loc = grid.coords(argmin)
    f_val = sol.spec.rhs.value_at(loc)
    half_width = grid.half_count * grid.h
    dist = float(min(half_width - abs(c) for c in loc))
    if sol.boundary_policy != STATE_CONSTRAINT:
        verdict = "n/a"
    elif dist >= 2.0 * grid.h - 1e-12 and f_val <= sol.lam + tol:
        verdict = "pass"
    else:
        verdict = "fail"
    return InteriorMinimumReport(
        location=tuple(float(c) for c in loc),
        f_value=float(f_val),
        lambda_value=sol.lam,
        distance_to_boundary=dist,
        verdict=verdict,
    )


def parabolic_march(
    spec: ProblemSpec,
    u0: Optional[Field] = None,
    T: float = 50.0,
    record_every: int = 200,
) -> ParabolicMarch:
    """Explicit monotone march of the evolution equation to time T.

    Returns per-sample (t, min, mean, max) of the discrete time derivative;
    the mean at the final step is the long-time estimate of the critical value.
    """
    grid = spec.grid
    f = spec.f_field().values
    u = u0.values.astype(float).copy() if u0 is not None else np.zeros(grid.shape)
    theta, h, m = spec.theta, spec.h, spec.m
    anchor = spec.anchor_index
    stats: list[tuple[float, float, float, float]] = []
    records: list[TraceRecord] = []
    start = time.perf_counter()
    t = 0.0
    step = 0
    dt = None
    rate = None
    while t < T:
        rate, mag = _march_rate(u, h, theta, f)
        if not np.all(np.isfinite(rate)) or float(np.max(np.abs(rate))) > 1e14:
            raise TimeStepError(
                "explicit march blew up; use a smaller time step",
                ConvergenceTrace(records=records, termination="blow_up"),
            )
        if step % 50 == 0:
            dt = _stable_dt(mag, theta, h, m)
        dt_eff = min(dt, T - t)
        if dt_eff <= 0.0:  # guards float stalls at the horizon
            break
        if step % record_every == 0:
            stats.append((t, float(rate.min()), float(rate.mean()), float(rate.max())))
            records.append(
                TraceRecord(step, float(rate.max() - rate.min()), float(rate.mean()), dt_eff)
            )
        u = u + dt_eff * rate
        t += dt_eff
        step += 1
    rate, _ = _march_rate(u, h, theta, f)
    stats.append((t, float(rate.min()), float(rate.mean()), float(rate.max())))
    lam_hat = float(rate.mean())
    records.append(TraceRecord(step, float(rate.max() - rate.min()), lam_hat, None))
    trace = ConvergenceTrace(
        records=records, wall_time_s=time.perf_counter() - start, termination="horizon_reached"
    )
    profile = Field(grid, u - u[anchor])
    return ParabolicMarch(
        lambda_hat=lam_hat, rate_stats=stats, profile=profile, n_steps=step, trace=trace
    )


# -- outer loop over radii -------------------------------------------------------


def scheme_error_estimate(spec: ProblemSpec, phi: Field) -> float:
    """Crude upwind-consistency estimate: (h/2) mean over the bulk of |p|^(theta-1) |Lap phi| / m."""
    state = upwind_state(phi.values, spec.h)
    lap = laplacian_values(phi.values, spec.h)
    bulk = spec.grid.radii() <= 0.5 * spec.radius
    if not np.any(bulk):
        bulk = np.ones_like(lap, dtype=bool)
    weight = state.mag ** (spec.theta - 1.0) * np.abs(lap)
    return float(0.5 * spec.h * np.mean(weight[bulk]) / spec.m)


def estimate_lambda_star(
    spec: ProblemSpec,
    radii: list[float],
    h,
    method: str = "newton_augmented",
    tol: float = 1e-8,
    slack: Optional[float] = None,
    strict: bool = True,
    warm_start: bool = False,
) -> LambdaStarEstimate:
    """Solve the state-constraint problem on expanding boxes and extrapolate.

    The lambda_R table must be non-increasing in R up to twice the scheme-error
    estimate (or the provided slack); a violation flags a resolution problem.
    The extrapolation model lambda_R = L + a exp(-b R) is a heuristic; the raw
    table is always part of the result.
    """
    radii = list(radii)
    if len(radii) < 3:
        raise ValueError("need at least three radii")
    if any(r2 <= r1 for r1, r2 in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    h_list = [float(h)] * len(radii) if np.isscalar(h) else [float(v) for v in h]
    if len(h_list) != len(radii):
        raise ValueError("need one spacing per radius")

    rows = []
    err_max = 0.0
    for r, hr in zip(radii, h_list):
        sub = replace(spec, radius=float(r), h=hr)
        guess = eikonal_initial_guess(sub) if warm_start else None
        sol = solve_ergodic(sub, initial_guess=guess, method=method, tol=tol)
        err = scheme_error_estimate(sub, sol.phi)
        err_max = max(err_max, err)
        rows.append(
            {
                "radius": float(r),
                "h": hr,
                "lambda": sol.lam,
                "residual_sup": sol.residual_sup,
                "scheme_error_estimate": err,
            }
        )

    slack_used = float(slack) if slack is not None else 2.0 * err_max
    lam = np.array([row["lambda"] for row in rows])
    monotone = bool(np.all(lam[1:] <= lam[:-1] + slack_used))
    if strict and not monotone:
        raise SolverError(
            "lambda_R increased with R beyond the discretization slack "
            f"({slack_used:.3e}); refine the grid"
        )

    fit_params = None
    lambda_star = float(lam[-1])
    spread = float(lam.max() - lam.min())
    if spread > 1e-10:
        try:
            r_arr = np.array(radii, dtype=float)

            def model(rr, L, a, bexp):
                return L + a * np.exp(-bexp * rr)

            p0 = (float(lam[-1]), float(lam[0] - lam[-1]), 0.5)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")  # near-degenerate tables are expected
                popt, _ = curve_fit(
                    model,
                    r_arr,
                    lam,
                    p0=p0,
                    bounds=([-np.inf, -np.inf, 1e-6], [np.inf, np.inf, np.inf]),
                    maxfev=10000,
                )
            # reject extrapolations that leave the observed range by more than the spread
            if abs(popt[0] - lam[-1]) <= 2.0 * spread + slack_used:
                fit_params = (float(popt[0]), float(popt[1]), float(popt[2]))
                lambda_star = float(popt[0])
        except Exception:
            fit_params = None
            lambda_star = float(lam[-1])

    return LambdaStarEstimate(
        lambda_star=lambda_star,
        lambda_final=float(lam[-1]),
        rows=rows,
        monotone=monotone,
        slack=slack_used,
        fit_params=fit_params,
    )


# -- initial guesses ---------------------------------------------------------------


def eikonal_initial_guess(spec: ProblemSpec) -> Field:
    """Radial warm start integrating |phi'| ~ (theta (f - f(0)))^(1/theta).

    Exact asymptotics for radial coercive f; a harmless rough guess otherwise.
    """
    grid = spec.grid
    rmax = spec.radius * np.sqrt(spec.m) + spec.h
    rr = np.arange(0.0, rmax + spec.h, spec.h)
    fr = spec.rhs.radial_value(rr, spec.m)
    slope = (spec.theta * np.clip(fr - fr[0], 0.0, None)) ** (1.0 / spec.theta)
    cum = np.concatenate([[0.0], cumulative_trapezoid(slope, rr)])
    vals = np.interp(grid.radii(), rr, cum)
    return Field(grid, vals)


def random_smooth_field(grid: Grid, seed: int, amplitude: float = 1.0) -> Field:
    """Smoothed seeded noise; used as an independent initial guess."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(grid.shape)
    for _ in range(3):
        v = uniform_filter(v, size=5, mode="nearest")
    scale = float(np.std(v))
    if scale > 0:
        v = v * (amplitude / scale)
    return Field(grid, v)
