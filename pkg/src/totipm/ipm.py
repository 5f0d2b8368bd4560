"""Short-step path-following interior point solver on the marginal slice.

Minimizes f_eta(u) = eta <c, u> + sigma(u), sigma the log barrier, over the
affine slice of a marginal problem.  Phase I centers at eta = 1 starting
from the product of the marginals; Phase II grows eta by the fixed factor
(1 + gamma / sqrt(theta)) and restores proximity with a single Newton step,
keeping the decrement at or below beta.  It stops once theta / eta <= epsilon,
at which point the objective is within epsilon of the optimum.

The Newton system uses the diagonal barrier Hessian.  Both variants factor a
row- or column-scaled matrix by QR once per iterate and express the step as
an orthogonal projection of the scaled gradient u*g = eta*u*c - 1: solving
the normal equations instead would square the condition number, and near a
degenerate optimal face the resulting multiplier noise swamps the decrement.
The marginal variant works against the reduced constraint rows, the mode-sum
variant in the explicit Kronecker difference basis of the null space.
"""

from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .polytope import ConstraintSystem, MarginalProblem, null_basis_matrix, start_point

__all__ = [
    "SolverConfig",
    "PathState",
    "TraceRow",
    "SolveReport",
    "SolverError",
    "NonConvergenceError",
    "StepSizeViolationError",
    "newton_direction",
    "center",
    "short_step_solve",
    "predicted_iterations",
    "classify_weak_uniform",
    "DEFAULT_C0",
]

# calibration constant for the predicted iteration bound; the theory fixes
# only the sqrt(theta) log(..) shape, not the prefactor.  1/step_gamma = 16
# dominates the Phase II step count outright (the bound's log term is never
# smaller than the path's log(theta/epsilon), because min_i p <= 1/n per
# mode), and measured totals on d=2,3 uniform ladders sit at 11x-13x the
# C0=1 value, leaving headroom for Phase I centering
DEFAULT_C0 = 16.0

# entries this small mean the iterate has effectively hit the boundary
_FLOOR = 1e-300

# hard ceiling on the post-step decrement; with gamma = 1/16 and beta = 1/4
# the theory keeps it below 0.24, so reaching 1/2 means broken constants
_SAFETY_DECREMENT = 0.5


class SolverError(RuntimeError):
    """Numerical failure inside the solver."""


class NonConvergenceError(SolverError):
    """Iteration budget exhausted before reaching the requested tolerance."""


class StepSizeViolationError(SolverError):
    """A short step failed to restore proximity to the central path."""


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = 1e-6
    step_gamma: float = 1.0 / 16.0
    decrement_beta: float = 0.25
    center_tol: float = 1e-10
    max_iterations: int = 200_000
    theta: float | None = None

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        # the short-step safety region; larger values void the one-step
        # proximity restoration argument
        if not 0.0 < self.step_gamma <= 0.125:
            raise ValueError("step_gamma must lie in (0, 1/8]")
        if not 0.0 < self.decrement_beta <= 0.25:
            raise ValueError("decrement_beta must lie in (0, 1/4]")
        if self.center_tol <= 0.0:
            raise ValueError("center_tol must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.theta is not None and self.theta <= 0.0:
            raise ValueError("theta must be positive")


@dataclass(frozen=True)
class PathState:
    eta: float
    point: np.ndarray
    decrement: float
    iteration: int


TraceRow = namedtuple("TraceRow", ["eta", "decrement", "objective", "gap_bound"])


@dataclass(frozen=True)
class SolveReport:
    value: float
    optimizer: np.ndarray
    iterations: int
    trace: tuple
    predicted_bound: float
    eta_final: float
    gap_bound: float
    theta: float


class _ProjectionWorkspace:
    """Marginal-variant Newton solves: QR of diag(u) A^T, step read off an
    orthogonal projection of the scaled gradient."""

    def __init__(self, problem: MarginalProblem):
        system = ConstraintSystem(problem)
        self.cost = problem.cost.ravel()
        self.a = system.matrix
        self.rhs = system.rhs

    def prepare(self, u):
        q, r = scipy.linalg.qr(u[:, None] * self.a.T, mode="economic")
        return _ProjectionFactor(self, u, q, r)


class _ProjectionFactor:
    def __init__(self, ws, u, q, r):
        self.ws = ws
        self.u = u
        self.q = q
        self.r = r
        # aiming each step at the measured infeasibility instead of 0 keeps
        # rounding drift off the slice from accumulating across iterations
        self.infeasibility = ws.rhs - ws.a @ u

    def direction(self, eta):
        dg = eta * (self.u * self.ws.cost) - 1.0
        w = dg - self.q @ (self.q.T @ dg)
        # near the path the projection cancels almost all of dg; a second
        # pass scrubs the range(Q) remnant the cancellation leaves behind
        w -= self.q @ (self.q.T @ w)
        w = self.q @ scipy.linalg.solve_triangular(
            self.r, self.infeasibility, trans="T"
        ) - w
        dec = float(np.linalg.norm(w))
        if not math.isfinite(dec):
            raise SolverError("constraint rows lost rank at the current iterate")
        return self.u * w, dec


class _NullBasisWorkspace:
    """Mode-sum-variant Newton solves in the explicit Kronecker difference
    basis of the constraint null space, factored as QR of diag(1/u) B."""

    def __init__(self, problem: MarginalProblem):
        self.cost = problem.cost.ravel()
        self.basis = null_basis_matrix(problem)

    def prepare(self, u):
        if self.basis.shape[1] == 0:
            return _FixedPoint(u)
        q, r = scipy.linalg.qr(self.basis / u[:, None], mode="economic")
        return _NullBasisFactor(self, u, q, r)


class _NullBasisFactor:
    def __init__(self, ws, u, q, r):
        self.ws = ws
        self.u = u
        self.q = q
        self.r = r

    def direction(self, eta):
        dg = eta * (self.u * self.ws.cost) - 1.0
        z = self.q.T @ dg
        dec = float(np.linalg.norm(z))
        if not math.isfinite(dec):
            raise SolverError("null basis lost rank at the current iterate")
        coeffs = scipy.linalg.solve_triangular(self.r, -z)
        # stepping through the integer basis keeps the iterate on the slice
        # to rounding of a single matvec
        delta = self.ws.basis @ coeffs
        return delta, dec


class _FixedPoint:
    """Degenerate slice with a trivial null space: the point cannot move."""

    def __init__(self, u):
        self.zero = np.zeros_like(u)

    def direction(self, eta):
        return self.zero, 0.0


def _make_workspace(problem: MarginalProblem):
    if problem.variant == "U":
        return _ProjectionWorkspace(problem)
    return _NullBasisWorkspace(problem)


def _check_domain(u):
    if float(u.min()) < _FLOOR:
        raise SolverError(
            "an iterate entry fell below 1e-300; the point has reached the "
            "boundary of the positive orthant"
        )


def _as_interior_flat(problem, u):
    u = np.asarray(u, dtype=np.float64)
    if u.shape != problem.dims:
        raise ValueError(f"expected shape {problem.dims}, got {u.shape}")
    flat = u.ravel().astype(np.float64, copy=True)
    _check_domain(flat)
    return flat


def newton_direction(problem: MarginalProblem, u, eta: float):
    """Newton step of eta <c, x> + sigma(x) at ``u`` restricted to the
    constraint null space, and its decrement sqrt(delta^T H delta)."""
    if eta < 0.0:
        raise ValueError("eta must be nonnegative")
    flat = _as_interior_flat(problem, u)
    delta, dec = _make_workspace(problem).prepare(flat).direction(float(eta))
    return delta.reshape(problem.dims), dec


def center(problem: MarginalProblem, u0, eta: float, config: SolverConfig | None = None) -> PathState:
    """Damped Newton to the minimizer of eta <c, x> + sigma(x) on the slice.

    Damped steps delta / (1 + delta_norm) while the decrement exceeds
    decrement_beta (these stay strictly feasible by self-concordance), then
    full steps down to center_tol.
    """
    if eta < 0.0:
        raise ValueError("eta must be nonnegative")
    config = config or SolverConfig()
    workspace = _make_workspace(problem)
    u = _as_interior_flat(problem, u0)
    steps = 0
    while True:
        delta, dec = workspace.prepare(u).direction(float(eta))
        if dec <= config.center_tol:
            break
        if steps >= config.max_iterations:
            raise NonConvergenceError(
                f"centering still at decrement {dec!r} after {steps} steps"
            )
        if dec > config.decrement_beta:
            u = u + delta / (1.0 + dec)
        else:
            u = u + delta
        _check_domain(u)
        steps += 1
    return PathState(eta=float(eta), point=u.reshape(problem.dims), decrement=dec, iteration=steps)


def short_step_solve(problem: MarginalProblem, config: SolverConfig | None = None, observer=None) -> SolveReport:
    """Run the full path-following method and return the solve report.

    The trace holds one row after Phase I centering and one per Phase II
    step: (eta, decrement, objective, theta/eta), with the decrement measured
    at the recorded iterate and eta.  ``observer``, if given, is called with
    the PathState of every trace row.  Raises StepSizeViolationError if a
    short step leaves the decrement above decrement_beta, and
    NonConvergenceError if max_iterations runs out.
    """
    config = config or SolverConfig()
    theta = float(config.theta) if config.theta is not None else float(problem.size)
    workspace = _make_workspace(problem)
    cost = problem.cost.ravel()

    u = start_point(problem).ravel()
    eta = 1.0
    steps = 0

    # Phase I: damped Newton at eta = 1 from the product tensor
    while True:
        factor = workspace.prepare(u)
        delta, dec = factor.direction(eta)
        if dec <= config.center_tol:
            break
        if steps >= config.max_iterations:
            raise NonConvergenceError(
                f"Phase I centering still at decrement {dec!r} after {steps} steps"
            )
        if dec > config.decrement_beta:
            u = u + delta / (1.0 + dec)
        else:
            u = u + delta
        _check_domain(u)
        steps += 1

    trace = [TraceRow(eta, dec, float(cost @ u), theta / eta)]
    if observer is not None:
        observer(PathState(eta=eta, point=u.reshape(problem.dims), decrement=dec, iteration=steps))

    growth = 1.0 + config.step_gamma / math.sqrt(theta)

    # Phase II: grow eta, take one Newton step, verify proximity.  The
    # factorization depends on the iterate only, so the one built to measure
    # the trace decrement also serves the next step's direction.
    while theta / eta > config.epsilon:
        if steps >= config.max_iterations:
            raise NonConvergenceError(
                f"gap bound still {theta / eta!r} after {steps} steps"
            )
        eta_next = eta * growth
        delta, _ = factor.direction(eta_next)
        u = u + delta
        _check_domain(u)
        eta = eta_next
        steps += 1
        factor = workspace.prepare(u)
        _, dec = factor.direction(eta)
        if dec > _SAFETY_DECREMENT:
            raise StepSizeViolationError(
                f"decrement {dec!r} after a short step exceeds the safety bound "
                f"{_SAFETY_DECREMENT}; step constants are not in the safe region"
            )
        if dec > config.decrement_beta:
            raise StepSizeViolationError(
                f"decrement {dec!r} after a short step exceeds decrement_beta "
                f"{config.decrement_beta!r}"
            )
        trace.append(TraceRow(eta, dec, float(cost @ u), theta / eta))
        if observer is not None:
            observer(PathState(eta=eta, point=u.reshape(problem.dims), decrement=dec, iteration=steps))

    return SolveReport(
        value=float(cost @ u),
        optimizer=u.reshape(problem.dims),
        iterations=steps,
        trace=tuple(trace),
        predicted_bound=predicted_iterations(problem, config.epsilon),
        eta_final=eta,
        gap_bound=theta / eta,
        theta=theta,
    )


def predicted_iterations(problem: MarginalProblem, epsilon: float, c0: float = DEFAULT_C0) -> float:
    """Iteration bound C0 sqrt(prod n_k) log(sqrt(2) prod n_k / (eps prod_k min_i p_k[i])).

    C0 is an empirical calibration constant (DEFAULT_C0), reported rather
    than derived; the sqrt/log shape is what the theory fixes.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    n_prod = float(problem.size)
    min_prod = 1.0
    for p in problem.marginals:
        min_prod *= float(p.min())
    return c0 * math.sqrt(n_prod) * math.log(math.sqrt(2.0) * n_prod / (epsilon * min_prod))


def classify_weak_uniform(p, ell: float) -> float:
    """Largest K with p_j >= K / n^ell for all j and K <= n^{ell-1}:
    K = min(n^ell min_j p_j, n^{ell-1})."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("p must be a nonempty vector")
    if np.any(p <= 0.0):
        raise ValueError("p must be strictly positive")
    if ell < 1.0:
        raise ValueError("ell must be at least 1")
    n = float(p.size)
    return float(min(n**ell * float(p.min()), n ** (ell - 1.0)))
