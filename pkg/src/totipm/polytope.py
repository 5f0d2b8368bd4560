"""Feasible sets of marginal-constrained transport tensors.

Two polytope variants over nonnegative d-mode tensors with prescribed
positive probability vectors p_1..p_d:

* variant ``"U"`` (marginal): the mode-k marginal, i.e. the contraction
  against all-ones on the other modes, equals p_k for every mode k;
* variant ``"V"`` (mode-sum): summing along mode k yields the outer
  product of the other marginals.

For d = 2 the variants coincide.  Both contain the product tensor
``outer(p_1, .., p_d)``, which is strictly positive and serves as the
interior starting point of the path-following solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .tensor import contract_all_but, frobenius_norm, inner, marginal, mode_contract, outer

__all__ = [
    "MarginalProblem",
    "ConstraintSystem",
    "start_point",
    "residual",
    "residual_norm",
    "adjoint_marginals",
    "null_basis",
    "null_basis_matrix",
    "null_space_dim",
    "sym_lower_bound",
    "feasible",
    "centering_project",
    "random_interior_point",
]

VARIANTS = ("U", "V")

# Marginal sums must match 1 this tightly at construction; forgiving
# normalisation belongs to the instance loader, not here.
_MARGINAL_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MarginalProblem:
    """A cost tensor, one positive probability vector per mode, and a variant."""

    cost: np.ndarray
    marginals: tuple
    variant: str = "U"

    def __post_init__(self):
        cost = np.ascontiguousarray(self.cost, dtype=np.float64)
        margs = tuple(np.ascontiguousarray(p, dtype=np.float64) for p in self.marginals)
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if cost.ndim != len(margs):
            raise ValueError(
                f"cost has {cost.ndim} modes but {len(margs)} marginals were given"
            )
        for k, p in enumerate(margs):
            if p.ndim != 1 or p.size != cost.shape[k]:
                raise ValueError(
                    f"marginal {k} has length {p.size}, expected {cost.shape[k]}"
                )
            if np.any(p <= 0.0):
                raise ValueError(f"marginal {k} must be strictly positive")
            if abs(p.sum() - 1.0) > _MARGINAL_SUM_TOL:
                raise ValueError(f"marginal {k} sums to {p.sum()!r}, expected 1")
        cost.flags.writeable = False
        for p in margs:
            p.flags.writeable = False
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "marginals", margs)

    @property
    def dims(self) -> tuple:
        return self.cost.shape

    @property
    def d(self) -> int:
        return self.cost.ndim

    @property
    def size(self) -> int:
        return self.cost.size


def _u_rows(dims) -> np.ndarray:
    """Reduced marginal rows: the first n_k - 1 rows of every mode, then one
    total-mass row.  Always full row rank (1 + sum(n_k - 1) rows)."""
    d = len(dims)
    size = int(np.prod(dims))
    rows = []
    for k, n in enumerate(dims):
        for r in range(n - 1):
            t = np.zeros(dims)
            idx = [slice(None)] * d
            idx[k] = r
            t[tuple(idx)] = 1.0
            rows.append(t.ravel())
    rows.append(np.ones(size))
    return np.array(rows)


def _u_rhs(problem: MarginalProblem) -> np.ndarray:
    parts = [p[:-1] for p in problem.marginals]
    parts.append([1.0])
    return np.concatenate(parts)


def _v_full_rows(problem: MarginalProblem):
    """One row per (mode, multi-index of the other modes), in row-major order."""
    dims = problem.dims
    d = len(dims)
    rows = []
    rhs = []
    for k in range(d):
        other = [p for j, p in enumerate(problem.marginals) if j != k]
        target = outer(other) if other else np.array(1.0)
        for j_idx in np.ndindex(*target.shape):
            t = np.zeros(dims)
            idx = list(j_idx[:k]) + [slice(None)] + list(j_idx[k:])
            t[tuple(idx)] = 1.0
            rows.append(t.ravel())
            rhs.append(float(target[j_idx]))
    return np.array(rows), np.array(rhs)


class ConstraintSystem:
    """Full-row-rank equality description ``A vec(X) = b`` of the affine slice.

    Variant "U" drops the last marginal row of every mode and appends a single
    total-mass row; the result has 1 + sum(n_k - 1) rows and full row rank for
    every d.  Variant "V" starts from the explicit per-mode rows (one per
    multi-index of the other modes) and removes redundant rows numerically via
    rank-revealing QR; the surviving system has prod(n_k) - prod(n_k - 1) rows.
    """

    def __init__(self, problem: MarginalProblem):
        self.variant = problem.variant
        self.dims = problem.dims
        if problem.variant == "U":
            self.matrix = _u_rows(problem.dims)
            self.rhs = _u_rhs(problem)
            self.full_matrix = self.matrix
            self.full_rhs = self.rhs
        else:
            full, full_rhs = _v_full_rows(problem)
            self.full_matrix = full
            self.full_rhs = full_rhs
            # rank-revealing QR on A^T; keeping pivot rows in original order
            # makes the reduction deterministic
            _, r, piv = scipy.linalg.qr(full.T, mode="economic", pivoting=True)
            diag = np.abs(np.diag(r))
            rank = int(np.sum(diag > 1e-10 * diag[0]))
            keep = np.sort(piv[:rank])
            self.matrix = full[keep]
            self.rhs = full_rhs[keep]

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]


def start_point(problem: MarginalProblem) -> np.ndarray:
    """The product tensor of the marginals: strictly positive and feasible
    for both variants."""
    return outer(problem.marginals)


def residual(problem: MarginalProblem, u) -> list:
    """Per-mode constraint residuals of ``u``.

    Variant "U": d vectors, mode-k marginal minus p_k.  Variant "V": d
    tensors, mode-k sum minus the outer product of the other marginals.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.shape != problem.dims:
        raise ValueError(f"expected shape {problem.dims}, got {u.shape}")
    out = []
    for k in range(problem.d):
        if problem.variant == "U":
            out.append(marginal(u, k) - problem.marginals[k])
        else:
            other = [p for j, p in enumerate(problem.marginals) if j != k]
            target = outer(other) if other else np.array(1.0)
            out.append(mode_contract(u, k, np.ones(problem.dims[k])) - target)
    return out


def residual_norm(problem: MarginalProblem, u) -> float:
    """Largest Frobenius norm among the per-mode residuals."""
    return max(frobenius_norm(r) for r in residual(problem, u))


def adjoint_marginals(dims, multipliers, total: float) -> np.ndarray:
    """Adjoint of the reduced "U" constraint operator.

    ``multipliers`` holds one vector of length n_k - 1 per mode (the dropped
    last row of each mode has an implicit zero multiplier); ``total`` is the
    multiplier of the total-mass row.  Entry (i_1..i_d) of the result is
    sum_k lam_k[i_k] + total.
    """
    dims = tuple(int(n) for n in dims)
    d = len(dims)
    if len(multipliers) != d:
        raise ValueError(f"expected {d} multiplier vectors, got {len(multipliers)}")
    out = np.full(dims, float(total))
    for k, lam in enumerate(multipliers):
        lam = np.asarray(lam, dtype=np.float64)
        if lam.shape != (dims[k] - 1,):
            raise ValueError(
                f"multiplier {k} has shape {lam.shape}, expected ({dims[k] - 1},)"
            )
        padded = np.concatenate([lam, [0.0]])
        shape = [1] * d
        shape[k] = dims[k]
        out = out + padded.reshape(shape)
    return out


def _difference_vectors(n: int) -> list:
    """e_i - e_{i+1} for i in range(n - 1)."""
    out = []
    for i in range(n - 1):
        g = np.zeros(n)
        g[i] = 1.0
        g[i + 1] = -1.0
        out.append(g)
    return out


def null_space_dim(problem: MarginalProblem) -> int:
    dims = problem.dims
    if problem.variant == "V":
        return int(np.prod([n - 1 for n in dims]))
    return int(np.prod(dims)) - 1 - sum(n - 1 for n in dims)


def null_basis(problem: MarginalProblem) -> list:
    """Linearly independent tensors spanning the homogeneous solution set.

    Variant "V" (any d): outer products of per-mode difference vectors,
    prod(n_k - 1) elements.  Variant "U", d = 2: the difference basis
    g_i h_j^T, (m-1)(n-1) elements.  Variant "U", d > 2: an orthonormal
    kernel basis of the reduced constraint matrix, computed numerically.
    """
    dims = problem.dims
    if problem.variant == "V":
        diffs = [_difference_vectors(n) for n in dims]
        basis = []
        for combo in np.ndindex(*[n - 1 for n in dims]):
            basis.append(outer([diffs[k][i] for k, i in enumerate(combo)]))
        return basis
    if problem.d == 1:
        return []
    if problem.d == 2:
        gs = _difference_vectors(dims[0])
        hs = _difference_vectors(dims[1])
        return [outer([g, h]) for g in gs for h in hs]
    a = ConstraintSystem(problem).matrix
    kernel = scipy.linalg.null_space(a)
    expected = null_space_dim(problem)
    if kernel.shape[1] != expected:
        raise RuntimeError(
            f"kernel dimension {kernel.shape[1]} does not match the forced "
            f"count {expected} for shape {dims}"
        )
    return [kernel[:, j].reshape(dims) for j in range(kernel.shape[1])]


def null_basis_matrix(problem: MarginalProblem) -> np.ndarray:
    """Basis elements flattened into the columns of an N x t matrix."""
    basis = null_basis(problem)
    if not basis:
        return np.zeros((problem.size, 0))
    return np.column_stack([e.ravel() for e in basis])


def sym_lower_bound(problem: MarginalProblem) -> float:
    """Lower bound prod_k(min_i p_k[i]) / sqrt(2) on the symmetry of the
    start point inside the feasible slice."""
    prod = 1.0
    for p in problem.marginals:
        prod *= float(p.min())
    return prod / np.sqrt(2.0)


def feasible(problem: MarginalProblem, u, tol: float) -> bool:
    """True iff all entries >= -tol and every residual norm is <= tol."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != problem.dims:
        raise ValueError(f"expected shape {problem.dims}, got {u.shape}")
    if float(u.min()) < -tol:
        return False
    return residual_norm(problem, u) <= tol


def centering_project(u) -> np.ndarray:
    """Orthogonal projection onto the variant-"V" null space: subtract the
    mean along every mode (the Kronecker product of per-mode centerings)."""
    out = np.asarray(u, dtype=np.float64).copy()
    for k in range(out.ndim):
        out -= out.mean(axis=k, keepdims=True)
    return out


def random_interior_point(problem: MarginalProblem, rng, scale: float = 0.9) -> np.ndarray:
    """A strictly positive feasible point: the start point plus a random
    null-space direction, scaled to keep a margin from the boundary."""
    if not 0.0 < scale < 1.0:
        raise ValueError("scale must lie in (0, 1)")
    x = start_point(problem).ravel()
    b = null_basis_matrix(problem)
    if b.shape[1] == 0:
        return x.reshape(problem.dims)
    direction = b @ rng.uniform(-1.0, 1.0, size=b.shape[1])
    neg = direction < 0.0
    if np.any(neg):
        alpha = float(np.min(x[neg] / -direction[neg]))
    else:
        alpha = 1.0
    step = scale * rng.uniform(0.0, 1.0) * alpha
    return (x + step * direction).reshape(problem.dims)
