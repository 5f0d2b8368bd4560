"""Log-barrier calculus over the positive orthant, with verification hooks.

The barrier is sigma(u) = -sum_i log u_i on tensors with positive entries.
Its derivatives are coordinatewise (gradient -1/u, diagonal Hessian 1/u^2),
which the solver exploits; this module also provides the directional third
form, a self-concordance slack check, the Moore-Penrose pseudo-quadratic
y^T A^+ y used by complexity certificates, and the complexity value of the
barrier restricted to an affine slice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .tensor import inner

__all__ = [
    "BarrierEval",
    "ConcordanceSample",
    "CertificateError",
    "eval_barrier",
    "directional_forms",
    "check_self_concordance",
    "pseudo_quadratic",
    "complexity_value",
]


class CertificateError(ValueError):
    """Raised when a certificate computation's preconditions fail: a
    non-symmetric or indefinite matrix, or a vector leaving the row space."""


@dataclass(frozen=True)
class BarrierEval:
    """Value, gradient and diagonal Hessian of the barrier at one point."""

    value: float
    gradient: np.ndarray
    hessian_diag: np.ndarray


@dataclass(frozen=True)
class ConcordanceSample:
    """Second and third directional derivatives of the barrier at a point
    along a direction, as used by the self-concordance inequality."""

    second: float
    third: float


def eval_barrier(u) -> BarrierEval:
    u = np.asarray(u, dtype=np.float64)
    if u.size == 0:
        raise ValueError("barrier is undefined on an empty tensor")
    if np.any(u <= 0.0):
        raise ValueError("barrier requires strictly positive entries")
    return BarrierEval(
        value=float(-np.log(u).sum()),
        gradient=-1.0 / u,
        hessian_diag=1.0 / u**2,
    )


def directional_forms(u, v) -> ConcordanceSample:
    """Second and third derivatives of t -> sigma(u + t v) at t = 0:
    sum v_i^2 / u_i^2 and -2 sum v_i^3 / u_i^3."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    if np.any(u <= 0.0):
        raise ValueError("barrier requires strictly positive entries")
    ratio = v / u
    return ConcordanceSample(
        second=float(np.sum(ratio**2)),
        third=float(-2.0 * np.sum(ratio**3)),
    )


def check_self_concordance(sample: ConcordanceSample, a: float = 1.0):
    """Slack of |third| <= 2 a^{-1/2} second^{3/2} and whether it holds.

    Returns ``(ok, slack)`` with slack = bound - |third|; ok tolerates
    rounding down to -1e-12.  The log barrier satisfies the inequality with
    a = 1, and with equality along single-coordinate directions.
    """
    if a <= 0.0:
        raise ValueError("concordance parameter a must be positive")
    if sample.second < 0.0:
        raise ValueError("second directional derivative cannot be negative")
    slack = 2.0 / np.sqrt(a) * sample.second**1.5 - abs(sample.third)
    return slack >= -1e-12, float(slack)


def pseudo_quadratic(a, y) -> float:
    """y^T A^+ y for symmetric PSD ``a`` via an eigendecomposition.

    Eigenvalues at or below 1e-10 times the largest are treated as kernel;
    ``y`` must then be orthogonal to the kernel (within 1e-8, relative to
    ``max(norm(y), 1)``) or the quadratic is undefined and CertificateError
    is raised.  When A - y y^T is PSD the value is at most 1.
    """
    a = np.asarray(a, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise CertificateError(f"expected a square matrix, got shape {a.shape}")
    if y.size != a.shape[0]:
        raise CertificateError(
            f"vector has length {y.size}, matrix has order {a.shape[0]}"
        )
    scale = max(1.0, float(np.abs(a).max()))
    if float(np.abs(a - a.T).max()) > 1e-10 * scale:
        raise CertificateError("matrix is not symmetric")
    w, q = scipy.linalg.eigh(a)
    if w[-1] <= 0.0:
        # A is (numerically) the zero matrix; only y = 0 stays in range
        if float(np.linalg.norm(y)) > 1e-8:
            raise CertificateError("vector lies outside the range of the matrix")
        return 0.0
    if w[0] < -1e-10 * w[-1]:
        raise CertificateError(f"matrix is not positive semidefinite (lambda_min={w[0]!r})")
    kernel = w <= 1e-10 * w[-1]
    z = q.T @ y
    if np.any(kernel):
        leak = float(np.linalg.norm(z[kernel]))
        if leak > 1e-8 * max(1.0, float(np.linalg.norm(y))):
            raise CertificateError(
                f"vector has component {leak!r} in the kernel of the matrix"
            )
    zr = z[~kernel]
    return float(np.sum(zr**2 / w[~kernel]))


def complexity_value(u, basis=None) -> float:
    """The Newton decrement squared of the barrier at its analytic-center
    scaling: grad^T H^{-1} grad.

    With ``basis`` None this is over the full orthant and equals the number
    of entries exactly.  With ``basis`` an N x t matrix whose columns span a
    subspace, the barrier is restricted to ``u + span(basis)`` and the value
    is g_t^T H_t^{-1} g_t for the restricted gradient and Hessian; it never
    exceeds the unrestricted value.
    """
    u = np.asarray(u, dtype=np.float64)
    if np.any(u <= 0.0):
        raise ValueError("barrier requires strictly positive entries")
    g = (-1.0 / u).ravel()
    d2 = (1.0 / u**2).ravel()
    if basis is None:
        return float(np.sum(g**2 / d2))
    b = np.asarray(basis, dtype=np.float64)
    if b.ndim != 2 or b.shape[0] != u.size:
        raise ValueError(
            f"basis must be {u.size} x t, got shape {b.shape}"
        )
    if b.shape[1] == 0:
        return 0.0
    gt = b.T @ g
    ht = (b * d2[:, None]).T @ b
    c, low = scipy.linalg.cho_factor(ht)
    return float(gt @ scipy.linalg.cho_solve((c, low), gt))
