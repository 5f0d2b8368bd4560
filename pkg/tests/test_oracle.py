import itertools

import numpy as np
import pytest

from totipm.oracle import (
    DualCertificate,
    StandardFormLP,
    dual_certificate,
    dual_feasible,
    dual_value,
    simplex_solve,
    solve_lp,
    to_lp,
)
from totipm.polytope import MarginalProblem, null_basis, start_point


def uniform_problem(dims, cost, variant="U"):
    return MarginalProblem(
        cost=np.asarray(cost, dtype=float),
        marginals=tuple(np.full(n, 1.0 / n) for n in dims),
        variant=variant,
    )


def random_problem(dims, rng, variant="U"):
    cost = rng.integers(0, 10, size=dims).astype(float)
    marginals = []
    for n in dims:
        p = rng.uniform(0.2, 1.0, size=n)
        marginals.append(p / p.sum())
    return MarginalProblem(cost=cost, marginals=tuple(marginals), variant=variant)


def enumerate_bfs_minimum(lp):
    """Exhaustive minimum over basic feasible solutions: every full-rank
    m-column subset with a nonnegative basic solution."""
    m, n = lp.a.shape
    best = np.inf
    for cols in itertools.combinations(range(n), m):
        sub = lp.a[:, cols]
        if np.linalg.matrix_rank(sub) < m:
            continue
        x_basic = np.linalg.solve(sub, lp.b)
        if x_basic.min() < -1e-9:
            continue
        best = min(best, float(lp.c[list(cols)] @ x_basic))
    return best


class TestToLp:
    def test_2x2_shape(self):
        lp = to_lp(uniform_problem((2, 2), np.zeros((2, 2))))
        assert lp.a.shape == (3, 4)

    def test_2x2x2_shape(self):
        lp = to_lp(uniform_problem((2, 2, 2), np.zeros((2, 2, 2))))
        assert lp.a.shape == (4, 8)

    def test_start_point_feasible(self):
        problem = uniform_problem((3, 2, 2), np.zeros((3, 2, 2)))
        lp = to_lp(problem)
        assert np.abs(lp.a @ start_point(problem).ravel() - lp.b).max() <= 1e-12


class TestSimplexKnownValues:
    def test_zero_diagonal_uniform(self):
        problem = uniform_problem((2, 2), [[0.0, 1.0], [1.0, 0.0]])
        result = solve_lp(problem)
        assert result.value == pytest.approx(0.0, abs=1e-12)
        assert result.x.reshape(2, 2) == pytest.approx(np.diag([0.5, 0.5]), abs=1e-12)

    def test_skewed_marginals(self):
        problem = MarginalProblem(
            cost=np.array([[0.0, 1.0], [1.0, 0.0]]),
            marginals=(np.array([0.5, 0.5]), np.array([0.25, 0.75])),
        )
        # mass matrix is [[t, 0.5-t], [0.25-t, 0.25+t]] for t in [0, 0.25];
        # objective 0.75 - 2t is minimized at t = 0.25
        assert solve_lp(problem).value == pytest.approx(0.25, abs=1e-12)


class TestSimplexAgainstEnumeration:
    def test_random_3x3(self):
        rng = np.random.default_rng(51)
        for _ in range(8):
            problem = random_problem((3, 3), rng)
            lp = to_lp(problem)
            assert simplex_solve(lp).value == pytest.approx(
                enumerate_bfs_minimum(lp), abs=1e-9
            )

    def test_random_2x2x2_both_variants(self):
        rng = np.random.default_rng(52)
        for variant in ("U", "V"):
            for _ in range(4):
                problem = random_problem((2, 2, 2), rng, variant=variant)
                lp = to_lp(problem)
                assert simplex_solve(lp).value == pytest.approx(
                    enumerate_bfs_minimum(lp), abs=1e-9
                )

    def test_v_variant_segment_oracle(self):
        # the 2x2x2 mode-sum slice is one-dimensional, so the optimum sits at
        # an endpoint of the feasible segment through the start point
        rng = np.random.default_rng(53)
        for _ in range(5):
            problem = random_problem((2, 2, 2), rng, variant="V")
            base = start_point(problem)
            (direction,) = null_basis(problem)
            c = problem.cost
            lo = -np.inf
            hi = np.inf
            for idx in np.ndindex(2, 2, 2):
                if direction[idx] > 0:
                    lo = max(lo, -base[idx] / direction[idx])
                else:
                    hi = min(hi, -base[idx] / direction[idx])
            values = [
                float((c * (base + t * direction)).sum()) for t in (lo, hi)
            ]
            assert solve_lp(problem).value == pytest.approx(min(values), abs=1e-9)


class TestSimplexStatuses:
    def test_infeasible(self):
        lp = StandardFormLP(
            a=np.array([[1.0], [1.0]]), b=np.array([1.0, 2.0]), c=np.array([0.0])
        )
        assert simplex_solve(lp).status == "infeasible"

    def test_unbounded(self):
        lp = StandardFormLP(
            a=np.array([[1.0, -1.0]]), b=np.array([0.0]), c=np.array([-1.0, 0.0])
        )
        assert simplex_solve(lp).status == "unbounded"

    def test_vertex_support(self):
        rng = np.random.default_rng(54)
        for _ in range(5):
            problem = random_problem((3, 3), rng)
            result = solve_lp(problem)
            rows = to_lp(problem).a.shape[0]
            assert int(np.sum(result.x > 1e-9)) <= rows


class TestDuality:
    def test_strong_duality_and_feasibility(self):
        rng = np.random.default_rng(55)
        for dims in [(3, 3), (4, 3), (2, 2, 2)]:
            for _ in range(4):
                problem = random_problem(dims, rng)
                result = solve_lp(problem)
                cert = dual_certificate(problem, result)
                ok, min_slack = dual_feasible(problem, cert, tol=1e-9)
                assert ok
                assert min_slack >= -1e-9
                assert dual_value(problem, cert) == pytest.approx(
                    result.value, abs=1e-9
                )

    def test_zero_potentials(self):
        problem = uniform_problem((2, 2), [[0.0, 1.0], [1.0, 0.0]])
        cert = DualCertificate(potentials=(np.zeros(2), np.zeros(2)), total=0.0)
        ok, _ = dual_feasible(problem, cert)
        assert ok
        assert dual_value(problem, cert) == 0.0

    def test_inflated_potential_infeasible(self):
        problem = uniform_problem((2, 2), [[0.0, 1.0], [1.0, 0.0]])
        cert = DualCertificate(
            potentials=(np.array([1.0, 1.0]), np.zeros(2)), total=0.0
        )
        ok, min_slack = dual_feasible(problem, cert)
        assert not ok
        assert min_slack < 0.0

    def test_v_variant_rejected(self):
        problem = uniform_problem((2, 2), np.zeros((2, 2)), variant="V")
        result = solve_lp(problem)
        with pytest.raises(ValueError):
            dual_certificate(problem, result)


class TestMetricCost:
    def test_identity_coupling(self):
        rng = np.random.default_rng(56)
        for n in (3, 4):
            for _ in range(3):
                cost = rng.uniform(0.5, 3.0, size=(n, n))
                cost = cost + cost.T
                np.fill_diagonal(cost, 0.0)
                p = rng.uniform(0.2, 1.0, size=n)
                p /= p.sum()
                problem = MarginalProblem(cost=cost, marginals=(p, p))
                result = solve_lp(problem)
                assert result.value == pytest.approx(0.0, abs=1e-9)
                assert result.x.reshape(n, n) == pytest.approx(np.diag(p), abs=1e-9)
