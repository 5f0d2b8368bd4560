import numpy as np
import pytest
import scipy.optimize

from totipm.ipm import (
    DEFAULT_C0,
    NonConvergenceError,
    SolverConfig,
    SolverError,
    center,
    classify_weak_uniform,
    newton_direction,
    predicted_iterations,
    short_step_solve,
)
from totipm.oracle import solve_lp
from totipm.polytope import (
    ConstraintSystem,
    MarginalProblem,
    null_basis_matrix,
    random_interior_point,
    residual_norm,
    start_point,
)


def uniform_problem(dims, cost=None, variant="U"):
    cost = np.zeros(dims) if cost is None else np.asarray(cost, dtype=float)
    return MarginalProblem(
        cost=cost,
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


class TestSolverConfig:
    def test_defaults_valid(self):
        config = SolverConfig()
        assert config.step_gamma == 1.0 / 16.0
        assert config.decrement_beta == 0.25

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"epsilon": 0.0},
            {"epsilon": -1.0},
            {"step_gamma": 0.0},
            {"step_gamma": 0.2},
            {"decrement_beta": 0.0},
            {"decrement_beta": 0.3},
            {"center_tol": 0.0},
            {"max_iterations": 0},
            {"theta": -4.0},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            SolverConfig(**kwargs)


class TestNewtonDirection:
    def test_zero_at_symmetric_center(self):
        problem = uniform_problem((2, 2))
        delta, dec = newton_direction(problem, np.full((2, 2), 0.25), eta=0.0)
        assert np.abs(delta).max() <= 1e-14
        assert dec <= 1e-14

    def test_direction_stays_in_null_space(self):
        rng = np.random.default_rng(61)
        problem = random_problem((3, 3), rng)
        u = random_interior_point(problem, rng)
        delta, _ = newton_direction(problem, u, eta=2.0)
        base = residual_norm(problem, u)
        for t in (0.25, 0.5, 1.0):
            assert abs(residual_norm(problem, u + t * delta) - base) <= 1e-10

    def test_decrement_matches_null_basis_route(self):
        rng = np.random.default_rng(62)
        problem = random_problem((2, 2), rng)
        basis = null_basis_matrix(problem)
        for _ in range(5):
            u = random_interior_point(problem, rng)
            eta = float(rng.uniform(0.5, 3.0))
            _, dec = newton_direction(problem, u, eta)
            flat = u.ravel()
            g = eta * problem.cost.ravel() - 1.0 / flat
            h_t = (basis * (1.0 / flat**2)[:, None]).T @ basis
            g_t = basis.T @ g
            dec_ref = float(np.sqrt(g_t @ np.linalg.solve(h_t, g_t)))
            assert dec == pytest.approx(dec_ref, abs=1e-10)

    def test_matches_dense_kkt_oracle(self):
        rng = np.random.default_rng(63)
        problem = random_problem((3, 3), rng)
        a = ConstraintSystem(problem).matrix
        m, size = a.shape
        for _ in range(3):
            u = random_interior_point(problem, rng)
            eta = float(rng.uniform(0.5, 2.0))
            delta, _ = newton_direction(problem, u, eta)
            flat = u.ravel()
            g = eta * problem.cost.ravel() - 1.0 / flat
            kkt = np.zeros((size + m, size + m))
            kkt[:size, :size] = np.diag(1.0 / flat**2)
            kkt[:size, size:] = a.T
            kkt[size:, :size] = a
            rhs = np.concatenate([-g, np.zeros(m)])
            ref = np.linalg.solve(kkt, rhs)[:size]
            assert np.abs(delta.ravel() - ref).max() <= 1e-8

    def test_rejects_negative_eta(self):
        problem = uniform_problem((2, 2))
        with pytest.raises(ValueError):
            newton_direction(problem, start_point(problem), eta=-1.0)


class TestCenter:
    def test_uniform_start_already_central(self):
        problem = uniform_problem((2, 2))
        state = center(problem, start_point(problem), eta=0.0)
        assert state.iteration == 0
        assert state.decrement <= 1e-10
        assert np.array_equal(state.point, start_point(problem))

    def test_converges_from_skewed_marginals(self):
        problem = MarginalProblem(
            cost=np.zeros((2, 2)),
            marginals=(np.array([0.3, 0.7]), np.array([0.5, 0.5])),
        )
        u0 = start_point(problem) + 0.05 * np.array([[1.0, -1.0], [-1.0, 1.0]])
        state = center(problem, u0, eta=0.0)
        assert state.decrement <= 1e-10
        assert residual_norm(problem, state.point) <= 1e-10
        assert state.point.min() > 0.0

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_maximizes_log_sum(self):
        # at eta=0 the centered point maximizes sum(log u) over the slice;
        # compare against a constrained-optimization oracle (SLSQP clips
        # bounds internally during line search, hence the warning filter)
        rng = np.random.default_rng(64)
        problem = random_problem((3, 3), rng)
        state = center(problem, start_point(problem), eta=0.0)
        achieved = float(np.log(state.point).sum())
        a = ConstraintSystem(problem).matrix
        b = ConstraintSystem(problem).rhs
        x0 = start_point(problem).ravel()
        result = scipy.optimize.minimize(
            lambda x: -np.log(np.maximum(x, 1e-12)).sum(),
            x0,
            jac=lambda x: -1.0 / np.maximum(x, 1e-12),
            constraints=[{"type": "eq", "fun": lambda x: a @ x - b}],
            bounds=[(1e-9, None)] * x0.size,
            method="SLSQP",
            options={"maxiter": 200, "ftol": 1e-12},
        )
        assert achieved >= -result.fun - 1e-6

    def test_domain_error_on_boundary_point(self):
        problem = uniform_problem((2, 2))
        u0 = start_point(problem).copy()
        u0[0, 0] = 1e-301
        with pytest.raises(SolverError):
            center(problem, u0, eta=1.0)

    def test_nonconvergence_budget(self):
        problem = MarginalProblem(
            cost=np.zeros((2, 2)),
            marginals=(np.array([0.3, 0.7]), np.array([0.5, 0.5])),
        )
        u0 = start_point(problem) + 0.14 * np.array([[1.0, -1.0], [-1.0, 1.0]])
        with pytest.raises(NonConvergenceError):
            center(problem, u0, eta=0.0, config=SolverConfig(max_iterations=1))


class TestShortStepSolve:
    def test_zero_cost_matching(self):
        problem = uniform_problem((2, 2), [[0.0, 1.0], [1.0, 0.0]])
        report = short_step_solve(problem)
        assert report.value <= 1e-6
        assert report.gap_bound <= 1e-6

    def test_skewed_known_value(self):
        problem = MarginalProblem(
            cost=np.array([[0.0, 1.0], [1.0, 0.0]]),
            marginals=(np.array([0.5, 0.5]), np.array([0.25, 0.75])),
        )
        report = short_step_solve(problem)
        assert report.value == pytest.approx(0.25, abs=1e-6)

    def test_d3_matches_oracle(self):
        rng = np.random.default_rng(65)
        problem = uniform_problem((2, 2, 2), rng.integers(0, 10, size=(2, 2, 2)))
        report = short_step_solve(problem)
        assert report.value == pytest.approx(solve_lp(problem).value, abs=1e-6)

    def test_trace_invariants(self):
        rng = np.random.default_rng(66)
        problem = random_problem((3, 3), rng)
        config = SolverConfig(epsilon=1e-4)
        report = short_step_solve(problem, config)
        growth = 1.0 + config.step_gamma / np.sqrt(report.theta)
        gaps = [row.gap_bound for row in report.trace]
        assert all(a >= b for a, b in zip(gaps, gaps[1:]))
        for row in report.trace:
            assert row.decrement <= config.decrement_beta
        for prev, cur in zip(report.trace, report.trace[1:]):
            assert cur.eta / prev.eta == pytest.approx(growth, rel=1e-15)
        assert report.gap_bound <= config.epsilon
        assert report.theta == 9.0

    def test_final_iterate_feasible(self):
        rng = np.random.default_rng(67)
        for variant in ("U", "V"):
            problem = random_problem((2, 2, 2), rng, variant=variant)
            report = short_step_solve(problem)
            assert report.optimizer.min() > 0.0
            assert residual_norm(problem, report.optimizer) <= 1e-8

    def test_deterministic(self):
        rng = np.random.default_rng(68)
        problem = random_problem((3, 3), rng)
        first = short_step_solve(problem, SolverConfig(epsilon=1e-4))
        second = short_step_solve(problem, SolverConfig(epsilon=1e-4))
        assert first.trace == second.trace
        assert first.value == second.value

    def test_observer_sees_every_row(self):
        problem = uniform_problem((2, 2), [[0.0, 1.0], [1.0, 0.0]])
        states = []
        report = short_step_solve(
            problem, SolverConfig(epsilon=1e-2), observer=states.append
        )
        assert len(states) == len(report.trace)
        assert states[-1].iteration == report.iterations

    def test_nonconvergence_budget(self):
        problem = uniform_problem((2, 2), [[0.0, 1.0], [1.0, 0.0]])
        with pytest.raises(NonConvergenceError):
            short_step_solve(problem, SolverConfig(max_iterations=3))


class TestPredictedIterations:
    def test_frozen_reference_value(self):
        # sqrt(16) * ln(sqrt(2)*16 / (1e-3 * 1/16)) evaluated independently
        # with 40-digit decimal arithmetic
        problem = uniform_problem((4, 4))
        assert predicted_iterations(problem, 1e-3, c0=1.0) == pytest.approx(
            51.19802525496669, abs=1e-10
        )

    def test_monotone_in_epsilon(self):
        problem = uniform_problem((4, 4))
        values = [predicted_iterations(problem, eps) for eps in (1e-2, 1e-4, 1e-6)]
        assert values[0] < values[1] < values[2]

    def test_uniform_reduction_identity(self):
        # with uniform marginals the bound collapses to
        # C0 n^{d/2} log(sqrt(2) eps^-1 n^{d(1+ell)} K^-d) at K = ell = 1
        for d, n in [(2, 4), (3, 3)]:
            problem = uniform_problem((n,) * d)
            eps = 1e-3
            reduced = (
                DEFAULT_C0
                * n ** (d / 2.0)
                * np.log(np.sqrt(2.0) / eps * float(n) ** (2 * d))
            )
            assert predicted_iterations(problem, eps) == pytest.approx(
                reduced, rel=1e-12
            )

    def test_rejects_bad_epsilon(self):
        with pytest.raises(ValueError):
            predicted_iterations(uniform_problem((2, 2)), 0.0)


class TestClassifyWeakUniform:
    def test_uniform_is_one(self):
        for n in (2, 5, 9):
            assert classify_weak_uniform(np.full(n, 1.0 / n), 1.0) == pytest.approx(1.0)

    def test_skewed_ell1(self):
        assert classify_weak_uniform(np.array([0.5, 0.25, 0.25]), 1.0) == pytest.approx(
            0.75
        )

    def test_skewed_ell2(self):
        assert classify_weak_uniform(np.array([0.9, 0.1]), 2.0) == pytest.approx(0.4)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            classify_weak_uniform(np.array([0.5, -0.5]), 1.0)
        with pytest.raises(ValueError):
            classify_weak_uniform(np.array([0.5, 0.5]), 0.5)
