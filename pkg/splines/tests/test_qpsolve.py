"""Tests for the interior-point QP solver and null-space utilities."""
import dataclasses
import itertools

import numpy as np
import pytest
from scipy import sparse

from splines.assembly import CutSet, build_G, build_H, build_problem
from splines.exceptions import ConfigError, DegenerateProblemError, QpConstructionError
from splines.qpsolve import (
    QpProblem,
    QpSettings,
    QpStatus,
    kkt_residuals,
    null_space_basis,
    solve_qp,
    strong_convexity_gamma,
)
from splines.tests.utils import random_partition, rule_dataset


def enumerate_active_sets(P, q, E, e, C, c):
    """Exact optimum of a small strictly convex QP by trying every active set."""
    n, n_eq = q.size, e.size
    best = None
    for size in range(0, min(len(c), n - n_eq) + 1):
        for active in itertools.combinations(range(len(c)), size):
            rows = np.vstack([E, C[list(active)]]) if size else E
            rhs = np.concatenate([e, c[list(active)]])
            k = rows.shape[0]
            kkt = np.block([[P, rows.T], [rows, np.zeros((k, k))]])
            try:
                solution = np.linalg.solve(kkt, np.concatenate([-q, rhs]))
            except np.linalg.LinAlgError:
                continue
            b, multipliers = solution[:n], solution[n:]
            # our sign convention is P b + q - C'mu + E'nu = 0
            mu = -multipliers[n_eq:]
            if np.all(C @ b >= c - 1e-9) and np.all(mu >= -1e-9):
                value = 0.5 * b @ P @ b + q @ b
                if best is None or value < best:
                    best = value
    return best


class TestProblemValidation:
    """Dimension and symmetry checks."""

    def test_asymmetric_P(self):
        with pytest.raises(QpConstructionError, match='symmetric'):
            QpProblem(P=np.array([[1.0, 1.0], [0.0, 1.0]]), q=np.zeros(2))

    def test_q_size(self):
        with pytest.raises(QpConstructionError):
            QpProblem(P=np.eye(2), q=np.zeros(3))

    def test_constraint_columns(self):
        with pytest.raises(QpConstructionError, match='columns'):
            QpProblem(P=np.eye(2), q=np.zeros(2), C=np.ones((1, 3)))

    def test_defaults(self):
        problem = QpProblem(P=np.eye(3), q=np.ones(3))
        assert (problem.n, problem.n_eq, problem.n_ineq) == (3, 0, 0)

    def test_settings_validation(self):
        with pytest.raises(ConfigError):
            QpSettings(tol=0.0)
        with pytest.raises(ConfigError):
            QpSettings(max_iterations=0)


class TestSolveQp:
    """Small problems with known answers."""

    def test_equality_constrained(self):
        # min b1^2 + b2^2 s.t. b1 + b2 = 1
        problem = QpProblem(P=2 * np.eye(2), q=np.zeros(2), E=np.array([[1.0, 1.0]]), e=[1.0])
        solution = solve_qp(problem)
        assert solution.status is QpStatus.OPTIMAL
        np.testing.assert_allclose(solution.b, [0.5, 0.5], atol=1e-12)
        np.testing.assert_allclose(solution.nu, [-1.0], atol=1e-12)

    def test_active_bound(self):
        # min (b + 1)^2 s.t. b >= 0
        problem = QpProblem(P=[[2.0]], q=[2.0], C=[[1.0]], c=[0.0])
        solution = solve_qp(problem)
        assert solution.optimal
        assert solution.b[0] == pytest.approx(0.0, abs=1e-8)
        assert solution.mu[0] == pytest.approx(2.0, abs=1e-6)

    def test_inactive_bound(self):
        problem = QpProblem(P=[[2.0]], q=[-2.0], C=[[1.0]], c=[0.0])
        solution = solve_qp(problem)
        assert solution.b[0] == pytest.approx(1.0, abs=1e-8)
        assert solution.mu[0] == pytest.approx(0.0, abs=1e-8)

    def test_sparse_inputs(self):
        problem = QpProblem(P=sparse.identity(3, format='csc') * 2, q=-2 * np.ones(3),
                            C=sparse.identity(3, format='csc'), c=np.full(3, 2.0))
        solution = solve_qp(problem)
        np.testing.assert_allclose(solution.b, 2.0, atol=1e-8)

    def test_iteration_limit(self):
        problem = QpProblem(P=[[2.0]], q=[2.0], C=[[1.0]], c=[0.0])
        solution = solve_qp(problem, QpSettings(max_iterations=1))
        assert solution.status is QpStatus.MAX_ITERS
        assert not solution.optimal

    def test_reported_residuals_match(self):
        problem = QpProblem(P=[[2.0]], q=[2.0], C=[[1.0]], c=[0.0])
        solution = solve_qp(problem)
        assert kkt_residuals(problem, solution) == solution.kkt_residuals
        assert solution.kkt_residuals.max() <= 1e-9

    @pytest.mark.slow
    def test_agrees_with_active_set_enumeration(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            n = int(rng.integers(2, 13))
            n_eq = int(rng.integers(0, min(3, n)))
            n_ineq = int(rng.integers(1, 9))
            M = rng.standard_normal((n, n))
            P = M @ M.T + 0.5 * np.eye(n)
            q = rng.standard_normal(n)
            anchor = rng.standard_normal(n)
            E = rng.standard_normal((n_eq, n))
            e = E @ anchor
            C = rng.standard_normal((n_ineq, n))
            c = C @ anchor - rng.uniform(0.0, 1.0, n_ineq)

            solution = solve_qp(QpProblem(P=P, q=q, E=E, e=e, C=C, c=c))
            assert solution.optimal
            assert solution.kkt_residuals.max() <= 1e-9
            expected = enumerate_active_sets(P, q, E, e, C, c)
            value = 0.5 * solution.b @ P @ solution.b + q @ solution.b
            assert abs(value - expected) <= 1e-7 * (1.0 + abs(expected))


class TestNullSpace:
    """Null-space basis and strong convexity constant."""

    def test_basis(self):
        space = null_space_basis(np.array([[1.0, 1.0, 0.0]]))
        assert space.basis.shape == (3, 2)
        assert space.rank == 1
        assert not space.rank_deficient
        np.testing.assert_allclose(np.array([[1.0, 1.0, 0.0]]) @ space.basis, 0.0, atol=1e-14)
        np.testing.assert_allclose(space.basis.T @ space.basis, np.eye(2), atol=1e-14)

    def test_no_rows(self):
        space = null_space_basis(sparse.csc_matrix((0, 4)))
        np.testing.assert_array_equal(space.basis, np.eye(4))

    def test_rank_deficient(self):
        assert null_space_basis(np.array([[1.0, 0.0], [2.0, 0.0]])).rank_deficient

    def test_gamma_of_identity(self):
        gamma = strong_convexity_gamma(np.eye(3), np.zeros((3, 3)), 1.0, sparse.csc_matrix((0, 3)))
        assert gamma == pytest.approx(2.0)

    def test_gamma_restricted_to_null_space(self):
        # on {b1 = b2} the Hessian half diag(1, 3) has Rayleigh quotient 2
        gamma = strong_convexity_gamma(np.diag([1.0, np.sqrt(3.0)]), np.zeros((2, 2)), 1.0,
                                       np.array([[1.0, -1.0]]))
        assert gamma == pytest.approx(4.0)

    def test_lambda_must_be_positive(self):
        with pytest.raises(ConfigError):
            strong_convexity_gamma(np.eye(2), np.eye(2), 0.0, np.zeros((0, 2)))

    def test_degenerate(self):
        with pytest.raises(DegenerateProblemError):
            strong_convexity_gamma(np.zeros((2, 2)), np.zeros((2, 2)), 1.0, np.zeros((0, 2)))


def random_qp(rng):
    """Strictly convex QP with a feasible anchor point."""
    n = int(rng.integers(2, 10))
    n_eq = int(rng.integers(0, min(3, n)))
    n_ineq = int(rng.integers(1, 8))
    M = rng.standard_normal((n, n))
    anchor = rng.standard_normal(n)
    E = rng.standard_normal((n_eq, n))
    C = rng.standard_normal((n_ineq, n))
    return QpProblem(P=M @ M.T + 0.5 * np.eye(n), q=rng.standard_normal(n), E=E, e=E @ anchor,
                     C=C, c=C @ anchor - rng.uniform(0.0, 1.0, n_ineq))


def dual_value(problem, solution):
    """Lagrange dual function at the returned multipliers."""
    P = problem.P.toarray()
    w = problem.q - problem.C.T @ solution.mu + problem.E.T @ solution.nu
    return float(-0.5 * w @ np.linalg.solve(P, w) + solution.mu @ problem.c - solution.nu @ problem.e)


class TestOptimality:
    """Dual gap, relaxation order and repeatability."""

    def test_duality_gap_closes(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            problem = random_qp(rng)
            solution = solve_qp(problem)
            assert solution.optimal
            assert np.all(solution.mu >= 0.0)
            primal = problem.objective(solution.b)
            assert abs(primal - dual_value(problem, solution)) <= 1e-8 * (1.0 + abs(primal))

    def test_more_cuts_never_lower_the_cost(self):
        data = rule_dataset(10, 3)
        matrices = build_problem(data.x, data.y, data.partition(), 3)
        rng = np.random.default_rng(12)
        previous = -np.inf
        cuts = CutSet.empty(data.partition().m)
        for _ in range(6):
            cuts = cuts.with_points({int(i): float(tau) for i, tau in
                                     zip(rng.integers(0, cuts.m, 4), rng.uniform(0.0, 1.0, 4))})
            G = build_G(cuts, 3, cuts.m)
            solution = solve_qp(matrices.to_qp(0.004, C=G, c=np.zeros(G.shape[0])))
            assert solution.optimal
            cost = matrices.cost(solution.b, 0.004)
            assert previous <= cost + 1e-9
            previous = cost

    def test_repeat_solves_are_identical(self):
        problem = random_qp(np.random.default_rng(13))
        first, second = solve_qp(problem), solve_qp(problem)
        assert first.iterations == second.iterations
        np.testing.assert_array_equal(first.b, second.b)
        np.testing.assert_array_equal(first.mu, second.mu)
        assert problem.objective(first.b) == problem.objective(second.b)


class TestKktResiduals:
    """Residuals of perturbed solutions."""

    def test_stationarity_grows_with_perturbation(self):
        # min b1^2 + b2^2 s.t. b1 + b2 = 1; moving along (1, -1) keeps b feasible
        problem = QpProblem(P=2 * np.eye(2), q=np.zeros(2), E=np.array([[1.0, 1.0]]), e=[1.0])
        solution = solve_qp(problem)
        assert kkt_residuals(problem, solution).stationarity <= 1e-12
        for size in (1e-3, 2e-3, 4e-3):
            moved = dataclasses.replace(solution, b=solution.b + size * np.array([1.0, -1.0]))
            residuals = kkt_residuals(problem, moved)
            assert residuals.stationarity == pytest.approx(2.0 * size, rel=1e-9)
            assert residuals.primal_eq <= 1e-15

    def test_infeasible_point_shows_violation(self):
        problem = QpProblem(P=[[2.0]], q=[2.0], C=[[1.0]], c=[0.0])
        solution = solve_qp(problem)
        moved = dataclasses.replace(solution, b=np.array([-1e-3]))
        assert kkt_residuals(problem, moved).primal_ineq == pytest.approx(1e-3)


class TestSplineNullSpace:
    """Null space of the continuity rows and the convexity constant."""

    @pytest.mark.parametrize('degree', [3, 5])
    def test_orthonormal_basis_of_continuity_rows(self, degree):
        rng = np.random.default_rng(14)
        partition = random_partition(rng, 6)
        H = build_H(partition, degree)
        space = null_space_basis(H)
        assert space.rank == 2 * partition.m - 2
        assert not space.rank_deficient
        assert np.max(np.abs(H @ space.basis)) <= 1e-12
        assert np.max(np.abs(space.basis.T @ space.basis - np.eye(space.basis.shape[1]))) <= 1e-12

    def test_gamma_grows_with_lambda(self):
        data = rule_dataset(10, 0)
        matrices = build_problem(data.x, data.y, data.partition(), 3)
        gammas = [strong_convexity_gamma(matrices.A, matrices.Q, lam, matrices.H)
                  for lam in (1e-3, 4e-3, 1e-2, 1e-1, 1.0)]
        for lower, higher in zip(gammas, gammas[1:]):
            assert higher >= lower * (1.0 - 1e-9)

    def test_gamma_bounds_sampled_rayleigh_quotients(self):
        data = rule_dataset(5, 1)
        matrices = build_problem(data.x, data.y, data.partition(), 3)
        lam = 0.004
        gamma = strong_convexity_gamma(matrices.A, matrices.Q, lam, matrices.H)
        A, Q, H = matrices.A.toarray(), matrices.Q.toarray(), matrices.H.toarray()
        rng = np.random.default_rng(15)
        samples = rng.standard_normal((2000, matrices.n_coeffs))
        # project onto null(H) by least squares, independent of null_space_basis
        correction = np.linalg.lstsq(H, H @ samples.T, rcond=None)[0]
        directions = samples.T - correction
        assert np.max(np.abs(H @ directions)) <= 1e-10
        hessian = 2.0 * (A.T @ A + lam * Q)
        quotients = (np.einsum('ij,ij->j', directions, hessian @ directions)
                     / np.einsum('ij,ij->j', directions, directions))
        assert quotients.min() >= gamma * (1.0 - 1e-9)
