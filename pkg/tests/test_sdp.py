import numpy as np
import pytest

from realvalidate.sdp import (
    NoCertificateFound,
    PSDSolution,
    SDPProblem,
    StructuralInfeasibility,
    check_solution,
    project_affine,
    project_psd,
    solve_feasibility,
    tri_index,
    tri_size,
)

CBRT2 = 2.0 ** (1.0 / 3.0)

# Gram matrix of the SOS identity s(x) = (x - c)^4 + 3(x^2 - c^2)^2 over
# X_2 = (1, x, x^2), c = 2^(1/3): the textbook PSD witness.
CGRAM = np.array([
    [8.0 * CBRT2, -4.0, -2.0 * CBRT2 ** 2],
    [-4.0, 4.0 * CBRT2 ** 2, -2.0 * CBRT2],
    [-2.0 * CBRT2 ** 2, -2.0 * CBRT2, 4.0],
])


def cubic_gram_problem():
    """Feasibility instance for -(x - c)^4 + 4(x - c)(x^3 - 2) = X_2' S X_2.

    Matching coefficients of 1, x, x^2, x^3, x^4 gives five constraints on
    the symmetric unknown S; CGRAM is one feasible point.
    """
    m = 3
    cons = [
        ({tri_index(0, 0, m): 1.0}, 8.0 * CBRT2),
        ({tri_index(0, 1, m): 2.0}, -8.0),
        ({tri_index(1, 2, m): 2.0}, -4.0 * CBRT2),
        ({tri_index(2, 2, m): 1.0}, 4.0),
        ({tri_index(0, 2, m): 2.0, tri_index(1, 1, m): 1.0}, 0.0),
    ]
    return SDPProblem(m, 0, cons)


class TestProjectPSD:
    def test_clamp_diagonal(self):
        assert np.allclose(project_psd(np.diag([3.0, -2.0])),
                           np.diag([3.0, 0.0]))

    def test_psd_unchanged(self):
        assert np.allclose(project_psd(CGRAM), CGRAM, atol=1e-10)

    def test_negative_identity(self):
        assert np.allclose(project_psd(-np.eye(4)), np.zeros((4, 4)))

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            project_psd(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            A = rng.standard_normal((5, 5))
            A = (A + A.T) / 2
            P1 = project_psd(A)
            P2 = project_psd(P1)
            assert np.max(np.abs(P2 - P1)) <= 1e-12

    def test_nearest_point(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            A = rng.standard_normal((5, 5))
            A = (A + A.T) / 2
            P = project_psd(A)
            G = rng.standard_normal((5, 5))
            B = G @ G.T
            assert (np.linalg.norm(A - P) <=
                    np.linalg.norm(A - B) + 1e-12)


class TestProjectAffine:
    def test_feasible_point_fixed(self):
        P = cubic_gram_problem()
        x = P.join(CGRAM, np.zeros(0))
        y = project_affine(x, P)
        assert np.max(np.abs(y - x)) <= 1e-13

    def test_single_coordinate(self):
        P = SDPProblem(1, 1, [({0: 1.0}, 1.0)])
        y = project_affine(np.zeros(2), P)
        assert np.allclose(y, [1.0, 0.0])

    def test_cubic_gram_from_zero(self):
        P = cubic_gram_problem()
        B, _ = P.split(project_affine(np.zeros(P.nunk), P))
        assert B[0, 0] == pytest.approx(8.0 * CBRT2, rel=1e-12)
        assert B[0, 1] == pytest.approx(-4.0, rel=1e-12)
        assert B[1, 2] == pytest.approx(-2.0 * CBRT2, rel=1e-12)
        assert B[2, 2] == pytest.approx(4.0, rel=1e-12)
        assert 2 * B[0, 2] + B[1, 1] == pytest.approx(0.0, abs=1e-12)

    def test_inconsistent_constraints(self):
        P = SDPProblem(2, 0, [({0: 1.0}, 1.0), ({0: 1.0}, 2.0)])
        with pytest.raises(StructuralInfeasibility):
            project_affine(np.zeros(P.nunk), P)


class TestSolveFeasibility:
    def test_cubic_gram_recovers_identity(self):
        P = cubic_gram_problem()
        sol = solve_feasibility(P)
        assert isinstance(sol, PSDSolution)
        # the recovered block must satisfy the same five coefficient
        # constraints as the displayed Gram matrix
        B = sol.block
        assert B[0, 0] == pytest.approx(8.0 * CBRT2, abs=1e-6)
        assert 2 * B[0, 1] == pytest.approx(-8.0, abs=1e-6)
        assert 2 * B[1, 2] == pytest.approx(-4.0 * CBRT2, abs=1e-6)
        assert B[2, 2] == pytest.approx(4.0, abs=1e-6)
        assert 2 * B[0, 2] + B[1, 1] == pytest.approx(0.0, abs=1e-6)

    def test_forced_negative_diagonal(self):
        P = SDPProblem(1, 0, [({0: 1.0}, -1.0)])
        out = solve_feasibility(P, max_iter=5000)
        assert isinstance(out, NoCertificateFound)

    def test_zero_rhs(self):
        P = SDPProblem(2, 0, [({0: 1.0}, 0.0), ({1: 1.0}, 0.0),
                              ({2: 1.0}, 0.0)])
        sol = solve_feasibility(P)
        assert isinstance(sol, PSDSolution)
        assert np.max(np.abs(sol.block)) <= 1e-7

    def test_checker_agreement(self):
        P = cubic_gram_problem()
        sol = solve_feasibility(P)
        res, meig = check_solution(P, sol.block, sol.free)
        assert res <= 1e-7
        assert meig >= -1e-7 * (1 + np.linalg.norm(sol.block))

    def test_over_relaxation(self):
        P = cubic_gram_problem()
        sol = solve_feasibility(P, relax=1.9)
        assert isinstance(sol, PSDSolution)
        res, meig = check_solution(P, sol.block, sol.free)
        assert res <= 1e-7
        assert meig >= -1e-7 * (1 + np.linalg.norm(sol.block))

    def test_relax_out_of_range(self):
        P = cubic_gram_problem()
        with pytest.raises(ValueError):
            solve_feasibility(P, relax=2.0)
        with pytest.raises(ValueError):
            solve_feasibility(P, relax=0.0)

    def test_deterministic(self):
        P1, P2 = cubic_gram_problem(), cubic_gram_problem()
        a = solve_feasibility(P1)
        b = solve_feasibility(P2)
        assert a.iterations == b.iterations
        assert np.array_equal(a.block, b.block)


class TestDumpLoad:
    def test_round_trip(self):
        P = cubic_gram_problem()
        Q = SDPProblem.load(P.dump())
        assert Q.m == P.m and Q.nfree == P.nfree
        assert (Q.A != P.A).nnz == 0
        assert np.array_equal(Q.b, P.b)

    def test_bad_line(self):
        with pytest.raises(ValueError):
            SDPProblem.load("block 2\nfree 0\nnonsense 1 2\n")


def test_tri_indexing():
    m = 4
    seen = {tri_index(i, j, m) for i in range(m) for j in range(i, m)}
    assert seen == set(range(tri_size(m)))
    assert tri_index(2, 1, m) == tri_index(1, 2, m)
