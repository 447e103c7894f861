import math

import numpy as np
import pytest

from realvalidate.candidates import (
    ComponentParam,
    Point,
    NewtonFailure,
    PointSet,
    build_gdh,
    dedupe,
    deflation_sequence,
    format_points,
    newton_refine,
    numeric_null_dim,
    parse_component,
    parse_points,
    random_real_search,
    sample_component,
    track,
)
from realvalidate.poly import Polynomial, jacobian, parse_poly, parse_system

from conftest import load_system

W = math.sqrt(20.0)

PLANAR = parse_system(
    "vars x y z\n"
    "x^2 + y^2 + z^2 - 1\n"
    "x^2 + y^2 + z - 1\n"
    "x\n")

SOLUTIONS_81 = [
    (-1.0, -1.0), (-1.0, 1.0),
    ((1 - math.sqrt(3)) / 2, -math.sqrt((2 + math.sqrt(3)) / 2)),
    ((1 - math.sqrt(3)) / 2, math.sqrt((2 + math.sqrt(3)) / 2)),
    ((1 + math.sqrt(3)) / 2, -math.sqrt((2 - math.sqrt(3)) / 2)),
    ((1 + math.sqrt(3)) / 2, math.sqrt((2 - math.sqrt(3)) / 2)),
]


class TestNewtonRefine:
    def test_bivariate_refinement(self, bivar):
        x, res = newton_refine(bivar, [1.3, 0.4])
        target = ((1 + math.sqrt(3)) / 2, math.sqrt((2 - math.sqrt(3)) / 2))
        assert np.allclose(x, target, atol=1e-6)
        assert res <= 1e-8

    def test_exact_start_unchanged(self, bivar):
        x, _ = newton_refine(bivar, [-1.0, 1.0])
        assert np.allclose(x, [-1.0, 1.0], atol=1e-12)

    def test_phi4_uniform_point(self, phi4):
        x, _ = newton_refine(phi4, [4.0] * 9)
        assert np.allclose(x, [W] * 9, atol=1e-8)

    def test_divergence(self):
        f = parse_system("vars x\nx^2 + 1\n")
        with pytest.raises(NewtonFailure):
            newton_refine(f, [1000.0], max_iter=5)


class TestRandomRealSearch:
    def test_bivariate_six_points(self, bivar):
        ps = random_real_search(bivar, 500, [(-2.0, 2.0), (-2.0, 2.0)],
                                seed=0)
        assert len(ps.points) == 6
        coords = sorted(tuple(p.coords) for p in ps.points)
        for got, want in zip(coords, sorted(SOLUTIONS_81)):
            assert np.allclose(got, want, atol=1e-4)

    def test_no_real_solutions(self):
        f = parse_system("vars x\nx^2 + 1\n")
        ps = random_real_search(f, 50, [(-3.0, 3.0)], seed=1)
        assert ps.points == []

    def test_deterministic(self, bivar):
        box = [(-2.0, 2.0), (-2.0, 2.0)]
        a = random_real_search(bivar, 60, box, seed=42)
        b = random_real_search(bivar, 60, box, seed=42)
        assert len(a.points) == len(b.points)
        for p, q in zip(a.points, b.points):
            assert np.array_equal(p.coords, q.coords)

    def test_admission_residuals(self, bivar):
        ps = random_real_search(bivar, 100, [(-2.0, 2.0), (-2.0, 2.0)],
                                seed=3)
        for p in ps.points:
            assert p.residual <= 1e-8


class TestDeflation:
    def test_smooth_point(self):
        assert deflation_sequence(PLANAR, [0.0, 1.0, 0.0]) == [0]

    def test_posdim_line_point(self, posdim):
        seq = deflation_sequence(posdim, [1.0, 0.0, 0.0])
        assert seq[0] == 1

    def test_full_rank_terminates(self, bivar):
        assert deflation_sequence(bivar, [-1.0, 1.0]) == [0]

    def test_off_variety_rejected(self, bivar):
        with pytest.raises(ValueError):
            deflation_sequence(bivar, [5.0, 5.0])

    def test_monotone_on_random_singular_fixtures(self):
        # f = (x - a)^2, (y - b)^2, ... is singular at (a, b, ...) for any
        # random center and random quadratic mixing.
        rng = np.random.default_rng(0)
        for trial in range(50):
            n = int(rng.integers(1, 4))
            center = rng.uniform(-1, 1, n)
            polys = []
            for i in range(n):
                li = Polynomial.constant(n, -center[i]) + \
                    Polynomial.variable(i, n)
                j = int(rng.integers(0, n))
                lj = Polynomial.constant(n, -center[j]) + \
                    Polynomial.variable(j, n)
                polys.append(li * lj)
            from realvalidate.poly import PolynomialSystem
            f = PolynomialSystem(polys)
            seq = deflation_sequence(f, center, max_stage=4)
            assert all(d >= 0 for d in seq)
            assert all(a >= b for a, b in zip(seq, seq[1:]))

    def test_numeric_null_dim(self):
        J = np.array([[1.0, 0.0, 0.0], [0.0, 1e-12, 0.0]])
        assert numeric_null_dim(J) == 2


class TestHomotopy:
    def test_seiler_endpoint(self, seiler):
        H = build_gdh(seiler, [1.0, -1.5, 0.75], seed=0)
        end = track(H)
        assert np.allclose(end[:3], [0.7009, -0.2504, -0.5868], atol=1e-3)
        assert np.linalg.norm(seiler.evaluate(end[:3])) <= 1e-8

    def test_start_already_solution(self, bivar):
        y = [-1.0, 1.0]
        H = build_gdh(bivar, y, seed=0)
        end = track(H)
        assert np.linalg.norm(bivar.evaluate(end[:2])) <= 1e-8

    def test_univariate_quadratic(self):
        f = parse_system("vars x\nx^2 - 4\n")
        H = build_gdh(f, [1.0], seed=0)
        end = track(H)
        assert abs(abs(end[0]) - 2.0) <= 1e-8
        assert abs(f.evaluate(end[:1])[0]) <= 1e-10


class TestComponentsAndDedupe:
    def test_line_samples(self, posdim):
        c = parse_component(
            "params u\nrange -2 2\nu ; 0 ; 0\n")
        ps = sample_component(c, 3, f=posdim, seed=0)
        assert len(ps.points) == 3
        for p in ps.points:
            assert p.coords[1] == 0.0 and p.coords[2] == 0.0
            assert p.residual <= 1e-12

    def test_dedupe_near_duplicates(self):
        ps = PointSet(2)
        ps.add(Point([1.0, 0.0], 0.0), tol=0.0)
        ps.add(Point([1.0 + 1e-12, 0.0], 0.0), tol=0.0)
        assert len(dedupe(ps, tol=1e-8).points) == 1

    def test_dedupe_keeps_distinct(self, bivar):
        ps = PointSet(2)
        for c in SOLUTIONS_81:
            ps.add(Point(list(c), 0.0))
        assert len(dedupe(ps, tol=1e-6).points) == 6

    def test_points_file_round_trip(self):
        ps = PointSet(2)
        ps.add(Point([1.5, -0.25], 0.0))
        ps.add(Point([0.0, 2.0], 0.0, component_id="line"))
        again = parse_points(format_points(ps), 2)
        assert len(again.points) == 2
        assert np.allclose(again.points[0].coords, [1.5, -0.25])
        assert again.points[1].component_id == "line"
