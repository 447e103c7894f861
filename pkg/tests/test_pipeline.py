import numpy as np
import pytest

from realvalidate.candidates import parse_points
from realvalidate.pipeline import (
    ValidationReport,
    system_fingerprint,
    validate_real_set,
)

from conftest import FIXTURES, load_system


def six_points():
    return parse_points((FIXTURES / "six.pts").read_text(), 2)


class TestFingerprint:
    def test_stable(self, bivar):
        assert system_fingerprint(bivar) == system_fingerprint(
            load_system("bivar.sys"))

    def test_distinct_systems(self, bivar, cubic):
        assert system_fingerprint(bivar) != system_fingerprint(cubic)


class TestValidate:
    def test_bivariate_true(self, bivar):
        rep = validate_real_set(bivar, points=six_points(), alpha_max=2)
        assert rep.verdict
        assert rep.hilbert == [1, 3, 5, 6, 6]
        assert rep.regularity == (3, True)
        assert all(a is not None and a <= 2 for a in rep.alpha_trace())

    def test_discovery_spec(self, bivar):
        rep = validate_real_set(
            bivar, discovery={"n_seeds": 500, "box": (-2.0, 2.0)},
            alpha_max=2, seed=0)
        assert rep.verdict
        assert rep.point_count == 6

    def test_no_candidates(self):
        from realvalidate.poly import parse_system
        rep = validate_real_set(
            parse_system("vars x\nx^2 + 1\n"),
            discovery={"n_seeds": 10, "box": (-1.0, 1.0)},
            alpha_max=1, seed=0)
        assert not rep.verdict
        assert "no candidates" in rep.reason

    def test_report_determinism(self, bivar):
        kw = dict(discovery={"n_seeds": 200, "box": (-2.0, 2.0)},
                  alpha_max=2, seed=7)
        a = validate_real_set(bivar, **kw).canonical_json()
        b = validate_real_set(bivar, **kw).canonical_json()
        assert a == b

    def test_failing_generators_named(self, bivar):
        pts = parse_points((FIXTURES / "upper3.pts").read_text(), 2)
        rep = validate_real_set(bivar, points=pts, alpha_max=1,
                                solve_opts={"max_iter": 3000})
        assert not rep.verdict
        failing = [o for o in rep.outcomes if not o.certified]
        assert failing
        assert rep.reason


class TestReportSerialization:
    def test_json_shape(self, bivar):
        rep = validate_real_set(bivar, points=six_points(), alpha_max=2)
        d = rep.to_dict()
        assert d["verdict"] is True
        assert d["interpolation"]["hilbert"] == [1, 3, 5, 6, 6]
        assert len(d["outcomes"]) == len(rep.generators)
        for o in d["outcomes"]:
            assert o["certified"]

    def test_timings_excluded_from_canonical(self, bivar):
        rep = validate_real_set(bivar, points=six_points(), alpha_max=2)
        assert "timings" in rep.to_json()
        assert "timings" not in rep.canonical_json()

    def test_summary_text(self, bivar):
        rep = validate_real_set(bivar, points=six_points(), alpha_max=2)
        s = rep.summary()
        assert "verdict: True" in s
        assert "[ok]" in s
