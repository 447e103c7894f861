"""End-to-end validation: candidates -> interpolation -> certification.

Implements the full loop: gather a candidate set S on the real solution
set, interpolate its vanishing ideal, then certify every generator's
real-radical membership.  Verdict True means I(S) equals the real radical,
i.e. the candidate set is complete.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import soscert
from .candidates import (ADMIT_TOL, Point, PointSet, random_real_search,
                         sample_component)
from .interpolate import (basis_size, hilbert_function, regularity_check,
                          reduced_generators, vanishing_space, _numeric_rank,
                          evaluation_matrix)
from .poly import PolynomialSystem, format_poly, format_system
from .soscert import (GeneratorOutcome, SOSCertificate, certify_generators)


def system_fingerprint(system: PolynomialSystem) -> str:
    return hashlib.sha256(format_system(system).encode()).hexdigest()


@dataclass
class ValidationReport:
    verdict: bool
    system_hash: str
    seed: int
    alpha_max: int
    tolerances: dict
    point_count: int = 0
    max_residual: float = 0.0
    sources: dict = field(default_factory=dict)
    degree: int | None = None
    hilbert: list = field(default_factory=list)
    regularity: tuple | None = None
    generators: list = field(default_factory=list)     # formatted strings
    outcomes: list = field(default_factory=list)       # GeneratorOutcome
    reason: str = ""
    timings: dict = field(default_factory=dict)
    command: list | None = None

    def outcome_dicts(self):
        out = []
        for o in self.outcomes:
            d = {"generator": format_poly(o.generator),
                 "certified": o.certified}
            if o.certificate is not None:
                d["alpha"] = o.certificate.alpha
                d["residual"] = o.certificate.residual_inf
                d["min_eig"] = o.certificate.min_eig
            else:
                d["trace"] = o.trace
            out.append(d)
        return out

    def to_dict(self, include_timings=True, include_command=True):
        d = {
            "verdict": self.verdict,
            "system_hash": self.system_hash,
            "seed": self.seed,
            "alpha_max": self.alpha_max,
            "tolerances": self.tolerances,
            "candidates": {
                "count": self.point_count,
                "max_residual": self.max_residual,
                "sources": self.sources,
            },
            "interpolation": {
                "degree": self.degree,
                "hilbert": self.hilbert,
                "regularity": list(self.regularity)
                if self.regularity else None,
            },
            "generators": self.generators,
            "outcomes": self.outcome_dicts(),
            "reason": self.reason,
        }
        if include_command and self.command is not None:
            d["command"] = self.command
        if include_timings:
            d["timings"] = self.timings
        return d

    def canonical_json(self):
        """Deterministic serialization (timings and command line excluded)
        for regression comparison; identical bytes for identical
        (inputs, seed)."""
        d = self.to_dict(include_timings=False, include_command=False)
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def alpha_trace(self):
        return [o.certificate.alpha if o.certificate else None
                for o in self.outcomes]

    def summary(self):
        lines = [f"verdict: {self.verdict}",
                 f"system: {self.system_hash[:12]}  seed: {self.seed}",
                 f"candidates: {self.point_count} "
                 f"(max residual {self.max_residual:.3e})",
                 f"interpolation: degree {self.degree}, "
                 f"Hilbert {self.hilbert}, regularity {self.regularity}"]
        for d in self.outcome_dicts():
            if d["certified"]:
                lines.append(f"  [ok] alpha={d['alpha']} {d['generator']}")
            else:
                lines.append(f"  [NOT FOUND] {d['generator']}")
        if self.reason:
            lines.append(f"reason: {self.reason}")
        return "\n".join(lines)


def _stabilized_component_samples(system, components, degree, base_points,
                                  seed, tol):
    """Add samples per component until the evaluation-matrix rank stabilizes
    across two consecutive augmentations (hard cap 5 * C(n+d, d))."""
    n = system.nvars
    cap = 5 * basis_size(n, degree)
    pts = PointSet(n)
    for p in base_points:
        pts.add(p)
    batch = max(degree + 1, 3)
    stable = 0
    prev_rank = -1
    total = 0
    round_no = 0
    while stable < 2 and total < cap:
        for ci, comp in enumerate(components):
            extra = sample_component(comp, batch, f=system,
                                     seed=seed + 1000 * round_no + ci)
            for p in extra:
                pts.add(p)
        round_no += 1
        total = len(pts)
        em = evaluation_matrix(pts, degree)
        rank, _ = _numeric_rank(em.matrix, tol=tol)
        if rank == prev_rank:
            stable += 1
        else:
            stable = 0
        prev_rank = rank
    return pts


def validate_real_set(system: PolynomialSystem, points=None, discovery=None,
                      components=None, alt_generators=None, alpha_max=3,
                      seed=0, degree=None, tol_null=1e-8,
                      tol_coeff=soscert.TOL_COEFF, tol_eig=soscert.TOL_EIG,
                      admit_tol=ADMIT_TOL, jobs=None,
                      solve_opts=None) -> ValidationReport:
    """Run the whole validation loop and aggregate a report.

    S comes from any mix of: an explicit PointSet, a discovery spec
    {"n_seeds": int, "box": (n, 2) array}, and parametrized components.
    alt_generators, when given, replaces the system inside the membership
    certificates only (e.g. an externally computed radical basis).
    """
    t0 = time.perf_counter()
    timings = {}
    tolerances = {"tol_null": tol_null, "tol_coeff": tol_coeff,
                  "tol_eig": tol_eig, "admit_tol": admit_tol}
    report = ValidationReport(False, system_fingerprint(system), seed,
                              alpha_max, tolerances)

    # stage 1: candidate set
    S = PointSet(system.nvars)
    if points is not None:
        for p in points:
            res = system.residual(p.coords)
            if res > admit_tol:
                raise ValueError(
                    f"supplied point {p.coords} has residual {res:.3e} "
                    f"above the admission tolerance")
            S.add(Point(p.coords, res, source=p.source,
                        component_id=p.component_id))
    if discovery is not None:
        found = random_real_search(system, discovery["n_seeds"],
                                   discovery["box"], seed=seed,
                                   admit_tol=admit_tol)
        for p in found:
            S.add(p)
    finite_part = list(S)
    timings["candidates"] = time.perf_counter() - t0

    # stage 2: interpolation (degree auto = regularity-driven)
    t1 = time.perf_counter()
    if components:
        if degree is None:
            raise ValueError(
                "auto degree is not available with parametrized components; "
                "pass an explicit degree")
        S = _stabilized_component_samples(system, components, degree,
                                          finite_part, seed, tol_null)
    if len(S) == 0:
        report.reason = "no candidates"
        report.timings = timings
        return report
    report.point_count = len(S)
    report.max_residual = S.max_residual()
    for p in S:
        report.sources[p.source] = report.sources.get(p.source, 0) + 1
    if degree is None:
        r, gen_at_r = regularity_check(S, tol=tol_null)
        degree = r
        report.regularity = (r, gen_at_r)
    else:
        try:
            report.regularity = regularity_check(S, tol=tol_null)
        except RuntimeError:
            report.regularity = None
    vb = vanishing_space(S, degree, tol=tol_null)
    gens = reduced_generators(S, degree, tol=tol_null)
    report.degree = degree
    # one degree past the basis degree so the stabilized value is visible
    report.hilbert = hilbert_function(S, degree + 1, tol=tol_null)
    report.generators = [format_poly(g, system.varnames)
                         for g in gens]
    timings["interpolation"] = time.perf_counter() - t1

    if not gens:
        report.reason = ("vanishing ideal is zero at this degree; "
                        "increase the degree")
        report.timings = timings
        return report

    # stages 3-4: certification against f (or the alternate generating set)
    t2 = time.perf_counter()
    f_cert = alt_generators if alt_generators is not None else system
    results = certify_generators(gens, f_cert, alpha_max=alpha_max,
                                 jobs=jobs, solve_opts=solve_opts,
                                 tol_coeff=tol_coeff, tol_eig=tol_eig)
    for g, resu in zip(gens, results):
        if isinstance(resu, SOSCertificate):
            report.outcomes.append(GeneratorOutcome(g, resu))
        else:
            report.outcomes.append(GeneratorOutcome(g, None,
                                                    trace=resu.alpha_trace))
    timings["certification"] = time.perf_counter() - t2

    report.verdict = all(o.certified for o in report.outcomes)
    if not report.verdict:
        failing = [format_poly(o.generator, system.varnames)
                   for o in report.outcomes
                   if not o.certified]
        report.reason = ("no certificate found for: " + "; ".join(failing)
                         + " -- add more real solutions to S or raise "
                           "alpha_max")
    report.timings = timings
    return report
