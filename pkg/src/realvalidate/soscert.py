"""Real-radical membership certificates via sums-of-squares feasibility.

A polynomial p lies in the real radical of <f_1..f_k> iff for some integer
alpha >= 1 there are multipliers h_i making q = -p^(2*alpha) + sum h_i f_i
a sum of squares.  The SOS condition becomes: q = X^T C X for a PSD Gram
matrix C over a monomial vector X, which together with the unknown h_i
coefficients is a semidefinite feasibility problem.  Certificates are
verified by a checker that never consults the solver.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .interpolate import (basis_size, monomial_basis, regularity_check,
                          reduced_generators, vanishing_space)
from .poly import (Polynomial, PolynomialSystem, format_poly, mono_mul,
                   parse_poly)
from .sdp import (NoCertificateFound, PSDSolution, SDPProblem, tri_index,
                  tri_size, solve_feasibility)

TOL_COEFF = 1e-6
TOL_EIG = 1e-6
# Ladder steps whose instance exceeds these sizes are skipped, not solved.
GRAM_CAP = 300
CONSTRAINT_CAP = 8000


@dataclass
class SOSCertificate:
    """Verifiable evidence that p^(2*alpha) + SOS lies in <f>.

    form "sos": gram represents q = -p^(2*alpha) + sum h_i f_i directly.
    form "combined": gram represents sum h_i f_i = p^(2*alpha) + SOS; the
    eigenvalue test then applies to C minus the rank-one Gram of p^alpha.
    """

    p: Polynomial
    alpha: int
    multipliers: list
    gram: np.ndarray
    gram_monomials: list
    scale: float = 1.0           # original p = scale * stored p
    form: str = "sos"
    residual_inf: float | None = None
    min_eig: float | None = None

    def gram_polynomial(self):
        nv = self.p.nvars
        terms = {}
        monos = self.gram_monomials
        for i in range(len(monos)):
            for j in range(i, len(monos)):
                c = self.gram[i, j] * (1.0 if i == j else 2.0)
                if c == 0.0:
                    continue
                m = mono_mul(monos[i], monos[j])
                terms[m] = terms.get(m, 0.0) + c
        return Polynomial(nv, terms, drop_tol=0.0)


@dataclass
class MembershipQuery:
    p: Polynomial
    system: PolynomialSystem
    alpha_max: int = 3
    ladder_levels: tuple = (0, 1, 2)
    tol_coeff: float = TOL_COEFF
    tol_eig: float = TOL_EIG
    max_iter: int = 50000
    gram_cap: int = GRAM_CAP
    constraint_cap: int = CONSTRAINT_CAP

    def __post_init__(self):
        if self.alpha_max < 1:
            raise ValueError("alpha_max must be >= 1")


@dataclass
class NotFound:
    """Search exhausted without a verified certificate; inconclusive."""

    alpha_trace: list            # one dict per (alpha, level) attempt


@dataclass
class MembershipSDP:
    problem: SDPProblem
    gram_monomials: list
    h_monomials: list            # one monomial list per generator
    p: Polynomial
    alpha: int
    deg_sos: int

    def extract(self, sol: PSDSolution, scale=1.0):
        nv = self.p.nvars
        hs = []
        pos = 0
        for monos in self.h_monomials:
            coeffs = sol.free[pos:pos + len(monos)]
            pos += len(monos)
            hs.append(Polynomial(nv, dict(zip(monos, coeffs)), drop_tol=0.0))
        return SOSCertificate(self.p, self.alpha, hs, sol.block,
                              self.gram_monomials, scale=scale)


def min_degrees(p, system, alpha, level=0):
    """Ladder degrees: smallest SOS degree covering p^(2*alpha) and f."""
    deg_p = max(p.degree(), 0)
    deg_f = max(q.degree() for q in system)
    deg_sos = max(alpha * deg_p, deg_f) + level
    deg_sos = max(deg_sos, math.ceil(2 * alpha * deg_p / 2))
    deg_h = [2 * deg_sos - q.degree() for q in system]
    return deg_sos, deg_h


def build_membership_sdp(p, system, alpha, deg_h, deg_sos) -> MembershipSDP:
    """Coefficient-matching SDP for -p^(2*alpha) + sum h_i f_i SOS.

    Unknowns: upper triangle of the Gram matrix over monomials of degree
    <= deg_sos, then the coefficients of each h_i.  One equality constraint
    per monomial of degree <= 2*deg_sos.
    """
    nv = p.nvars
    if any(dh < 0 for dh in deg_h):
        raise ValueError("negative multiplier degree")
    if 2 * deg_sos < 2 * alpha * max(p.degree(), 0):
        raise ValueError(
            f"deg_sos too small: need >= {alpha * p.degree()} for p^(2*alpha)")
    for dh, q in zip(deg_h, system):
        if dh + q.degree() > 2 * deg_sos:
            raise ValueError(
                f"deg_h={dh} with deg(f)={q.degree()} exceeds 2*deg_sos")
    gram_monos = monomial_basis(nv, deg_sos)
    mg = len(gram_monos)
    con_monos = monomial_basis(nv, 2 * deg_sos)
    con_index = {m: i for i, m in enumerate(con_monos)}
    ncon = len(con_monos)
    funcs = [dict() for _ in range(ncon)]

    for i in range(mg):
        for j in range(i, mg):
            mu = mono_mul(gram_monos[i], gram_monos[j])
            r = con_index[mu]
            idx = tri_index(i, j, mg)
            funcs[r][idx] = funcs[r].get(idx, 0.0) + (1.0 if i == j else 2.0)

    h_monos = []
    off = tri_size(mg)
    for dh, q in zip(deg_h, system):
        monos = monomial_basis(nv, dh)
        h_monos.append(monos)
        for kk, nu in enumerate(monos):
            for mf, cf in q.terms.items():
                r = con_index[mono_mul(nu, mf)]
                funcs[r][off + kk] = funcs[r].get(off + kk, 0.0) - cf
        off += len(monos)

    p2a = p ** (2 * alpha)
    rhs = np.zeros(ncon)
    for m, c in p2a.terms.items():
        rhs[con_index[m]] = -c

    nfree = off - tri_size(mg)
    problem = SDPProblem(mg, nfree, list(zip(funcs, rhs)))
    return MembershipSDP(problem, gram_monos, h_monos, p, alpha, deg_sos)


def verify_certificate(cert: SOSCertificate, system: PolynomialSystem,
                       tol_coeff=TOL_COEFF, tol_eig=TOL_EIG) -> bool:
    """Recompute everything with plain polynomial arithmetic and eigenvalues.

    Passes iff the coefficientwise residual is <= tol_coeff * scale(q) and
    the (form-appropriate) Gram matrix has smallest eigenvalue >= -tol_eig.
    """
    nv = cert.p.nvars
    if system.nvars != nv:
        raise ValueError("certificate/system variable count mismatch")
    if len(cert.multipliers) != len(system):
        raise ValueError("multiplier count does not match system size")
    hf = Polynomial.zero(nv)
    for h, f in zip(cert.multipliers, system):
        hf = hf + h * f
    p2a = cert.p ** (2 * cert.alpha)
    q = -p2a + hf
    target = hf if cert.form == "combined" else q
    gp = cert.gram_polynomial()
    resid = (gp - target).coeff_inf()
    scale = max(q.coeff_inf(), 1.0)

    C = (cert.gram + cert.gram.T) / 2
    if cert.form == "combined":
        # C certifies p^(2a) + SOS = sum h_i f_i: test C minus the rank-one
        # Gram of p^alpha.
        pa = cert.p ** cert.alpha
        v = np.zeros(len(cert.gram_monomials))
        index = {m: i for i, m in enumerate(cert.gram_monomials)}
        for m, c in pa.terms.items():
            if m not in index:
                raise ValueError("p^alpha has monomials outside the Gram basis")
            v[index[m]] = c
        C = C - np.outer(v, v)
    meig = float(np.linalg.eigvalsh(C)[0])

    cert.residual_inf = float(resid)
    cert.min_eig = meig
    return resid <= tol_coeff * scale and meig >= -tol_eig


def certify(query: MembershipQuery, solve_opts=None):
    """Search alpha = 1..alpha_max over the degree ladder; first verified
    certificate wins.  Returns SOSCertificate or NotFound (inconclusive)."""
    p = query.p
    if p.is_zero():
        raise ValueError("cannot certify the zero polynomial")
    scale = p.coeff_norm()
    pn = p * (1.0 / scale)
    solve_opts = dict(solve_opts or {})
    solve_opts.setdefault("max_iter", query.max_iter)
    trace = []
    nv = p.nvars
    for alpha in range(1, query.alpha_max + 1):
        for level in query.ladder_levels:
            deg_sos, deg_h = min_degrees(pn, query.system, alpha, level)
            mg = basis_size(nv, deg_sos)
            ncon = basis_size(nv, 2 * deg_sos)
            entry = {"alpha": alpha, "level": level, "deg_sos": deg_sos,
                     "gram": mg, "constraints": ncon}
            if mg > query.gram_cap or ncon > query.constraint_cap:
                entry["skipped"] = "size cap"
                trace.append(entry)
                continue
            ms = build_membership_sdp(pn, query.system, alpha, deg_h, deg_sos)
            out = solve_feasibility(ms.problem, **solve_opts)
            if isinstance(out, PSDSolution):
                cert = ms.extract(out, scale=scale)
                ok = verify_certificate(cert, query.system,
                                        tol_coeff=query.tol_coeff,
                                        tol_eig=query.tol_eig)
                entry["residual"] = cert.residual_inf
                entry["min_eig"] = cert.min_eig
                entry["iterations"] = out.iterations
                trace.append(entry)
                if ok:
                    return cert
            else:
                entry["residual"] = out.affine_residual
                entry["min_eig"] = out.min_eig
                entry["iterations"] = out.iterations
                entry["reason"] = out.reason
                trace.append(entry)
    return NotFound(trace)


def _certify_task(args):
    idx, query, solve_opts = args
    return idx, certify(query, solve_opts=solve_opts)


def certify_generators(generators, system, alpha_max=3, jobs=None,
                       solve_opts=None, **query_kw):
    """Certify each generator independently; results ordered by index."""
    queries = [MembershipQuery(g, system, alpha_max=alpha_max, **query_kw)
               for g in generators]
    if jobs is None:
        jobs = os.cpu_count() or 1
    results = [None] * len(queries)
    if jobs <= 1 or len(queries) <= 1:
        for i, q in enumerate(queries):
            results[i] = certify(q, solve_opts=solve_opts)
        return results
    tasks = [(i, q, solve_opts) for i, q in enumerate(queries)]
    with ProcessPoolExecutor(max_workers=min(jobs, len(queries))) as ex:
        for i, out in ex.map(_certify_task, tasks):
            results[i] = out
    return results


# ---------------------------------------------------------------------------
# semialgebraic conditions via slack variables


def slack_augment(f: PolynomialSystem, r) -> PolynomialSystem:
    """Encode inequalities r_i >= 0 as equations r_i(x) - y_i^2 = 0.

    Returns the system in n + s variables, x-block first.
    """
    r = list(r)
    if not r:
        raise ValueError("need at least one inequality polynomial")
    n = f.nvars
    s = len(r)
    ntot = n + s
    used = set(f.varnames)
    slack_names = []
    for i in range(1, s + 1):
        name = f"y{i}"
        while name in used:
            name = "_" + name
        used.add(name)
        slack_names.append(name)
    polys = [p.extend(ntot) for p in f.polys]
    for i, ri in enumerate(r):
        if ri.nvars != n:
            raise ValueError("inequality polynomial has wrong variable count")
        yi = Polynomial.variable(n + i, ntot)
        polys.append(ri.extend(ntot) - yi * yi)
    return PolynomialSystem(polys, list(f.varnames) + slack_names)


@dataclass
class GeneratorOutcome:
    generator: Polynomial
    certificate: SOSCertificate | None
    trace: list = field(default_factory=list)

    @property
    def certified(self):
        return self.certificate is not None


@dataclass
class ARadicalReport:
    verdict: bool
    reason: str = ""
    generators: list = field(default_factory=list)
    outcomes: list = field(default_factory=list)
    hilbert: list = field(default_factory=list)
    regularity: tuple | None = None
    slack_system: PolynomialSystem | None = None


def a_radical_validate(f: PolynomialSystem, r, S, alpha_max=3, tol=1e-8,
                       null_tol=1e-8, jobs=None, solve_opts=None,
                       **query_kw) -> ARadicalReport:
    """Validate that I(S) equals the radical relative to {r_i >= 0}.

    S holds x-space points on the solution set that satisfy the
    inequalities; interpolation runs in the x variables only, and each
    generator is certified against the slack-augmented system.
    """
    for k, pt in enumerate(S):
        viol = [i for i, ri in enumerate(r) if ri.evaluate(pt.coords) < -tol]
        if viol:
            raise ValueError(
                f"point {k} violates inequalities {viol} beyond tolerance")
        if f.residual(pt.coords) > tol:
            raise ValueError(f"point {k} is not on V(f) within tolerance")
    if len(S) == 0:
        return ARadicalReport(False, reason="no candidates")
    big = slack_augment(f, r)
    rdeg, gen_at_r = regularity_check(S, tol=null_tol)
    degree = rdeg
    vb = vanishing_space(S, degree, tol=null_tol)
    gens = reduced_generators(S, degree, tol=null_tol)
    gens_ext = [g.extend(big.nvars) for g in gens]
    results = certify_generators(gens_ext, big, alpha_max=alpha_max,
                                 jobs=jobs, solve_opts=solve_opts, **query_kw)
    outcomes = []
    for g, res in zip(gens, results):
        if isinstance(res, SOSCertificate):
            outcomes.append(GeneratorOutcome(g, res))
        else:
            outcomes.append(GeneratorOutcome(g, None, trace=res.alpha_trace))
    verdict = all(o.certified for o in outcomes)
    return ARadicalReport(verdict, generators=gens,
                          outcomes=outcomes, hilbert=vb.hilbert,
                          regularity=(rdeg, gen_at_r), slack_system=big)


# ---------------------------------------------------------------------------
# certificate files


def write_certificate(cert: SOSCertificate, varnames=None) -> str:
    nv = cert.p.nvars
    if varnames is None:
        varnames = [f"x{i+1}" for i in range(nv)]
    lines = ["vars " + " ".join(varnames),
             f"form {cert.form}",
             f"alpha {cert.alpha}",
             f"scale {cert.scale:.17g}",
             "p " + format_poly(cert.p, varnames)]
    for h in cert.multipliers:
        lines.append("h " + format_poly(h, varnames))
    for m in cert.gram_monomials:
        lines.append("mono " + " ".join(str(e) for e in m))
    mg = len(cert.gram_monomials)
    for i in range(mg):
        for j in range(i, mg):
            lines.append(f"C {i} {j} {cert.gram[i, j]:.17g}")
    if cert.residual_inf is not None:
        lines.append(f"residual {cert.residual_inf:.17g}")
    if cert.min_eig is not None:
        lines.append(f"min_eig {cert.min_eig:.17g}")
    return "\n".join(lines) + "\n"


def read_certificate(text) -> SOSCertificate:
    varnames = None
    form = "sos"
    alpha = None
    scale = 1.0
    p = None
    hs = []
    monos = []
    centries = []
    for ln in text.splitlines():
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        key, _, rest = ln.partition(" ")
        if key == "vars":
            varnames = rest.split()
        elif key == "form":
            form = rest.strip()
        elif key == "alpha":
            alpha = int(rest)
        elif key == "scale":
            scale = float(rest)
        elif key == "p":
            p = parse_poly(rest, varnames)
        elif key == "h":
            hs.append(parse_poly(rest, varnames))
        elif key == "mono":
            monos.append(tuple(int(t) for t in rest.split()))
        elif key == "C":
            i, j, v = rest.split()
            centries.append((int(i), int(j), float(v)))
        elif key in ("residual", "min_eig"):
            pass
        else:
            raise ValueError(f"bad certificate line: {ln!r}")
    if varnames is None or p is None or alpha is None or not monos:
        raise ValueError("incomplete certificate file")
    mg = len(monos)
    C = np.zeros((mg, mg))
    for i, j, v in centries:
        C[i, j] = v
        C[j, i] = v
    return SOSCertificate(p, alpha, hs, C, monos, scale=scale, form=form)
