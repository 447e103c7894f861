"""Candidate real solutions: Newton search, deflation, homotopy, sampling.

Produces the set S of (approximate) real points on which the vanishing
ideal is later interpolated.  Every admitted point records its residual
and provenance; the whole module is deterministic given an RNG seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .poly import (CompiledSystem, Polynomial, PolynomialSystem, minors,
                   parse_poly, ParseError)

ADMIT_TOL = 1e-8      # max residual for a point to enter a PointSet
DEDUPE_TOL = 1e-6     # Euclidean clustering distance
NEWTON_TOL = 1e-10
RANK_TOL = 1e-8       # singular values below RANK_TOL * smax count as zero


class NewtonFailure(RuntimeError):
    """Newton refinement did not converge; .reason holds the cause."""

    def __init__(self, reason, x=None):
        super().__init__(reason)
        self.reason = reason
        self.x = x


@dataclass
class Point:
    coords: np.ndarray
    residual: float
    source: str = "user"                 # user | newton | homotopy | component-sample
    deflation_seq: list | None = None
    component_id: str | None = None

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=float)
        if not np.all(np.isfinite(self.coords)):
            raise ValueError("non-finite point coordinates")


@dataclass
class PointSet:
    nvars: int
    points: list = field(default_factory=list)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def coords(self):
        if not self.points:
            return np.zeros((0, self.nvars))
        return np.array([p.coords for p in self.points])

    def add(self, point, tol=DEDUPE_TOL):
        """Admit unless within tol of an existing point; returns True if added."""
        for q in self.points:
            if np.linalg.norm(q.coords - point.coords) < tol:
                return False
        self.points.append(point)
        return True

    def max_residual(self):
        return max((p.residual for p in self.points), default=0.0)


def dedupe(ps: PointSet, tol=DEDUPE_TOL) -> PointSet:
    """Keep the first point of each cluster under Euclidean distance tol."""
    out = PointSet(ps.nvars)
    for p in ps.points:
        out.add(p, tol=tol)
    return out


def newton_refine(f, x0, max_iter=100, damping=True, tol=NEWTON_TOL):
    """Least-squares Newton with residual-decrease damping.

    Handles non-square and rank-deficient systems through the pseudo-inverse
    step.  Returns (x, residual); raises NewtonFailure on divergence,
    iteration exhaustion, or step stagnation.
    """
    cs = f if isinstance(f, CompiledSystem) else CompiledSystem(f)
    x = np.asarray(x0, dtype=float)
    if x.shape != (cs.nvars,):
        raise ValueError(f"start point has {x.size} coords, expected {cs.nvars}")
    fx = cs.f(x)
    rnorm = np.linalg.norm(fx)
    for _ in range(max_iter):
        if np.max(np.abs(fx)) <= tol:
            return x, float(np.max(np.abs(fx)))
        J = cs.jac(x)
        step, *_ = np.linalg.lstsq(J, -fx, rcond=None)
        if not np.all(np.isfinite(step)):
            raise NewtonFailure("non-finite Newton step", x)
        lam = 1.0
        if damping:
            for _ in range(20):
                xn = x + lam * step
                rn = np.linalg.norm(cs.f(xn))
                if rn < rnorm or rn <= tol:
                    break
                lam *= 0.5
            else:
                raise NewtonFailure("step stagnation", x)
        xn = x + lam * step
        fn = cs.f(xn)
        rn = np.linalg.norm(fn)
        if np.linalg.norm(xn) > 1e8:
            raise NewtonFailure("divergence", xn)
        moved = np.linalg.norm(xn - x)
        x, fx, rnorm = xn, fn, rn
        if moved <= tol and np.max(np.abs(fx)) <= 10 * tol:
            return x, float(np.max(np.abs(fx)))
    if np.max(np.abs(fx)) <= tol:
        return x, float(np.max(np.abs(fx)))
    raise NewtonFailure("max_iter exceeded", x)


def random_real_search(f, n_seeds, box, seed=0, admit_tol=ADMIT_TOL,
                       dedupe_tol=DEDUPE_TOL, max_iter=100) -> PointSet:
    """Newton refinement from uniform random seeds in an axis-aligned box.

    Deterministic for fixed (f, seed, n_seeds, box).  Only points with
    residual <= admit_tol are admitted; the result is deduplicated.
    """
    cs = f if isinstance(f, CompiledSystem) else CompiledSystem(f)
    box = np.asarray(box, dtype=float)
    if box.shape == (2,):
        box = np.tile(box, (cs.nvars, 1))
    if box.shape != (cs.nvars, 2):
        raise ValueError("box must be (lo, hi) or (nvars, 2) of [lo, hi]")
    rng = np.random.default_rng(seed)
    out = PointSet(cs.nvars)
    for _ in range(n_seeds):
        x0 = rng.uniform(box[:, 0], box[:, 1])
        try:
            x, res = newton_refine(cs, x0, max_iter=max_iter)
        except NewtonFailure:
            continue
        if res <= admit_tol:
            out.add(Point(x, res, source="newton"), tol=dedupe_tol)
    return out


def numeric_null_dim(J, rank_tol=RANK_TOL):
    """Null-space dimension by singular-value thresholding."""
    J = np.atleast_2d(np.asarray(J, dtype=float))
    s = np.linalg.svd(J, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return J.shape[1]
    rank = int(np.sum(s > rank_tol * s[0]))
    return J.shape[1] - rank


def deflation_sequence(f: PolynomialSystem, z, max_stage=5,
                       admit_tol=ADMIT_TOL, rank_tol=RANK_TOL,
                       term_cap=200000):
    """Null dimensions of the iteratively minor-augmented systems at z.

    Stage i appends all (d+1)x(d+1) minors of the current Jacobian, where d
    is the previous null dimension, then re-evaluates the null dimension.
    Stops when the value repeats (the limit is reached) or at max_stage.
    """
    z = np.asarray(z, dtype=float)
    if f.residual(z) > admit_tol:
        raise ValueError(f"point is not on V(f): residual {f.residual(z):.3e}")
    seq = []
    current = f
    for _ in range(max_stage + 1):
        jac = current.jacobian()
        d = numeric_null_dim(jac.evaluate(z), rank_tol=rank_tol)
        if seq and d == seq[-1]:
            break
        seq.append(d)
        if d == 0:
            break
        if d + 1 > min(jac.rows, jac.cols):
            break  # no minors of the required size exist
        extra = minors(jac, d)
        nterms = sum(len(p.terms) for p in current) + sum(
            len(p.terms) for p in extra)
        if nterms > term_cap:
            raise RuntimeError(
                f"deflation stage system too large ({nterms} terms)")
        current = PolynomialSystem(list(current) + list(extra), f.varnames)
    return seq


# ---------------------------------------------------------------------------
# positive-dimensional components supplied as parametrizations


@dataclass
class ComponentParam:
    """Parametrized component x(u) with per-parameter sampling ranges."""

    parametrization: list          # Polynomials in the s parameters
    ranges: np.ndarray             # (s, 2) sampling box
    tag: str = "component"

    def __post_init__(self):
        self.ranges = np.asarray(self.ranges, dtype=float)
        s = self.parametrization[0].nvars
        for p in self.parametrization:
            if p.nvars != s:
                raise ValueError("mixed parameter counts in parametrization")
        if self.ranges.shape != (s, 2):
            raise ValueError("ranges must be (s, 2)")

    @property
    def dim(self):
        return self.parametrization[0].nvars

    def point(self, u):
        return np.array([p.evaluate(u) for p in self.parametrization])


def sample_component(c: ComponentParam, m, f=None, seed=0,
                     admit_tol=ADMIT_TOL) -> PointSet:
    """Map m random parameter draws through the parametrization."""
    if m < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    nvars = len(c.parametrization)
    out = PointSet(nvars)
    bad = []
    for i in range(m):
        u = rng.uniform(c.ranges[:, 0], c.ranges[:, 1])
        x = c.point(u)
        res = f.residual(x) if f is not None else 0.0
        if f is not None and res > admit_tol:
            bad.append(i)
            continue
        out.add(Point(x, res, source="component-sample", component_id=c.tag))
    if bad:
        raise ValueError(f"samples {bad} violate the admission tolerance")
    return out


def parse_component(text) -> ComponentParam:
    """Component file: `params <name>+`, `range lo hi` per parameter, then
    one parametrization polynomial per output coordinate."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("params"):
        raise ParseError("expected header 'params <name>+'")
    names = lines[0].split()[1:]
    if not names:
        raise ParseError("no parameter names")
    ranges = []
    body = []
    for ln in lines[1:]:
        if ln.startswith("range"):
            parts = ln.split()
            if len(parts) != 3:
                raise ParseError(f"bad range line: {ln!r}")
            ranges.append((float(parts[1]), float(parts[2])))
        else:
            for chunk in ln.split(";"):
                chunk = chunk.strip()
                if chunk:
                    body.append(parse_poly(chunk, names))
    if len(ranges) != len(names):
        raise ParseError("one 'range lo hi' line per parameter required")
    return ComponentParam(body, np.array(ranges))


def parse_points(text, nvars=None) -> PointSet:
    """Points file: one whitespace-separated point per line, `#` comments,
    optional trailing `| component=<tag>`."""
    pts = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tag = None
        if "|" in line:
            line, _, annot = line.partition("|")
            annot = annot.strip()
            if annot.startswith("component="):
                tag = annot.split("=", 1)[1]
            elif annot:
                raise ParseError(f"bad point annotation {annot!r}", ln)
        try:
            coords = [float(t) for t in line.split()]
        except ValueError as e:
            raise ParseError(f"bad coordinate: {e}", ln) from None
        if nvars is not None and len(coords) != nvars:
            raise ParseError(
                f"point has {len(coords)} coords, expected {nvars}", ln)
        pts.append(Point(np.array(coords), 0.0, component_id=tag))
    if not pts:
        raise ParseError("no points in file")
    nv = nvars if nvars is not None else len(pts[0].coords)
    out = PointSet(nv)
    for p in pts:
        if len(p.coords) != nv:
            raise ParseError("inconsistent point dimensions")
        out.points.append(p)
    return out


def format_points(ps: PointSet) -> str:
    lines = []
    for p in ps.points:
        line = " ".join(f"{c:.17g}" for c in p.coords)
        if p.component_id:
            line += f" | component={p.component_id}"
        lines.append(line)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# gradient descent homotopy


@dataclass
class Homotopy:
    """Augmented path system H(x, lambda, t) with an affine patch on lambda.

    Variables are ordered x_1..x_n, l_0..l_k, t; the path parameter t is the
    last variable.  Rows: f_i(x) - t*f_i(y), then the n stationarity rows
    l_0*(x - y) + sum_i l_i * grad f_i(x), then the patch row a.l = 1.
    """

    system: PolynomialSystem       # in n + (k+1) + 1 variables
    nx: int
    nlam: int
    patch: np.ndarray
    y: np.ndarray

    @property
    def nunk(self):
        return self.nx + self.nlam

    def start_point(self):
        """x = y, lambda = patch-scaled (1, 0, ..., 0) at t = 1."""
        lam = np.zeros(self.nlam)
        if abs(self.patch[0]) < 1e-12:
            raise ValueError("patch row degenerate in the first coordinate")
        lam[0] = 1.0 / self.patch[0]
        return np.concatenate([self.y, lam])


def build_gdh(f: PolynomialSystem, y, seed=0) -> Homotopy:
    """Gradient descent homotopy carrying the start point y toward V(f).

    lambda lives in projective space of dimension len(f); a fixed random
    affine patch row a.lambda = 1 (recorded on the Homotopy) picks the chart.
    """
    y = np.asarray(y, dtype=float)
    n = f.nvars
    k = len(f)
    nlam = k + 1
    ntot = n + nlam + 1        # unknowns plus the path variable t
    t_idx = ntot - 1

    def lift(p):
        return p.extend(ntot)

    rng = np.random.default_rng(seed)
    patch = rng.uniform(0.25, 1.0, size=nlam) * rng.choice([-1.0, 1.0],
                                                           size=nlam)
    patch[0] = abs(patch[0])   # keep the canonical start chart usable

    rows = []
    tpoly = Polynomial.variable(t_idx, ntot)
    for p in f.polys:
        rows.append(lift(p) - tpoly * p.evaluate(y))
    lam = [Polynomial.variable(n + j, ntot) for j in range(nlam)]
    grads = [[lift(g) for g in p.gradient()] for p in f.polys]
    for i in range(n):
        xi = Polynomial.variable(i, ntot)
        row = lam[0] * (xi - y[i])
        for j in range(k):
            row = row + lam[j + 1] * grads[j][i]
        rows.append(row)
    patch_row = sum((lam[j] * patch[j] for j in range(nlam)),
                    Polynomial.zero(ntot)) - 1.0
    rows.append(patch_row)

    names = list(f.varnames) + [f"l{j}" for j in range(nlam)] + ["t"]
    H = Homotopy(PolynomialSystem(rows, names), nx=n, nlam=nlam, patch=patch,
                 y=y)
    start = np.append(H.start_point(), 1.0)
    if np.max(np.abs(H.system.evaluate(start))) > 1e-8:
        raise RuntimeError("homotopy start point does not satisfy H = 0")
    return H


class TrackFailure(RuntimeError):
    pass


def track(H: Homotopy, x_start=None, h0=0.05, min_step=1e-10,
          corrector_tol=1e-10, max_corrector=10, max_steps=100000):
    """Euler predictor / Newton corrector from t = 1 down to t = 0.

    Returns the x-coordinates of the endpoint.  Steps adapt: a corrector
    failure halves the step, three consecutive successes double it.
    """
    cs = CompiledSystem(H.system)
    nunk = H.nunk
    u = np.asarray(x_start, dtype=float) if x_start is not None \
        else H.start_point()
    if u.shape != (nunk,):
        raise ValueError("start point has wrong dimension")
    t = 1.0
    h = h0
    streak = 0

    def correct(u, t):
        for _ in range(max_corrector):
            z = np.append(u, t)
            r = cs.f(z)
            if np.max(np.abs(r)) <= corrector_tol:
                return u
            J = cs.jac(z)[:, :nunk]
            step, *_ = np.linalg.lstsq(J, -r, rcond=None)
            u = u + step
            if not np.all(np.isfinite(u)) or np.linalg.norm(u) > 1e8:
                return None
        z = np.append(u, t)
        if np.max(np.abs(cs.f(z))) <= corrector_tol:
            return u
        return None

    for _ in range(max_steps):
        if t <= 0.0:
            break
        h = min(h, t)
        z = np.append(u, t)
        J = cs.jac(z)
        Ju, Jt = J[:, :nunk], J[:, nunk]
        du, *_ = np.linalg.lstsq(Ju, -Jt, rcond=None)
        pred = u - h * du          # t decreases by h
        cor = correct(pred, t - h)
        if cor is None:
            h *= 0.5
            streak = 0
            if h < min_step:
                raise TrackFailure("corrector failure after step underflow")
            continue
        u, t = cor, t - h
        streak += 1
        if streak >= 3:
            h = min(2 * h, h0)
            streak = 0
    else:
        raise TrackFailure("path did not reach t = 0")
    u = correct(u, 0.0)
    if u is None:
        raise TrackFailure("endpoint corrector failure at t = 0")
    if not np.all(np.isfinite(u)):
        raise TrackFailure("path divergence")
    return u[:H.nx]
