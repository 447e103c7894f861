"""Vanishing-ideal interpolation: evaluation matrices, Hilbert function,
regularity.

The degree-d slice of the vanishing ideal of a point set T is the null
space of the matrix M with M_ij = (j-th monomial)(i-th point).  Rows may be
rescaled to unit norm for conditioning; the recorded scales restore raw
values exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .poly import Polynomial, mono_key

NULL_TOL = 1e-8   # singular values below NULL_TOL * smax span the null space


def monomial_basis(n, d):
    """All monomials in n variables of total degree <= d, graded lex."""
    if n < 1 or d < 0:
        raise ValueError("need n >= 1 and d >= 0")
    out = []

    def rec(prefix, remaining, budget):
        if remaining == 1:
            out.append(prefix + (budget,))
            return
        for e in range(budget + 1):
            rec(prefix + (e,), remaining - 1, budget - e)

    monos = []
    for deg in range(d + 1):
        level = []

        def gen(prefix, remaining, budget):
            if remaining == 0:
                if budget == 0:
                    level.append(prefix)
                return
            for e in range(budget + 1):
                gen(prefix + (e,), remaining - 1, budget - e)

        gen((), n, deg)
        level.sort(key=mono_key)
        monos.extend(level)
    return monos


def basis_size(n, d):
    return math.comb(n + d, d)


@dataclass
class EvalMatrix:
    matrix: np.ndarray          # rows = points (scaled), cols = monomials
    monomials: list
    scales: np.ndarray          # per-row factors; raw row = matrix[i] * scales[i]
    degree: int


@dataclass
class VanishingBasis:
    degree: int
    generators: list                 # orthonormal coefficient vectors as polys
    hilbert: list                    # Hilbert function values at 0..degree
    singular_values: np.ndarray
    monomials: list
    regularity: tuple | None = None  # (r, generated_at_r) when computed

    def coeff_matrix(self):
        """Generators as rows over the monomial basis."""
        A = np.zeros((len(self.generators), len(self.monomials)))
        index = {m: j for j, m in enumerate(self.monomials)}
        for i, g in enumerate(self.generators):
            for m, c in g.terms.items():
                A[i, index[m]] = c
        return A


def evaluation_matrix(T, d, scaling=True) -> EvalMatrix:
    """M_ij = beta_j(t_i) over the graded-lex monomial basis of degree <= d."""
    pts = T.coords() if hasattr(T, "coords") else np.atleast_2d(
        np.asarray(T, dtype=float))
    if pts.shape[0] < 1:
        raise ValueError("need at least one point")
    n = pts.shape[1]
    monos = monomial_basis(n, d)
    M = np.empty((pts.shape[0], len(monos)))
    maxdeg = max(max(m) for m in monos)
    for i, x in enumerate(pts):
        pw = np.ones((n, maxdeg + 1))
        for e in range(1, maxdeg + 1):
            pw[:, e] = pw[:, e - 1] * x
        for j, m in enumerate(monos):
            v = 1.0
            for vi, e in enumerate(m):
                if e:
                    v *= pw[vi, e]
            M[i, j] = v
    scales = np.ones(pts.shape[0])
    if scaling:
        scales = np.linalg.norm(M, axis=1)
        scales[scales == 0.0] = 1.0
        M = M / scales[:, None]
    return EvalMatrix(M, monos, scales, d)


def _numeric_rank(M, tol=NULL_TOL):
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0, s
    return int(np.sum(s > tol * s[0])), s


def hilbert_function(T, dmax, tol=NULL_TOL, scaling=True):
    """hilbert[c] = rank of the degree-<=c evaluation matrix, c = 0..dmax."""
    em = evaluation_matrix(T, dmax, scaling=scaling)
    n = len(em.monomials[0]) if em.monomials else 1
    out = []
    for c in range(dmax + 1):
        ncols = basis_size(n, c)
        rank, _ = _numeric_rank(em.matrix[:, :ncols], tol=tol)
        out.append(rank)
    return out


def _shift_polynomial(p, center):
    """Expand p(x + center) in the original ring."""
    shifted = [Polynomial.variable(i, p.nvars) + center[i]
               for i in range(p.nvars)]
    out = Polynomial.zero(p.nvars)
    for m, c in p.terms.items():
        term = Polynomial.constant(p.nvars, c)
        for i, e in enumerate(m):
            if e:
                term = term * shifted[i] ** e
        out = out + term
    return out


def vanishing_space(T, d, tol=NULL_TOL, scaling=True,
                    recenter=False) -> VanishingBasis:
    """Orthonormal basis of I(T)_{<=d} from the full SVD of the evaluation
    matrix.

    With recenter=True the points are shifted to their centroid before
    interpolation (a conditioning aid) and the generators are expanded back
    in the original coordinates; the reported coefficient vectors are then
    no longer orthonormal.
    """
    pts = T.coords() if hasattr(T, "coords") else np.atleast_2d(
        np.asarray(T, dtype=float))
    center = None
    if recenter:
        center = pts.mean(axis=0)
        pts = pts - center
    em = evaluation_matrix(pts, d, scaling=scaling)
    U, s, Vt = np.linalg.svd(em.matrix, full_matrices=True)
    if s.size and s[0] > 0.0:
        rank = int(np.sum(s > tol * s[0]))
    else:
        rank = 0
        if em.matrix.size:
            raise ValueError("degenerate evaluation matrix: all singular "
                             "values below threshold")
    n = pts.shape[1]
    null = Vt[rank:]
    gens = []
    for row in null:
        terms = {m: c for m, c in zip(em.monomials, row) if abs(c) > 1e-300}
        g = Polynomial(n, terms, drop_tol=0.0)
        if center is not None:
            g = _shift_polynomial(g, -center)
        gens.append(g)
    hilb = []
    for c in range(d + 1):
        ncols = basis_size(n, c)
        r, _ = _numeric_rank(em.matrix[:, :ncols], tol=tol)
        hilb.append(r)
    return VanishingBasis(d, gens, hilb, s, em.monomials)


def span_projection_residual(polys_a, polys_b, n, d):
    """Max residual of projecting each basis onto the span of the other."""
    monos = monomial_basis(n, d)
    index = {m: j for j, m in enumerate(monos)}

    def mat(polys):
        A = np.zeros((len(polys), len(monos)))
        for i, p in enumerate(polys):
            for m, c in p.terms.items():
                A[i, index[m]] = c
            nrm = np.linalg.norm(A[i])
            if nrm > 0:
                A[i] /= nrm
        return A

    A, B = mat(polys_a), mat(polys_b)

    def resid(X, Y):
        # distance of each row of X from rowspace(Y)
        Q, _ = np.linalg.qr(Y.T)
        proj = X @ Q @ Q.T
        return float(np.max(np.linalg.norm(X - proj, axis=1))) if len(X) \
            else 0.0

    return max(resid(A, B), resid(B, A))


def _generates_next_degree(pts, c, tol, scaling):
    """Does <I(T)_{<=c}> reach all of I(T)_{<=c+1}?"""
    npts, n = pts.shape
    vb = vanishing_space(pts, c, tol=tol, scaling=scaling)
    dim_next = basis_size(n, c + 1) - npts
    products = []
    for g in vb.generators:
        gd = g.degree()
        for m in monomial_basis(n, c + 1 - gd):
            products.append(Polynomial.from_monomial(m) * g)
    if not products:
        return dim_next == 0
    monos = monomial_basis(n, c + 1)
    index = {m: j for j, m in enumerate(monos)}
    A = np.zeros((len(products), len(monos)))
    for i, p in enumerate(products):
        for m, cf in p.terms.items():
            A[i, index[m]] = cf
    rank, _ = _numeric_rank(A, tol=tol)
    return rank == dim_next


def regularity_check(T, tol=NULL_TOL, scaling=True, degree_cap=None):
    """Degree r at which the vanishing ideal is generated, with verdict.

    Let r0 be the least degree where the Hilbert function reaches |T|; the
    ideal is generated in degree r0 or r0 + 1.  The generation test
    compares dim I(T)_{<=c+1} against the dimension of the span of
    {m*g : g in I(T)_{<=c}, deg(m*g) <= c+1}.  Returns the first degree
    (r0, else r0 + 1) where the test succeeds, with the test outcome.
    """
    pts = T.coords() if hasattr(T, "coords") else np.atleast_2d(
        np.asarray(T, dtype=float))
    npts = pts.shape[0]
    cap = degree_cap if degree_cap is not None else max(npts, 2)
    hilb = hilbert_function(pts, cap, tol=tol, scaling=scaling)
    r0 = next((c for c, h in enumerate(hilb) if h == npts), None)
    if r0 is None:
        raise RuntimeError(
            f"Hilbert function did not reach |T|={npts} up to degree {cap}")
    if _generates_next_degree(pts, r0, tol, scaling):
        return r0, True
    return r0 + 1, _generates_next_degree(pts, r0 + 1, tol, scaling)


def reduced_generators(T, degree, tol=NULL_TOL, scaling=True):
    """Near-minimal generating set of I(T)_{<=degree} by degree layering.

    Degree by degree, keeps only the part of the slice I(T)_{<=c} not
    already spanned by monomial multiples of lower-degree generators.
    The result is ordered by descending degree;
    certifying these suffices to certify the whole slice.
    """
    pts = T.coords() if hasattr(T, "coords") else np.atleast_2d(
        np.asarray(T, dtype=float))
    n = pts.shape[1]
    gens = []
    for c in range(1, degree + 1):
        vb = vanishing_space(pts, c, tol=tol, scaling=scaling)
        if not vb.generators:
            continue
        monos = monomial_basis(n, c)
        index = {m: j for j, m in enumerate(monos)}
        N = np.zeros((len(vb.generators), len(monos)))
        for i, g in enumerate(vb.generators):
            for m, cf in g.terms.items():
                N[i, index[m]] = cf
        products = []
        for g in gens:
            for m in monomial_basis(n, c - g.degree()):
                products.append(Polynomial.from_monomial(m) * g)
        if products:
            P = np.zeros((len(products), len(monos)))
            for i, p in enumerate(products):
                for m, cf in p.terms.items():
                    P[i, index[m]] = cf
            Q = scipy.linalg.orth(P.T, rcond=tol)
            M = N - (N @ Q) @ Q.T
        else:
            M = N
        U, s, Vt = np.linalg.svd(M, full_matrices=False)
        for k in range(len(s)):
            if s[k] > 1e-6:
                row = Vt[k]
                terms = {m: cf for m, cf in zip(monos, row)
                         if abs(cf) > 1e-300}
                gens.append(Polynomial(n, terms, drop_tol=0.0))
    gens.sort(key=lambda g: g.degree(), reverse=True)
    return gens
