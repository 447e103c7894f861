"""Sparse multivariate polynomials with float coefficients.

Monomials are exponent tuples ordered by graded lex (total degree first,
then lexicographically by exponent vector, x > y > z ...).  Exponent
arithmetic is exact; coefficients are 64-bit floats and products purge
terms below a drop tolerance to keep term counts bounded.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

# Terms with |coefficient| below this are dropped after arithmetic.
DROP_TOL = 1e-14

Monomial = tuple  # exponent vector, one nonnegative int per variable


def mono_degree(m: Monomial) -> int:
    return sum(m)


def mono_key(m: Monomial):
    """Basis-listing key: degree ascending, then descending graded lex
    within a degree (so x^2, xy, xz, y^2, ... for x > y > z)."""
    return (sum(m), tuple(-e for e in m))


def mono_order_key(m: Monomial):
    """True graded-lex comparison key: bigger key = bigger monomial."""
    return (sum(m), m)


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


class Polynomial:
    """Sparse polynomial: map from exponent tuple to coefficient."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars, terms=None, drop_tol=DROP_TOL):
        self.nvars = nvars
        t = {}
        if terms:
            for m, c in terms.items():
                if abs(c) > drop_tol:
                    t[tuple(m)] = t.get(tuple(m), 0.0) + float(c)
        self.terms = {m: c for m, c in t.items() if abs(c) > drop_tol}

    @staticmethod
    def zero(nvars):
        return Polynomial(nvars)

    @staticmethod
    def constant(nvars, c):
        return Polynomial(nvars, {(0,) * nvars: c})

    @staticmethod
    def variable(i, nvars):
        e = [0] * nvars
        e[i] = 1
        return Polynomial(nvars, {tuple(e): 1.0})

    @staticmethod
    def from_monomial(m, c=1.0):
        return Polynomial(len(m), {tuple(m): c})

    def is_zero(self):
        return not self.terms

    def degree(self):
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(m) for m in self.terms)

    def coeff(self, m):
        return self.terms.get(tuple(m), 0.0)

    def coeff_norm(self):
        return math.sqrt(sum(c * c for c in self.terms.values()))

    def coeff_inf(self):
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def leading_monomial(self):
        if not self.terms:
            raise ValueError("zero polynomial has no leading monomial")
        return max(self.terms, key=mono_order_key)

    def _check(self, other):
        if self.nvars != other.nvars:
            raise ValueError(
                f"variable count mismatch: {self.nvars} vs {other.nvars}")

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.nvars, other)
        self._check(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, 0.0) + c
        return Polynomial(self.nvars, t)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.nvars, {m: -c for m, c in self.terms.items()},
                          drop_tol=0.0)

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.nvars, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Polynomial(
                self.nvars, {m: c * other for m, c in self.terms.items()})
        self._check(other)
        t = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                t[m] = t.get(m, 0.0) + c1 * c2
        return Polynomial(self.nvars, t)

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative exponent")
        out = Polynomial.constant(self.nvars, 1.0)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def scaled(self, s):
        return self * s

    def evaluate(self, x):
        """Evaluate at a point, using per-variable cached power tables."""
        if len(x) != self.nvars:
            raise ValueError(f"point has {len(x)} coords, expected {self.nvars}")
        if not self.terms:
            return 0.0
        maxe = [0] * self.nvars
        for m in self.terms:
            for i, e in enumerate(m):
                if e > maxe[i]:
                    maxe[i] = e
        pw = [[1.0] for _ in range(self.nvars)]
        for i in range(self.nvars):
            xi = float(x[i])
            for _ in range(maxe[i]):
                pw[i].append(pw[i][-1] * xi)
        total = 0.0
        for m, c in self.terms.items():
            v = c
            for i, e in enumerate(m):
                if e:
                    v *= pw[i][e]
            total += v
        return total

    def diff(self, i):
        """Partial derivative with respect to variable i."""
        t = {}
        for m, c in self.terms.items():
            e = m[i]
            if e:
                m2 = m[:i] + (e - 1,) + m[i + 1:]
                t[m2] = t.get(m2, 0.0) + c * e
        return Polynomial(self.nvars, t, drop_tol=0.0)

    def gradient(self):
        return [self.diff(i) for i in range(self.nvars)]

    def extend(self, nvars_new):
        """Reinterpret in a larger ring; new variables are appended."""
        if nvars_new < self.nvars:
            raise ValueError("cannot shrink variable count")
        pad = (0,) * (nvars_new - self.nvars)
        return Polynomial(nvars_new,
                          {m + pad: c for m, c in self.terms.items()},
                          drop_tol=0.0)

    def sorted_terms(self):
        """Terms in descending graded lex (leading term first)."""
        return sorted(self.terms.items(), key=lambda t: mono_order_key(t[0]),
                      reverse=True)

    def __eq__(self, other):
        return (isinstance(other, Polynomial) and self.nvars == other.nvars
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        return f"Polynomial({format_poly(self)!r})"


def approx_equal(p, q, tol=1e-10):
    """Coefficientwise comparison, tolerance relative to the larger poly."""
    scale = max(p.coeff_inf(), q.coeff_inf(), 1.0)
    d = p - q
    return d.coeff_inf() <= tol * scale


class PolynomialSystem:
    """Immutable ordered list of polynomials sharing one variable set."""

    __slots__ = ("nvars", "polys", "varnames")

    def __init__(self, polys, varnames=None):
        polys = list(polys)
        if not polys:
            raise ValueError("empty system")
        nv = polys[0].nvars
        for p in polys:
            if p.nvars != nv:
                raise ValueError("mixed variable counts in system")
        self.nvars = nv
        self.polys = tuple(polys)
        self.varnames = tuple(varnames) if varnames else tuple(
            f"x{i+1}" for i in range(nv))
        if len(self.varnames) != nv:
            raise ValueError("variable name count mismatch")

    def __len__(self):
        return len(self.polys)

    def __iter__(self):
        return iter(self.polys)

    def __getitem__(self, i):
        return self.polys[i]

    def evaluate(self, x):
        return np.array([p.evaluate(x) for p in self.polys])

    def residual(self, x):
        return float(np.max(np.abs(self.evaluate(x))))

    def jacobian(self):
        return PolyMatrix([[p.diff(j) for j in range(self.nvars)]
                           for p in self.polys])


class PolyMatrix:
    """Rectangular grid of polynomials."""

    __slots__ = ("entries", "rows", "cols", "nvars")

    def __init__(self, entries):
        self.entries = [list(row) for row in entries]
        self.rows = len(self.entries)
        self.cols = len(self.entries[0]) if self.rows else 0
        for row in self.entries:
            if len(row) != self.cols:
                raise ValueError("ragged polynomial matrix")
        self.nvars = self.entries[0][0].nvars if self.rows else 0

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def evaluate(self, x):
        return np.array([[p.evaluate(x) for p in row] for row in self.entries])

    def transpose(self):
        return PolyMatrix([[self.entries[i][j] for i in range(self.rows)]
                           for j in range(self.cols)])

    def submatrix(self, rows, cols):
        return PolyMatrix([[self.entries[i][j] for j in cols] for i in rows])

    def det(self):
        if self.rows != self.cols:
            raise ValueError("determinant of non-square matrix")
        if self.rows <= 4:
            return _det_cofactor(self.entries)
        return _det_bareiss(self.entries)


def _det_cofactor(e):
    n = len(e)
    if n == 1:
        return e[0][0]
    if n == 2:
        return e[0][0] * e[1][1] - e[0][1] * e[1][0]
    acc = Polynomial.zero(e[0][0].nvars)
    for j in range(n):
        minor = [[row[k] for k in range(n) if k != j] for row in e[1:]]
        term = e[0][j] * _det_cofactor(minor)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def _det_bareiss(e):
    """Fraction-free elimination; divisions are exact in the polynomial ring."""
    a = [row[:] for row in e]
    n = len(a)
    nv = a[0][0].nvars
    sign = 1
    prev = Polynomial.constant(nv, 1.0)
    for k in range(n - 1):
        if a[k][k].is_zero():
            piv = next((i for i in range(k + 1, n) if not a[i][k].is_zero()),
                       None)
            if piv is None:
                return Polynomial.zero(nv)
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = a[k][k] * a[i][j] - a[i][k] * a[k][j]
                a[i][j] = exact_divide(num, prev)
            a[i][k] = Polynomial.zero(nv)
        prev = a[k][k]
    d = a[n - 1][n - 1]
    return d if sign > 0 else -d


def exact_divide(num, den):
    """Divide num by den assuming the division is exact; graded-lex reduction."""
    if den.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    nv = num.nvars
    q = Polynomial.zero(nv)
    rem = num
    lm = den.leading_monomial()
    lc = den.terms[lm]
    guard = 0
    scale = max(num.coeff_inf(), 1.0)
    while not rem.is_zero():
        rm = rem.leading_monomial()
        if abs(rem.terms[rm]) <= 1e-10 * scale:
            rem = rem - Polynomial.from_monomial(rm, rem.terms[rm])
            continue
        if any(a < b for a, b in zip(rm, lm)):
            raise ArithmeticError("inexact polynomial division")
        mono = tuple(a - b for a, b in zip(rm, lm))
        t = Polynomial.from_monomial(mono, rem.terms[rm] / lc)
        q = q + t
        rem = rem - t * den
        guard += 1
        if guard > 10000:
            raise ArithmeticError("polynomial division did not terminate")
    return q


def jacobian(system: PolynomialSystem) -> PolyMatrix:
    return system.jacobian()


def minors(M: PolyMatrix, ell: int) -> PolynomialSystem:
    """All (ell+1)x(ell+1) subdeterminants, lexicographic subset order."""
    k = ell + 1
    if k > min(M.rows, M.cols):
        raise ValueError(
            f"minor size {k} exceeds matrix dimensions {M.rows}x{M.cols}")
    out = []
    for rows in combinations(range(M.rows), k):
        for cols in combinations(range(M.cols), k):
            out.append(M.submatrix(rows, cols).det())
    return PolynomialSystem(out)


# ---------------------------------------------------------------------------
# text format


class ParseError(ValueError):
    def __init__(self, msg, line=None, col=None):
        self.line = line
        self.col = col
        loc = "" if line is None else f" at line {line}" + (
            "" if col is None else f", col {col}")
        super().__init__(msg + loc)


_NUM_RE = re.compile(r"\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?")
_NAME_RE = re.compile(r"[A-Za-z_]\w*")


def _tokenize(s, line_no):
    """Tokens: numbers, names, and single chars + - * ^."""
    toks = []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch.isspace():
            i += 1
            continue
        m = _NUM_RE.match(s, i)
        if m:
            toks.append(("num", m.group(), i))
            i = m.end()
            continue
        m = _NAME_RE.match(s, i)
        if m:
            toks.append(("name", m.group(), i))
            i = m.end()
            continue
        if ch in "+-*^":
            toks.append((ch, ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line_no, i + 1)
    return toks


def parse_poly(text, varnames, line_no=None):
    """Parse one polynomial in the system file grammar."""
    index = {v: i for i, v in enumerate(varnames)}
    nv = len(varnames)
    toks = _tokenize(text, line_no)
    if not toks:
        raise ParseError("empty polynomial", line_no)
    terms = {}
    pos = 0

    def parse_term():
        nonlocal pos
        sign = 1.0
        while pos < len(toks) and toks[pos][0] in "+-":
            if toks[pos][0] == "-":
                sign = -sign
            pos += 1
        if pos >= len(toks):
            raise ParseError("dangling sign", line_no,
                             toks[-1][2] + 1 if toks else None)
        coef = sign
        expo = [0] * nv
        saw_factor = False
        expect_factor = True
        while pos < len(toks):
            kind, val, col = toks[pos]
            if kind == "num":
                if saw_factor and not expect_factor:
                    break  # implicit end of term (shouldn't normally occur)
                coef *= float(val)
                saw_factor = True
                expect_factor = False
                pos += 1
            elif kind == "name":
                if val not in index:
                    raise ParseError(f"undeclared variable {val!r}", line_no,
                                     col + 1)
                e = 1
                pos += 1
                if pos < len(toks) and toks[pos][0] == "^":
                    pos += 1
                    if pos >= len(toks) or toks[pos][0] != "num":
                        raise ParseError("expected exponent after '^'", line_no,
                                         col + 1)
                    etxt = toks[pos][1]
                    if not etxt.isdigit():
                        raise ParseError(f"non-integer exponent {etxt!r}",
                                         line_no, toks[pos][2] + 1)
                    e = int(etxt)
                    pos += 1
                expo[index[val]] += e
                saw_factor = True
                expect_factor = False
            elif kind == "*":
                pos += 1
                expect_factor = True
            else:  # + or - starts the next term
                break
        if not saw_factor:
            raise ParseError("empty term", line_no)
        m = tuple(expo)
        terms[m] = terms.get(m, 0.0) + coef

    while pos < len(toks):
        parse_term()
    return Polynomial(nv, terms)


def parse_system(text) -> PolynomialSystem:
    """Parse the system file: `vars <names>` then polynomials, ';'-separated."""
    lines = text.splitlines()
    varnames = None
    polys = []
    for ln, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if varnames is None:
            parts = line.split()
            if parts[0] != "vars" or len(parts) < 2:
                raise ParseError("expected header 'vars <name>+'", ln)
            varnames = parts[1:]
            if len(set(varnames)) != len(varnames):
                raise ParseError("duplicate variable name", ln)
            continue
        for chunk in line.split(";"):
            chunk = chunk.strip()
            if chunk:
                polys.append(parse_poly(chunk, varnames, line_no=ln))
    if varnames is None:
        raise ParseError("missing 'vars' header")
    if not polys:
        raise ParseError("no polynomials in system file")
    return PolynomialSystem(polys, varnames)


def format_poly(p, varnames=None) -> str:
    if varnames is None:
        varnames = [f"x{i+1}" for i in range(p.nvars)]
    if p.is_zero():
        return "0"
    parts = []
    for m, c in p.sorted_terms():
        factors = []
        for i, e in enumerate(m):
            if e == 1:
                factors.append(varnames[i])
            elif e > 1:
                factors.append(f"{varnames[i]}^{e}")
        mag = abs(c)
        if not factors or mag != 1.0:
            factors.insert(0, f"{mag:.17g}")
        body = "*".join(factors)
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if c > 0 else f"- {body}")
    return " ".join(parts)


def format_system(system: PolynomialSystem) -> str:
    lines = ["vars " + " ".join(system.varnames)]
    lines += [format_poly(p, system.varnames) for p in system.polys]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# fast batched evaluation


class CompiledSystem:
    """System + Jacobian evaluation through stacked numpy exponent tables.

    Newton iterations and path tracking evaluate the same system many
    thousands of times; dict-based evaluation is too slow for that.
    """

    def __init__(self, system: PolynomialSystem):
        self.system = system
        self.nvars = system.nvars
        self.npolys = len(system)
        self._fE, self._fc, self._frow = self._stack(system.polys)
        jac = system.jacobian()
        dpolys = [jac[i, j] for i in range(self.npolys)
                  for j in range(self.nvars)]
        self._jE, self._jc, self._jrow = self._stack(dpolys)

    def _stack(self, polys):
        E, c, row = [], [], []
        for r, p in enumerate(polys):
            for m, co in p.terms.items():
                E.append(m)
                c.append(co)
                row.append(r)
        if not E:
            E = [(0,) * self.nvars]
            c = [0.0]
            row = [0]
        return (np.array(E, dtype=np.int64), np.array(c), np.array(row))

    def f(self, x):
        x = np.asarray(x, dtype=float)
        vals = self._fc * np.prod(x[None, :] ** self._fE, axis=1)
        return np.bincount(self._frow, weights=vals, minlength=self.npolys)

    def jac(self, x):
        x = np.asarray(x, dtype=float)
        vals = self._jc * np.prod(x[None, :] ** self._jE, axis=1)
        flat = np.bincount(self._jrow, weights=vals,
                           minlength=self.npolys * self.nvars)
        return flat.reshape(self.npolys, self.nvars)

    def residual(self, x):
        return float(np.max(np.abs(self.f(x))))
