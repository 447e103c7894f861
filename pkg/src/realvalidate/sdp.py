"""Semidefinite feasibility: PSD block + free scalars in an affine subspace.

Solved by Dykstra-corrected alternating projections between the affine
constraint set and the PSD cone (identity on the free scalars).  A failure
to converge is reported as NoCertificateFound and is NOT a proof of
infeasibility; every success is re-checked independently of the iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

EPS_AFFINE = 1e-7
EPS_EIG = 1e-7
MAX_ITER = 50000


class StructuralInfeasibility(RuntimeError):
    """The affine constraints themselves are inconsistent."""


@dataclass
class NoCertificateFound:
    iterations: int
    affine_residual: float
    min_eig: float
    reason: str = "iteration limit"


@dataclass
class PSDSolution:
    block: np.ndarray
    free: np.ndarray
    affine_residual: float       # recomputed by the checker
    min_eig: float               # recomputed by the checker
    iterations: int


def tri_index(i, j, m):
    """Linear index of upper-triangle entry (i, j), i <= j, row-major."""
    if i > j:
        i, j = j, i
    return i * m - i * (i - 1) // 2 + (j - i)


def tri_size(m):
    return m * (m + 1) // 2


class SDPProblem:
    """Find block >= 0 (PSD) and free scalars with A x = b.

    The unknown vector stacks the upper triangle of the m x m block
    (row-major) followed by nfree scalars.  Constraints are given as
    ({linear_index: coefficient}, rhs) pairs; use tri_index for block
    entries and tri_size(m) + k for free scalar k.
    """

    def __init__(self, m, nfree, constraints):
        if not constraints:
            raise ValueError("constraint list is empty")
        self.m = m
        self.nfree = nfree
        self.ntri = tri_size(m)
        self.nunk = self.ntri + nfree
        self._cons = [(dict(func), float(b)) for func, b in constraints]
        # internal unknowns use the svec convention (off-diagonal block
        # entries scaled by sqrt(2)) so that the Euclidean metric on the
        # vector matches the Frobenius metric on the matrix; without this
        # the affine and PSD projections disagree and Dykstra can diverge
        iu = np.triu_indices(m)
        self._iu = iu
        self._offdiag = iu[0] != iu[1]
        self._sq2 = np.where(self._offdiag, np.sqrt(2.0), 1.0)
        rows, cols, vals, rhs = [], [], [], []
        for r, (func, b) in enumerate(self._cons):
            if not np.isfinite(b):
                raise ValueError("non-finite rhs")
            for idx, c in func.items():
                if not 0 <= idx < self.nunk:
                    raise ValueError(f"unknown index {idx} out of range")
                c = float(c)
                if idx < self.ntri and self._offdiag[idx]:
                    c /= np.sqrt(2.0)
                rows.append(r)
                cols.append(idx)
                vals.append(c)
            rhs.append(b)
        self.A = scipy.sparse.csr_matrix(
            (vals, (rows, cols)), shape=(len(constraints), self.nunk))
        self.b = np.array(rhs)
        self._proj = None

    # -- vectorization helpers ------------------------------------------

    def split(self, x):
        """Unknown vector -> (symmetric block, free scalars)."""
        B = np.zeros((self.m, self.m))
        B[self._iu] = x[:self.ntri] / self._sq2
        B = B + B.T - np.diag(np.diag(B))
        return B, x[self.ntri:]

    def join(self, B, free):
        return np.concatenate([B[self._iu] * self._sq2, free])

    # -- projections ----------------------------------------------------

    def _projector(self):
        if self._proj is None:
            self._proj = _AffineProjector(self.A, self.b)
        return self._proj

    def project_affine(self, x):
        """Least-norm correction of x onto {x : A x = b}."""
        return self._projector().project(x)

    def affine_residual(self, x):
        r = self.A @ x - self.b
        return float(np.linalg.norm(r) / max(np.linalg.norm(self.b), 1.0))

    def project_cone(self, x):
        B, free = self.split(x)
        w, V = np.linalg.eigh(B)
        if w[0] < 0.0:
            B = (V * np.maximum(w, 0.0)) @ V.T
        return self.join(B, free)

    # -- text dump ------------------------------------------------------

    def dump(self):
        lines = [f"block {self.m}", f"free {self.nfree}"]
        for func, b in self._cons:
            ents = " ".join(f"{c}:{float(v):.17g}"
                            for c, v in sorted(func.items()))
            lines.append(f"con {b:.17g} {ents}".rstrip())
        return "\n".join(lines) + "\n"

    @staticmethod
    def load(text):
        m = nfree = None
        cons = []
        for ln in text.splitlines():
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            parts = ln.split()
            if parts[0] == "block":
                m = int(parts[1])
            elif parts[0] == "free":
                nfree = int(parts[1])
            elif parts[0] == "con":
                rhs = float(parts[1])
                func = {}
                for tok in parts[2:]:
                    idx, val = tok.split(":")
                    func[int(idx)] = float(val)
                cons.append((func, rhs))
            else:
                raise ValueError(f"bad problem line: {ln!r}")
        if m is None or nfree is None:
            raise ValueError("missing block/free header")
        return SDPProblem(m, nfree, cons)


class _AffineProjector:
    """Cached min-norm projection onto {x : A x = b}.

    Factors A A^T once; falls back to an eigendecomposition pseudo-solve
    when the constraints are rank deficient.
    """

    def __init__(self, A, b, infeas_floor=1e-8):
        self.A = A.tocsr()
        self.AT = self.A.T.tocsr()
        self.b = b
        self.scale = max(np.linalg.norm(b), 1.0)
        AAT = (self.A @ self.A.T).tocsc()
        self._lu = None
        self._pinv = None
        try:
            lu = scipy.sparse.linalg.splu(AAT)
            # a singular-but-factorizable AAT gives garbage; sanity check
            probe = np.ones(AAT.shape[0])
            err = np.linalg.norm(AAT @ lu.solve(probe) - probe)
            if np.isfinite(err) and err <= 1e-6 * np.sqrt(AAT.shape[0]):
                self._lu = lu
        except RuntimeError:
            pass
        if self._lu is None:
            dense = AAT.toarray()
            w, V = np.linalg.eigh(dense)
            wmax = max(w[-1], 0.0)
            keep = w > 1e-12 * max(wmax, 1.0)
            inv = np.divide(1.0, w, out=np.zeros_like(w), where=keep)
            self._pinv = (V, inv)
        # consistency: the min-norm solution must actually satisfy A x = b
        x0 = self.project(np.zeros(A.shape[1]))
        res = np.linalg.norm(self.A @ x0 - b) / self.scale
        if res > infeas_floor:
            raise StructuralInfeasibility(
                f"affine constraints inconsistent (residual {res:.3e})")

    def _solve(self, r):
        if self._lu is not None:
            return self._lu.solve(r)
        V, inv = self._pinv
        return V @ (inv * (V.T @ r))

    def project(self, x):
        r = self.A @ x - self.b
        return x - self.AT @ self._solve(r)


def project_psd(A):
    """Frobenius-nearest PSD matrix: clamp negative eigenvalues to zero."""
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise ValueError("non-finite matrix entries")
    if np.max(np.abs(A - A.T)) > 1e-12 * max(1.0, np.max(np.abs(A))):
        raise ValueError("matrix is not symmetric")
    w, V = np.linalg.eigh((A + A.T) / 2)
    if w[0] >= 0.0:
        return A
    w = np.maximum(w, 0.0)
    return (V * w) @ V.T


def project_affine(x, P: SDPProblem):
    return P.project_affine(np.asarray(x, dtype=float))


def check_solution(P: SDPProblem, block, free):
    """Independent residual/eigenvalue recomputation."""
    x = P.join(np.asarray(block, dtype=float), np.asarray(free, dtype=float))
    res = P.affine_residual(x)
    w = np.linalg.eigvalsh((block + block.T) / 2)
    return res, float(w[0])


def solve_feasibility(P: SDPProblem, max_iter=MAX_ITER, eps_affine=EPS_AFFINE,
                      eps_eig=EPS_EIG, x0=None, check_every=25,
                      stall_window=600, relax=1.0):
    """Douglas-Rachford splitting between the affine set and the PSD cone.

    The affine shadow x = P_affine(z) is tested by the independent
    checker: affine residual <= eps_affine (relative to ||b||) and
    smallest block eigenvalue >= -eps_eig * (1 + ||block||_F).  On
    infeasible instances the shadow's eigenvalue gap stops improving,
    which triggers an early NoCertificateFound.

    relax in (0, 2) scales the update z += relax * (xc - xa); values
    above 1 often converge faster on well-behaved feasible instances.
    """
    if not 0.0 < relax < 2.0:
        raise ValueError("relax must lie in (0, 2)")
    z = np.zeros(P.nunk) if x0 is None else np.asarray(x0, dtype=float)
    P.project_affine(z)           # raises StructuralInfeasibility if needed
    history = []                  # (iteration, min_eig) at check points
    it = 0
    xa = z
    for it in range(1, max_iter + 1):
        xa = P.project_affine(z)
        xc = P.project_cone(2.0 * xa - z)
        z = z + relax * (xc - xa)
        if it % check_every == 0 or it == max_iter:
            B, free = P.split(xa)
            res, meig = check_solution(P, B, free)
            scale = 1.0 + np.linalg.norm(B)
            if res <= eps_affine and meig >= -eps_eig * scale:
                return PSDSolution(B, free, res, meig, it)
            history.append((it, meig))
            # give up once linear extrapolation of recent progress cannot
            # reach the acceptance threshold within the iteration budget
            if it - history[0][0] >= stall_window and \
                    meig < -10 * eps_eig * scale:
                while it - history[1][0] >= stall_window:
                    history.pop(0)
                it0, meig0 = history[0]
                rate = (meig - meig0) / (it - it0)
                need = -meig - eps_eig * scale
                horizon = min(max_iter, max(4 * it, 3000))
                if rate <= 0 or it + need / rate > horizon:
                    return NoCertificateFound(it, res, meig,
                                              reason="stalled")
        if not np.all(np.isfinite(z)):
            raise RuntimeError("non-finite iterates in splitting loop")
    B, free = P.split(xa)
    res, meig = check_solution(P, B, free)
    scale = 1.0 + np.linalg.norm(B)
    if res <= eps_affine and meig >= -eps_eig * scale:
        return PSDSolution(B, free, res, meig, it)
    return NoCertificateFound(it, res, meig)
