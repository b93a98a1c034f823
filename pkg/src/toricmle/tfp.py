"""Codimension-zero toric fiber products.

Two configurations ``B = {b^i_j}`` and ``C = {c^i_k}`` graded by linearly
independent vectors ``a^i`` glue to ``B x_A C = {(b^i_j, c^i_k)}``.  Its ideal is
generated by lifts of the factor generators together with the 2x2 minors of
every ``i``-slice, and every critical point of its likelihood is assembled
from critical points of the factors.

Index conventions (all 0-based): factor variables are keyed ``(i, j)`` and
``(i, k)``; product variables are keyed ``(i, j, k)`` and flattened in
lexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Sequence

import sympy

from .model import Binomial, DesignMatrix

class GradingError(ValueError):
    """The grading data violates a hypothesis of the construction."""


class MarginError(ValueError):
    """Factor estimates have incompatible margins."""


def _vec(v):
    return tuple(int(x) for x in v)


def _matvec(M, v):
    return tuple(sum(a * b for a, b in zip(row, v)) for row in M)


@dataclass(frozen=True)
class GradedConfig:
    gradingA: tuple
    B: tuple
    C: tuple
    pi1: tuple
    pi2: tuple

    def __post_init__(self):
        A = tuple(_vec(a) for a in self.gradingA)
        B = tuple(tuple(_vec(b) for b in Bi) for Bi in self.B)
        C = tuple(tuple(_vec(c) for c in Ci) for Ci in self.C)
        pi1 = tuple(_vec(r) for r in self.pi1)
        pi2 = tuple(_vec(r) for r in self.pi2)
        object.__setattr__(self, "gradingA", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "pi1", pi1)
        object.__setattr__(self, "pi2", pi2)
        self._validate()

    def _validate(self):
        r = len(self.gradingA)
        if r == 0:
            raise GradingError("at least one grading vector is required")
        if len(self.B) != r or len(self.C) != r:
            raise GradingError("B and C must have one block per grading vector")
        if any(len(Bi) == 0 for Bi in self.B) or any(len(Ci) == 0 for Ci in self.C):
            raise GradingError("every block of B and C must be nonempty")
        d = len(self.gradingA[0])
        if any(len(a) != d for a in self.gradingA):
            raise GradingError("grading vectors have inconsistent dimensions")
        if len(self.pi1) != d or len(self.pi2) != d:
            raise GradingError(f"projections must have {d} rows")
        for i, a in enumerate(self.gradingA):
            for j, b in enumerate(self.B[i]):
                if _matvec(self.pi1, b) != a:
                    raise GradingError(f"pi1(b^{i}_{j}) != a^{i}")
            for k, c in enumerate(self.C[i]):
                if _matvec(self.pi2, c) != a:
                    raise GradingError(f"pi2(c^{i}_{k}) != a^{i}")
        M = sympy.Matrix(self.gradingA)
        if M.rank() != r:
            raise GradingError("grading vectors are not linearly independent")
        try:
            M.gauss_jordan_solve(sympy.ones(r, 1))
        except ValueError:
            raise GradingError("no rational omega with omega . a^i = 1 for all i") from None

    @property
    def r(self):
        return len(self.gradingA)

    @property
    def s(self):
        return tuple(len(Bi) for Bi in self.B)

    @property
    def t(self):
        return tuple(len(Ci) for Ci in self.C)

    def indices(self):
        """Product indices ``(i, j, k)`` in lexicographic order."""
        return [(i, j, k) for i in range(self.r) for j in range(self.s[i]) for k in range(self.t[i])]

    def b_indices(self):
        return [(i, j) for i in range(self.r) for j in range(self.s[i])]

    def c_indices(self):
        return [(i, k) for i in range(self.r) for k in range(self.t[i])]

    def matrix_B(self) -> DesignMatrix:
        return DesignMatrix.from_columns([self.B[i][j] for i, j in self.b_indices()])

    def matrix_C(self) -> DesignMatrix:
        return DesignMatrix.from_columns([self.C[i][k] for i, k in self.c_indices()])

    def as_dict(self):
        return {"grading": [list(a) for a in self.gradingA],
                "B": [[list(b) for b in Bi] for Bi in self.B],
                "C": [[list(c) for c in Ci] for Ci in self.C],
                "pi1": [list(r) for r in self.pi1], "pi2": [list(r) for r in self.pi2]}


def tfp_matrix(cfg: GradedConfig) -> DesignMatrix:
    """Columns ``(b^i_j, c^i_k)`` in lexicographic ``(i, j, k)`` order."""
    return DesignMatrix.from_columns([cfg.B[i][j] + cfg.C[i][k] for i, j, k in cfg.indices()])


# -- generators ----------------------------------------------------------------

def _expand(mono):
    out = []
    for v, e in mono:
        out.extend([v] * e)
    return out


def _paired(f: Binomial):
    """Match the variables of both monomials by grading index ``i``.

    Within each monomial the variables are sorted stably by ``i``, so equal
    grading degrees pair up position by position.
    """
    left = sorted(_expand(f.plus), key=lambda v: v[0])
    right = sorted(_expand(f.minus), key=lambda v: v[0])
    if len(left) != len(right):
        raise GradingError(f"binomial {f} is not homogeneous")
    if [v[0] for v in left] != [v[0] for v in right]:
        raise GradingError(f"binomial {f} is not homogeneous for the multigrading")
    return left, right


def lift(f: Binomial, cfg: GradedConfig, side: str = "B") -> list:
    """All lifts ``f_k`` of a generator of one factor.

    ``side="B"`` lifts a binomial in the ``(i, j)`` variables over every
    ``k in prod [t_{i_l}]``; ``side="C"`` lifts one in ``(i, k)`` over ``j``.
    A zero binomial lifts to the empty list.
    """
    if f.is_zero():
        return []
    left, right = _paired(f)
    sizes = cfg.t if side == "B" else cfg.s
    ranges = [range(sizes[v[0]]) for v in left]
    out = []
    for ks in product(*ranges):
        if side == "B":
            plus = [(i, j, k) for (i, j), k in zip(left, ks)]
            minus = [(i, j, k) for (i, j), k in zip(right, ks)]
        else:
            plus = [(i, j, k) for (i, k), j in zip(left, ks)]
            minus = [(i, j, k) for (i, k), j in zip(right, ks)]
        out.append(Binomial.from_variables(plus, minus))
    return out


def quad(cfg: GradedConfig) -> list:
    """2x2 minors of each slice ``(z^i_{jk})_{j,k}``."""
    out = []
    for i in range(cfg.r):
        for j1, j2 in combinations(range(cfg.s[i]), 2):
            for k1, k2 in combinations(range(cfg.t[i]), 2):
                out.append(Binomial.from_variables(
                    [(i, j1, k1), (i, j2, k2)], [(i, j1, k2), (i, j2, k1)]))
    return out


def generators(F: Sequence[Binomial], G: Sequence[Binomial], cfg: GradedConfig) -> list:
    """Lift(F), Lift(G) and Quad without zero or repeated binomials."""
    seen = set()
    out = []
    candidates = [g for f in F for g in lift(f, cfg, "B")]
    candidates += [g for f in G for g in lift(f, cfg, "C")]
    candidates += quad(cfg)
    for g in candidates:
        if g.is_zero():
            continue
        key = g.canonical()
        if key in seen:
            continue
        seen.add(key)
        out.append(g)
    return out


# -- vectors -------------------------------------------------------------------

@dataclass(frozen=True)
class TfpVector:
    """Entries ``u^i_{jk}``, stored as nested tuples ``entries[i][j][k]``."""

    entries: tuple

    @classmethod
    def from_flat(cls, cfg: GradedConfig, values):
        values = list(values)
        if len(values) != len(cfg.indices()):
            raise ValueError(f"expected {len(cfg.indices())} entries, got {len(values)}")
        it = iter(values)
        return cls(tuple(tuple(tuple(next(it) for _ in range(cfg.t[i]))
                               for _ in range(cfg.s[i])) for i in range(cfg.r)))

    @classmethod
    def from_function(cls, cfg: GradedConfig, fn: Callable):
        return cls(tuple(tuple(tuple(fn(i, j, k) for k in range(cfg.t[i]))
                               for j in range(cfg.s[i])) for i in range(cfg.r)))

    def flat(self):
        return [x for block in self.entries for row in block for x in row]

    def __getitem__(self, ijk):
        i, j, k = ijk
        return self.entries[i][j][k]

    def slices(self):
        return self.entries


def marginals(u: TfpVector):
    """``(u_A, u_B, u_C)`` with ``u_B``/``u_C`` flattened in ``(i, j)``/``(i, k)`` order."""
    uA, uB, uC = [], [], []
    for block in u.entries:
        uA.append(sum((x for row in block for x in row), 0))
        uB.extend(sum(row, 0) for row in block)
        t = len(block[0]) if block else 0
        uC.extend(sum((row[k] for row in block), 0) for k in range(t))
    return tuple(uA), tuple(uB), tuple(uC)


def _split(flat, sizes):
    out, pos = [], 0
    for n in sizes:
        out.append(tuple(flat[pos:pos + n]))
        pos += n
    if pos != len(flat):
        raise ValueError("vector length does not match the index ranges")
    return out


def compose_critical(pA, pB, pC, cfg: GradedConfig | None = None,
                     tol: float = 1e-9) -> TfpVector:
    """``p^i_{jk} = pB^i_j pC^i_k / pA^i``.

    ``pB`` and ``pC`` are either nested per ``i`` or flat with ``cfg`` given.
    Block sums must equal ``pA`` exactly for exact input, within ``tol`` otherwise.
    """
    pA = tuple(pA)
    if cfg is not None:
        pB = _split(list(pB), cfg.s)
        pC = _split(list(pC), cfg.t)
    pB = [tuple(b) for b in pB]
    pC = [tuple(c) for c in pC]
    if not (len(pA) == len(pB) == len(pC)):
        raise ValueError("pA, pB and pC must have the same number of blocks")
    for i, a in enumerate(pA):
        if a == 0:
            raise ZeroDivisionError(f"pA[{i}] is zero")
        if not (_same(sum(pB[i]), a, tol) and _same(sum(pC[i]), a, tol)):
            raise MarginError(f"block {i}: margins {sum(pB[i])}, {sum(pC[i])} differ from pA={a}")
    return TfpVector(tuple(tuple(tuple(_div(b * c, a) for c in pC[i]) for b in pB[i])
                           for i, a in enumerate(pA)))


def _same(x, y, tol):
    if isinstance(x, float) or isinstance(y, float):
        return abs(x - y) <= tol
    return x == y


def _div(x, y):
    if isinstance(x, int) and isinstance(y, int):
        return Fraction(x, y)
    return x / y


def slice_minors(p: TfpVector):
    """All 2x2 minors of every slice; zero exactly on rank-one slices."""
    out = []
    for block in p.entries:
        for j1, j2 in combinations(range(len(block)), 2):
            for k1, k2 in combinations(range(len(block[0])), 2):
                out.append(block[j1][k1] * block[j2][k2] - block[j1][k2] * block[j2][k1])
    return out


def mldeg_product(m_B: int, m_C: int) -> int:
    if m_B < 1 or m_C < 1:
        raise ValueError("ML degrees are positive")
    return m_B * m_C


def has_independent_columns(A: DesignMatrix) -> bool:
    """Whether the columns with an appended ones row are linearly independent.

    Such a model is saturated: its estimate is the normalized data.
    """
    M = sympy.Matrix(list(A.entries) + [[1] * A.n_cols])
    return M.rank() == A.n_cols


def tfp_mle(cfg: GradedConfig, u, mle_B: Callable | None = None, mle_C: Callable | None = None):
    """Estimate on ``B x_A C`` assembled from estimates of the factors.

    ``mle_B(u_B)`` and ``mle_C(u_C)`` default to the normalized margins when the
    factor is saturated and to iterative scaling otherwise.  Returns
    ``(p, (pA, pB, pC))`` with ``p`` a :class:`TfpVector`.
    """
    if not isinstance(u, TfpVector):
        u = TfpVector.from_flat(cfg, u)
    uA, uB, uC = marginals(u)
    total = sum(uA)
    if total <= 0:
        raise ValueError("data must have positive total")
    pA = tuple(Fraction(x, total) for x in uA)
    mle_B = mle_B or _default_mle(cfg.matrix_B())
    mle_C = mle_C or _default_mle(cfg.matrix_C())
    pB = tuple(mle_B(uB))
    pC = tuple(mle_C(uC))
    if any(isinstance(x, float) for x in pB + pC):
        # floating factor estimates only match margins approximately
        pB = _rescale_blocks(pB, cfg.s, pA)
        pC = _rescale_blocks(pC, cfg.t, pA)
        pA = tuple(float(a) for a in pA)
    return compose_critical(pA, pB, pC, cfg), (pA, pB, pC)


def _rescale_blocks(p, sizes, pA):
    out, pos = [], 0
    for n, a in zip(sizes, pA):
        block = [float(x) for x in p[pos:pos + n]]
        s = sum(block)
        out.extend(x * float(a) / s if s else 0.0 for x in block)
        pos += n
    return tuple(out)


def _default_mle(A: DesignMatrix):
    if has_independent_columns(A):
        def exact(counts):
            t = sum(counts)
            return tuple(Fraction(x, t) for x in counts)
        return exact

    def numeric(counts):
        from .ipf import ipf_solve

        return ipf_solve(A, counts).estimate.values
    return numeric
