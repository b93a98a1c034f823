"""Core types for toric (log-linear) models.

A model is given by a lattice polytope whose ordered lattice points are the
columns of a design matrix ``A``.  The homogenizing parameter ``s`` is implicit
(an all-ones row), so a point of the model is ``p_j = c_j * s * theta^{a_j}``.

Two numeric representations coexist: EXACT (``fractions.Fraction``, used for
rational constructions) and FLOAT (binary64, used for root finding and
iterative scaling).  Every :class:`ProbVector` carries its representation tag.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Sequence

import numpy as np

from .qfield import is_exact

FLOAT_SUM_TOL = 1e-9


class DomainError(ValueError):
    """Raised when a monomial map is evaluated outside its domain."""


class Representation(enum.Enum):
    EXACT = "exact"
    FLOAT = "float"


@dataclass(frozen=True)
class LatticePolytope:
    """Ordered list of distinct integer points; the order fixes p_1..p_n."""

    points: tuple

    def __post_init__(self):
        pts = tuple(tuple(int(x) for x in p) for p in self.points)
        if not pts:
            raise ValueError("a lattice polytope needs at least one point")
        dims = {len(p) for p in pts}
        if len(dims) != 1:
            raise ValueError("points have inconsistent dimensions")
        if len(set(pts)) != len(pts):
            raise ValueError("lattice points must be distinct")
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return len(self.points[0])

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class DesignMatrix:
    """Integer matrix with one column per lattice point (rows x columns)."""

    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.entries)
        if len({len(r) for r in rows}) > 1:
            raise ValueError("ragged design matrix")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def from_columns(cls, columns, n_rows=None):
        columns = [tuple(c) for c in columns]
        if n_rows is None:
            n_rows = len(columns[0]) if columns else 0
        return cls(tuple(tuple(c[i] for c in columns) for i in range(n_rows)))

    @property
    def n_rows(self) -> int:
        return len(self.entries)

    @property
    def n_cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def column(self, j):
        return tuple(r[j] for r in self.entries)

    def columns(self):
        return [self.column(j) for j in range(self.n_cols)]

    def to_numpy(self, dtype=float):
        return np.array(self.entries, dtype=dtype).reshape(self.n_rows, self.n_cols)

    def apply(self, v):
        """Matrix-vector product, preserving exact entries."""
        if len(v) != self.n_cols:
            raise ValueError(f"vector of length {len(v)} does not match {self.n_cols} columns")
        return tuple(sum((a * x for a, x in zip(row, v)), 0) for row in self.entries)

    def tolist(self):
        return [list(r) for r in self.entries]


@dataclass(frozen=True)
class DataVector:
    counts: tuple

    def __post_init__(self):
        if any(isinstance(c, bool) or int(c) != c for c in self.counts):
            raise ValueError("counts must be integers")
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise ValueError("counts must be nonnegative")
        if sum(counts) <= 0:
            raise ValueError("data vector must have positive total")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def __len__(self):
        return len(self.counts)

    def __iter__(self):
        return iter(self.counts)

    def __getitem__(self, j):
        return self.counts[j]

    def normalized(self):
        t = self.total
        return tuple(Fraction(c, t) for c in self.counts)


@dataclass(frozen=True)
class Scaling:
    values: tuple

    def __post_init__(self):
        vals = tuple(Fraction(v) for v in self.values)
        if any(v == 0 for v in vals):
            raise ValueError("scaling entries must be nonzero")
        object.__setattr__(self, "values", vals)

    @classmethod
    def ones(cls, n):
        return cls((1,) * n)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, j):
        return self.values[j]


@dataclass(frozen=True)
class ProbVector:
    values: tuple
    representation: Representation
    distribution: bool = True

    def __post_init__(self):
        if self.representation is Representation.EXACT:
            vals = tuple(Fraction(v) for v in self.values)
            if sum(vals) != 1:
                raise ValueError(f"exact probability vector sums to {sum(vals)}, not 1")
        else:
            vals = tuple(float(v) for v in self.values)
            if not math.isclose(math.fsum(vals), 1.0, abs_tol=FLOAT_SUM_TOL):
                raise ValueError(f"probability vector sums to {math.fsum(vals)!r}")
        if self.distribution and any(v < 0 for v in vals):
            raise ValueError("negative entry in a probability distribution")
        object.__setattr__(self, "values", vals)

    @classmethod
    def exact(cls, values, distribution=True):
        return cls(tuple(values), Representation.EXACT, distribution)

    @classmethod
    def floating(cls, values, distribution=True):
        return cls(tuple(values), Representation.FLOAT, distribution)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, j):
        return self.values[j]

    def to_numpy(self):
        return np.array([float(v) for v in self.values])


# -- binomials -----------------------------------------------------------------

def _normalize_monomial(mono):
    acc = {}
    for var, e in mono:
        e = int(e)
        if e < 0:
            raise ValueError("negative exponent in monomial")
        if e:
            acc[var] = acc.get(var, 0) + e
    return tuple(sorted(acc.items(), key=lambda ve: _sort_key(ve[0])))


def _sort_key(var):
    return (1, var) if isinstance(var, tuple) else (0, (var,))


@dataclass(frozen=True)
class Binomial:
    """``plus - minus`` with sparse monomials of ``(variable, exponent)`` pairs.

    Variables are 0-based integer indices for ordinary models; other hashable
    keys (tuples) are allowed for fiber-product variables.
    """

    plus: tuple
    minus: tuple

    def __post_init__(self):
        plus = _normalize_monomial(self.plus)
        minus = _normalize_monomial(self.minus)
        if sum(e for _, e in plus) != sum(e for _, e in minus):
            raise ValueError("binomial is not homogeneous")
        object.__setattr__(self, "plus", plus)
        object.__setattr__(self, "minus", minus)

    @classmethod
    def from_variables(cls, plus_vars: Sequence[Hashable], minus_vars: Sequence[Hashable]):
        return cls(tuple((v, 1) for v in plus_vars), tuple((v, 1) for v in minus_vars))

    @classmethod
    def zero(cls):
        return cls((), ())

    @classmethod
    def parse(cls, text: str):
        """Parse ``"p2p4 - p1p5"``, ``"p_3^2 - p_1 p_5"`` etc. (1-based indices)."""
        sides = text.replace("*", " ").split("-")
        if len(sides) != 2:
            raise ValueError(f"cannot parse binomial {text!r}")

        def mono(s):
            found = re.findall(r"p_?\{?(\d+)\}?(?:\^\{?(\d+)\}?)?", s)
            if not found and s.strip():
                raise ValueError(f"cannot parse monomial {s!r}")
            return tuple((int(v) - 1, int(e) if e else 1) for v, e in found)

        return cls(mono(sides[0]), mono(sides[1]))

    @property
    def degree(self):
        return sum(e for _, e in self.plus)

    def is_zero(self):
        return self.plus == self.minus

    def variables(self):
        return {v for v, _ in self.plus} | {v for v, _ in self.minus}

    def canonical(self):
        """Orientation-free key: g and -g compare equal."""
        a, b = self.plus, self.minus
        ka = tuple((_sort_key(v), e) for v, e in a)
        kb = tuple((_sort_key(v), e) for v, e in b)
        return (a, b) if ka <= kb else (b, a)

    def relabel(self, mapping):
        return Binomial(tuple((mapping[v], e) for v, e in self.plus),
                        tuple((mapping[v], e) for v, e in self.minus))

    def exponent_difference(self, n):
        vec = [0] * n
        for v, e in self.plus:
            vec[v] += e
        for v, e in self.minus:
            vec[v] -= e
        return vec

    def __str__(self):
        return self.format()

    def format(self, name=None):
        """Render as text; ``name`` maps a variable to its printed name."""
        if name is None:
            def name(v):
                return f"p{v + 1}" if isinstance(v, int) else "z(" + ",".join(map(str, v)) + ")"

        def mono(m):
            if not m:
                return "1"
            parts = []
            for v, e in m:
                parts.append(name(v) if e == 1 else f"{name(v)}^{e}")
            return "*".join(parts)

        if self.is_zero():
            return "0"
        return f"{mono(self.plus)} - {mono(self.minus)}"


def _monomial_value(mono, p):
    value = 1
    for v, e in mono:
        value = value * p[v] ** e
    return value


def evaluate_binomial(g: Binomial, p):
    """Value of ``g`` at ``p`` (a sequence indexed by int variables, or a mapping)."""
    return _monomial_value(g.plus, p) - _monomial_value(g.minus, p)


# -- operations ----------------------------------------------------------------

def polytope_to_matrix(Q: LatticePolytope) -> DesignMatrix:
    return DesignMatrix.from_columns(Q.points, n_rows=Q.dim)


def parametrize(A: DesignMatrix, c, s, theta):
    """Monomial map ``p_j = c_j * s * prod_i theta_i^{A_ij}``."""
    theta = tuple(theta)
    if len(theta) != A.n_rows:
        raise ValueError(f"theta has length {len(theta)}, expected {A.n_rows}")
    c = tuple(c) if c is not None else (1,) * A.n_cols
    if len(c) != A.n_cols:
        raise ValueError("scaling length does not match the number of columns")
    out = []
    for j in range(A.n_cols):
        value = c[j] * s
        for i, t in enumerate(theta):
            e = A.entries[i][j]
            if t == 0:
                if e < 0:
                    raise DomainError(f"theta_{i + 1} = 0 raised to negative power {e}")
                if e > 0:
                    value = value * 0
                continue
            value = value * t ** e
        out.append(value)
    return tuple(out)


def log_likelihood(p, u) -> float:
    """``sum_j u_j log p_j - u_+ log(sum_j p_j)``; ``-inf`` if a positive count meets p_j = 0."""
    p = [float(x) for x in p]
    u = list(u)
    if len(p) != len(u):
        raise ValueError("p and u have different lengths")
    total_p = math.fsum(p)
    if total_p <= 0:
        raise ValueError("sum of p must be positive")
    acc = []
    for pj, uj in zip(p, u):
        if uj == 0:
            continue
        if pj <= 0:
            return -math.inf
        acc.append(uj * math.log(pj))
    return math.fsum(acc) - sum(u) * math.log(total_p)


@dataclass(frozen=True)
class BirchResidual:
    sum_residual: object
    margin_residual: object
    generator_residual: object = 0

    def max(self):
        return max(float(self.sum_residual), float(self.margin_residual),
                   float(self.generator_residual))

    def is_zero(self):
        return self.sum_residual == 0 and self.margin_residual == 0 and self.generator_residual == 0

    def as_dict(self):
        return {"sum": self.sum_residual, "margins": self.margin_residual,
                "generators": self.generator_residual}


def birch_residual(p, u, A: DesignMatrix, gens=()) -> BirchResidual:
    """Distance of ``p`` from the Birch point of ``u``.

    Returns ``(|sum p - 1|, max_i |(Ap)_i - (Au)_i / u_+|, max_g |g(p)| / monomial size)``.
    Exact inputs give exact residuals.
    """
    p = tuple(p)
    u = tuple(u)
    if len(p) != A.n_cols or len(u) != A.n_cols:
        raise ValueError("dimension mismatch between p, u and A")
    exact = all(is_exact(x) for x in p)
    total = sum(u)
    if exact:
        target = tuple(Fraction(x, total) for x in A.apply(u))
        ap = A.apply(p)
        s_res = abs(sum(p) - 1)
        m_res = max((abs(a - t) for a, t in zip(ap, target)), default=Fraction(0))
    else:
        pf = np.array([float(x) for x in p])
        Am = A.to_numpy()
        target = Am @ np.array(u, dtype=float) / total
        s_res = abs(math.fsum(pf) - 1.0)
        m_res = float(np.abs(Am @ pf - target).max()) if A.n_rows else 0.0
    g_res = 0 if exact else 0.0
    for g in gens:
        a = _monomial_value(g.plus, p)
        b = _monomial_value(g.minus, p)
        scale = max(abs(a), abs(b))
        if scale == 0:
            continue
        r = abs(a - b) / scale
        if r > g_res:
            g_res = r
    return BirchResidual(s_res, m_res, g_res)
