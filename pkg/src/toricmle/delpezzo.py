"""The sixteen Gorenstein toric del Pezzo surfaces and their MLEs.

Each catalog entry stores a reflexive polygon translated into the nonnegative
orthant, with its lattice points in the order p_1..p_n used by the stored
ideal generators.  Five surfaces (labels 3, 4a, 4b, 4c, 5a) also have a closed
form estimator: a univariate polynomial in an auxiliary unknown ``x`` whose
admissible real root determines ``(s, theta_1, theta_2)``.

The closed forms index the data in their own point order, stored as
``ClosedFormEntry.design_matrix``; :func:`closed_form_permutation` maps it to
the catalog order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.spatial import ConvexHull

from .ipf import IpfConfig, ipf_solve
from .model import (
    Binomial,
    DataVector,
    DesignMatrix,
    LatticePolytope,
    ProbVector,
    birch_residual,
    polytope_to_matrix,
)
from .roots import real_roots

LABELS = ("3", "4a", "4b", "4c", "5a", "5b", "6a", "6b", "6c", "6d",
          "7a", "7b", "8a", "8b", "8c", "9")
CLOSED_FORM_LABELS = ("3", "4a", "4b", "4c", "5a")

POSITIVITY_TOL = 1e-12


class UnknownLabelError(KeyError):
    pass


class NoAdmissibleRootError(ArithmeticError):
    """No real root of the likelihood polynomial gives a positive estimate."""

    def __init__(self, label, roots):
        self.label = label
        self.roots = tuple(roots)
        super().__init__(f"label {label}: no admissible root among real roots {list(self.roots)}")


class RootInconsistencyError(ArithmeticError):
    """More than one admissible root; this contradicts uniqueness of the MLE."""

    def __init__(self, label, roots):
        self.label = label
        self.roots = tuple(roots)
        super().__init__(f"label {label}: several admissible roots {list(self.roots)}")


_POINTS = {
    "3": ((2, 1), (1, 2), (0, 0), (1, 1)),
    "4a": ((2, 1), (1, 2), (1, 1), (1, 0), (0, 1)),
    "4b": ((2, 1), (1, 2), (1, 1), (1, 0), (0, 2)),
    "4c": ((2, 2), (1, 2), (1, 1), (1, 0), (0, 2)),
    "5a": ((2, 1), (1, 2), (0, 2), (0, 1), (1, 0), (1, 1)),
    "5b": ((2, 2), (1, 2), (0, 2), (0, 1), (1, 0), (1, 1)),
    "6a": ((0, 0), (0, 1), (1, 2), (2, 2), (2, 1), (1, 0), (1, 1)),
    "6b": ((0, 1), (1, 0), (2, 0), (2, 1), (1, 2), (0, 0), (1, 1)),
    "6c": ((0, 2), (0, 1), (1, 1), (2, 1), (0, 0), (1, 0), (2, 0)),
    "6d": ((0, 2), (0, 1), (1, 1), (0, 0), (1, 0), (2, 0), (3, 0)),
    "7a": ((0, 2), (1, 2), (0, 1), (1, 1), (2, 1), (0, 0), (1, 0), (2, 0)),
    "7b": ((1, 2), (2, 1), (1, 1), (0, 1), (3, 0), (2, 0), (1, 0), (0, 0)),
    "8a": ((0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2)),
    "8b": ((0, 2), (1, 2), (0, 1), (1, 1), (2, 1), (0, 0), (1, 0), (2, 0), (3, 0)),
    "8c": ((0, 2), (0, 1), (1, 1), (2, 1), (0, 0), (1, 0), (2, 0), (3, 0), (4, 0)),
    "9": ((0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0), (0, 3), (1, 2), (2, 1), (3, 0)),
}

# Ideal generators in p_i notation, 1-based.
_GENERATORS = {
    "3": ("p_1p_2p_3-p_4^3",),
    "4a": ("p_2p_4-p_1p_5", "p_3^2-p_1p_5"),
    "4b": ("p_2p_4-p_3^2", "p_2p_3-p_1p_5"),
    "4c": ("p_2p_4-p_3^2", "p_2^2-p_1p_5"),
    "5a": (
        "p_3p_5-p_4p_6", "p_2p_5-p_6^2", "p_2p_4-p_3p_6", "p_1p_4-p_6^2",
        "p_1p_3-p_2p_6",
    ),
    "5b": (
        "p_3p_5-p_4p_6", "p_2p_5-p_6^2", "p_2p_4-p_3p_6", "p_1p_4-p_2p_6",
        "p_2^2-p_1p_3",
    ),
    "6a": (
        "p_4p_6-p_5p_7", "p_3p_6-p_7^2", "p_2p_6-p_1p_7", "p_3p_5-p_4p_7",
        "p_2p_5-p_7^2", "p_1p_5-p_6p_7", "p_2p_4-p_3p_7", "p_1p_4-p_7^2",
        "p_1p_3-p_2p_7",
    ),
    "6b": (
        "p_5p_6-p_1p_7", "p_4p_6-p_2p_7", "p_3p_5-p_4p_7", "p_2p_5-p_7^2",
        "p_2p_4-p_3p_7", "p_1p_4-p_7^2", "p_1p_3-p_2p_7", "p_2^2-p_3p_6",
        "p_1p_2-p_6p_7",
    ),
    "6c": (
        "p_6^2-p_5p_7", "p_4p_6-p_3p_7", "p_3p_6-p_2p_7", "p_4p_5-p_2p_7",
        "p_3p_5-p_2p_6", "p_2p_4-p_1p_7", "p_3^2-p_1p_7", "p_2p_3-p_1p_6",
        "p_2^2-p_1p_5",
    ),
    "6d": (
        "p_6^2-p_5p_7", "p_5p_6-p_4p_7", "p_3p_6-p_2p_7", "p_5^2-p_4p_6",
        "p_3p_5-p_2p_6", "p_3p_4-p_2p_5", "p_3^2-p_1p_6", "p_2p_3-p_1p_5",
        "p_2^2-p_1p_4",
    ),
    "7a": (
        "p_5p_7-p_4p_8", "p_4p_7-p_3p_8", "p_2p_7-p_1p_8", "p_5p_6-p_3p_8",
        "p_4p_6-p_3p_7", "p_2p_6-p_1p_7", "p_4p_5-p_2p_8", "p_3p_5-p_1p_8",
        "p_4^2-p_1p_8", "p_3p_4-p_1p_7", "p_2p_4-p_1p_5", "p_3^2-p_1p_6",
        "p_7^2-p_6p_8", "p_2p_3-p_1p_4",
    ),
    "7b": (
        "p_7^2-p_6p_8", "p_6p_7-p_5p_8", "p_4p_7-p_3p_8", "p_3p_7-p_2p_8",
        "p_6^2-p_5p_7", "p_4p_6-p_2p_8", "p_3p_6-p_2p_7", "p_4p_5-p_2p_7",
        "p_3p_5-p_2p_6", "p_3p_4-p_1p_8", "p_2p_4-p_1p_7", "p_3^2-p_1p_7",
        "p_2p_3-p_1p_6", "p_2^2-p_1p_5",
    ),
    "8a": (
        "p_8^2-p_7p_9", "p_6p_8-p_5p_9", "p_5p_8-p_4p_9", "p_3p_8-p_2p_9",
        "p_2p_8-p_1p_9", "p_6p_7-p_4p_9", "p_5p_7-p_4p_8", "p_3p_7-p_1p_9",
        "p_2p_7-p_1p_8", "p_6^2-p_3p_9", "p_5p_6-p_2p_9", "p_4p_6-p_1p_9",
        "p_5^2-p_1p_9", "p_4p_5-p_1p_8", "p_3p_5-p_2p_6", "p_2p_5-p_1p_6",
        "p_4^2-p_1p_7", "p_3p_4-p_1p_6", "p_2p_4-p_1p_5", "p_2^2-p_1p_3",
    ),
    "8b": (
        "p_8^2-p_7p_9", "p_7p_8-p_6p_9", "p_5p_8-p_4p_9", "p_4p_8-p_3p_9",
        "p_2p_8-p_1p_9", "p_7^2-p_6p_8", "p_5p_7-p_3p_9", "p_4p_7-p_3p_8",
        "p_2p_7-p_1p_8", "p_5p_6-p_3p_8", "p_4p_6-p_3p_7", "p_2p_6-p_1p_7",
        "p_5^2-p_2p_9", "p_4p_5-p_1p_9", "p_3p_5-p_1p_8", "p_4^2-p_1p_8",
        "p_3p_4-p_1p_7", "p_2p_4-p_1p_5", "p_3^2-p_1p_6", "p_2p_3-p_1p_4",
    ),
    "8c": (
        "p_8^2-p_7p_9", "p_7p_8-p_6p_9", "p_6p_8-p_5p_9", "p_4p_8-p_3p_9",
        "p_3p_8-p_2p_9", "p_7^2-p_5p_9", "p_6p_7-p_5p_8", "p_4p_7-p_2p_9",
        "p_3p_7-p_2p_8", "p_6^2-p_5p_7", "p_4p_6-p_2p_8", "p_3p_6-p_2p_7",
        "p_4p_5-p_2p_7", "p_3p_5-p_2p_6", "p_4^2-p_1p_9", "p_3p_4-p_1p_8",
        "p_2p_4-p_1p_7", "p_3^2-p_1p_7", "p_2p_3-p_1p_6", "p_2^2-p_1p_5",
    ),
    "9": (
        "p_9^2-p_8p_10", "p_8p_9-p_7p_10", "p_6p_9-p_5p_10", "p_5p_9-p_4p_10",
        "p_3p_9-p_2p_10", "p_8^2-p_7p_9", "p_6p_8-p_4p_10", "p_5p_8-p_4p_9",
        "p_3p_8-p_2p_9", "p_6p_7-p_4p_9", "p_5p_7-p_4p_8", "p_3p_7-p_2p_8",
        "p_6^2-p_3p_10", "p_5p_6-p_2p_10", "p_4p_6-p_2p_9", "p_3p_6-p_1p_10",
        "p_2p_6-p_1p_9", "p_5^2-p_2p_9", "p_4p_5-p_2p_8", "p_3p_5-p_1p_9",
        "p_2p_5-p_1p_8", "p_4^2-p_2p_7", "p_3p_4-p_1p_8", "p_2p_4-p_1p_7",
        "p_3^2-p_1p_6", "p_2p_3-p_1p_5", "p_2^2-p_1p_4",
    ),
}

# ML degrees computed by Groebner bases; stored as data.
_ML_DEGREES = {lab: int(lab[0]) for lab in LABELS}
_ML_DEGREES["5a"] = 3


@dataclass(frozen=True)
class DelPezzoEntry:
    label: str
    polytope: LatticePolytope
    generators: tuple
    degree: int
    ml_degree: int

    @property
    def matrix(self) -> DesignMatrix:
        return polytope_to_matrix(self.polytope)

    def as_dict(self):
        return {
            "label": self.label,
            "points": [list(p) for p in self.polytope.points],
            "generators": [str(g) for g in self.generators],
            "degree": self.degree,
            "ml_degree": self.ml_degree,
        }


def boundary_point_count(points) -> int:
    """Number of lattice points on the boundary of the convex hull of ``points``."""
    pts = np.array(points, dtype=float)
    hull = ConvexHull(pts)
    verts = [tuple(int(round(c)) for c in pts[i]) for i in hull.vertices]
    total = 0
    for k in range(len(verts)):
        (x0, y0), (x1, y1) = verts[k], verts[(k + 1) % len(verts)]
        total += math.gcd(abs(x1 - x0), abs(y1 - y0))
    return total


@lru_cache(maxsize=None)
def catalog() -> tuple:
    out = []
    for lab in LABELS:
        poly = LatticePolytope(_POINTS[lab])
        gens = tuple(Binomial.parse(g) for g in _GENERATORS[lab])
        out.append(DelPezzoEntry(lab, poly, gens, boundary_point_count(poly.points),
                                 _ML_DEGREES[lab]))
    return tuple(out)


def entry(label) -> DelPezzoEntry:
    label = str(label)
    for e in catalog():
        if e.label == label:
            return e
    raise UnknownLabelError(f"unknown surface label {label!r}")


def ml_degree(label) -> int:
    return entry(label).ml_degree


# -- closed forms --------------------------------------------------------------

def _frac_u(u, n):
    counts = u.counts if isinstance(u, DataVector) else tuple(u)
    if len(counts) != n:
        raise ValueError(f"expected {n} counts, got {len(counts)}")
    total = sum(counts)
    if total <= 0:
        raise ValueError("data must have positive total")
    # 1-based access to match the u_i notation of the formulas
    return (None,) + tuple(Fraction(x) for x in counts), Fraction(total)


def _coeffs_3(u):
    u, U = _frac_u(u, 4)
    return (u[1] - u[3]) / U, (u[2] - u[3]) / U, (3 * u[3] + u[4]) / U


def _coeffs_4a(u):
    u, U = _frac_u(u, 5)
    return (u[1] - u[4]) / U, (u[2] - u[3]) / U, (2 * u[3] + 2 * u[4] + u[5]) / U


def _coeffs_4b(u):
    u, U = _frac_u(u, 5)
    return ((u[1] + 2 * u[4] + u[5]) / U, (u[3] + 2 * u[4] + u[5]) / U,
            (u[2] - 3 * u[4] - u[5]) / U)


def _coeffs_4c(u):
    u, U = _frac_u(u, 5)
    return (u[2] - u[4]) / U, (2 * u[1] + u[5]) / U, (2 * u[3] + 4 * u[4] + u[5]) / U


def _coeffs_5a(u):
    u, U = _frac_u(u, 6)
    return ((u[2] - u[3] - 3 * u[4] - 2 * u[6]) / U, (u[3] + u[5] + 2 * (u[4] + u[6])) / U,
            (u[1] + u[3] + u[6] + 2 * u[4]) / U)


def _poly_3(a, b, c):
    return (28, a + b - 27 * c, a * b + 9 * c * c, -c ** 3)


def _poly_4a(a, b, c):
    return (15, -16, 8 * a * a - 22 * b * b - 56, 16 * (4 - 4 * a * a + 5 * b * b),
            8 * (4 * a * a - 5 * b * b - 2) - (4 * a * a - 3 * b * b) ** 2)


def _poly_4b(a, b, c):
    return (17, 17 * c - 16, 3 + 9 * a * b - 8 * c + 4 * c * c,
            4 * a * b * c - 5 * a * b - c, a * a * b * b)


def _poly_4c(a, b, c):
    return (-55, 12, c * (4 * a + c) + b * (5 * b - 8), -(4 * b * (a * b + a * c + c)),
            (4 * a + c) * b * b * c)


def _poly_5a(a, b, c):
    return (-5, 3 - 5 * a, -a - b * (b + 5 * c), b * b * c)


def _rec_3(x, a, b, c):
    d = -3 * x + c
    return d ** 3 / ((x + a) * (x + b)), (x + a) / d, (x + b) / d


def _rec_4a(x, a, b, c):
    k = 3 * b * b - 4 * a * a
    D = -x * x + 8 * x - (k + 4)
    N1 = -7 * x * x + (8 * a + 8) * x + (k - 4 - 8 * a)
    # the cube in the scale uses D itself; see the decisions ledger
    s = D ** 3 / (16 * (x - 1) ** 2 * (x + b) * N1)
    return s, N1 / (2 * D), 4 * (x + b) * (x - 1) / D


def _rec_4b(x, a, b, c):
    D = 4 * x * x + 2 * (c - 1) * x + a * b
    N1 = -2 * x * x - (a + 2 * c) * x + (a - a * b)
    N2 = x * x + (c + 1) * x + (a * b + c)
    return D ** 3 / ((1 - x) * N2 * N1), N1 / D, N2 / D


def _rec_4c(x, a, b, c):
    N = -3 * x * x - (2 * a + 2) * x + (4 * a + c) * b
    return 4 * x * x * (b - x) / N, N / (8 * x * x), 2 * x / (b - x)


def _rec_5a(x, a, b, c):
    N = 2 * x * x - (b + 2 * c) * x + b * c
    L1 = x * x + (a + b) * x
    L2 = -x * x + c * x
    return L2 * L1 / N, N / L1, N / L2


@dataclass(frozen=True)
class ClosedFormEntry:
    label: str
    coeff_map: Callable
    poly_coeffs: Callable
    recovery: Callable
    design_matrix: DesignMatrix

    @property
    def degree(self):
        return len(self.poly_coeffs(Fraction(0), Fraction(0), Fraction(1))) - 1


_CLOSED_FORMS = {
    "3": ClosedFormEntry("3", _coeffs_3, _poly_3, _rec_3,
                         DesignMatrix(((2, 1, 0, 1), (1, 2, 0, 1)))),
    "4a": ClosedFormEntry("4a", _coeffs_4a, _poly_4a, _rec_4a,
                          DesignMatrix(((2, 1, 1, 0, 1), (1, 2, 0, 1, 1)))),
    "4b": ClosedFormEntry("4b", _coeffs_4b, _poly_4b, _rec_4b,
                          DesignMatrix(((2, 1, 0, 1, 1), (1, 2, 2, 0, 1)))),
    "4c": ClosedFormEntry("4c", _coeffs_4c, _poly_4c, _rec_4c,
                          DesignMatrix(((1, 2, 1, 0, 1), (0, 2, 2, 2, 1)))),
    "5a": ClosedFormEntry("5a", _coeffs_5a, _poly_5a, _rec_5a,
                          DesignMatrix(((2, 1, 1, 1, 0, 0), (1, 2, 1, 0, 2, 1)))),
}


def closed_form(label) -> ClosedFormEntry:
    label = str(label)
    if label not in _CLOSED_FORMS:
        if label in LABELS:
            raise UnknownLabelError(f"label {label!r} has no closed form estimator")
        raise UnknownLabelError(f"unknown surface label {label!r}")
    return _CLOSED_FORMS[label]


def closed_form_permutation(label) -> tuple:
    """``perm[j]`` is the catalog index of column ``j`` of the closed-form matrix."""
    cols = closed_form(label).design_matrix.columns()
    pts = entry(label).polytope.points
    return tuple(pts.index(tuple(c)) for c in cols)


def coefficients(label, u) -> tuple:
    return closed_form(label).coeff_map(u)


def likelihood_polynomial(label, a, b, c) -> tuple:
    """Coefficients of the polynomial in ``x``, highest degree first."""
    return closed_form(label).poly_coeffs(a, b, c)


@dataclass(frozen=True)
class ClosedFormResult:
    label: str
    estimate: ProbVector
    s: float
    theta: tuple
    x: float
    coefficients: tuple
    polynomial: tuple
    real_roots: tuple
    residual: object

    def as_dict(self):
        return {
            "label": self.label,
            "x": self.x,
            "s": self.s,
            "theta": list(self.theta),
            "estimate": list(self.estimate.values),
            "coefficients": list(self.coefficients),
            "polynomial": list(self.polynomial),
            "real_roots": list(self.real_roots),
            "residual": self.residual.as_dict(),
        }


def _evaluate_root(cf, x, a, b, c):
    A = cf.design_matrix
    with np.errstate(all="ignore"):
        try:
            s, t1, t2 = cf.recovery(x, a, b, c)
        except ZeroDivisionError:
            return None
        p = []
        for j in range(A.n_cols):
            e1, e2 = A.entries[0][j], A.entries[1][j]
            p.append(s * t1 ** e1 * t2 ** e2)
    if not all(math.isfinite(v) for v in (s, t1, t2, *p)):
        return None
    return s, (t1, t2), p


def admissible_roots(label, u, positivity_tol=POSITIVITY_TOL):
    """All ``(x, s, theta, p)`` for real roots giving a strictly positive ``p``."""
    cf = closed_form(label)
    a, b, c = cf.coeff_map(u)
    poly = cf.poly_coeffs(a, b, c)
    roots = real_roots([float(k) for k in poly])
    af, bf, cf_ = float(a), float(b), float(c)
    good = []
    for x in roots:
        ev = _evaluate_root(cf, x, af, bf, cf_)
        if ev is None:
            continue
        s, theta, p = ev
        if all(v > positivity_tol for v in p):
            good.append((x, s, theta, p))
    return good, roots, (a, b, c), poly


def closed_form_mle(label, u, tol: float = 1e-10) -> ClosedFormResult:
    """Estimate for a closed-form label; ``u`` is in the closed-form point order."""
    label = str(label)
    if not isinstance(u, DataVector):
        u = DataVector(tuple(u))
    if any(x <= 0 for x in u.counts):
        raise ValueError("closed forms require strictly positive counts")
    good, roots, abc, poly = admissible_roots(label, u)
    if not good:
        raise NoAdmissibleRootError(label, roots)
    if len(good) > 1:
        raise RootInconsistencyError(label, [g[0] for g in good])
    x, s, theta, p = good[0]
    A = closed_form(label).design_matrix
    total = math.fsum(p)
    # the recovery maps already give a distribution; renormalizing only removes rounding
    est = ProbVector.floating(tuple(v / total for v in p))
    res = birch_residual(est.values, u.counts, A)
    if res.max() > tol:
        raise ArithmeticError(f"label {label}: Birch residual {res.max():.3g} exceeds {tol:g}")
    return ClosedFormResult(label, est, s, theta, x, abc, poly, tuple(roots), res)


def delpezzo_mle(label, u, tol: float = 1e-10, order: str = "catalog"):
    """Estimate for any catalog label.

    ``u`` follows the catalog point order unless ``order == "closed_form"``.
    Labels with a closed form use it; the others are solved by iterative scaling.
    Returns ``(estimate in catalog order, method, details)``.
    """
    label = str(label)
    e = entry(label)
    counts = tuple(u.counts if isinstance(u, DataVector) else u)
    if label in _CLOSED_FORMS:
        perm = closed_form_permutation(label)
        if order == "catalog":
            cf_counts = tuple(counts[perm[j]] for j in range(len(perm)))
        else:
            cf_counts = counts
        res = closed_form_mle(label, cf_counts, tol=tol)
        cat = [0.0] * len(perm)
        for j, k in enumerate(perm):
            cat[k] = res.estimate.values[j]
        return ProbVector.floating(cat), "closed_form", res
    if order != "catalog":
        raise ValueError(f"label {label} has no closed-form ordering")
    res = ipf_solve(e.matrix, counts, IpfConfig(tolerance=tol), gens=e.generators)
    return res.estimate, "ipf", res
