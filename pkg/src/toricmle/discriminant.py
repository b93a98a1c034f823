"""Discriminants of scaled toric models and ML degree drop.

The ML degree of a scaled toric variety drops below its degree exactly when the
principal A-determinant vanishes at the scaling.  This module provides the face
structure of a configuration, the closed-form discriminants of short edges and
of the planar Veronese, exact checks of candidate singular points of ``f_c``,
and the linear equations whose common zeros on the variety cause the drop.

All checks are exact when given ints, Fractions or elements of Q(sqrt(d)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np
import sympy
from scipy.spatial import ConvexHull

from .model import (
    DataVector,
    DesignMatrix,
    LatticePolytope,
    Scaling,
    evaluate_binomial,
    polytope_to_matrix,
)
from .qfield import QuadraticNumber, is_exact

SINGULAR_TOL = 1e-12


class UnsupportedFaceError(ValueError):
    """Raised for faces whose discriminant has no closed form here."""


@dataclass(frozen=True)
class FaceConfig:
    indices: tuple
    dim: int


@dataclass(frozen=True)
class ScaledConfig:
    polytope: LatticePolytope
    matrix: DesignMatrix
    scaling: Scaling
    faces: tuple

    @classmethod
    def build(cls, polytope: LatticePolytope, scaling: Scaling | None = None):
        if scaling is None:
            scaling = Scaling.ones(len(polytope))
        if len(scaling) != len(polytope):
            raise ValueError("scaling length does not match the number of points")
        return cls(polytope, polytope_to_matrix(polytope), scaling,
                   tuple(enumerate_faces(polytope.points)))

    @classmethod
    def from_matrix(cls, A: DesignMatrix, scaling=None):
        return cls.build(LatticePolytope(tuple(A.columns())), scaling)

    def with_scaling(self, scaling):
        return ScaledConfig(self.polytope, self.matrix, Scaling(tuple(scaling)), self.faces)

    def edges(self):
        return [f for f in self.faces if f.dim == 1]


# -- faces ---------------------------------------------------------------------

def _affine_rank(pts):
    if len(pts) <= 1:
        return 0
    diffs = pts[1:] - pts[0]
    return int(np.linalg.matrix_rank(diffs))


def _affine_coords(pts):
    """Coordinates of ``pts`` in an orthonormal basis of their affine hull."""
    diffs = pts - pts[0]
    _, sv, vt = np.linalg.svd(diffs, full_matrices=False)
    r = int((sv > 1e-9 * max(1.0, sv.max(initial=0.0))).sum())
    return diffs @ vt[:r].T


def enumerate_faces(points):
    """All nonempty faces, each as the set of given points lying on it.

    Proper faces are intersections of facets; the whole polytope is included
    last.  Edge indices are listed in order along the edge.
    """
    pts = np.array(points, dtype=float)
    n = len(pts)
    r = _affine_rank(pts)
    if r == 0:
        return [FaceConfig(tuple(range(n)), 0)]
    coords = _affine_coords(pts)
    if r == 1:
        t = coords[:, 0]
        facets = [frozenset(np.flatnonzero(np.isclose(t, t.min()))),
                  frozenset(np.flatnonzero(np.isclose(t, t.max())))]
    else:
        hull = ConvexHull(coords)
        facets = set()
        for eq in hull.equations:
            vals = coords @ eq[:-1] + eq[-1]
            facets.add(frozenset(np.flatnonzero(np.abs(vals) < 1e-9)))
        facets = list(facets)
    faces = set(facets)
    frontier = list(facets)
    while frontier:
        new = []
        for f in frontier:
            for g in facets:
                h = f & g
                if h and h not in faces:
                    faces.add(h)
                    new.append(h)
        frontier = new
    out = []
    for f in faces:
        idx = sorted(f)
        d = _affine_rank(pts[idx])
        if d == 1:
            direction = pts[idx[-1]] - pts[idx[0]]
            idx = sorted(idx, key=lambda i: float(pts[i] @ direction))
        out.append(FaceConfig(tuple(int(i) for i in idx), d))
    out.sort(key=lambda f: (f.dim, f.indices))
    out.append(FaceConfig(tuple(range(n)), r))
    return out


def lattice_length(face: FaceConfig, A: DesignMatrix) -> int:
    if face.dim != 1:
        raise UnsupportedFaceError("lattice length is defined for edges")
    a = A.column(face.indices[0])
    b = A.column(face.indices[-1])
    return math.gcd(*(abs(x - y) for x, y in zip(a, b)))


def edge_discriminant(face: FaceConfig, c, A: DesignMatrix | None = None):
    """Discriminant of an edge of lattice length at most 2 (1 for a vertex).

    ``c`` is the full scaling vector (indexed like the columns of ``A``) or,
    when ``A`` is omitted, the coefficients along the face in edge order.
    """
    c = tuple(c)
    if face.dim == 0:
        return 1
    if face.dim != 1:
        raise UnsupportedFaceError(f"faces of dimension {face.dim} are not supported")
    if A is None:
        coeffs = list(c)
        length = len(coeffs) - 1
    else:
        length = lattice_length(face, A)
        start = np.array(A.column(face.indices[0]))
        step = (np.array(A.column(face.indices[-1])) - start) // max(length, 1)
        coeffs = [0] * (length + 1)
        for i in face.indices:
            k = int(round(float(np.dot(np.array(A.column(i)) - start, step)) / float(step @ step)))
            coeffs[k] = c[i]
    if length == 1:
        return 1
    if length == 2:
        c0, c1, c2 = coeffs
        return c1 * c1 - 4 * c0 * c2
    raise UnsupportedFaceError(f"edge of lattice length {length} is not supported")


# -- f_c and singular points ---------------------------------------------------

def _power(t, e):
    if e == 0:
        return 1
    return t ** e


def f_c(config: ScaledConfig, theta):
    """Value and gradient of ``f_c(theta) = sum_j c_j theta^{a_j}``."""
    A = config.matrix
    theta = tuple(Fraction(t) if isinstance(t, int) else t for t in theta)
    if len(theta) != A.n_rows:
        raise ValueError(f"theta has length {len(theta)}, expected {A.n_rows}")
    if any(t == 0 for t in theta):
        raise ValueError("theta must have nonzero entries")
    value = 0
    grad = [0] * A.n_rows
    for j, cj in enumerate(config.scaling.values):
        a = A.column(j)
        mono = cj
        for t, e in zip(theta, a):
            mono = mono * _power(t, e)
        value = value + mono
        for i, e in enumerate(a):
            if e:
                grad[i] = grad[i] + e * mono / theta[i]
    return value, tuple(grad)


def verify_singular_point(config: ScaledConfig, theta, tol: float = SINGULAR_TOL) -> bool:
    """Whether ``theta`` is a singular point of ``f_c`` (exact for exact input)."""
    value, grad = f_c(config, theta)
    vals = (value,) + grad
    if all(is_exact(t) for t in theta):
        return all(v == 0 for v in vals)
    return all(abs(v) <= tol for v in vals)


# -- Veronese ------------------------------------------------------------------

# Lattice points of the planar Veronese (twice the standard triangle) in the
# order a_1, ..., a_6 used by the scaling matrix C.
VERONESE_POINTS = ((0, 0), (1, 0), (2, 0), (0, 1), (0, 2), (1, 1))


@dataclass(frozen=True)
class VeroneseScaling:
    C: tuple

    def __post_init__(self):
        M = tuple(tuple(Fraction(x) for x in row) for row in self.C)
        if len(M) != 3 or any(len(r) != 3 for r in M):
            raise ValueError("C must be a 3x3 matrix")
        if any(M[i][j] != M[j][i] for i in range(3) for j in range(3)):
            raise ValueError("C must be symmetric")
        object.__setattr__(self, "C", M)

    @classmethod
    def from_coefficients(cls, c00, c10, c20, c01, c02, c11):
        """From the scaling in the order of :data:`VERONESE_POINTS`."""
        return cls(((2 * Fraction(c00), c10, c01), (c10, 2 * Fraction(c20), c11),
                    (c01, c11, 2 * Fraction(c02))))

    def coefficients(self):
        """Scaling in the order of :data:`VERONESE_POINTS`."""
        C = self.C
        return (C[0][0] / 2, C[0][1], C[1][1] / 2, C[0][2], C[2][2] / 2, C[1][2])

    def config(self) -> ScaledConfig:
        return ScaledConfig.build(LatticePolytope(VERONESE_POINTS), Scaling(self.coefficients()))


def _det2(a, b, c, d):
    return a * d - b * c


def _det3(M):
    return (M[0][0] * _det2(M[1][1], M[1][2], M[2][1], M[2][2])
            - M[0][1] * _det2(M[1][0], M[1][2], M[2][0], M[2][2])
            + M[0][2] * _det2(M[1][0], M[1][1], M[2][0], M[2][1]))


@dataclass(frozen=True)
class VeroneseFactors:
    det_C: Fraction
    d123: Fraction
    d356: Fraction
    d145: Fraction

    @property
    def product(self):
        return self.det_C * self.d123 * self.d356 * self.d145

    def pattern(self):
        """True where a factor is nonzero."""
        return (self.det_C != 0, self.d123 != 0, self.d356 != 0, self.d145 != 0)

    def as_dict(self):
        return {"det_C": self.det_C, "d123": self.d123, "d356": self.d356,
                "d145": self.d145, "product": self.product}


def veronese_EA(C: VeroneseScaling) -> VeroneseFactors:
    M = C.C
    return VeroneseFactors(
        _det3(M),
        _det2(M[0][0], M[0][1], M[1][0], M[1][1]),
        _det2(M[1][1], M[1][2], M[2][1], M[2][2]),
        _det2(M[0][0], M[0][2], M[2][0], M[2][2]),
    )


def predict_drop_veronese(C: VeroneseScaling) -> bool:
    """True when the ML degree of the scaled Veronese is below 4."""
    return veronese_EA(C).product == 0


def veronese_rank_singularity(C: VeroneseScaling):
    """A torus point ``theta`` with ``C (1, theta_1, theta_2)^T = 0``, or None."""
    M = sympy.Matrix(C.C)
    rhs = -M[:, 0]
    try:
        sol, params = M[:, 1:].gauss_jordan_solve(rhs)
    except ValueError:
        # inconsistent system
        return None
    return _nonzero_solution(sol, params)


def _nonzero_solution(sol, params):
    if sol is None:
        return None
    free = list(params)
    if not free:
        vals = [Fraction(int(sympy.fraction(v)[0]), int(sympy.fraction(v)[1])) for v in sol]
        return tuple(vals) if all(v != 0 for v in vals) else None
    for guess in product(range(-3, 4), repeat=len(free)):
        sub = sol.subs(dict(zip(free, guess)))
        vals = [Fraction(int(sympy.fraction(v)[0]), int(sympy.fraction(v)[1])) for v in sub]
        if all(v != 0 for v in vals):
            return tuple(vals)
    return None


# -- critical linear system and removal points --------------------------------

def critical_linear_system(A: DesignMatrix, c, u) -> list:
    """Coefficient vectors of ``(Au)_i L_c(p) - u_+ L_{c,i}(p)``, one per row of A."""
    c = tuple(c.values if isinstance(c, Scaling) else c)
    counts = u.counts if isinstance(u, DataVector) else tuple(u)
    if len(c) != A.n_cols or len(counts) != A.n_cols:
        raise ValueError("dimension mismatch between A, c and u")
    total = sum(counts)
    if total <= 0:
        raise ValueError("data must have positive total")
    Au = A.apply(counts)
    forms = []
    for i in range(A.n_rows):
        forms.append(tuple(Fraction(Au[i]) * c[j] - total * A.entries[i][j] * Fraction(c[j])
                           for j in range(A.n_cols)))
    return forms


def evaluate_linear_form(form, p):
    return sum((a * x for a, x in zip(form, p)), 0)


def removal_equations(A: DesignMatrix, c, p):
    """Values of ``L_c(p)`` and ``L_{c,i}(p)`` for every row i."""
    c = tuple(c.values if isinstance(c, Scaling) else c)
    Lc = sum((cj * pj for cj, pj in zip(c, p)), 0)
    Li = [sum((A.entries[i][j] * c[j] * p[j] for j in range(A.n_cols)), 0)
          for i in range(A.n_rows)]
    return (Lc, *Li)


def removal_point_check(gens, A: DesignMatrix, c, p, tol: float = SINGULAR_TOL) -> bool:
    """Whether ``p`` lies on the variety and on ``L_c = L_{c,1} = ... = 0``."""
    p = tuple(p)
    if len(p) != A.n_cols:
        raise ValueError("point has the wrong length")
    if all(x == 0 for x in p):
        raise ValueError("the zero vector is not a projective point")
    vals = list(removal_equations(A, c, p)) + [evaluate_binomial(g, p) for g in gens]
    if all(is_exact(x) for x in p):
        return all(v == 0 for v in vals)
    return all(abs(v) <= tol for v in vals)


# -- data ----------------------------------------------------------------------

# Rows of the Veronese table: scaling matrix, expected nonzero pattern of
# (Delta_A, Delta_[a1 a2 a3], Delta_[a3 a5 a6], Delta_[a1 a4 a5]), ML degree.
VERONESE_REFERENCE = (
    (((2, 1, 1), (1, 2, 1), (1, 1, 2)), (True, True, True, True), 4),
    (((2, 2, 1), (2, 2, 3), (1, 3, 2)), (True, False, True, True), 3),
    (((2, 2, 1), (2, 2, 2), (1, 2, 2)), (True, False, False, True), 2),
    (((-2, 2, 2), (2, -2, 2), (2, 2, -2)), (True, False, False, False), 1),
    (((17, 22, 27), (22, 29, 36), (27, 36, 45)), (False, True, True, True), 3),
    (((2, 3, 3), (3, 5, 5), (3, 5, 5)), (False, True, False, True), 2),
    (((2, 2, 2), (2, 2, 2), (2, 2, 2)), (False, False, False, False), 1),
)

# Quintic surfaces in the point order used for their discriminant analysis.
QUINTIC_5A = DesignMatrix(((0, 0, 1, 1, 1, 2), (1, 2, 0, 1, 2, 1)))
QUINTIC_5B = DesignMatrix(((0, 0, 1, 1, 1, 2), (1, 2, 0, 1, 2, 2)))


def quintic_5a_generators():
    """The 5a ideal generators re-indexed to the order of :data:`QUINTIC_5A`."""
    from .delpezzo import entry

    e = entry("5a")
    cols = QUINTIC_5A.columns()
    mapping = {k: cols.index(pt) for k, pt in enumerate(e.polytope.points)}
    return tuple(g.relabel(mapping) for g in e.generators)


def quintic_5a_witnesses():
    """The two torus points with ``x + y = 0`` and ``y^2 - y - 1 = 0``."""
    out = []
    for sign in (1, -1):
        y = QuadraticNumber(Fraction(1, 2), Fraction(sign, 2), 5)
        out.append((-y, y))
    return out


def quintic_5a_removal_points():
    """The two displayed removal points of the 5a model with unit scaling."""
    half = Fraction(1, 2)
    pts = []
    for sign in (1, -1):
        r5 = QuadraticNumber(0, sign, 5)
        pts.append((half * (1 + r5), half * (3 + r5), -half * (1 + r5), -half * (3 + r5),
                    -2 - r5, 2 + r5))
    return pts
