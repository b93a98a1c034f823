"""Real roots of low-degree univariate polynomials.

The primary method is the eigenvalue problem of the companion matrix.  The
analytic cubic and quartic formulas are kept as an independent cross-check.
"""

from __future__ import annotations

import cmath

import numpy as np

IMAG_TOL = 1e-9
# widest imaginary part accepted for a numerically split multiple root
CLUSTER_TOL = 1e-5


def _trim(coeffs):
    c = [complex(x) for x in coeffs]
    while c and c[0] == 0:
        c.pop(0)
    if not c:
        raise ValueError("zero polynomial has no well-defined roots")
    return c


def companion_matrix(coeffs):
    """Companion matrix of real ``coeffs`` (highest degree first)."""
    c = [x.real for x in _trim(coeffs)]
    n = len(c) - 1
    M = np.zeros((n, n))
    if n:
        M[0, :] = [-x / c[0] for x in c[1:]]
        M[1:, :-1] += np.eye(n - 1)
    return M


def companion_roots(coeffs):
    """All complex roots, sorted by real part then imaginary part."""
    M = companion_matrix(coeffs)
    if M.shape[0] == 0:
        return []
    roots = np.linalg.eigvals(M)
    return sorted((complex(z) for z in roots), key=lambda z: (z.real, z.imag))


def relative_residual(coeffs, x):
    """``|p(x)|`` relative to the size of the terms of ``p`` at ``x``."""
    c = [float(v) for v in coeffs]
    size = np.polyval(np.abs(c), abs(x))
    return abs(np.polyval(c, x)) / size if size else 0.0


def real_roots(coeffs, imag_tol=IMAG_TOL, polish=True):
    """Real roots from the companion matrix, optionally refined by Newton steps.

    A multiple real root comes back from the eigenvalue solver as a cluster
    with imaginary parts near the square root of machine precision; such a
    root is kept when its real part nearly annihilates the polynomial.
    Roots are listed with multiplicity.
    """
    c = [float(x) for x in coeffs]
    out = []
    for z in companion_roots(c):
        scale = max(1.0, abs(z))
        near = abs(z.imag) <= imag_tol * scale
        if not near and abs(z.imag) <= CLUSTER_TOL * scale:
            near = relative_residual(c, z.real) <= 1e-9
        if near:
            x = z.real
            if polish:
                x = newton_polish(c, x)
            out.append(float(x))
    return sorted(out)


def newton_polish(coeffs, x, steps=3):
    for _ in range(steps):
        f = np.polyval(coeffs, x)
        df = np.polyval(np.polyder(coeffs), x)
        if df == 0:
            break
        dx = f / df
        if not np.isfinite(dx):
            break
        x_new = x - dx
        # accept only if it does not increase the residual
        if abs(np.polyval(coeffs, x_new)) > abs(f):
            break
        x = x_new
    return x


def cubic_roots(a, b, c, d):
    """Roots of ``a x^3 + b x^2 + c x + d`` by Cardano's method."""
    if a == 0:
        raise ValueError("leading coefficient is zero")
    b, c, d = b / a, c / a, d / a
    # depressed cubic t^3 + p t + q with x = t - b/3
    p = c - b * b / 3
    q = 2 * b ** 3 / 27 - b * c / 3 + d
    shift = -b / 3
    sq = cmath.sqrt((q / 2) ** 2 + (p / 3) ** 3)
    w = -q / 2 + sq
    if abs(w) < abs(-q / 2 - sq):
        w = -q / 2 - sq
    omega = complex(-0.5, 3 ** 0.5 / 2)
    if w == 0:
        ts = [0j, 0j, 0j]
    else:
        u = complex(w) ** (1 / 3)
        ts = [u * omega ** k - p / (3 * u * omega ** k) for k in range(3)]
    return sorted((complex(t + shift) for t in ts), key=lambda z: (z.real, z.imag))


def quartic_roots(a, b, c, d, e):
    """Roots of ``a x^4 + ... + e`` by Ferrari's method via a resolvent cubic."""
    if a == 0:
        raise ValueError("leading coefficient is zero")
    b, c, d, e = b / a, c / a, d / a, e / a
    # depressed quartic y^4 + p y^2 + q y + r with x = y - b/4
    p = c - 3 * b * b / 8
    q = d - b * c / 2 + b ** 3 / 8
    r = e - b * d / 4 + b * b * c / 16 - 3 * b ** 4 / 256
    shift = -b / 4
    if abs(q) < 1e-14:
        ys = []
        for w in (cmath.sqrt(p * p / 4 - r),):
            for z2 in (-p / 2 + w, -p / 2 - w):
                z = cmath.sqrt(z2)
                ys += [z, -z]
    else:
        # resolvent: 8m^3 + 8p m^2 + (2p^2 - 8r) m - q^2 = 0, pick m != 0
        ms = cubic_roots(8.0, 8 * p, 2 * p * p - 8 * r, -q * q)
        m = max(ms, key=abs)
        s = cmath.sqrt(2 * m)
        ys = []
        for sign in (1, -1):
            inner = cmath.sqrt(-(2 * p + 2 * m + sign * 2 * q / s))
            ys.append((sign * s + inner) / 2)
            ys.append((sign * s - inner) / 2)
    return sorted((complex(y + shift) for y in ys), key=lambda z: (z.real, z.imag))


def analytic_roots(coeffs):
    c = [float(x) for x in coeffs]
    while c and c[0] == 0:
        c.pop(0)
    if len(c) == 4:
        return cubic_roots(*c)
    if len(c) == 5:
        return quartic_roots(*c)
    raise ValueError("analytic formulas are provided for degrees 3 and 4 only")


def cross_check(coeffs):
    """Largest distance from a companion root to its nearest analytic root."""
    comp = companion_roots(coeffs)
    ana = analytic_roots(coeffs)
    scale = max(1.0, max(abs(z) for z in comp))
    return max(min(abs(z - w) for w in ana) for z in comp) / scale
