"""Generalized iterative scaling for log-linear models.

The returned estimate is the positive point of the model whose sufficient
statistics match those of the data.  It is the numerical reference used to
check every closed-form estimator in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import DataVector, DesignMatrix, ProbVector, birch_residual, log_likelihood

CONVERGED = "converged"
BOUNDARY = "boundary"
MAX_ITERATIONS = "max_iterations"

TRACE_EVERY = 100
TINY = 1e-300


@dataclass(frozen=True)
class IpfConfig:
    tolerance: float = 1e-10
    max_iterations: int = 10**6

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if int(self.max_iterations) <= 0:
            raise ValueError("max_iterations must be positive")


@dataclass(frozen=True)
class IpfResult:
    estimate: ProbVector
    iterations: int
    final_residual: float
    converged: bool
    status: str = CONVERGED
    # log-likelihood sampled every TRACE_EVERY iterations
    trace: tuple = field(default=(), repr=False)
    generator_residual: float | None = None

    def as_dict(self):
        return {
            "estimate": list(self.estimate.values),
            "iterations": self.iterations,
            "final_residual": self.final_residual,
            "converged": self.converged,
            "status": self.status,
            "generator_residual": self.generator_residual,
        }


def normalize_matrix(A: DesignMatrix) -> DesignMatrix:
    """Shift rows to be nonnegative and append a slack row equalizing column sums.

    Translating the polytope leaves the model unchanged, and the slack row is
    ``C - colsum`` so the row space together with the all-ones vector is the
    same as before.  For an all-zero matrix the common sum is taken to be 1.
    """
    rows = [list(r) for r in A.entries]
    shifted = []
    for r in rows:
        m = min(r) if r else 0
        shifted.append([x - m for x in r] if m < 0 else r)
    n = A.n_cols
    colsums = [sum(r[j] for r in shifted) for j in range(n)]
    C = max(colsums, default=0) or 1
    shifted.append([C - s for s in colsums])
    return DesignMatrix(tuple(tuple(r) for r in shifted))


def _check_inputs(A, u):
    if A.n_cols == 0:
        raise ValueError("design matrix has no columns")
    if len(u) != A.n_cols:
        raise ValueError(f"data has {len(u)} entries but the model has {A.n_cols} states")


def gis_step(p, E, log_t):
    """One multiplicative update; ``E`` is the normalized matrix divided by C."""
    m = np.maximum(E @ p, TINY)
    step = E.T @ (log_t - np.log(m))
    q = p * np.exp(step)
    return q / q.sum()


def ipf_solve(A: DesignMatrix, u, cfg: IpfConfig | None = None, gens=()) -> IpfResult:
    """Fit the log-linear model of ``A`` to counts ``u``.

    Iterates from the uniform distribution until ``max_i |(Ap)_i - (Au)_i/u_+|``
    falls below ``cfg.tolerance``.  Zero counts are accepted; if the limit has
    a coordinate below the tolerance the status is ``"boundary"``.
    """
    cfg = cfg or IpfConfig()
    if not isinstance(u, DataVector):
        u = DataVector(tuple(u))
    _check_inputs(A, u)

    A2 = normalize_matrix(A)
    N = A2.to_numpy()
    # a zero slack row carries no constraint
    N = N[np.any(N != 0, axis=1)]
    C = float(N[:, 0].sum())
    E = N / C
    uf = np.array(u.counts, dtype=float)
    total = uf.sum()
    t = N @ uf / total
    Aorig = A.to_numpy()
    target = Aorig @ uf / total

    # Rows of the target with zero mass force zeros; both logs are floored at
    # TINY so a row that has reached zero stops contributing.
    log_t = np.log(np.maximum(t, TINY))

    n = A.n_cols
    p = np.full(n, 1.0 / n)
    trace = []

    def residual(q):
        if A.n_rows == 0:
            return abs(q.sum() - 1.0)
        return float(np.abs(Aorig @ q - target).max())

    it = 0
    res = residual(p)
    while res > cfg.tolerance and it < cfg.max_iterations:
        if it % TRACE_EVERY == 0:
            trace.append(log_likelihood(p, u.counts))
        p = gis_step(p, E, log_t)
        it += 1
        res = residual(p)
    trace.append(log_likelihood(p, u.counts))

    converged = res <= cfg.tolerance
    if not converged:
        status = MAX_ITERATIONS
    elif (p < cfg.tolerance).any():
        status = BOUNDARY
    else:
        status = CONVERGED

    gres = None
    if gens:
        gres = float(birch_residual(tuple(p), u.counts, A, gens).generator_residual)

    p = np.clip(p, 0.0, None)
    p = p / math.fsum(p)
    return IpfResult(
        estimate=ProbVector.floating(tuple(p)),
        iterations=it,
        final_residual=res,
        converged=converged,
        status=status,
        trace=tuple(trace),
        generator_residual=gres,
    )
