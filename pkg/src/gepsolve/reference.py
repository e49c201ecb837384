"""Trusted reference eigenpair for benchmarking and stopping checks.

Dense pairs up to order 4096 go through the congruence C = L^{-1} A L^{-T}
and the in-house cyclic Jacobi eigensolver; the dominant eigenvector maps
back through L^{-T} and is B-normalized. The result must pass the residual
certificate ||A u - lambda B u|| <= 1e-8 lambda or an error is raised: a
reference that cannot certify itself is worse than none.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalError
from .objective import MatrixPair
from .solvers import SolverConfig, run_split_merge

DENSE_LIMIT = 4096
CERTIFICATE_RTOL = 1e-8


@dataclass
class ReferencePair:
    lam: float
    u: np.ndarray  # B-normalized
    route: str  # dense-jacobi | iterative
    residual: float


def reference_solution(pair: MatrixPair, dense_limit: int = DENSE_LIMIT) -> ReferencePair:
    """Dominant generalized eigenpair with a residual certificate."""
    if pair.n <= dense_limit:
        lam, u, route = _dense_route(pair)
    else:
        lam, u, route = _iterative_route(pair)

    bu = pair.b.matvec(u)
    u = u / np.sqrt(float(u @ bu))
    residual = float(np.linalg.norm(pair.a.matvec(u) - lam * pair.b.matvec(u)))
    if residual > CERTIFICATE_RTOL * max(lam, 1e-300):
        raise NumericalError(
            f"reference residual {residual:.3e} exceeds {CERTIFICATE_RTOL} * {lam:.6e}")
    return ReferencePair(float(lam), u, route, residual)


def _dense_route(pair: MatrixPair):
    from .linalg import cholesky_factorize, jacobi_eigh

    a = pair.a.dense() if hasattr(pair.a, "dense") else None
    if a is None:
        raise NumericalError("dense reference needs a materializable A operand")
    l = cholesky_factorize(pair.b).lower()
    y = scipy.linalg.solve_triangular(l, a, lower=True, check_finite=False)
    c = scipy.linalg.solve_triangular(l, y.T, lower=True, check_finite=False).T
    c = (c + c.T) / 2.0
    evals, vecs = jacobi_eigh(c)
    w = vecs[:, -1]
    u = scipy.linalg.solve_triangular(l, w, lower=True, trans="T", check_finite=False)
    return float(evals[-1]), u, "dense-jacobi"


def _iterative_route(pair: MatrixPair):
    config = SolverConfig(method="split-merge", tol=1e-10, seed=7)
    rng = np.random.default_rng(7)
    trace = run_split_merge(pair, config, rng.standard_normal(pair.n))
    if not trace.converged:
        raise NumericalError(f"iterative reference ended {trace.status}")
    return trace.final().lam, trace.x, "iterative"
