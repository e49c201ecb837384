"""Iterative solvers for the dominant generalized eigenpair.

All runners share the trace contract: one record per iteration with the
objective value, the eigenvalue estimate, the stopping quantity, cumulative
matvec/solve counts, and wall time. With a reference vector the stopping
rule is the principal-angle sine; without one it is the scale-free gradient
criterion ||A d - q B d|| / (sqrt(d'Ad) q) for the unit direction d with
Rayleigh quotient q, which coincides with ||grad f|| / lambda at the scale
where the objective is stationary along the ray.

Iterates of the power and surrogate methods are kept as unit directions and
each step is taken from the ray minimiser c d with c = sqrt(d'Ad)/(2 d'Bd);
the recorded objective is then -q/4, nonincreasing, and the eigenvalue
estimate 2 sqrt(x'Ax) equals q. The rescale map is invariant to the
normalization itself, so cadence only affects floating-point bookkeeping.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    Breakdown,
    DegenerateDirection,
    DimensionMismatch,
    InputError,
    InvalidStepsize,
    NumericalError,
    ZeroVector,
)
from .linalg import Counters, LinearSolver, jacobi_eigh, solve_spd
from .objective import DEGENERATE_RTOL, CurvatureBound, MatrixPair, estimate_curvature_bound
from .precond import Preconditioner, apply_gram_inverse, build_preconditioner, \
    transformed_dominant_eigenvalue

METHODS = ("gd", "pmd", "power", "split-merge", "lanczos")

TRACE_HEADER = "k,f,lambda,sin_theta,matvecs,solves,elapsed_ns"


@dataclass
class SolverConfig:
    """Knobs shared by every runner; method-specific fields are ignored by
    the methods that do not use them."""

    method: str = "split-merge"
    tol: float = 1e-5
    max_iterations: int = 100000
    seed: int = 0
    rho: float = 1.0
    stepsize: float | None = None
    stepsize_interval: tuple[float, float] | None = None
    curvature_method: str = "dominant"
    curvature_bound: CurvatureBound | None = None
    transformed_bound: float | None = None
    linear_solver: LinearSolver | None = None
    preconditioner: Preconditioner | None = None
    reference: np.ndarray | None = None
    lanczos_cycle: int = 20
    reorthogonalize: bool = True
    normalize_every: int = 1
    rho_doubling_cap: int = 30


@dataclass
class TraceRecord:
    k: int
    f: float
    lam: float
    sin_theta: float
    matvecs: int
    solves: int
    elapsed_ns: int


@dataclass
class SolveTrace:
    """Result of one run: per-iteration records plus terminal state."""

    method: str
    status: str  # converged | max-iterations | degenerate
    records: list[TraceRecord]
    x: np.ndarray
    counters: Counters
    criterion: str  # sin-theta | gradient
    criterion_values: list[float] = field(default_factory=list)
    stepsize: float | None = None
    rho_escalations: int = 0
    fallback_steps: int = 0
    basis_drift: list[float] = field(default_factory=list)
    setup: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return self.records[-1].k if self.records else 0

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def final(self) -> TraceRecord:
        return self.records[-1]

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(TRACE_HEADER + "\n")
            for r in self.records:
                fh.write(f"{r.k},{r.f!r},{r.lam!r},{r.sin_theta!r},"
                         f"{r.matvecs},{r.solves},{r.elapsed_ns}\n")


def check_stopping(x: np.ndarray, u_ref: np.ndarray, tol: float) -> tuple[float, bool]:
    """Sine of the principal angle between x and the reference direction,
    and whether it meets the tolerance. Scale and sign free."""
    nx = float(np.linalg.norm(x))
    nu = float(np.linalg.norm(u_ref))
    if nx == 0.0 or nu == 0.0:
        raise ZeroVector("stopping check on a zero vector")
    cos = min(1.0, abs(float(x @ u_ref)) / (nx * nu))
    sin = float(np.sqrt(max(0.0, 1.0 - cos * cos)))
    return sin, sin <= tol


def _validate_config(config: SolverConfig, n: int) -> None:
    if config.method not in METHODS:
        raise InputError(f"unknown method {config.method!r}")
    if not (config.tol > 0.0):
        raise InputError(f"tolerance must be positive, got {config.tol}")
    if config.max_iterations < 1:
        raise InputError(f"iteration cap must be at least 1, got {config.max_iterations}")
    if config.rho < 1.0:
        raise InputError(f"rho must be at least 1, got {config.rho}")
    if config.normalize_every < 1:
        raise InputError(f"normalization cadence must be at least 1")
    if config.reference is not None and np.shape(config.reference) != (n,):
        raise DimensionMismatch(
            f"reference shape {np.shape(config.reference)} vs order {n}")


def _start_vector(x0: np.ndarray, n: int) -> np.ndarray:
    x = np.asarray(x0, dtype=np.float64)
    if x.shape != (n,):
        raise DimensionMismatch(f"start vector shape {x.shape} vs order {n}")
    if float(np.linalg.norm(x)) == 0.0:
        raise ZeroVector("start vector has zero norm")
    return x.copy()


class _Recorder:
    """Collects trace records against a shared clock and counter set."""

    def __init__(self, counters: Counters, reference, tol: float):
        self.counters = counters
        self.reference = reference
        self.tol = tol
        self.records: list[TraceRecord] = []
        self.values: list[float] = []
        self.start = time.perf_counter_ns()

    def add(self, k: int, f: float, lam: float, x: np.ndarray,
            grad_ratio: float | None) -> bool:
        """Append a record; returns True when the stopping rule fires."""
        if self.reference is not None:
            sin, ok = check_stopping(x, self.reference, self.tol)
            crit = sin
        else:
            sin = float("nan")
            crit = grad_ratio if grad_ratio is not None else float("inf")
            ok = crit <= self.tol
        now = time.perf_counter_ns() - self.start
        self.records.append(TraceRecord(k, float(f), float(lam), sin,
                                        self.counters.matvecs, self.counters.solves,
                                        now))
        self.values.append(float(crit))
        return ok


def _first_order(pair: MatrixPair, config: SolverConfig, x0: np.ndarray,
                 precond: Preconditioner | None, method: str) -> SolveTrace:
    _validate_config(config, pair.n)
    x = _start_vector(x0, pair.n)
    rng = np.random.default_rng(config.seed)
    setup: dict = {}

    if precond is None:
        bound = config.curvature_bound or estimate_curvature_bound(
            pair.b, config.curvature_method)
        limit = 2.0 / bound.bound
        setup["curvature_bound"] = bound.bound
        setup["curvature_method"] = bound.method
        default_interval = (0.9 * limit, 0.99 * limit)
    else:
        if config.transformed_bound is not None:
            lam_t = config.transformed_bound
        elif precond.kind == "cholesky":
            # exact metric: the transformed B is the identity
            lam_t = 1.0
        else:
            lam_t = transformed_dominant_eigenvalue(pair.b, precond)
        limit = 1.0 / lam_t
        setup["transformed_bound"] = lam_t
        default_interval = (0.9 * limit, 0.99 * limit)

    if config.stepsize is not None:
        alpha = float(config.stepsize)
        if not (0.0 < alpha < limit):
            raise InvalidStepsize(f"stepsize {alpha} outside (0, {limit})")
    else:
        lo, hi = config.stepsize_interval or default_interval
        if not (0.0 < lo <= hi < limit):
            raise InvalidStepsize(f"interval [{lo}, {hi}] not inside (0, {limit})")
        alpha = float(rng.uniform(lo, hi))

    counters = Counters()
    rec = _Recorder(counters, config.reference, config.tol)
    status = "max-iterations"
    xx = float(x @ x)

    for k in range(config.max_iterations + 1):
        ax = pair.a.matvec(x, counters)
        bx = pair.b.matvec(x, counters)
        xax = float(x @ ax)
        if xax <= DEGENERATE_RTOL * xx:
            rec.add(k, float(x @ bx), 0.0, x, None)
            status = "degenerate"
            break
        root = np.sqrt(xax)
        f = float(x @ bx) - root
        lam = 2.0 * root
        g = 2.0 * bx - ax / root
        ratio = float(np.linalg.norm(g)) / lam
        if rec.add(k, f, lam, x, ratio):
            status = "converged"
            break
        if k == config.max_iterations:
            break
        d = g if precond is None else apply_gram_inverse(precond, g, counters)
        x = x - alpha * d
        xx = float(x @ x)

    return SolveTrace(method, status, rec.records, x, counters,
                      "sin-theta" if config.reference is not None else "gradient",
                      rec.values, stepsize=alpha, setup=setup)


def run_gd(pair: MatrixPair, config: SolverConfig, x0: np.ndarray) -> SolveTrace:
    """Gradient descent on f with a fixed stepsize.

    The stepsize is validated against the curvature bound: fixed values must
    satisfy alpha * bound in (0, 2); otherwise one value is drawn uniformly
    from [0.9, 0.99] * (2 / bound) once per run using config.seed.
    """
    return _first_order(pair, config, x0, None, "gd")


def run_pmd(pair: MatrixPair, config: SolverConfig,
            precond: Preconditioner | None = None,
            x0: np.ndarray | None = None) -> SolveTrace:
    """Preconditioned mirror descent: x <- x - alpha (P'P)^{-1} grad f(x).

    Stability demands alpha * lambda_1(P^{-T} B P^{-1}) < 1; with the exact
    Cholesky metric that eigenvalue is 1 and alpha = 1/2 reproduces the
    power method iterate for iterate. Sampling defaults to [0.9, 0.99] of
    the limit.
    """
    if precond is None:
        precond = config.preconditioner
    if precond is None:
        precond = build_preconditioner(pair.b, "cholesky")
    return _first_order(pair, config, x0, precond, "pmd")


def run_power(pair: MatrixPair, config: SolverConfig, x0: np.ndarray) -> SolveTrace:
    """Generalized power iteration B x+ = A x / (2 sqrt(x'Ax)).

    Cost per iteration: one A-matvec and one B-solve. The direction is
    renormalized every iteration; the Rayleigh quotient of the new direction
    comes free from the solve byproduct (w'Bw = w'Ax for exact solves), so
    no extra B-matvecs are spent on the trace. One B-matvec of setup seeds
    the quotient of the start vector and is reported in setup, not in the
    run counters.
    """
    _validate_config(config, pair.n)
    x = _start_vector(x0, pair.n)
    solver = config.linear_solver or LinearSolver.exact(pair.b)
    counters = Counters()

    x /= np.linalg.norm(x)
    bq = float(x @ pair.b.matvec(x))  # setup matvec, uncounted
    rec = _Recorder(counters, config.reference, config.tol)
    setup = {"setup_matvecs": 1, "solver_mode": solver.mode}
    status = "max-iterations"

    for k in range(config.max_iterations + 1):
        ax = pair.a.matvec(x, counters)
        xax = float(x @ ax)
        if xax <= DEGENERATE_RTOL:
            rec.add(k, 0.0, 0.0, x, None)
            status = "degenerate"
            break
        q = xax / bq
        ratio = None
        if config.reference is None:
            bd = pair.b.matvec(x, counters)
            ratio = float(np.linalg.norm(ax - q * bd)) / (np.sqrt(xax) * q)
        if rec.add(k, -q / 4.0, q, x, ratio):
            status = "converged"
            break
        if k == config.max_iterations:
            break
        w = solve_spd(solver, pair.b, ax, counters)
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            rec.add(k + 1, 0.0, 0.0, x, None)
            status = "degenerate"
            break
        bq = float(w @ ax) / (norm_w * norm_w)
        x = w / norm_w

    return SolveTrace("power", status, rec.records, x, counters,
                      "sin-theta" if config.reference is not None else "gradient",
                      rec.values, setup=setup)


@dataclass
class SplitMergeState:
    """Scalars and cached vectors of one surrogate step.

    quad_a = x'Ax, quad_ab = x'A B^{-1} A x, quad_aba = x'(A B^{-1} A)
    B^{-1} (A B^{-1} A)'... in solver notation: with g = Ax, w = B^{-1}g,
    h = Aw, t = B^{-1}h these are g'x, g'w, g't. resid = h - (quad_ab /
    quad_a) g is the component of h with no B^{-1}-projection onto g;
    resid_energy = quad_aba - quad_ab^2 / quad_a is its B^{-1} energy,
    nonnegative up to roundoff. pd_margin is the positivity margin sigma of
    the corrected surrogate; w_first and w_second weight w and t in the
    step. b_next is B x_next reconstructed from solve byproducts (exact for
    exact solves). fallback marks a degenerate step that fell back to the
    power update; doublings counts rho escalations inside the step.
    """

    quad_a: float
    quad_ab: float
    quad_aba: float
    resid_energy: float
    pd_margin: float
    w_first: float
    w_second: float
    rho_used: float
    doublings: int
    fallback: bool
    ax: np.ndarray
    w: np.ndarray
    h: np.ndarray | None
    t: np.ndarray | None
    resid: np.ndarray | None
    b_next: np.ndarray


DEGENERATE_STEP_RTOL = 1e-14


def split_merge_step(pair: MatrixPair, state: SplitMergeState | None, x: np.ndarray,
                     rho: float, solver: LinearSolver,
                     counters: Counters | None = None,
                     ax: np.ndarray | None = None,
                     doubling_cap: int = 30) -> tuple[np.ndarray, SplitMergeState]:
    """One Split-Merge step x+ = w_first B^{-1}Ax + w_second B^{-1}AB^{-1}Ax.

    Exactly two solves, two A-matvecs, and four inner products: a = x'Ax,
    b = g'w, c = g't, and z'B^{-1}z with B^{-1}z formed from the vectors
    already solved (t - (b/a) w). When the second direction carries no new
    energy (resid_energy <= 1e-14 b^2/a, which also absorbs roundoff
    negatives) the step degrades to the power update w / (2 sqrt(a)). A
    nonpositive margin doubles rho until positive, up to doubling_cap.

    ``ax`` may carry a precomputed A x (the run loop shares it with its
    bookkeeping); ``state`` from the previous step is accepted for interface
    symmetry but nothing in it survives a change of x.
    """
    del state  # nothing cacheable across distinct iterates
    x = np.asarray(x, dtype=np.float64)
    g = ax if ax is not None else pair.a.matvec(x, counters)
    quad_a = float(x @ g)
    if quad_a <= DEGENERATE_RTOL * float(x @ x):
        raise DegenerateDirection(f"x'Ax = {quad_a:.3e} is degenerate")
    root_a = np.sqrt(quad_a)

    w = solve_spd(solver, pair.b, g, counters)
    quad_ab = float(g @ w)
    h = pair.a.matvec(w, counters)
    t = solve_spd(solver, pair.b, h, counters)
    quad_aba = float(g @ t)

    ratio = quad_ab / quad_a
    resid_energy = quad_aba - quad_ab * ratio
    if resid_energy <= DEGENERATE_STEP_RTOL * quad_ab * ratio:
        x_next = w / (2.0 * root_a)
        st = SplitMergeState(quad_a, quad_ab, quad_aba, resid_energy, 1.0,
                             1.0 / (2.0 * root_a), 0.0, rho, 0, True,
                             g, w, h, t, None, g / (2.0 * root_a))
        return x_next, st

    binv_resid = t - ratio * w
    resid = h - ratio * g
    resid_gram = float(resid @ binv_resid)

    rho_k = float(rho)
    doublings = 0
    while True:
        margin = 1.0 - resid_gram / (2.0 * rho_k * root_a * resid_energy)
        if margin > 0.0:
            break
        doublings += 1
        if doublings > doubling_cap:
            raise NumericalError(
                f"margin stayed nonpositive after {doubling_cap} rho doublings")
        rho_k *= 2.0

    w_second = 1.0 / (4.0 * margin * rho_k * quad_a)
    w_first = 1.0 / (2.0 * root_a) - w_second * ratio
    x_next = w_first * w + w_second * t
    b_next = w_first * g + w_second * h
    st = SplitMergeState(quad_a, quad_ab, quad_aba, resid_energy, margin,
                         w_first, w_second, rho_k, doublings, False,
                         g, w, h, t, resid, b_next)
    return x_next, st


def run_split_merge(pair: MatrixPair, config: SolverConfig, x0: np.ndarray) -> SolveTrace:
    """Split-Merge iteration with per-iteration renormalization.

    Each step is taken from the ray minimiser of the current direction, so
    the recorded objective -q/4 never increases outside rho-escalation
    steps and the eigenvalue estimate is the Rayleigh quotient. rho resets
    to the configured value every iteration; escalations and power
    fallbacks are tallied on the trace.
    """
    _validate_config(config, pair.n)
    x = _start_vector(x0, pair.n)
    solver = config.linear_solver or LinearSolver.exact(pair.b)
    counters = Counters()

    x /= np.linalg.norm(x)
    bq = float(x @ pair.b.matvec(x))  # setup matvec, uncounted
    rec = _Recorder(counters, config.reference, config.tol)
    setup = {"setup_matvecs": 1, "solver_mode": solver.mode}
    status = "max-iterations"
    escalations = 0
    fallbacks = 0
    state = None

    for k in range(config.max_iterations + 1):
        g = pair.a.matvec(x, counters)
        xax = float(x @ g)
        if xax <= DEGENERATE_RTOL * float(x @ x):
            rec.add(k, 0.0, 0.0, x, None)
            status = "degenerate"
            break
        q = xax / bq
        ratio = None
        if config.reference is None:
            bd = pair.b.matvec(x, counters)
            ratio = float(np.linalg.norm(g - q * bd)) / (np.sqrt(xax) * q)
        if rec.add(k, -q / 4.0, q, x, ratio):
            status = "converged"
            break
        if k == config.max_iterations:
            break

        scale = np.sqrt(xax) / (2.0 * bq)  # ray minimiser of f along x
        x_next, state = split_merge_step(pair, state, scale * x, config.rho, solver,
                                         counters, ax=scale * g,
                                         doubling_cap=config.rho_doubling_cap)
        escalations += state.doublings
        fallbacks += 1 if state.fallback else 0
        if (k + 1) % config.normalize_every == 0:
            norm = float(np.linalg.norm(x_next))
            x = x_next / norm
            bq = float(x_next @ state.b_next) / (norm * norm)
        else:
            x = x_next
            bq = float(x_next @ state.b_next)

    return SolveTrace("split-merge", status, rec.records, x, counters,
                      "sin-theta" if config.reference is not None else "gradient",
                      rec.values, rho_escalations=escalations,
                      fallback_steps=fallbacks, setup=setup)


def run_lanczos(pair: MatrixPair, config: SolverConfig, x0: np.ndarray) -> SolveTrace:
    """Restarted Lanczos on B^{-1}A in the B inner product.

    Builds cycles of up to config.lanczos_cycle basis vectors with the
    three-term recurrence, optional full reorthogonalization against the
    stored B-images of the basis, then restarts from the top Ritz vector.
    One trace record per cycle at k = cumulative basis builds; the max
    off-diagonal of V'BV - I per cycle lands in basis_drift. A vanishing
    continuation norm with the Ritz pair unconverged raises Breakdown.
    """
    _validate_config(config, pair.n)
    x = _start_vector(x0, pair.n)
    solver = config.linear_solver or LinearSolver.exact(pair.b)
    counters = Counters()
    n = pair.n
    cycle = config.lanczos_cycle
    if cycle < 2:
        raise InputError(f"cycle length must be at least 2, got {cycle}")

    rec = _Recorder(counters, config.reference, config.tol)
    setup = {"solver_mode": solver.mode}
    status = "max-iterations"
    drift: list[float] = []
    builds = 0

    while True:
        bx = pair.b.matvec(x, counters)
        nb2 = float(x @ bx)
        if nb2 <= 0.0:
            raise ZeroVector("restart vector has zero B-norm")
        nb = np.sqrt(nb2)
        v = x / nb
        bv = bx / nb
        basis = np.empty((n, cycle))
        bimages = np.empty((n, cycle))
        alphas: list[float] = []
        betas: list[float] = []
        v_prev = None
        beta_prev = 0.0
        broke = False

        m = 0
        while m < cycle and builds < config.max_iterations:
            basis[:, m] = v
            bimages[:, m] = bv
            av = pair.a.matvec(v, counters)
            u = solve_spd(solver, pair.b, av, counters)
            alpha = float(av @ v)
            w = u - alpha * v
            if v_prev is not None:
                w -= beta_prev * v_prev
            if config.reorthogonalize:
                w -= basis[:, : m + 1] @ (bimages[:, : m + 1].T @ w)
            bw = pair.b.matvec(w, counters)
            beta = float(np.sqrt(max(0.0, float(w @ bw))))
            alphas.append(alpha)
            betas.append(beta)
            m += 1
            builds += 1
            tiny = 1e-13 * max(1.0, max(abs(al) for al in alphas), max(betas))
            if beta <= tiny:
                broke = True
                break
            if m < cycle:
                v_prev = v
                v = w / beta
                bv = bw / beta

        tri = np.diag(np.array(alphas))
        if m > 1:
            off = np.array(betas[: m - 1])
            tri += np.diag(off, 1) + np.diag(off, -1)
        evals, vecs = jacobi_eigh(tri)
        theta = float(evals[-1])
        ritz = basis[:, :m] @ vecs[:, -1]

        gram = bimages[:, :m].T @ basis[:, :m]
        drift.append(float(np.max(np.abs(gram - np.eye(m)))))

        ratio = None
        if config.reference is None:
            aritz = pair.a.matvec(ritz, counters)
            britz = pair.b.matvec(ritz, counters)
            raz = float(ritz @ aritz)
            if raz > 0.0 and theta > 0.0:
                ratio = float(np.linalg.norm(aritz - theta * britz)) / (np.sqrt(raz) * theta)
            else:
                ratio = float("inf")
        if rec.add(builds, -theta / 4.0, theta, ritz, ratio):
            status = "converged"
            break
        if broke:
            raise Breakdown(
                f"continuation norm vanished at build {builds} with the Ritz pair unconverged")
        if builds >= config.max_iterations:
            break
        x = ritz

    return SolveTrace("lanczos", status, rec.records, ritz, counters,
                      "sin-theta" if config.reference is not None else "gradient",
                      rec.values, basis_drift=drift, setup=setup)
