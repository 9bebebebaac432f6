"""Alternating-maximization solver for the prediction/compression tradeoff.

Maximizes I(Q;Y|S) - (1/beta) * I(Q;S|Y) (linear objective) or
I(Q;Y|S) - (1/beta) * exp(I(Q;S|Y)) (exponential objective, default for
curve tracing since the linear form cannot expose non-strictly-concave
segments) over channels r(q|s,z) on the support of (S, Z). Curves are traced
by sweeping beta upward with annealed warm starts plus fresh random restarts
at every grid point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .kernels import get_backend
from .probability import DomainError, JointTable
from .problem import RBProblem

LN2 = math.log(2.0)


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings for one tradeoff point.

    q_cardinality defaults to sum of source alphabet sizes plus one, which is
    sufficient for optimality; smaller values are faster but may be
    suboptimal. Convergence is declared on the change of the objective, the
    quantity with a monotonicity guarantee.
    """

    beta: float = 1.0
    objective: str = "exponential"  # or "linear"
    q_cardinality: int | None = None
    max_iters: int = 2000
    tol: float = 1e-10
    restarts: int = 10
    seed: int = 0
    init: str = "random_dirichlet"  # or "provided"
    init_channel: np.ndarray | None = None
    backend: str | None = None

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.objective not in ("linear", "exponential"):
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.q_cardinality is not None and self.q_cardinality < 1:
            raise ValueError("q_cardinality must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.init not in ("random_dirichlet", "provided"):
            raise ValueError(f"unknown init {self.init!r}")
        if self.init == "provided" and self.init_channel is None:
            raise ValueError("init='provided' requires init_channel")

    @property
    def exp_mode(self) -> bool:
        return self.objective == "exponential"


def default_q_cardinality(problem: RBProblem) -> int:
    return sum(s.n_outputs for s in problem.sources) + 1


@dataclass(frozen=True)
class BottleneckChannel:
    """Row-stochastic r(q|s,z) with one row per support pair (s, z)."""

    matrix: np.ndarray
    support: tuple

    def __init__(self, matrix, support):
        m = np.asarray(matrix, dtype=np.float64)
        support = tuple(tuple(p) for p in support)
        if m.ndim != 2 or m.shape[0] != len(support):
            raise ValueError(
                f"matrix shape {m.shape} does not match {len(support)} support pairs"
            )
        if np.any(m < -1e-12):
            raise ValueError("channel has negative entries")
        m = np.clip(m, 0.0, None)
        sums = m.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise ValueError("channel rows must sum to 1 within 1e-9")
        object.__setattr__(self, "matrix", m / sums[:, None])
        object.__setattr__(self, "support", support)

    @property
    def n_states(self) -> int:
        return self.matrix.shape[1]


class _Packed:
    """Flat array view of a problem used by the kernels."""

    def __init__(self, problem: RBProblem):
        table = problem.joint.table  # (ny, ns, nz)
        support = problem.support
        K = len(support)
        ny = table.shape[0]
        P = np.empty((K, ny))
        for k, (s, z) in enumerate(support):
            P[k] = table[:, s, z]
        mass = P.sum(axis=1, keepdims=True)
        A = np.divide(P, mass, out=np.zeros_like(P), where=mass > 0)
        counts = np.zeros(problem.n_sources + 1, dtype=np.int64)
        for s, _ in support:
            counts[s + 1] += 1
        self.P = P
        self.A = A
        self.src_ptr = np.cumsum(counts)
        self.py = problem.target.probs
        self.nu = problem.weights.probs


def _pack(problem: RBProblem) -> _Packed:
    packed = getattr(problem, "_packed", None)
    if packed is None:
        packed = _Packed(problem)
        object.__setattr__(problem, "_packed", packed)
    return packed


def init_bottleneck(config: SolverConfig, problem: RBProblem, rng=None) -> BottleneckChannel:
    """Random bottleneck channel: rows drawn from a flat Dirichlet."""
    if config.init == "provided":
        return BottleneckChannel(config.init_channel, problem.support)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    nq = config.q_cardinality or default_q_cardinality(problem)
    rows = rng.dirichlet(np.ones(nq), size=len(problem.support))
    return BottleneckChannel(rows, problem.support)


@dataclass(frozen=True)
class IterationState:
    """One solver state: the channel plus the statistics of its joint."""

    channel: BottleneckChannel
    prediction: float
    compression: float
    objective: float
    beta_eff: float
    iteration: int = 0
    resets: int = 0
    _stats: tuple = field(default=None, repr=False, compare=False)

    def variational_joint(self, problem: RBProblem) -> JointTable:
        return induced_joint(problem, self.channel)


def _objective_value(pred: float, comp: float, config: SolverConfig) -> float:
    penalty = math.exp(comp) if config.exp_mode else comp
    return pred - penalty / config.beta


def init_state(problem: RBProblem, config: SolverConfig, channel=None) -> IterationState:
    """Evaluate a starting channel into an IterationState."""
    if channel is None:
        channel = init_bottleneck(config, problem)
    packed = _pack(problem)
    kern = get_backend(config.backend)
    T, M, Tq, pred, comp, _, _ = kern.evaluate(
        packed.P, packed.src_ptr, packed.py, packed.nu, channel.matrix
    )
    beta_eff = config.beta * math.exp(-comp) if config.exp_mode else config.beta
    return IterationState(
        channel=channel,
        prediction=pred,
        compression=comp,
        objective=_objective_value(pred, comp, config),
        beta_eff=beta_eff,
        iteration=0,
        resets=0,
        _stats=(T, M, Tq),
    )


def ba_step(state: IterationState, problem: RBProblem, config: SolverConfig) -> IterationState:
    """One (omega, r) alternation; the objective never decreases."""
    packed = _pack(problem)
    kern = get_backend(config.backend)
    if state._stats is not None:
        T, M, Tq = state._stats
    else:
        T, M, Tq = kern.evaluate(
            packed.P, packed.src_ptr, packed.py, packed.nu, state.channel.matrix
        )[:3]
    r_new, resets = kern.update(
        packed.P,
        packed.A,
        packed.src_ptr,
        packed.py,
        packed.nu,
        state.channel.matrix,
        T,
        M,
        Tq,
        state.beta_eff,
    )
    T2, M2, Tq2, pred, comp, _, _ = kern.evaluate(
        packed.P, packed.src_ptr, packed.py, packed.nu, r_new
    )
    beta_eff = config.beta * math.exp(-comp) if config.exp_mode else config.beta
    return IterationState(
        channel=BottleneckChannel(r_new, problem.support),
        prediction=pred,
        compression=comp,
        objective=_objective_value(pred, comp, config),
        beta_eff=beta_eff,
        iteration=state.iteration + 1,
        resets=state.resets + resets,
        _stats=(T2, M2, Tq2),
    )


@dataclass(frozen=True)
class RBPoint:
    """One solved tradeoff point.

    per_source_prediction[s] is nu(s) * I(Q;Y|S=s) and per_source_compression
    nu(s) * I(Q;S=s|Y), so the per-source vectors sum to the totals.
    """

    beta: float
    prediction: float  # I(Q;Y|S), nats
    compression: float  # I(Q;S|Y), nats
    per_source_prediction: np.ndarray  # weighted, nats
    per_source_compression: np.ndarray
    objective: float
    converged: bool
    iterations: int
    restart: int
    resets: int
    channel: BottleneckChannel

    @property
    def prediction_bits(self) -> float:
        return self.prediction / LN2

    @property
    def compression_bits(self) -> float:
        return self.compression / LN2


def solve_lagrangian(
    problem: RBProblem,
    config: SolverConfig,
    warm_starts=(),
    task_key: int = 0,
) -> RBPoint:
    """Best tradeoff point over warm starts plus fresh random restarts.

    Warm starts are tried first (candidate indices 0..len-1), then
    config.restarts Dirichlet initializations. Candidates tie-break toward
    the lowest index: a later candidate replaces the incumbent only when its
    objective is larger by more than config.tol. Non-convergence within
    max_iters is reported through the converged flag, never raised.

    Per-candidate seeds derive deterministically from (seed, task_key,
    candidate index), so any parallel schedule over restarts or beta points
    reproduces the sequential result.
    """
    packed = _pack(problem)
    kern = get_backend(config.backend)
    nq = config.q_cardinality or default_q_cardinality(problem)
    candidates = [
        np.ascontiguousarray(
            ws.matrix if isinstance(ws, BottleneckChannel) else ws, dtype=np.float64
        )
        for ws in warm_starts
    ]
    if config.init == "provided":
        candidates.append(np.ascontiguousarray(config.init_channel, dtype=np.float64))
        n_random = 0
    else:
        n_random = config.restarts
    for cand in candidates:
        if cand.ndim != 2 or cand.shape[0] != packed.P.shape[0]:
            raise ValueError(
                f"initial channel must have one row per support pair "
                f"({packed.P.shape[0]}), got shape {cand.shape}"
            )
    n_warm = len(candidates)
    for j in range(max(n_random, 1 - len(candidates))):
        rng = np.random.default_rng((config.seed, task_key, n_warm + j))
        candidates.append(rng.dirichlet(np.ones(nq), size=packed.P.shape[0]))

    best = None
    best_idx = -1
    for idx, r0 in enumerate(candidates):
        result = kern.solve(
            packed.P,
            packed.A,
            packed.src_ptr,
            packed.py,
            packed.nu,
            r0,
            float(config.beta),
            config.exp_mode,
            float(config.tol),
            int(config.max_iters),
        )
        if best is None or result[5] > best[5] + config.tol:
            best = result
            best_idx = idx
    r, pred, comp, pred_s, comp_s, obj, iters, converged, resets = best
    nu = packed.nu
    return RBPoint(
        beta=float(config.beta),
        prediction=pred,
        compression=comp,
        per_source_prediction=nu * pred_s,
        per_source_compression=nu * comp_s,
        objective=obj,
        converged=bool(converged),
        iterations=int(iters),
        restart=best_idx,
        resets=int(resets),
        channel=BottleneckChannel(r, problem.support),
    )


@dataclass(frozen=True)
class RBCurve:
    """Solved tradeoff points plus their upper-left frontier.

    hull_rates/hull_preds are the nodes of the concave majorant of the
    frontier, used for rate interpolation.
    """

    points: tuple
    frontier: tuple
    hull_rates: np.ndarray
    hull_preds: np.ndarray

    @staticmethod
    def from_points(points) -> "RBCurve":
        points = tuple(sorted(points, key=lambda p: p.beta))
        if not points:
            raise DomainError("cannot build a curve from zero points")
        frontier = _pareto_frontier(points)
        rates = np.array([p.compression for p in frontier])
        preds = np.array([p.prediction for p in frontier])
        hr, hp = _concave_majorant(rates, preds)
        return RBCurve(points=points, frontier=frontier, hull_rates=hr, hull_preds=hp)

    @property
    def intercept(self) -> float:
        """Frontier prediction at the smallest sampled compression (nats)."""
        return float(self.hull_preds[0])

    @property
    def max_prediction(self) -> float:
        return float(self.hull_preds[-1])


def _pareto_frontier(points):
    """Non-dominated points, sorted by compression with increasing prediction."""
    order = sorted(points, key=lambda p: (p.compression, -p.prediction))
    kept = []
    best = -math.inf
    for p in order:
        if p.prediction > best:
            kept.append(p)
            best = p.prediction
    return tuple(kept)


def _concave_majorant(rates, preds):
    """Upper concave envelope nodes of an increasing point set."""
    hr: list = []
    hp: list = []
    for x, y in zip(rates, preds):
        while len(hr) >= 2:
            # keep slopes non-increasing
            s_prev = (hp[-1] - hp[-2]) / max(hr[-1] - hr[-2], 1e-300)
            s_new = (y - hp[-1]) / max(x - hr[-1], 1e-300)
            if s_new > s_prev:
                hr.pop()
                hp.pop()
            else:
                break
        hr.append(x)
        hp.append(y)
    return np.array(hr), np.array(hp)


def sweep(problem: RBProblem, beta_grid, config: SolverConfig) -> RBCurve:
    """Trace the curve over an ascending beta grid with annealed warm starts.

    Each grid point is solved from the previous optimum plus config.restarts
    fresh random initializations, keeping the best.
    """
    betas = np.asarray(list(beta_grid), dtype=np.float64)
    if betas.size == 0:
        raise DomainError("beta grid is empty")
    if np.any(betas <= 0):
        raise DomainError("beta grid must be positive")
    if np.any(np.diff(betas) < 0):
        raise DomainError("beta grid must be ascending")
    points = []
    prev = None
    for i, beta in enumerate(betas):
        cfg = replace(config, beta=float(beta))
        warm = (prev.channel,) if prev is not None else ()
        point = solve_lagrangian(problem, cfg, warm_starts=warm, task_key=i)
        points.append(point)
        prev = point
    return RBCurve.from_points(points)


def default_beta_grid(n: int = 60, lo: float = 0.05, hi: float = 1000.0) -> np.ndarray:
    """Log-spaced beta grid covering the redundancy and no-constraint regimes."""
    return np.geomspace(lo, hi, n)


def rb_at_rate(curve: RBCurve, rate: float) -> float:
    """Prediction value at a compression rate, in nats.

    Linear interpolation on the concave majorant; clamps to the frontier
    intercept below the smallest sampled rate and to the maximum frontier
    prediction above the largest.
    """
    if rate < 0:
        raise DomainError(f"rate must be nonnegative, got {rate}")
    if curve.hull_rates.size == 0:
        raise DomainError("empty curve")
    return float(np.interp(rate, curve.hull_rates, curve.hull_preds))


def induced_joint(problem: RBProblem, channel: BottleneckChannel) -> JointTable:
    """Materialize the full (Y, S, Z, Q) joint induced by a channel."""
    if channel.support != problem.support:
        raise ValueError("channel support does not match the problem support")
    table = problem.joint.table
    ny, ns, nz = table.shape
    nq = channel.n_states
    out = np.zeros((ny, ns, nz, nq))
    for k, (s, z) in enumerate(channel.support):
        out[:, s, z, :] = table[:, s, z][:, None] * channel.matrix[k][None, :]
    labels = (
        problem.target.labels,
        problem.source_names,
        problem.z_labels,
        tuple(range(nq)),
    )
    return JointTable(("Y", "S", "Z", "Q"), labels, out)
