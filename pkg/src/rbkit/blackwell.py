"""Exact Blackwell redundancy by vertex enumeration, and weighted deficiency.

The redundancy is the maximum of I(Q;Y) over channels p(q|y) obtainable by
garbling every source channel. For a fixed bottleneck cardinality the
feasible garblings form a polytope in the concatenated kappa entries, the
objective is convex, and the maximum sits on a vertex, so small systems are
solved exactly by enumerating basic feasible solutions. This route is the
ground-truth oracle for the iterative solver's small-rate limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, islice

import numpy as np

from .probability import CondDist, Dist
from .problem import RBProblem

LN2 = math.log(2.0)
DEFAULT_BUDGET = 20_000_000


class SizeError(RuntimeError):
    """Enumeration would exceed the basis-candidate budget."""


@dataclass(frozen=True)
class FeasiblePolytope:
    """Standard-form polytope {x : Ax = b, x >= 0} over garbling entries.

    Variable layout: kappa_s(q|x) at offset[s] + x * q_cardinality + q.
    Equalities are per-(s,x) row-stochasticity plus, for every source after
    the first, composition equality with the first source's garbled channel.
    """

    A: np.ndarray
    b: np.ndarray
    q_cardinality: int
    alphabet_sizes: tuple
    offsets: tuple


def blackwell_q_cardinality(problem: RBProblem) -> int:
    """Bottleneck cardinality sufficient for the exact redundancy optimum."""
    return sum(s.n_outputs for s in problem.sources) - problem.n_sources + 1


def build_polytope(problem: RBProblem, q_cardinality: int | None = None) -> FeasiblePolytope:
    nq = q_cardinality or blackwell_q_cardinality(problem)
    if nq < 1:
        raise ValueError("q_cardinality must be at least 1")
    sizes = tuple(s.n_outputs for s in problem.sources)
    offsets = tuple(nq * int(np.sum(sizes[:s])) for s in range(len(sizes)))
    d = nq * int(np.sum(sizes))
    ny = len(problem.target)
    ns = problem.n_sources

    n_rows = int(np.sum(sizes)) + (ns - 1) * nq * ny
    A = np.zeros((n_rows, d))
    b = np.zeros(n_rows)
    row = 0
    for s, nx in enumerate(sizes):
        for x in range(nx):
            A[row, offsets[s] + x * nq : offsets[s] + (x + 1) * nq] = 1.0
            b[row] = 1.0
            row += 1
    p0 = problem.sources[0].matrix  # (ny, nx0)
    for s in range(1, ns):
        ps = problem.sources[s].matrix
        for q in range(nq):
            for y in range(ny):
                for x in range(sizes[s]):
                    A[row, offsets[s] + x * nq + q] = ps[y, x]
                for x in range(sizes[0]):
                    A[row, offsets[0] + x * nq + q] -= p0[y, x]
                row += 1
    return FeasiblePolytope(
        A=A, b=b, q_cardinality=nq, alphabet_sizes=sizes, offsets=offsets
    )


def _basis_count(d: int, rank: int) -> int:
    return math.comb(d, rank)


def enumerate_vertices(
    polytope: FeasiblePolytope,
    budget: int = DEFAULT_BUDGET,
    chunk: int = 16384,
) -> np.ndarray:
    """All basic feasible solutions of the polytope, deduplicated.

    Bases are visited in lexicographic column order and merged
    deterministically; solutions are kept when they satisfy Ax = b within
    1e-8 and x >= -1e-9, and deduplicated on a 1e-7 grid.
    """
    A, b = polytope.A, polytope.b
    m, d = A.shape
    sv = np.linalg.svd(A, compute_uv=False)
    rank = int(np.sum(sv > 1e-9 * sv[0])) if sv.size else 0
    n_cand = _basis_count(d, rank)
    if n_cand > budget:
        raise SizeError(
            f"{n_cand} basis candidates exceed the budget of {budget}; "
            f"use the iterative solver at a small compression rate instead"
        )
    # project onto an independent row basis; keep A for feasibility checks
    u, _, _ = np.linalg.svd(A, full_matrices=False)
    Ar = u[:, :rank].T @ A
    br = u[:, :rank].T @ b

    found = []
    it = combinations(range(d), rank)
    while True:
        block = list(islice(it, chunk))
        if not block:
            break
        C = np.array(block, dtype=np.intp)
        subs = np.transpose(Ar[:, C], (1, 0, 2))  # (B, rank, rank)
        dets = np.abs(np.linalg.det(subs))
        good = dets > 1e-12
        if not np.any(good):
            continue
        subs = subs[good]
        Cg = C[good]
        rhs = np.broadcast_to(br[:, None], (subs.shape[0], rank, 1)).copy()
        try:
            sol = np.linalg.solve(subs, rhs)[..., 0]
        except np.linalg.LinAlgError:
            sol = np.stack(
                [np.linalg.lstsq(s, br, rcond=None)[0] for s in subs]
            )
        keep = np.all(sol >= -1e-9, axis=1)
        if not np.any(keep):
            continue
        sol = np.clip(sol[keep], 0.0, None)
        Cg = Cg[keep]
        full = np.zeros((sol.shape[0], d))
        full[np.arange(sol.shape[0])[:, None], Cg] = sol
        resid = np.max(np.abs(A @ full.T - b[:, None]), axis=0)
        ok = resid <= 1e-8
        if np.any(ok):
            found.append(full[ok])
    if not found:
        return np.empty((0, d))
    verts = np.concatenate(found, axis=0)
    # dedupe on a 1e-7 grid but keep the unrounded solutions
    keys = np.round(verts / 1e-7)
    _, first = np.unique(keys, axis=0, return_index=True)
    return verts[np.sort(first)]


@dataclass(frozen=True)
class ExactBlackwellResult:
    """Exact redundancy value with the optimizing witness."""

    value: float  # nats
    p_q_given_y: np.ndarray  # (ny, nq)
    garblings: tuple  # per source, (nx_s, nq)
    vertices_examined: int
    composition_gap: float  # largest deviation between garbled channels

    @property
    def bits(self) -> float:
        return self.value / LN2


def _unpack_garblings(polytope: FeasiblePolytope, x: np.ndarray):
    nq = polytope.q_cardinality
    return tuple(
        x[off : off + nx * nq].reshape(nx, nq)
        for off, nx in zip(polytope.offsets, polytope.alphabet_sizes)
    )


def exact_blackwell_redundancy(
    problem: RBProblem,
    q_cardinality: int | None = None,
    budget: int = DEFAULT_BUDGET,
) -> ExactBlackwellResult:
    """Maximum I(Q;Y) over channels Blackwell-dominated by every source."""
    polytope = build_polytope(problem, q_cardinality)
    verts = enumerate_vertices(polytope, budget=budget)
    if verts.shape[0] == 0:
        raise RuntimeError("no feasible vertex found")
    nq = polytope.q_cardinality
    nx0 = polytope.alphabet_sizes[0]
    py = problem.target.probs
    p0 = problem.sources[0].matrix  # (ny, nx0)
    k0 = verts[:, : nx0 * nq].reshape(-1, nx0, nq)
    cond = np.einsum("vxq,yx->vyq", k0, p0)  # (nv, ny, nq)
    pq = np.einsum("vyq,y->vq", cond, py)
    num = np.where(cond > 0, cond, 1.0)
    den = np.where(pq > 0, pq, 1.0)
    terms = np.where(
        cond > 0, cond * (np.log(num) - np.log(den)[:, None, :]), 0.0
    )
    values = np.einsum("vyq,y->v", terms, py)
    best = int(np.argmax(values))
    garblings = _unpack_garblings(polytope, verts[best])
    comps = [g.T @ problem.sources[s].matrix.T for s, g in enumerate(garblings)]
    gap = max(
        float(np.max(np.abs(c - comps[0]))) for c in comps[1:]
    ) if len(comps) > 1 else 0.0
    return ExactBlackwellResult(
        value=float(values[best]),
        p_q_given_y=cond[best],
        garblings=garblings,
        vertices_examined=verts.shape[0],
        composition_gap=gap,
    )


@dataclass(frozen=True)
class DeficiencyResult:
    """Minimal weighted KL between a garbled channel and a reference."""

    value: float  # nats, or +inf when no support-respecting garbling exists
    kappa: np.ndarray | None
    iterations: int
    converged: bool
    objective_trace: np.ndarray | None = None

    @property
    def bits(self) -> float:
        return self.value / LN2


def _channel_matrix(channel) -> np.ndarray:
    if isinstance(channel, CondDist):
        return channel.matrix
    return np.asarray(channel, dtype=np.float64)


def deficiency(
    source_channel,
    reference_channel,
    p_y,
    tol: float = 1e-12,
    max_iters: int = 100_000,
    trace: bool = False,
) -> DeficiencyResult:
    """min over garblings kappa of sum_y p(y) D(kappa o p_C(.|y) || p_B(.|y)).

    Vanishes exactly when the reference is a garbling of the source. Solved
    by mirror descent with multiplicative updates, which keeps the rows of
    kappa on the simplex; the objective is convex in kappa, so the method
    reaches the global minimum. Returns the +inf sentinel when every garbling
    puts mass on an impossible reference outcome.
    """
    pc = _channel_matrix(source_channel)  # (ny, nc)
    pb = _channel_matrix(reference_channel)  # (ny, nb)
    py = p_y.probs if isinstance(p_y, Dist) else np.asarray(p_y, dtype=np.float64)
    ny, nc = pc.shape
    nb = pb.shape[1]
    if pb.shape[0] != ny or py.shape[0] != ny:
        raise ValueError("channels and target must share the y alphabet")

    # kappa(b|c) may be positive only when every y that can produce c
    # allows b under the reference
    allowed = np.ones((nc, nb), dtype=bool)
    for c in range(nc):
        ys = pc[:, c] > 0
        allowed[c] = np.all(pb[ys] > 0, axis=0) if ys.any() else True
    if np.any(~allowed.any(axis=1)):
        return DeficiencyResult(math.inf, None, 0, True)

    kappa = allowed / allowed.sum(axis=1, keepdims=True)
    wc = py[:, None] * pc  # (ny, nc), weights of each source column

    def objective(k):
        m = pc @ k  # (ny, nb)
        mask = m > 0
        t = np.zeros_like(m)
        t[mask] = m[mask] * (np.log(m[mask]) - np.log(pb[mask]))
        return float((py[:, None] * t).sum())

    obj = objective(kappa)
    history = [obj] if trace else None
    eta = 1.0
    converged = False
    iters = 0
    for iters in range(1, max_iters + 1):
        m = pc @ kappa
        ratio = np.zeros_like(m)
        mask = m > 0
        ratio[mask] = np.log(m[mask]) - np.log(pb[mask])
        grad = wc.T @ (ratio + 1.0)  # (nc, nb); +1 is constant per row
        accepted = False
        while eta >= 1e-12:
            g = grad - grad.min(axis=1, keepdims=True)
            cand = np.where(allowed, kappa * np.exp(-eta * g), 0.0)
            cand = np.where(allowed, np.maximum(cand, 1e-280), 0.0)
            cand /= cand.sum(axis=1, keepdims=True)
            new_obj = objective(cand)
            if new_obj <= obj + 1e-15:
                accepted = True
                break
            eta /= 2.0
        if not accepted:
            converged = True
            break
        kappa = cand
        delta = obj - new_obj
        obj = new_obj
        if trace:
            history.append(obj)
        eta = min(eta * 1.25, 1e6)
        if delta < tol or obj < 1e-16:
            converged = True
            break
    return DeficiencyResult(
        max(obj, 0.0),
        kappa,
        iters,
        converged,
        np.array(history) if trace else None,
    )


def deficiency_bound_check(joint, problem: RBProblem, slack: float = 1e-6):
    """Per-source check that the compression paid covers the deficiency.

    For a solved (Y,S,Z,Q) joint, I(Q;S=s|Y) must be at least the deficiency
    between the source channel and the bottleneck channel p(q|y), up to the
    given slack.
    """
    from .probability import specific_cmi_source

    pqy = joint.marginal("Q", "Y")  # (nq, ny)
    p_q_given_y = (pqy / pqy.sum(axis=0, keepdims=True)).T  # (ny, nq)
    out = []
    for s in range(problem.n_sources):
        delta = deficiency(
            problem.sources[s].matrix, p_q_given_y, problem.target.probs
        ).value
        out.append(bool(specific_cmi_source(joint, s) >= delta - slack))
    return out
