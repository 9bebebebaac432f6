"""Shared test utilities: random instances, brute-force oracles, mixtures."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from rbkit.probability import Dist, JointTable
from rbkit.problem import SourceChannel, build_problem
from rbkit.solver import BottleneckChannel, solve_lagrangian


def random_problem(rng, n_sources=None, ny=None, max_alphabet=3, uniform_nu=False):
    """Random full-support problem with small alphabets."""
    ny = ny or int(rng.integers(2, 4))
    ns = n_sources or int(rng.integers(1, 4))
    py = rng.dirichlet(np.ones(ny) * 2)
    py = np.clip(py, 0.02, None)
    py /= py.sum()
    sources = []
    for s in range(ns):
        nx = int(rng.integers(2, max_alphabet + 1))
        matrix = rng.dirichlet(np.ones(nx), size=ny)
        labels = [f"s{s}x{j}" for j in range(nx)]
        sources.append(SourceChannel(f"X{s + 1}", labels, matrix))
    if uniform_nu:
        nu = None
    else:
        nu = rng.dirichlet(np.ones(ns) * 3)
        nu = np.clip(nu, 0.05, None)
        nu /= nu.sum()
    target = Dist([f"y{i}" for i in range(ny)], py)
    return build_problem(target, sources, nu)


def random_two_source_binary(rng):
    """Binary target, two sources with alphabets of size at most 3.

    The total alphabet size stays at 5 so that exact vertex enumeration fits
    the default basis-candidate budget.
    """
    sizes = [(2, 2), (2, 3), (3, 2)][int(rng.integers(0, 3))]
    py = rng.dirichlet(np.ones(2) * 2)
    py = np.clip(py, 0.05, None)
    py /= py.sum()
    sources = [
        SourceChannel(
            f"X{i + 1}",
            [f"s{i}x{j}" for j in range(nx)],
            rng.dirichlet(np.ones(nx), size=2),
        )
        for i, nx in enumerate(sizes)
    ]
    return build_problem(Dist(["y0", "y1"], py), sources)


def random_qys(rng, nq=3, ny=3, ns=2) -> JointTable:
    """Random joint with axes (Q, Y, S)."""
    t = rng.dirichlet(np.ones(nq * ny * ns)).reshape(nq, ny, ns)
    labels = (tuple(range(nq)), tuple(range(ny)), tuple(range(ns)))
    return JointTable(("Q", "Y", "S"), labels, t)


def mi_brute(t: np.ndarray) -> float:
    """I(A;B) from a 2d joint by direct summation."""
    pa = t.sum(axis=1)
    pb = t.sum(axis=0)
    total = 0.0
    for a in range(t.shape[0]):
        for b in range(t.shape[1]):
            if t[a, b] > 0:
                total += t[a, b] * np.log(t[a, b] / (pa[a] * pb[b]))
    return total


def cmi_brute(t: np.ndarray) -> float:
    """I(A;B|C) from a 3d joint by direct summation."""
    pc = t.sum(axis=(0, 1))
    pac = t.sum(axis=1)
    pbc = t.sum(axis=0)
    total = 0.0
    for a in range(t.shape[0]):
        for b in range(t.shape[1]):
            for c in range(t.shape[2]):
                if t[a, b, c] > 0:
                    total += t[a, b, c] * np.log(
                        t[a, b, c] * pc[c] / (pac[a, c] * pbc[b, c])
                    )
    return total


def specific_target_brute(t: np.ndarray, s: int) -> float:
    """I(Q;Y|S=s) from a (Q,Y,S) joint: sum_y p(y|s) D(p_Q|y,s || p_Q|s)."""
    m = t[:, :, s]
    ps = m.sum()
    pq_s = m.sum(axis=1) / ps
    total = 0.0
    for y in range(m.shape[1]):
        py_s = m[:, y].sum() / ps
        if py_s == 0:
            continue
        cond = m[:, y] / m[:, y].sum()
        for q in range(m.shape[0]):
            if cond[q] > 0:
                total += py_s * cond[q] * np.log(cond[q] / pq_s[q])
    return total


def specific_source_brute(t: np.ndarray, s: int) -> float:
    """I(Q;S=s|Y) from a (Q,Y,S) joint: sum_y p(y|s) D(p_Q|y,s || p_Q|y)."""
    m = t[:, :, s]
    ps = m.sum()
    pqy = t.sum(axis=2)
    total = 0.0
    for y in range(m.shape[1]):
        py_s = m[:, y].sum() / ps
        if py_s == 0:
            continue
        cond = m[:, y] / m[:, y].sum()
        ref = pqy[:, y] / pqy[:, y].sum()
        for q in range(m.shape[0]):
            if cond[q] > 0:
                total += py_s * cond[q] * np.log(cond[q] / ref[q])
    return total


def blockdiag_mixture(c1: BottleneckChannel, c2: BottleneckChannel, lam: float) -> BottleneckChannel:
    """Disjoint convex mixture of two channels onto non-overlapping states."""
    assert c1.support == c2.support
    matrix = np.hstack([lam * c1.matrix, (1.0 - lam) * c2.matrix])
    return BottleneckChannel(matrix, c1.support)


def refine_intercept(problem, curve, config, beta: float = 5e-4, task_key: int = 10_000):
    """Best near-zero-compression point, annealing down from every sweep point.

    The upward sweep can leave residual compression at its smallest beta;
    re-solving at a tiny beta warm-started from each solved channel pins the
    frontier intercept.
    """
    tiny = replace(config, beta=beta, restarts=0)
    best = None
    for point in curve.points:
        cand = solve_lagrangian(
            problem, tiny, warm_starts=(point.channel,), task_key=task_key
        )
        if best is None or cand.objective > best.objective:
            best = cand
    return best


def frontier_slack_ok(curve, tol: float = 1e-6):
    """Check the frontier is non-decreasing and concave within tol nats."""
    rates = np.array([p.compression for p in curve.frontier])
    preds = np.array([p.prediction for p in curve.frontier])
    if np.any(np.diff(preds) < -1e-12) or np.any(np.diff(rates) < -1e-12):
        return False
    for i in range(1, len(rates) - 1):
        span = rates[i + 1] - rates[i - 1]
        if span <= 0:
            continue
        t = (rates[i] - rates[i - 1]) / span
        chord = (1 - t) * preds[i - 1] + t * preds[i + 1]
        if preds[i] < chord - tol:
            return False
    return True
