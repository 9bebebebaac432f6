"""Exact finite probability arithmetic and information measures.

All information quantities are returned in nats. Zero probabilities follow
the convention 0*ln(0) = 0, and conditional distributions given a
zero-probability outcome are treated as undefined rows that carry zero
weight in any weighted sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MASS_TOL = 1e-9


class ShapeError(ValueError):
    """Mismatched labels or axes between probability objects."""


class DomainError(ValueError):
    """Operation evaluated outside its defined domain."""


def _as_prob_vector(probs, what: str) -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1:
        raise ShapeError(f"{what} must be one-dimensional, got shape {p.shape}")
    if np.any(p < -1e-12):
        raise ValueError(f"{what} has negative entries")
    p = np.clip(p, 0.0, None)
    total = p.sum()
    if abs(total - 1.0) > MASS_TOL:
        raise ValueError(f"{what} sums to {total!r}, expected 1 within {MASS_TOL}")
    return p / total


def xlogx(p: np.ndarray) -> np.ndarray:
    """Elementwise p*ln(p) with 0*ln(0) = 0."""
    p = np.asarray(p, dtype=np.float64)
    out = np.zeros_like(p)
    mask = p > 0
    out[mask] = p[mask] * np.log(p[mask])
    return out


@dataclass(frozen=True)
class Dist:
    """A probability distribution over an ordered finite alphabet."""

    labels: tuple
    probs: np.ndarray

    def __init__(self, labels, probs):
        labels = tuple(labels)
        probs = _as_prob_vector(probs, "probs")
        if len(labels) != probs.shape[0]:
            raise ShapeError(
                f"{len(labels)} labels but {probs.shape[0]} probabilities"
            )
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate outcome labels")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", probs)

    @property
    def full_support(self) -> bool:
        return bool(np.all(self.probs > 0))

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class CondDist:
    """Row-stochastic conditional distribution p(out | given).

    The matrix is indexed (given, out). Every row must sum to 1 within
    tolerance; rows off by no more than the tolerance are renormalized.
    """

    given_labels: tuple
    out_labels: tuple
    matrix: np.ndarray

    def __init__(self, given_labels, out_labels, matrix):
        given_labels = tuple(given_labels)
        out_labels = tuple(out_labels)
        m = np.asarray(matrix, dtype=np.float64)
        if m.shape != (len(given_labels), len(out_labels)):
            raise ShapeError(
                f"matrix shape {m.shape} does not match "
                f"({len(given_labels)}, {len(out_labels)})"
            )
        if np.any(m < -1e-12):
            raise ValueError("conditional matrix has negative entries")
        m = np.clip(m, 0.0, None)
        sums = m.sum(axis=1)
        bad = np.nonzero(np.abs(sums - 1.0) > MASS_TOL)[0]
        if bad.size:
            raise ValueError(
                f"row {bad[0]} sums to {sums[bad[0]]!r}, expected 1 within {MASS_TOL}"
            )
        m = m / sums[:, None]
        object.__setattr__(self, "given_labels", given_labels)
        object.__setattr__(self, "out_labels", out_labels)
        object.__setattr__(self, "matrix", m)


@dataclass
class JointTable:
    """Dense joint probability tensor over named axes."""

    axes: tuple
    labels: tuple
    table: np.ndarray
    _marginals: dict = field(default_factory=dict, repr=False)

    def __init__(self, axes, labels, table):
        axes = tuple(axes)
        labels = tuple(tuple(l) for l in labels)
        t = np.asarray(table, dtype=np.float64)
        if len(axes) != len(set(axes)):
            raise ShapeError("duplicate axis names")
        if t.ndim != len(axes):
            raise ShapeError(f"{len(axes)} axes but tensor has {t.ndim} dimensions")
        if len(labels) != len(axes):
            raise ShapeError("labels must be given per axis")
        for name, labs, size in zip(axes, labels, t.shape):
            if len(labs) != size:
                raise ShapeError(
                    f"axis {name!r} has {size} entries but {len(labs)} labels"
                )
        if np.any(t < -1e-12):
            raise ValueError("joint table has negative entries")
        t = np.clip(t, 0.0, None)
        total = t.sum()
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"total mass {total!r}, expected 1 within {MASS_TOL}")
        self.axes = axes
        self.labels = labels
        self.table = t / total
        self._marginals = {}

    def axis_index(self, name) -> int:
        try:
            return self.axes.index(name)
        except ValueError:
            raise ShapeError(f"axis {name!r} not in {self.axes}") from None

    def marginal(self, *names) -> np.ndarray:
        """Marginal tensor over the requested axes, in the requested order."""
        key = tuple(names)
        cached = self._marginals.get(key)
        if cached is not None:
            return cached
        idx = [self.axis_index(n) for n in names]
        keep = set(idx)
        drop = tuple(i for i in range(self.table.ndim) if i not in keep)
        m = self.table.sum(axis=drop) if drop else self.table
        if len(idx) > 1:
            # sum() leaves surviving axes in original order; permute to the
            # requested one (rank of each index among the kept indices)
            m = np.transpose(m, np.argsort(np.argsort(idx)))
        self._marginals[key] = m
        return m

    def marginal_dist(self, name) -> Dist:
        return Dist(self.labels[self.axis_index(name)], self.marginal(name))


def entropy(d: Dist) -> float:
    """Shannon entropy -sum p ln p in nats."""
    return float(-xlogx(d.probs).sum())


def kl_divergence(p: Dist, q: Dist) -> float:
    """KL divergence sum p ln(p/q) in nats, +inf if p is not dominated by q."""
    if p.labels != q.labels:
        raise ShapeError("distributions defined on different label sets")
    pm = p.probs > 0
    if np.any(q.probs[pm] == 0):
        return math.inf
    return float(np.sum(p.probs[pm] * (np.log(p.probs[pm]) - np.log(q.probs[pm]))))


def mutual_information(j: JointTable, a, b) -> float:
    """I(A;B) in nats from the joint table."""
    pab = j.marginal(a, b)
    pa = pab.sum(axis=1)
    pb = pab.sum(axis=0)
    mask = pab > 0
    t = pab[mask]
    denom = np.outer(pa, pb)[mask]
    return float(np.sum(t * (np.log(t) - np.log(denom))))


def conditional_mutual_information(j: JointTable, a, b, c) -> float:
    """I(A;B|C) in nats, computed as sum_c p(c) D(p_AB|c || p_A|c p_B|c)."""
    if len({a, b, c}) != 3:
        raise ShapeError("axes must be distinct")
    t = j.marginal(a, b, c)
    pc = t.sum(axis=(0, 1))
    pac = t.sum(axis=1)
    pbc = t.sum(axis=0)
    num = t * pc[None, None, :]
    den = pac[:, None, :] * pbc[None, :, :]
    mask = t > 0
    return float(np.sum(t[mask] * (np.log(num[mask]) - np.log(den[mask]))))


def _qys_slice(j: JointTable, s: int):
    """p(q, y | S=s) pieces shared by the specific-CMI measures."""
    t = j.marginal("Q", "Y", "S")
    ns = t.shape[2]
    if not 0 <= s < ns:
        raise DomainError(f"source index {s} out of range for {ns} sources")
    m = t[:, :, s]
    ps = m.sum()
    if ps <= 0:
        raise DomainError(f"source {s} has zero weight")
    return t, m, ps


def specific_cmi_target(j: JointTable, s: int) -> float:
    """I(Q;Y|S=s) in nats: prediction contribution of source s.

    Equals D(p_Q|Y,S=s || p_Q|S=s) averaged over p_Y|S=s.
    """
    _, m, ps = _qys_slice(j, s)
    p_y_s = m.sum(axis=0) / ps           # p(y|s)
    p_q_s = m.sum(axis=1) / ps           # p(q|s)
    total = 0.0
    for yi in range(m.shape[1]):
        if p_y_s[yi] <= 0:
            continue
        cond = m[:, yi] / m[:, yi].sum()  # p(q|y,s)
        mask = cond > 0
        total += p_y_s[yi] * float(
            np.sum(cond[mask] * (np.log(cond[mask]) - np.log(p_q_s[mask])))
        )
    return total


def specific_cmi_source(j: JointTable, s: int) -> float:
    """I(Q;S=s|Y) in nats: compression contribution of source s.

    Equals D(p_Q|Y,S=s || p_Q|Y) averaged over p_Y|S=s.
    """
    t, m, ps = _qys_slice(j, s)
    p_y_s = m.sum(axis=0) / ps
    p_qy = t.sum(axis=2)                 # p(q, y)
    total = 0.0
    for yi in range(m.shape[1]):
        if p_y_s[yi] <= 0:
            continue
        cond = m[:, yi] / m[:, yi].sum()      # p(q|y,s)
        ref = p_qy[:, yi] / p_qy[:, yi].sum()  # p(q|y)
        mask = cond > 0
        total += p_y_s[yi] * float(
            np.sum(cond[mask] * (np.log(cond[mask]) - np.log(ref[mask])))
        )
    return total
