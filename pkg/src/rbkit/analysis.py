"""Post-solve analytics: per-source decompositions and per-source curves.

The prediction and compression of a solved point split into per-source
contributions nu(s) * I(Q;Y|S=s) and nu(s) * I(Q;S=s|Y); the gap
I(X_s;Y) - I(Q;Y|S=s) is the unique information left in source s. All
quantities here are recomputed from the materialized joint through the
probability module, independently of the solver kernels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .probability import specific_cmi_source, specific_cmi_target
from .problem import RBProblem, source_mutual_informations
from .solver import RBCurve, induced_joint


@dataclass(frozen=True)
class DecompositionRow:
    """Per-source split of one solved point (all values in nats).

    specific_* vectors are the unweighted I(Q;Y|S=s) / I(Q;S=s|Y);
    contribution_* are weighted by nu(s) and sum to the totals.
    """

    beta: float
    prediction: float
    compression: float
    specific_prediction: np.ndarray
    specific_compression: np.ndarray
    contribution_prediction: np.ndarray
    contribution_compression: np.ndarray
    unique_gaps: np.ndarray  # I(X_s;Y) - I(Q;Y|S=s)
    nu: np.ndarray
    on_frontier: bool = False


def decompose(joint, problem: RBProblem, beta: float = float("nan"), on_frontier: bool = False) -> DecompositionRow:
    """Per-source decomposition of a solved (Y,S,Z,Q) joint."""
    ns = problem.n_sources
    nu = problem.weights.probs
    spec_pred = np.array([specific_cmi_target(joint, s) for s in range(ns)])
    spec_comp = np.array([specific_cmi_source(joint, s) for s in range(ns)])
    return DecompositionRow(
        beta=beta,
        prediction=float(np.dot(nu, spec_pred)),
        compression=float(np.dot(nu, spec_comp)),
        specific_prediction=spec_pred,
        specific_compression=spec_comp,
        contribution_prediction=nu * spec_pred,
        contribution_compression=nu * spec_comp,
        unique_gaps=source_mutual_informations(problem) - spec_pred,
        nu=nu,
        on_frontier=on_frontier,
    )


def build_report(curve: RBCurve, problem: RBProblem):
    """Decomposition rows for every point of a sweep, keyed by beta.

    Rows are sorted by beta and flagged with frontier membership so that
    stacked contribution plots and per-source curves derive from one table.
    """
    frontier = set(id(p) for p in curve.frontier)
    rows = []
    for point in curve.points:
        joint = induced_joint(problem, point.channel)
        rows.append(
            decompose(joint, problem, beta=point.beta, on_frontier=id(point) in frontier)
        )
    return rows


@dataclass(frozen=True)
class SourceCurve:
    """Per-source tradeoff polyline ordered by beta, unweighted axes.

    Points are (I(Q;S=s|Y), I(Q;Y|S=s)) in nats with the source weight
    published alongside; no monotonicity or concavity holds in general for
    individual sources.
    """

    name: str
    weight: float
    betas: np.ndarray
    compressions: np.ndarray
    predictions: np.ndarray


def per_source_curves(curve: RBCurve, problem: RBProblem):
    """One polyline per source from a completed sweep."""
    nu = problem.weights.probs
    betas = np.array([p.beta for p in curve.points])
    out = []
    for s, name in enumerate(problem.source_names):
        comp = np.array([p.per_source_compression[s] for p in curve.points]) / nu[s]
        pred = np.array([p.per_source_prediction[s] for p in curve.points]) / nu[s]
        out.append(
            SourceCurve(
                name=name,
                weight=float(nu[s]),
                betas=betas,
                compressions=comp,
                predictions=pred,
            )
        )
    return tuple(out)


def polyline_crossings(curve: SourceCurve, rate: float) -> np.ndarray:
    """Predictions where a per-source polyline crosses a compression rate.

    Individual curves can be non-monotone, so several crossings may exist;
    each segment straddling the rate contributes one linearly interpolated
    prediction value.
    """
    xs, ys = curve.compressions, curve.predictions
    hits = []
    for i in range(len(xs) - 1):
        x0, x1 = xs[i], xs[i + 1]
        if x0 == x1:
            if x0 == rate:
                hits.extend([ys[i], ys[i + 1]])
            continue
        lo, hi = (x0, x1) if x0 < x1 else (x1, x0)
        if lo <= rate <= hi:
            t = (rate - x0) / (x1 - x0)
            hits.append(ys[i] + t * (ys[i + 1] - ys[i]))
    return np.array(hits)
