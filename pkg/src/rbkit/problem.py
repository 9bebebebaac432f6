"""Problem assembly: merge source alphabets and build the (Y,S,Z) joint.

A problem consists of a full-support target distribution p_Y, n source
channels p(x|y), and a full-support weight distribution over sources. The
merged variable Z ranges over the union of the source alphabets, and the
joint factorizes as p(y,s,z) = p_Y(y) * nu(s) * p(z|y, source s) on the
support pairs (s, z in alphabet of s), zero elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .probability import CondDist, Dist, JointTable, mutual_information

JOINT_TOL = 1e-12


class ValidationError(ValueError):
    """Invalid problem input; carries a JSON-pointer-style path when known."""

    def __init__(self, message: str, pointer: str | None = None):
        self.pointer = pointer
        if pointer:
            message = f"{message} (at {pointer})"
        super().__init__(message)


@dataclass(frozen=True)
class SourceChannel:
    """One source: a named channel p(x|y) with rows indexed by y."""

    name: str
    labels: tuple
    matrix: np.ndarray  # shape (ny, nx), row-stochastic

    def __init__(self, name, labels, matrix):
        labels = tuple(labels)
        m = np.asarray(matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[1] != len(labels):
            raise ValidationError(
                f"channel {name!r}: matrix shape {m.shape} does not match "
                f"{len(labels)} output labels"
            )
        if np.any(m < -1e-12):
            raise ValidationError(f"channel {name!r} has negative entries")
        m = np.clip(m, 0.0, None)
        sums = m.sum(axis=1)
        bad = np.nonzero(np.abs(sums - 1.0) > 1e-9)[0]
        if bad.size:
            raise ValidationError(
                f"channel {name!r} row {bad[0]} sums to {sums[bad[0]]!r}, "
                f"expected 1 within 1e-9"
            )
        m = m / sums[:, None]
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "matrix", m)

    @property
    def n_outputs(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class SourceWeights:
    """Full-support distribution nu over the sources."""

    probs: np.ndarray

    def __init__(self, probs):
        p = np.asarray(probs, dtype=np.float64)
        if p.ndim != 1:
            raise ValidationError("source weights must be a vector")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValidationError(f"source weights sum to {p.sum()!r}")
        if np.any(p <= 0):
            raise ValidationError("source weights must be strictly positive")
        object.__setattr__(self, "probs", p / p.sum())

    @staticmethod
    def uniform(n: int) -> "SourceWeights":
        return SourceWeights(np.full(n, 1.0 / n))


def merge_alphabets(sources):
    """Union of source alphabets plus the support pairs.

    Returns (merged_labels, support) where merged_labels keeps the insertion
    order of first appearance and support lists (source_index, z_index) pairs
    for every z in that source's alphabet. Outcomes merge exactly when their
    labels compare equal.
    """
    if not sources:
        raise ValidationError("at least one source is required")
    merged: list = []
    pos: dict = {}
    for src in sources:
        for lab in src.labels:
            if lab not in pos:
                pos[lab] = len(merged)
                merged.append(lab)
    support = [
        (si, pos[lab]) for si, src in enumerate(sources) for lab in src.labels
    ]
    return merged, support


@dataclass(frozen=True)
class RBProblem:
    """Immutable problem instance shared read-only by solver workers."""

    target: Dist
    sources: tuple
    weights: SourceWeights
    z_labels: tuple
    support: tuple  # ((source_index, z_index), ...)
    joint: JointTable  # axes Y, S, Z

    @property
    def n_sources(self) -> int:
        return len(self.sources)

    @property
    def source_names(self) -> tuple:
        return tuple(s.name for s in self.sources)

    def channel(self, s: int) -> CondDist:
        src = self.sources[s]
        return CondDist(self.target.labels, src.labels, src.matrix)


def build_problem(p_y, sources, weights=None) -> RBProblem:
    """Assemble and validate an RBProblem from target, channels and weights."""
    if isinstance(p_y, Dist):
        target = p_y
    else:
        target = Dist(range(len(p_y)), p_y)
    zero = np.nonzero(target.probs == 0)[0]
    if zero.size:
        raise ValidationError(
            f"target outcome {target.labels[zero[0]]!r} has zero probability; "
            f"restrict the target alphabet to its support"
        )
    sources = tuple(
        s if isinstance(s, SourceChannel) else SourceChannel(*s) for s in sources
    )
    for i, src in enumerate(sources):
        if src.matrix.shape[0] != len(target):
            raise ValidationError(
                f"channel {src.name!r} has {src.matrix.shape[0]} rows but the "
                f"target has {len(target)} outcomes",
                pointer=f"/sources/{i}/channel",
            )
    if weights is None:
        weights = SourceWeights.uniform(len(sources))
    elif not isinstance(weights, SourceWeights):
        weights = SourceWeights(weights)
    if weights.probs.shape[0] != len(sources):
        raise ValidationError(
            f"{weights.probs.shape[0]} weights for {len(sources)} sources"
        )

    z_labels, support = merge_alphabets(sources)
    ny, ns, nz = len(target), len(sources), len(z_labels)
    table = np.zeros((ny, ns, nz))
    for si, src in enumerate(sources):
        nu_s = weights.probs[si]
        for xi, lab in enumerate(src.labels):
            zi = z_labels.index(lab)
            table[:, si, zi] += target.probs * nu_s * src.matrix[:, xi]
    joint = JointTable(
        ("Y", "S", "Z"),
        (target.labels, tuple(s.name for s in sources), tuple(z_labels)),
        table,
    )
    if abs(mutual_information(joint, "Y", "S")) > JOINT_TOL:
        raise ValidationError("constructed joint violates independence of Y and S")
    return RBProblem(
        target=target,
        sources=sources,
        weights=weights,
        z_labels=tuple(z_labels),
        support=tuple(support),
        joint=joint,
    )


def source_mutual_informations(problem: RBProblem) -> np.ndarray:
    """Per-source I(X_s;Y) in nats."""
    out = np.zeros(problem.n_sources)
    py = problem.target.probs
    for si, src in enumerate(problem.sources):
        pxy = py[:, None] * src.matrix  # (y, x)
        jt = JointTable(("Y", "X"), (problem.target.labels, src.labels), pxy)
        out[si] = mutual_information(jt, "X", "Y")
    return out


def rb_bounds(problem: RBProblem):
    """(max_prediction, max_rate) in nats.

    The prediction of any bottleneck is at most the weighted average of the
    source informations, and the useful compression rates are bounded by
    I(Z;S|Y).
    """
    from .probability import conditional_mutual_information

    max_prediction = float(
        np.dot(problem.weights.probs, source_mutual_informations(problem))
    )
    max_rate = conditional_mutual_information(problem.joint, "Z", "S", "Y")
    return max_prediction, max_rate


def problem_from_json(doc: dict) -> RBProblem:
    """Build an RBProblem from the problem JSON schema.

    Schema: {"p_y": [...], "y_labels": [...]?, "sources": [{"name", "labels",
    "channel"}], "nu_s": [...]?}. Raises ValidationError with a JSON pointer
    path for malformed documents.
    """
    if not isinstance(doc, dict):
        raise ValidationError("problem document must be an object", pointer="")
    if "p_y" not in doc:
        raise ValidationError("missing field", pointer="/p_y")
    p_y = doc["p_y"]
    if not isinstance(p_y, (list, tuple)) or not p_y:
        raise ValidationError("p_y must be a non-empty array", pointer="/p_y")
    y_labels = doc.get("y_labels")
    if y_labels is not None and len(y_labels) != len(p_y):
        raise ValidationError("y_labels length differs from p_y", pointer="/y_labels")
    raw_sources = doc.get("sources")
    if not isinstance(raw_sources, list) or not raw_sources:
        raise ValidationError("sources must be a non-empty array", pointer="/sources")
    sources = []
    for i, entry in enumerate(raw_sources):
        if not isinstance(entry, dict):
            raise ValidationError("source must be an object", pointer=f"/sources/{i}")
        for key in ("name", "labels", "channel"):
            if key not in entry:
                raise ValidationError("missing field", pointer=f"/sources/{i}/{key}")
        channel = entry["channel"]
        if len(channel) != len(p_y):
            raise ValidationError(
                f"channel has {len(channel)} rows, expected {len(p_y)}",
                pointer=f"/sources/{i}/channel",
            )
        for yi, row in enumerate(channel):
            if len(row) != len(entry["labels"]):
                raise ValidationError(
                    "row length differs from labels",
                    pointer=f"/sources/{i}/channel/{yi}",
                )
            total = float(sum(row))
            if abs(total - 1.0) > 1e-9:
                raise ValidationError(
                    f"row sums to {total!r}", pointer=f"/sources/{i}/channel/{yi}"
                )
        try:
            sources.append(
                SourceChannel(entry["name"], [str(l) for l in entry["labels"]], channel)
            )
        except ValidationError as err:
            raise ValidationError(str(err), pointer=f"/sources/{i}") from None
    try:
        target = Dist(
            [str(l) for l in y_labels] if y_labels else range(len(p_y)), p_y
        )
    except ValueError as err:
        raise ValidationError(str(err), pointer="/p_y") from None
    nu = doc.get("nu_s")
    try:
        return build_problem(target, sources, nu)
    except ValidationError:
        raise
    except ValueError as err:
        raise ValidationError(str(err)) from None


def problem_to_json(problem: RBProblem) -> dict:
    """Inverse of problem_from_json (labels are stringified)."""
    return {
        "p_y": [float(v) for v in problem.target.probs],
        "y_labels": [str(l) for l in problem.target.labels],
        "sources": [
            {
                "name": s.name,
                "labels": [str(l) for l in s.labels],
                "channel": [[float(v) for v in row] for row in s.matrix],
            }
            for s in problem.sources
        ],
        "nu_s": [float(v) for v in problem.weights.probs],
    }
