"""Built-in benchmark systems emitted in the problem JSON schema.

The generators are code rather than data files so that the defining
constants are exact. Each returns a dict consumable by
problem.problem_from_json.
"""

from __future__ import annotations

from itertools import product

GATE_IDS = ("unique", "and", "copy", "bsc4", "threespin")


def gate_unique() -> dict:
    """Binary uniform target; source 1 copies it, source 2 is pure noise."""
    return {
        "p_y": [0.5, 0.5],
        "y_labels": ["0", "1"],
        "sources": [
            {"name": "X1", "labels": ["0", "1"], "channel": [[1.0, 0.0], [0.0, 1.0]]},
            {"name": "X2", "labels": ["0", "1"], "channel": [[0.5, 0.5], [0.5, 0.5]]},
        ],
    }


def gate_and() -> dict:
    """Y = X1 AND X2 for independent uniform binary inputs.

    Both sources see the same channel: p(x=0|y=0)=2/3, p(x=1|y=0)=1/3,
    p(x=1|y=1)=1.
    """
    channel = [[2.0 / 3.0, 1.0 / 3.0], [0.0, 1.0]]
    return {
        "p_y": [0.75, 0.25],
        "y_labels": ["0", "1"],
        "sources": [
            {"name": "X1", "labels": ["0", "1"], "channel": channel},
            {"name": "X2", "labels": ["0", "1"], "channel": channel},
        ],
    }


def gate_copy(epsilon: float) -> dict:
    """Target copies the pair of epsilon-correlated binary sources.

    p(x1,x2) = 1/2 - eps/4 on agreement, eps/4 on disagreement, and
    Y = (X1, X2). Zero-probability target outcomes (the disagreement pairs
    at eps = 0) are dropped so that p_Y keeps full support.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    outcomes = []
    probs = []
    for a, b in product("01", repeat=2):
        p = 0.5 - epsilon / 4.0 if a == b else epsilon / 4.0
        if p > 0.0:
            outcomes.append(a + b)
            probs.append(p)
    chan1 = [[1.0 if y[0] == x else 0.0 for x in "01"] for y in outcomes]
    chan2 = [[1.0 if y[1] == x else 0.0 for x in "01"] for y in outcomes]
    return {
        "p_y": probs,
        "y_labels": outcomes,
        "sources": [
            {"name": "X1", "labels": ["0", "1"], "channel": chan1},
            {"name": "X2", "labels": ["0", "1"], "channel": chan2},
        ],
    }


def gate_bsc4(errors=(0.1, 0.1, 0.2, 0.5)) -> dict:
    """Uniform binary target observed through four binary symmetric channels."""
    errors = tuple(float(e) for e in errors)
    if any(not 0.0 <= e <= 1.0 for e in errors):
        raise ValueError(f"error probabilities must be in [0, 1], got {errors}")
    sources = [
        {
            "name": f"X{i + 1}",
            "labels": ["0", "1"],
            "channel": [[1.0 - e, e], [e, 1.0 - e]],
        }
        for i, e in enumerate(errors)
    ]
    return {"p_y": [0.5, 0.5], "y_labels": ["0", "1"], "sources": sources}


def gate_threespin() -> dict:
    """Three uniform binary spins; each source reads two of them.

    X1 = X2 = (Y1, Y2) and X3 = (Y1, Y3). Source outcomes share the label
    alphabet {00, 01, 10, 11}, so equal bit-pairs merge in Z.
    """
    ys = ["".join(bits) for bits in product("01", repeat=3)]
    xs = ["".join(bits) for bits in product("01", repeat=2)]

    def reader(select) -> list:
        return [[1.0 if select(y) == x else 0.0 for x in xs] for y in ys]

    chan12 = reader(lambda y: y[0] + y[1])
    chan3 = reader(lambda y: y[0] + y[2])
    return {
        "p_y": [1.0 / 8.0] * 8,
        "y_labels": ys,
        "sources": [
            {"name": "X1", "labels": xs, "channel": chan12},
            {"name": "X2", "labels": xs, "channel": chan12},
            {"name": "X3", "labels": xs, "channel": chan3},
        ],
    }


def make_gate(gate_id: str, **params) -> dict:
    """Dispatch by gate id; raises ValueError for unknown ids."""
    if gate_id == "unique":
        return gate_unique()
    if gate_id == "and":
        return gate_and()
    if gate_id == "copy":
        return gate_copy(params.get("epsilon", 0.0))
    if gate_id == "bsc4":
        return gate_bsc4(params.get("errors", (0.1, 0.1, 0.2, 0.5)))
    if gate_id == "threespin":
        return gate_threespin()
    raise ValueError(f"unknown gate id {gate_id!r}; known: {', '.join(GATE_IDS)}")
