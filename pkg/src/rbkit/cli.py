"""Command-line front end: gate generation, sweeps, rates, exact values.

Outputs are diff-friendly: problem JSON in, CSV/JSON out, every numeric
printed with 9 significant digits, and a manifest JSON written next to each
CSV recording the resolved configuration and input digest. Identical inputs,
flags and seed reproduce byte-identical files.

Exit codes: 0 success, 2 validation/usage error, 3 size or budget error,
4 non-convergence (outputs are still written).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .analysis import build_report
from .blackwell import DEFAULT_BUDGET, SizeError, exact_blackwell_redundancy
from .gates import GATE_IDS, make_gate
from .probability import DomainError
from .problem import ValidationError, problem_from_json
from .solver import RBCurve, SolverConfig, default_beta_grid, rb_at_rate, sweep
from .kernels import default_backend_name

LN2 = math.log(2.0)


def _fmt(value) -> str:
    return format(float(value), ".9g")


def _parse_betas(text: str) -> np.ndarray:
    try:
        lo_s, hi_s, n_s = text.split(",")
        lo, hi, n = float(lo_s), float(hi_s), int(n_s)
    except ValueError:
        raise ValidationError(f"--betas expects min,max,count, got {text!r}") from None
    if lo <= 0 or hi < lo or n < 1:
        raise ValidationError(f"--betas values out of range: {text!r}")
    return default_beta_grid(n, lo, hi) if n > 1 else np.array([lo])


def _load_problem(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as err:
        raise ValidationError(f"cannot read problem file: {err}") from None
    except json.JSONDecodeError as err:
        raise ValidationError(f"problem file is not valid JSON: {err}") from None
    digest = hashlib.sha256(
        json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()
    return doc, problem_from_json(doc), digest


@dataclass(frozen=True)
class RunManifest:
    """Resolved run configuration; together with the code version it fully
    determines the emitted files."""

    artifact: str
    command: str
    input_digest: str
    beta_grid: list
    seed: int
    restarts: int
    tol: float
    max_iters: int
    objective: str
    q_cardinality: int
    units: str
    backend: str
    nu: list
    sources: list

    def dumps(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"


def _manifest_path(out: str) -> str:
    base = out[:-4] if out.endswith(".csv") else out
    return base + ".manifest.json"


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        beta=1.0,
        objective="exponential" if args.objective == "exp" else "linear",
        q_cardinality=args.qsize,
        max_iters=args.max_iters,
        tol=args.tol,
        restarts=args.restarts,
        seed=args.seed,
    )


def _make_manifest(args, command, digest, betas, cfg, problem) -> RunManifest:
    from .solver import default_q_cardinality

    return RunManifest(
        artifact=f"rbkit {__version__}",
        command=command,
        input_digest=digest,
        beta_grid=[float(b) for b in betas],
        seed=cfg.seed,
        restarts=cfg.restarts,
        tol=cfg.tol,
        max_iters=cfg.max_iters,
        objective=cfg.objective,
        q_cardinality=cfg.q_cardinality or default_q_cardinality(problem),
        units=args.units,
        backend=default_backend_name(),
        nu=[float(v) for v in problem.weights.probs],
        sources=list(problem.source_names),
    )


def _sweep_rows(curve: RBCurve, problem, unit_div: float, suffix: str):
    ns = problem.n_sources
    header = ["beta", f"compression_{suffix}", f"prediction_{suffix}",
              "objective_nats", "converged", "iterations"]
    header += [f"pred_s{i + 1}_{suffix}" for i in range(ns)]
    header += [f"comp_s{i + 1}_{suffix}" for i in range(ns)]
    nu = problem.weights.probs
    rows = []
    for p in curve.points:
        row = [
            _fmt(p.beta),
            _fmt(p.compression / unit_div),
            _fmt(p.prediction / unit_div),
            _fmt(p.objective),
            "true" if p.converged else "false",
            str(p.iterations),
        ]
        row += [_fmt(p.per_source_prediction[s] / nu[s] / unit_div) for s in range(ns)]
        row += [_fmt(p.per_source_compression[s] / nu[s] / unit_div) for s in range(ns)]
        rows.append(row)
    return header, rows


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(r) for r in rows]
    return "\n".join(lines) + "\n"


def cmd_gate(args) -> int:
    params = {}
    if args.gate_id == "copy":
        params["epsilon"] = args.epsilon
    if args.gate_id == "bsc4":
        try:
            params["errors"] = tuple(float(v) for v in args.errors.split(","))
        except ValueError:
            raise ValidationError(f"--errors expects comma-separated reals") from None
    doc = make_gate(args.gate_id, **params)
    _write(args.out, json.dumps(doc, indent=2) + "\n")
    return 0


def cmd_sweep(args) -> int:
    doc, problem, digest = _load_problem(args.problem)
    betas = _parse_betas(args.betas)
    cfg = _solver_config(args)
    curve = sweep(problem, betas, cfg)
    unit_div = LN2 if args.units == "bits" else 1.0
    header, rows = _sweep_rows(curve, problem, unit_div, args.units)
    _write(args.out, _csv_text(header, rows))
    if args.out and args.out != "-":
        manifest = _make_manifest(args, "sweep", digest, betas, cfg, problem)
        _write(_manifest_path(args.out), manifest.dumps())
    bad = [p for p in curve.points if not p.converged]
    if bad:
        print(
            f"warning: {len(bad)} of {len(curve.points)} points did not converge "
            f"within {cfg.max_iters} iterations (flagged converged=false)",
            file=sys.stderr,
        )
        return 4
    return 0


def _curve_from_csv(path: str) -> RBCurve:
    from types import SimpleNamespace

    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    header = lines[0].split(",")
    idx = {name: i for i, name in enumerate(header)}
    def col(row, *names):
        for n in names:
            if n in idx:
                return float(row[idx[n]])
        raise ValidationError(f"cached curve is missing columns {names}")
    points = []
    for ln in lines[1:]:
        row = ln.split(",")
        comp = col(row, "compression_bits", "compression_nats")
        pred = col(row, "prediction_bits", "prediction_nats")
        scale = LN2 if "compression_bits" in idx else 1.0
        points.append(
            SimpleNamespace(
                beta=col(row, "beta"),
                compression=comp * scale,
                prediction=pred * scale,
            )
        )
    return RBCurve.from_points(points)


def cmd_point(args) -> int:
    if args.rate < 0:
        raise ValidationError(f"--rate must be nonnegative, got {args.rate}")
    unit_div = LN2 if args.units == "bits" else 1.0
    rate_nats = args.rate * unit_div
    status = 0
    if args.curve:
        curve = _curve_from_csv(args.curve)
    else:
        doc, problem, digest = _load_problem(args.problem)
        cfg = _solver_config(args)
        curve = sweep(problem, _parse_betas(args.betas), cfg)
        if any(not p.converged for p in curve.points):
            status = 4
    value = rb_at_rate(curve, rate_nats) / unit_div
    payload = {"rate": args.rate, f"prediction_{args.units}": float(f"{value:.9g}")}
    _write(args.out, json.dumps(payload, sort_keys=True) + "\n")
    return status


def cmd_exact(args) -> int:
    doc, problem, digest = _load_problem(args.problem)
    result = exact_blackwell_redundancy(
        problem, q_cardinality=args.qsize, budget=args.budget
    )
    unit_div = LN2 if args.units == "bits" else 1.0
    payload = {
        f"blackwell_redundancy_{args.units}": float(f"{result.value / unit_div:.9g}"),
        "vertices_examined": result.vertices_examined,
        "witness": {
            "p_q_given_y": [[float(f"{v:.9g}") for v in row] for row in result.p_q_given_y],
            "garblings": [
                {
                    "source": problem.source_names[s],
                    "matrix": [[float(f"{v:.9g}") for v in row] for row in g],
                }
                for s, g in enumerate(result.garblings)
            ],
        },
    }
    _write(args.out, json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return 0


def cmd_decompose(args) -> int:
    doc, problem, digest = _load_problem(args.problem)
    betas = _parse_betas(args.betas)
    cfg = _solver_config(args)
    curve = sweep(problem, betas, cfg)
    unit_div = LN2 if args.units == "bits" else 1.0
    suffix = args.units
    header, rows = _sweep_rows(curve, problem, unit_div, suffix)
    report = build_report(curve, problem)
    ns = problem.n_sources
    header += [f"stack_pred_s{i + 1}_{suffix}" for i in range(ns)]
    header += [f"stack_comp_s{i + 1}_{suffix}" for i in range(ns)]
    header += [f"gap_s{i + 1}_{suffix}" for i in range(ns)]
    header.append("on_frontier")
    for row, rep in zip(rows, report):
        row += [_fmt(v / unit_div) for v in rep.contribution_prediction]
        row += [_fmt(v / unit_div) for v in rep.contribution_compression]
        row += [_fmt(v / unit_div) for v in rep.unique_gaps]
        row.append("true" if rep.on_frontier else "false")
    _write(args.out, _csv_text(header, rows))
    if args.out and args.out != "-":
        manifest = _make_manifest(args, "decompose", digest, betas, cfg, problem)
        _write(_manifest_path(args.out), manifest.dumps())
    if any(not p.converged for p in curve.points):
        print("warning: some points did not converge", file=sys.stderr)
        return 4
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rbkit",
        description="Redundancy-bottleneck curves, decompositions and exact "
        "Blackwell redundancy for discrete source channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gate", help="emit a built-in problem as JSON")
    g.add_argument("gate_id", choices=GATE_IDS)
    g.add_argument("--epsilon", type=float, default=0.0,
                   help="copy gate correlation parameter in [0,1]")
    g.add_argument("--errors", default="0.1,0.1,0.2,0.5",
                   help="bsc4 error probabilities")
    g.add_argument("--out", default=None)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("problem", help="problem JSON file")
    common.add_argument("--betas", default="0.05,1000,60",
                        help="log-spaced grid as min,max,count")
    common.add_argument("--restarts", type=int, default=10)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--max-iters", type=int, default=2000)
    common.add_argument("--objective", choices=["linear", "exp"], default="exp")
    common.add_argument("--qsize", type=int, default=None,
                        help="bottleneck cardinality override")
    common.add_argument("--units", choices=["bits", "nats"], default="bits")
    common.add_argument("--out", default=None)

    sub.add_parser("sweep", parents=[common],
                   help="trace the tradeoff curve to CSV")
    p = sub.add_parser("point", parents=[common],
                       help="interpolated prediction at a compression rate")
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--curve", default=None, help="reuse a cached sweep CSV")
    e = sub.add_parser("exact", help="exact redundancy by vertex enumeration")
    e.add_argument("problem")
    e.add_argument("--qsize", type=int, default=None)
    e.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    e.add_argument("--units", choices=["bits", "nats"], default="bits")
    e.add_argument("--out", default=None)
    sub.add_parser("decompose", parents=[common],
                   help="sweep plus per-source decomposition columns")
    return parser


_COMMANDS = {
    "gate": cmd_gate,
    "sweep": cmd_sweep,
    "point": cmd_point,
    "exact": cmd_exact,
    "decompose": cmd_decompose,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except SizeError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except (DomainError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
