"""Command-line surface: state I/O, witness runs, interference, discord search.

Subcommands:

    witness       quantumness of two states (direct, trace-formula, or
                  simulated-interference evaluation)
    interfere     one swap-cascade interference experiment, fringes to CSV
    discord       measurement optimization over a bipartite state
    example       the two built-in analytic states at chosen angles
    random-state  reproducible random density matrix to a state file

State files are JSON documents {"dim": d, "re": [[...]], "im": [[...]]}
with the real and imaginary parts as separate real arrays; an optional
"dims": [dim_a, dim_b] marks a bipartite split. Reports are single JSON
documents (UTF-8, newline-terminated) carrying a schema version, the
subcommand, sha256 digests of the input files, the numeric results, the
seed and the wall-clock duration; results use shortest round-trip float
formatting, so parsing them back loses nothing. Fringe CSV rows are
`phase_rad,p0,shots` with shots 0 marking exact values.

Exit codes: 0 success, 1 usage error, 2 invalid input data, 3 runtime or
I/O failure. Results for a fixed seed are reproducible run to run; only
the timing field of the report varies.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass
from typing import Any

import numpy as np

from .correlations import (
    BipartiteState,
    MeasurementAngles,
    OptimizerConfig,
    ZeroProbabilityError,
    correlation_witness,
    epr_state,
    maximize_witness,
    projector_pair,
    separable_example_state,
)
from .interferometer import (
    InterferometerSpec,
    build_u1,
    build_u2,
    default_phase_grid,
    extract_visibility,
    interferometric_quantumness,
    run_interferometer,
)
from .qcore import (
    DensityMatrix,
    LayoutError,
    RandomSpec,
    RegisterLayout,
    StateValidationError,
    random_density,
)
from .witness import quantumness

__all__ = [
    "SCHEMA_VERSION",
    "RunReport",
    "load_state",
    "save_state",
    "write_fringes",
    "dispatch",
    "main",
]

SCHEMA_VERSION = "1"

_METHOD_NAMES = {"direct": "direct_norm", "trace": "trace_formula"}


class _UsageError(Exception):
    """Flag combination that the grammar allows but the command rejects."""


@dataclass(frozen=True)
class RunReport:
    """Everything needed to trace one CLI run: inputs, results, provenance."""

    schema_version: str
    command: str
    inputs: dict[str, dict[str, str]]
    results: dict[str, Any]
    seed: int | None
    timing_ms: int

    def to_json(self) -> str:
        payload = {
            "schema_version": self.schema_version,
            "command": self.command,
            "inputs": self.inputs,
            "results": self.results,
            "seed": self.seed,
            "timing_ms": self.timing_ms,
        }
        return json.dumps(payload, indent=2) + "\n"


def _digest(path: str) -> dict[str, str]:
    with open(path, "rb") as fh:
        return {"path": path, "sha256": hashlib.sha256(fh.read()).hexdigest()}


def load_state(path: str) -> DensityMatrix | BipartiteState:
    """Parse and validate a JSON state file.

    Returns a BipartiteState when the document carries "dims", else a
    plain DensityMatrix.
    """
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: state file must be a JSON object")
    for key in ("dim", "re", "im"):
        if key not in doc:
            raise ValueError(f"{path}: missing required key {key!r}")
    dim = int(doc["dim"])
    if dim < 1:
        raise ValueError(f"{path}: dim must be positive, got {dim}")
    re = np.asarray(doc["re"], dtype=np.float64)
    im = np.asarray(doc["im"], dtype=np.float64)
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise ValueError(
            f"{path}: re/im must both be {dim}x{dim}, got {re.shape} and {im.shape}"
        )
    state = DensityMatrix(re + 1j * im)
    if "dims" in doc:
        dims = doc["dims"]
        if not (isinstance(dims, list) and len(dims) == 2):
            raise ValueError(f"{path}: dims must be a two-element list")
        return BipartiteState(state, int(dims[0]), int(dims[1]))
    return state


def save_state(
    state: DensityMatrix, path: str, dims: tuple[int, int] | None = None
) -> None:
    """Write a state file; entries survive a load round trip bit-exactly."""
    m = state.matrix
    doc: dict[str, Any] = {
        "dim": state.dim,
        "re": m.real.tolist(),
        "im": m.imag.tolist(),
    }
    if dims is not None:
        doc["dims"] = [int(dims[0]), int(dims[1])]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def write_fringes(fringes, path: str) -> None:
    """CSV dump of a phase scan, rows ordered by phase."""
    lines = ["phase_rad,p0,shots"]
    for phase, p0, shots in sorted(fringes.rows()):
        lines.append(f"{float(phase)!r},{float(p0)!r},{int(shots)}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; this surface reserves 2 for data errors.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="qwitness",
        description="Commutator-based quantumness and quantum-correlation detection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("witness", parents=[], help="quantumness of two states")
    p.add_argument("--state-a", required=True, metavar="F")
    p.add_argument("--state-b", required=True, metavar="F")
    p.add_argument("--method", choices=("direct", "trace", "interfere"), default="direct")
    p.add_argument("--shots", type=int, default=None, metavar="N")
    p.add_argument("--seed", type=int, default=0, metavar="S")
    p.add_argument("--out", default=None, metavar="F")

    p = sub.add_parser("interfere", help="one swap-cascade interference scan")
    p.add_argument("--u", choices=("u1", "u2"), required=True)
    p.add_argument("--state-a", required=True, metavar="F")
    p.add_argument("--state-b", required=True, metavar="F")
    p.add_argument("--phases", type=int, default=8, metavar="K")
    p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("--shots", type=int, default=None, metavar="N")
    p.add_argument("--seed", type=int, default=0, metavar="S")
    p.add_argument("--fringes-out", required=True, metavar="F")
    p.add_argument("--out", default=None, metavar="F")

    p = sub.add_parser("discord", help="optimize the correlation witness")
    p.add_argument("--state", required=True, metavar="F")
    p.add_argument("--dims", type=int, nargs=2, required=True, metavar=("DA", "DB"))
    p.add_argument("--grid", type=int, default=12, metavar="G")
    p.add_argument("--starts", type=int, default=5, metavar="R")
    p.add_argument("--max-evals", type=int, default=2000, metavar="N")
    p.add_argument("--seed", type=int, default=0, metavar="S")
    p.add_argument("--out", default=None, metavar="F")

    p = sub.add_parser("example", help="built-in analytic states")
    p.add_argument("which", choices=("epr", "separable"))
    p.add_argument("--phi", type=float, required=True, metavar="X")
    p.add_argument("--theta", type=float, default=0.0, metavar="Y")
    p.add_argument("--out", default=None, metavar="F")

    p = sub.add_parser("random-state", help="reproducible random density matrix")
    p.add_argument("--dim", type=int, required=True, metavar="D")
    p.add_argument("--rank", type=int, required=True, metavar="R")
    p.add_argument("--seed", type=int, required=True, metavar="S")
    p.add_argument("--out", required=True, metavar="F")

    return parser


def _load_single(path: str) -> DensityMatrix:
    state = load_state(path)
    if isinstance(state, BipartiteState):
        raise ValueError(f"{path}: expected a single-system state, file carries dims")
    return state


def _cmd_witness(args) -> tuple[dict, dict, int | None]:
    if args.shots is not None and args.method != "interfere":
        raise _UsageError("--shots applies only to --method interfere")
    state_a = _load_single(args.state_a)
    state_b = _load_single(args.state_b)
    inputs = {"state_a": _digest(args.state_a), "state_b": _digest(args.state_b)}
    if args.method in _METHOD_NAMES:
        res = quantumness(state_a, state_b, method=_METHOD_NAMES[args.method])
        seed = None
    else:
        if args.shots is not None and args.shots < 1:
            raise _UsageError("--shots must be a positive integer")
        mode = "exact" if args.shots is None else "sampled"
        res = interferometric_quantumness(
            state_a, state_b, mode=mode, shots=args.shots or 0, seed=args.seed
        )
        seed = args.seed if mode == "sampled" else None
    results = {
        "q_value": float(res.q_value),
        "v1_term": float(res.v1_term),
        "v2_term": float(res.v2_term),
        "method": res.method,
        "stderr_q": float(res.stderr_q),
    }
    return results, inputs, seed


def _cmd_interfere(args) -> tuple[dict, dict, int | None]:
    if args.mode == "sampled" and (args.shots is None or args.shots < 1):
        raise _UsageError("--mode sampled requires --shots N with N >= 1")
    if args.mode == "exact" and args.shots is not None:
        raise _UsageError("--shots applies only to --mode sampled")
    state_a = _load_single(args.state_a)
    state_b = _load_single(args.state_b)
    if state_a.dim != state_b.dim:
        raise LayoutError(
            f"state dimensions differ: {state_a.dim} vs {state_b.dim}"
        )
    inputs = {"state_a": _digest(args.state_a), "state_b": _digest(args.state_b)}
    d = state_a.dim
    layout = RegisterLayout((d, d, d, d))
    build = build_u1 if args.u == "u1" else build_u2
    spec = InterferometerSpec(
        unitary=build(layout),
        inputs=(state_a, state_a, state_b, state_b),
        phases=default_phase_grid(args.phases),
        mode=args.mode,
        shots_per_phase=args.shots or 0,
        seed=args.seed,
    )
    fringes = run_interferometer(spec)
    write_fringes(fringes, args.fringes_out)
    vis = extract_visibility(fringes)
    results = {
        "unitary": args.u,
        "mode": args.mode,
        "n_phases": len(fringes),
        "v": float(vis.v),
        "alpha": float(vis.alpha),
        "stderr_v": float(vis.stderr_v),
        "fringes_path": args.fringes_out,
    }
    seed = args.seed if args.mode == "sampled" else None
    return results, inputs, seed


def _cmd_discord(args) -> tuple[dict, dict, int | None]:
    loaded = load_state(args.state)
    da, db = args.dims
    if isinstance(loaded, BipartiteState):
        if (loaded.dim_a, loaded.dim_b) != (da, db):
            raise ValueError(
                f"--dims {da} {db} conflicts with file dims "
                f"{loaded.dim_a} {loaded.dim_b}"
            )
        state = loaded
    else:
        state = BipartiteState(loaded, da, db)
    inputs = {"state": _digest(args.state)}
    config = OptimizerConfig(
        grid_points=args.grid,
        starts=args.starts,
        max_evals=args.max_evals,
        seed=args.seed,
    )
    report = maximize_witness(state, config)
    results = {
        "best_q": float(report.best_q),
        "best_params": [float(t) for t in report.best_params],
        "best_kets": [
            {"re": k.real.tolist(), "im": k.imag.tolist()} for k in report.best_kets
        ],
        "evaluations": report.evaluations,
        "verdict": report.verdict,
        "threshold": float(report.threshold),
        "trace": [
            {"params": [float(t) for t in params], "q": float(q)}
            for params, q in report.trace
        ],
    }
    return results, inputs, args.seed


def _cmd_example(args) -> tuple[dict, dict, int | None]:
    state = epr_state() if args.which == "epr" else separable_example_state()
    e1, e2 = projector_pair(MeasurementAngles(theta=args.theta, phi=args.phi))
    q = correlation_witness(state, e1, e2)
    results = {
        "state": args.which,
        "theta": float(args.theta),
        "phi": float(args.phi),
        "q_value": float(q),
    }
    return results, {}, None


def _cmd_random_state(args) -> tuple[dict, dict, int | None]:
    spec = RandomSpec(dim=args.dim, rank=args.rank, seed=args.seed)
    state = random_density(spec)
    save_state(state, args.out)
    results = {
        "dim": args.dim,
        "rank": args.rank,
        "path": args.out,
        "purity": float(state.purity()),
    }
    return results, {}, args.seed


_HANDLERS = {
    "witness": _cmd_witness,
    "interfere": _cmd_interfere,
    "discord": _cmd_discord,
    "example": _cmd_example,
    "random-state": _cmd_random_state,
}


def dispatch(argv: list[str]) -> int:
    """Run one CLI invocation; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    start = time.perf_counter()
    try:
        results, inputs, seed = _HANDLERS[args.command](args)
    except _UsageError as exc:
        print(f"qwitness {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (StateValidationError, LayoutError, ZeroProbabilityError) as exc:
        print(f"qwitness {args.command}: invalid input: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, TypeError) as exc:
        print(f"qwitness {args.command}: invalid input: {exc}", file=sys.stderr)
        return 2
    except (OSError, RuntimeError) as exc:
        print(f"qwitness {args.command}: {exc}", file=sys.stderr)
        return 3
    report = RunReport(
        schema_version=SCHEMA_VERSION,
        command=args.command,
        inputs=inputs,
        results=results,
        seed=seed,
        timing_ms=int((time.perf_counter() - start) * 1000.0),
    )
    text = report.to_json()
    # random-state's --out is the state file; its report goes to stdout.
    out = None if args.command == "random-state" else getattr(args, "out", None)
    try:
        if out is None:
            sys.stdout.write(text)
        else:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
    except OSError as exc:
        print(f"qwitness {args.command}: cannot write report: {exc}", file=sys.stderr)
        return 3
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
