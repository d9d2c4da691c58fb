"""Command-line front end.

Five commands share one state grammar (--amps complex amplitudes or --point
simplex coordinates):

  simulate   run an ensemble, write the JSON/CSV result artifact
  compare    same pipeline, named for its verdict: exit 2 if the Born gate fails
  mfpt       ensemble gated on mean passage time instead (two states only)
  density    passage-time density CSV, analytic next to empirical (two states)
  analytic   closed-form values only, no trials: fpp | mfpt | green

Results are written atomically (temp file + rename). With --out the human
summary goes to stdout; without it the artifact itself is stdout and the
summary moves to stderr. The artifact never contains wall-clock time or
worker count, so identical requests give byte-identical files at any
--threads value; elapsed_wall_s is fixed at 0.0 and real timing is shown in
the summary only.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analytic import (
    NGreenParams,
    DiffusionParams,
    fpp_nstate,
    fpt_density_2state,
    green_2state,
    mfpt_2state,
)
from .runner import default_time_range, run_trials
from .state import bind_compound, form_image, make_state, walk_seed
from .stats import (
    EnsembleStats,
    accumulate,
    compare_born,
    compare_mfpt,
    passage_moments,
)
from .walk import SimplexPoint, WalkConfig, run_continuum_walk, run_discrete_game

__all__ = ["UsageError", "RunRequest", "parse_args", "run", "main"]

COMMANDS = ("simulate", "analytic", "compare", "density", "mfpt")
ANALYTIC_KINDS = ("fpp", "mfpt", "green")

# Laplace frequency used when "analytic green" tabulates the 2-state kernel
GREEN_TABLE_S = 1.0
GREEN_TABLE_POINTS = 201


class UsageError(Exception):
    """Bad command line; main() turns this into a one-line message, exit 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunRequest:
    """One parsed invocation. start is the validated simplex point; amps
    keeps the raw tokens so the result artifact can echo the request."""

    command: str
    start: SimplexPoint
    amps: tuple[str, ...] | None
    point: tuple[float, ...] | None
    mode: str
    trials: int
    seed: int
    chips: int
    dt: float
    diffusion: float
    max_steps: int
    threads: int | None
    out: str | None
    fmt: str
    trace: bool
    what: str | None = None


def _u64(tok: str) -> int:
    try:
        value = int(tok)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {tok!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("value out of u64 range")
    return value


def _positive_int(tok: str) -> int:
    value = int(tok)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _positive_float(tok: str) -> float:
    value = float(tok)
    if not value > 0.0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _amps_arg(tok: str) -> tuple[str, ...]:
    """Validate a comma-separated list of complex literals like 0.6+0.8i."""
    parts = [p.strip() for p in tok.split(",")]
    if len(parts) < 2 or any(not p for p in parts):
        raise argparse.ArgumentTypeError("need at least two comma-separated amplitudes")
    for p in parts:
        try:
            complex(p.replace("i", "j"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"cannot parse amplitude {p!r}")
    return tuple(parts)


def _point_arg(tok: str) -> tuple[float, ...]:
    parts = [p.strip() for p in tok.split(",")]
    if len(parts) < 2:
        raise argparse.ArgumentTypeError("need at least two comma-separated coordinates")
    try:
        values = tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError("coordinates must be real numbers")
    if any(not np.isfinite(v) or v < 0.0 for v in values):
        raise argparse.ArgumentTypeError("coordinates must be finite and non-negative")
    if abs(sum(values) - 1.0) > 1e-9:
        raise argparse.ArgumentTypeError("simplex coordinates must sum to 1")
    return values


def _amps_to_start(raw: tuple[str, ...]) -> SimplexPoint:
    values = [complex(p.replace("i", "j")) for p in raw]
    state = make_state(values)
    return walk_seed(bind_compound(state, form_image(state)))


def parse_args(argv) -> RunRequest:
    state_p = _Parser(add_help=False)
    group = state_p.add_mutually_exclusive_group(required=True)
    group.add_argument("--amps", type=_amps_arg, default=None,
                       help="comma-separated complex amplitudes, e.g. 0.6+0.8i,0.0")
    group.add_argument("--point", type=_point_arg, default=None,
                       help="comma-separated simplex coordinates summing to 1")

    phys_p = _Parser(add_help=False)
    phys_p.add_argument("--diffusion", type=_positive_float, default=1.0,
                        help="diffusion coefficient D (default 1.0)")

    run_p = _Parser(add_help=False)
    run_p.add_argument("--trials", type=_positive_int, default=10_000)
    run_p.add_argument("--seed", type=_u64, default=0)
    run_p.add_argument("--mode", choices=("discrete", "continuum"), default="continuum")
    run_p.add_argument("--chips", type=_positive_int, default=100,
                       help="chip count for discrete mode (default 100)")
    run_p.add_argument("--dt", type=_positive_float, default=1e-4)
    run_p.add_argument("--max-steps", type=_positive_int, default=10_000_000)
    run_p.add_argument("--threads", type=_positive_int, default=None,
                       help="worker processes (default: machine parallelism); results never depend on it")
    run_p.add_argument("--out", default=None, help="result path (written atomically)")
    run_p.add_argument("--trace", action="store_true",
                       help="also dump per-step trajectories next to --out")

    parser = _Parser(prog="bornwalk",
                     description="First-passage walks on the probability simplex.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name in ("simulate", "compare"):
        sp = sub.add_parser(name, parents=[state_p, phys_p, run_p])
        sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp = sub.add_parser("mfpt", parents=[state_p, phys_p, run_p])
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp = sub.add_parser("density", parents=[state_p, phys_p, run_p])
    sp.add_argument("--format", choices=("json", "csv"), default="csv")
    sp = sub.add_parser("analytic", parents=[state_p, phys_p])
    sp.add_argument("what", choices=ANALYTIC_KINDS)

    ns = parser.parse_args(argv)

    if ns.amps is not None:
        try:
            start = _amps_to_start(ns.amps)
        except ValueError as exc:
            raise UsageError(str(exc))
        point = None
    else:
        try:
            start = SimplexPoint.from_weights(np.asarray(ns.point, dtype=float))
        except ValueError as exc:
            raise UsageError(str(exc))
        point = ns.point

    command = ns.command
    if command == "analytic":
        if ns.what == "mfpt" and start.dimension != 2:
            raise UsageError("analytic mfpt has a closed form for two states only")
        return RunRequest(
            command=command, start=start, amps=ns.amps, point=point,
            mode="continuum", trials=0, seed=0, chips=0, dt=0.0,
            diffusion=ns.diffusion, max_steps=0, threads=None, out=None,
            fmt="json", trace=False, what=ns.what,
        )

    if ns.trace and ns.out is None:
        raise UsageError("--trace needs --out to name the trace file")
    if command == "mfpt" and start.dimension != 2:
        raise UsageError("mfpt gating needs the two-state closed form; use two coordinates")
    if command == "density":
        if start.dimension != 2 or ns.mode != "continuum":
            raise UsageError("density is defined for the two-state continuum walk")
        if ns.format != "csv":
            raise UsageError("density emits CSV only")

    return RunRequest(
        command=command, start=start, amps=ns.amps, point=point,
        mode=ns.mode, trials=ns.trials, seed=ns.seed, chips=ns.chips,
        dt=ns.dt, diffusion=ns.diffusion, max_steps=ns.max_steps,
        threads=ns.threads, out=ns.out, fmt=ns.format, trace=ns.trace,
    )


def _fnum(x) -> str:
    x = float(x)
    if not np.isfinite(x):
        raise ValueError("cannot serialize a non-finite number")
    return format(x, ".17g")


def _serialize(obj, indent: int = 0) -> str:
    """JSON with insertion-ordered keys, 17-significant-digit floats,
    multiline dicts, inline lists."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = ",\n".join(
            f'{pad}  {json.dumps(k)}: {_serialize(v, indent + 1)}'
            for k, v in obj.items()
        )
        return "{\n" + rows + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_serialize(v, indent) for v in obj) + "]"
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fnum(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _atomic_write(path: str, text: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), prefix=target.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, target)
    except OSError as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise OSError(f"cannot write {path}: {exc}") from exc


def _emit(request: RunRequest, text: str) -> None:
    if request.out is None:
        sys.stdout.write(text)
    else:
        _atomic_write(request.out, text)


def _summary_stream(request: RunRequest):
    return sys.stderr if request.out is None else sys.stdout


def _request_block(request: RunRequest) -> dict:
    # deliberately excludes threads and out: neither may influence the artifact
    return {
        "command": request.command,
        "mode": request.mode,
        "amps": list(request.amps) if request.amps is not None else None,
        "point": list(request.point) if request.point is not None else None,
        "trials": request.trials,
        "seed": request.seed,
        "chips": request.chips,
        "dt": request.dt,
        "diffusion": request.diffusion,
        "max_steps": request.max_steps,
    }


def _analytic_mean_time(request: RunRequest) -> float | None:
    """Closed-form mean passage time in the walk's own time unit, or None."""
    if request.start.dimension != 2:
        return None
    x0 = float(request.start.coords[0])
    if request.mode == "continuum":
        return mfpt_2state(x0, request.diffusion)
    c0 = round(x0 * request.chips)
    return float(c0 * (request.chips - c0))


def _walk_config(request: RunRequest) -> WalkConfig:
    return WalkConfig(
        dimension=request.start.dimension,
        seed=request.seed,
        diffusion=request.diffusion,
        dt=request.dt,
        chips=request.chips,
        max_steps=request.max_steps,
    )


def _trace_path(out: str) -> Path:
    p = Path(out)
    return p.with_name(p.stem + ".trace.csv")


def _run_with_trace(request: RunRequest, config: WalkConfig) -> EnsembleStats:
    """Serial ensemble that also streams trajectories to the trace CSV.

    Per-trial seeding makes this produce the same EnsembleStats the worker
    pool would, so tracing never changes the result artifact.
    """
    start = request.start
    step = run_continuum_walk if request.mode == "continuum" else run_discrete_game
    horizon = default_time_range(start, config, request.mode)
    stats = EnsembleStats.empty(start.dimension, horizon / 200, 200)
    target = _trace_path(request.out)
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), prefix=target.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write("trial,step," + ",".join(f"x_{i}" for i in range(start.dimension)) + "\n")
            for index in range(request.trials):
                outcome = step(start, config, index, record=True)
                accumulate(stats, outcome)
                rows = outcome.trajectory
                for step_idx in range(rows.shape[0]):
                    coords = ",".join(_fnum(v) for v in rows[step_idx])
                    handle.write(f"{index},{step_idx},{coords}\n")
        os.replace(tmp, target)
    except OSError:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    return stats


def _born_table(born, stats: EnsembleStats) -> list[str]:
    lines = ["vertex  expected    observed    z"]
    for i in range(born.expected.size):
        lines.append(
            f"{i:<7d} {born.expected[i]:<11.6f} {born.observed[i]:<11.6f} {born.z_scores[i]:+.3f}"
        )
    lines.append(
        f"chi_square {born.chi_square:.4f} (threshold {born.chi_square_threshold:.4f}, dof {born.dof})"
    )
    lines.append(
        f"trials {stats.trials}, completed {stats.completed}, incomplete {stats.incomplete_count}"
    )
    return lines


def _run_ensemble(request: RunRequest) -> int:
    config = _walk_config(request)
    began = time.perf_counter()
    if request.trace:
        stats = _run_with_trace(request, config)
    else:
        stats, _ = run_trials(
            request.start, config, request.trials,
            mode=request.mode, threads=request.threads,
        )
    wall = time.perf_counter() - began

    if request.command == "density":
        return _emit_density(request, stats, wall)

    born = compare_born(stats, request.start.coords)
    analytic_time = _analytic_mean_time(request)
    if stats.completed >= 2:
        observed_mean, stderr_val = passage_moments(stats)
    else:
        observed_mean = stats.time_sum / stats.completed if stats.completed else 0.0
        stderr_val = 0.0
    mfpt_cmp = None
    if analytic_time is not None and stats.completed >= 2:
        slack = request.dt if request.mode == "continuum" else 0.0
        mfpt_cmp = compare_mfpt(stats, analytic_time, dt=slack)

    if request.fmt == "json":
        payload = {
            "request": _request_block(request),
            "expected": [float(v) for v in born.expected],
            "observed": [float(v) for v in born.observed],
            "z_scores": [float(v) for v in born.z_scores],
            "chi_square": born.chi_square,
            "mfpt": {
                "analytic": analytic_time,
                "observed": observed_mean,
                "stderr": stderr_val,
            },
            "incomplete": stats.incomplete_count,
            "trials": stats.trials,
            "seed": request.seed,
            "elapsed_wall_s": 0.0,
        }
        artifact = _serialize(payload) + "\n"
    else:
        rows = ["vertex,expected,observed,z_score"]
        for i in range(born.expected.size):
            rows.append(
                f"{i},{_fnum(born.expected[i])},{_fnum(born.observed[i])},{_fnum(born.z_scores[i])}"
            )
        artifact = "\n".join(rows) + "\n"
    _emit(request, artifact)

    if request.command == "mfpt":
        if mfpt_cmp is None:
            raise ValueError("mean passage gate needs at least two completed trials")
        gate_passed = mfpt_cmp.passed
        gate_name = "mean passage gate"
    else:
        gate_passed = born.passed
        gate_name = "born gate"

    stream = _summary_stream(request)
    for line in _born_table(born, stats):
        print(line, file=stream)
    if analytic_time is not None and mfpt_cmp is not None:
        print(
            f"mean time observed {mfpt_cmp.observed:.6g} analytic {mfpt_cmp.analytic:.6g} "
            f"(stderr {mfpt_cmp.stderr:.3g}, allowance {mfpt_cmp.allowance:.3g})",
            file=stream,
        )
    else:
        print(f"mean time observed {observed_mean:.6g} (no closed form)", file=stream)
    print(f"wall {wall:.2f} s", file=stream)
    print(("PASS" if gate_passed else "FAIL") + f" ({gate_name})", file=stream)
    return 0 if gate_passed else 2


def _emit_density(request: RunRequest, stats: EnsembleStats, wall: float) -> int:
    completed = stats.completed
    if completed == 0:
        raise ValueError("no completed trials; cannot form a density")
    x0 = float(request.start.coords[0])
    width = stats.bin_width
    centers = (np.arange(stats.bins) + 0.5) * width
    analytic = fpt_density_2state(x0, request.diffusion, centers)
    empirical = stats.time_histogram[: stats.bins] / (completed * width)
    rows = ["t,analytic_density,empirical_density"]
    for i in range(stats.bins):
        rows.append(f"{_fnum(centers[i])},{_fnum(analytic[i])},{_fnum(empirical[i])}")
    _emit(request, "\n".join(rows) + "\n")
    stream = _summary_stream(request)
    overflow = int(stats.time_histogram[stats.bins])
    print(
        f"density over [0, {_fnum(stats.bins * width)}], {stats.bins} bins, "
        f"completed {completed}, overflow {overflow}",
        file=stream,
    )
    print(f"wall {wall:.2f} s", file=stream)
    return 0


def _run_analytic(request: RunRequest) -> int:
    start = request.start
    D = request.diffusion
    if request.what == "fpp":
        probs = fpp_nstate(start.coords)
        print(",".join(_fnum(p) for p in probs))
        return 0
    if request.what == "mfpt":
        print(_fnum(mfpt_2state(float(start.coords[0]), D)))
        return 0
    # green: tabulate the 2-state kernel, or report the simplex normalization
    if start.dimension == 2:
        params = DiffusionParams(diffusion=D, x0=float(start.coords[0]), s=GREEN_TABLE_S)
        grid = np.linspace(0.0, 1.0, GREEN_TABLE_POINTS)
        values = green_2state(grid, params)
        print("x,green")
        for x, g in zip(grid, values):
            print(f"{_fnum(x)},{_fnum(g)}")
    else:
        params = NGreenParams.from_diffusion(start.coords, GREEN_TABLE_S, D)
        print(f"k={_fnum(params.k)} A={_fnum(params.A)}")
    return 0


def run(request: RunRequest) -> int:
    if request.command == "analytic":
        return _run_analytic(request)
    return _run_ensemble(request)


def main(argv=None) -> int:
    try:
        request = parse_args(sys.argv[1:] if argv is None else argv)
        return run(request)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
