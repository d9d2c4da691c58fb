"""Deterministic ensemble driver.

Trials are seeded by index, split into fixed-size chunks, and the chunk
tallies are merged in chunk order. Chunk size never depends on the worker
count, and the merge is exact, so the final accumulator is bit-identical
whether the chunks ran inline or across any number of processes.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .analytic import mfpt_2state
from .stats import EnsembleStats, accumulate, merge
from .walk import SimplexPoint, WalkConfig, run_continuum_walk, run_discrete_game

__all__ = ["CHUNK_TRIALS", "run_trials", "default_time_range"]

# trials per work unit; fixed so results cannot depend on scheduling
CHUNK_TRIALS = 2048

MODES = ("discrete", "continuum")


def default_time_range(start: SimplexPoint, config: WalkConfig, mode: str) -> float:
    """Histogram horizon: ten times a mean-duration estimate.

    Continuum durations scale like sum_i x_i (1 - x_i) / (2 D) (for two
    states this is twice the exact mean; the factor keeps the tail slot
    honest). Discrete durations are counted in turns and scale like
    sum_i c_i (K - c_i) / 2, which is exact for two players.
    """
    x = start.coords
    if mode == "continuum":
        if start.dimension == 2:
            scale = mfpt_2state(float(x[0]), config.diffusion)
        else:
            scale = float(np.sum(x * (1.0 - x))) / (2.0 * config.diffusion)
    else:
        c = np.rint(x * config.chips)
        scale = float(np.sum(c * (config.chips - c))) / 2.0
    horizon = 10.0 * scale
    if horizon <= 0.0:
        horizon = 1.0
    return horizon


def _run_chunk(task):
    (start, config, mode, lo, hi, bins, bin_width, collect_times) = task
    stats = EnsembleStats.empty(start.dimension, bin_width, bins)
    step = run_continuum_walk if mode == "continuum" else run_discrete_game
    times = [] if collect_times else None
    for index in range(lo, hi):
        outcome = step(start, config, index)
        accumulate(stats, outcome)
        if collect_times and outcome.complete:
            times.append(outcome.elapsed)
    if collect_times:
        return stats, np.asarray(times, dtype=float)
    return stats, None


def run_trials(
    start: SimplexPoint,
    config: WalkConfig,
    trials: int,
    mode: str = "continuum",
    threads: int | None = None,
    bins: int = 200,
    time_range: float | None = None,
    collect_times: bool = False,
):
    """Run an ensemble of independently seeded trials.

    Parameters
    ----------
    start, config : walk inputs shared by every trial.
    trials : number of trials; trial i uses the seed derived from
        (config.seed, i) regardless of scheduling.
    mode : "discrete" or "continuum".
    threads : worker processes; None means os.cpu_count(), 1 runs inline.
        Affects wall time only, never results.
    bins, time_range : histogram layout; time_range defaults to
        :func:`default_time_range`.
    collect_times : additionally return completed-trial durations in trial
        order (memory grows with trials).

    Returns
    -------
    (EnsembleStats, ndarray or None)
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if start.dimension != config.dimension:
        raise ValueError("start and config dimensions differ")
    if threads is None:
        threads = os.cpu_count() or 1
    if threads < 1:
        raise ValueError("threads must be at least 1")
    if time_range is None:
        time_range = default_time_range(start, config, mode)
    if not time_range > 0.0:
        raise ValueError("time_range must be positive")
    bin_width = time_range / bins

    tasks = [
        (start, config, mode, lo, min(lo + CHUNK_TRIALS, trials), bins, bin_width, collect_times)
        for lo in range(0, trials, CHUNK_TRIALS)
    ]
    if threads == 1 or len(tasks) == 1:
        results = map(_run_chunk, tasks)
        parts = list(results)
    else:
        with ProcessPoolExecutor(max_workers=min(threads, len(tasks))) as pool:
            parts = list(pool.map(_run_chunk, tasks))

    stats = parts[0][0]
    for chunk_stats, _ in parts[1:]:
        stats = merge(stats, chunk_stats)
    if collect_times:
        chunks = [t for _, t in parts]
        times = np.concatenate(chunks) if chunks else np.empty(0)
        return stats, times
    return stats, None
