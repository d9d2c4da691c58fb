"""First-passage walks on the probability simplex.

Two engines realize the same winner-takes-all race between basis outcomes:

* a discrete chips game: active players bet one chip at even odds against a
  uniformly chosen opponent each turn, and a player reaching zero chips is
  eliminated;
* a continuum Brownian walk: isotropic Gaussian steps confined to the
  zero-sum tangent subspace, with coordinate walls at zero absorbing.

Both keep every coordinate a martingale, which is what forces the absorption
probabilities to equal the starting weights.

Wall hits in the continuum engine are detected with a per-step Brownian
bridge test: given a coordinate's values x and x' before and after a step,
the underlying continuous path touched zero in between with probability
exp(-2 x x' / sigma^2), sigma^2 = 2 D dt. Sampling that test catches the
within-step crossings that endpoint inspection misses (endpoint sign
clamping alone carries an O(sigma) overshoot bias). When a coordinate is
eliminated its remaining mass is redistributed over the survivors in
proportion to their values, and the absorption is recorded at the end of
the step it occurred in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt

import numpy as np

__all__ = [
    "SimplexPoint",
    "WalkConfig",
    "WalkOutcome",
    "NotChipRepresentableError",
    "InvalidStartError",
    "derive_trial_seed",
    "run_discrete_game",
    "run_continuum_walk",
]

SUM_TOL = 1e-9
CHIP_TOL = 1e-9

# SplitMix64 constants
_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB

# trials consume randomness in fixed-size blocks so the draw pattern is a
# pure function of the trial's own history, never of scheduling
_BLOCK = 512


class NotChipRepresentableError(ValueError):
    """Start coordinates do not map to whole chips."""


class InvalidStartError(ValueError):
    """Continuum start point is not usable."""


@dataclass(frozen=True)
class SimplexPoint:
    """A position on the probability simplex with an elimination mask.

    coords are the weights x_i >= 0 summing to 1 (within 1e-9); active_mask
    marks the coordinates still in play. Eliminated coordinates are exactly
    zero, and elimination is monotone: the walk never reactivates one.
    """

    coords: np.ndarray
    active_mask: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float).copy()
        mask = np.asarray(self.active_mask, dtype=bool).copy()
        if coords.ndim != 1 or coords.size < 1:
            raise ValueError("coords must be a one-dimensional vector")
        if mask.shape != coords.shape:
            raise ValueError("active_mask must match coords in shape")
        if np.any(coords < 0.0):
            raise ValueError("simplex coordinates must be non-negative")
        total = float(coords.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(
                f"simplex coordinates must sum to 1 within {SUM_TOL:g}; got {total!r}"
            )
        if np.any(coords[~mask] != 0.0):
            raise ValueError("eliminated coordinates must be exactly zero")
        if np.any(coords[mask] == 0.0):
            raise ValueError("active coordinates must be strictly positive")
        coords.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "active_mask", mask)

    @classmethod
    def from_weights(cls, weights) -> "SimplexPoint":
        """Build a point from weights; zero weights start out eliminated."""
        coords = np.asarray(weights, dtype=float)
        return cls(coords=coords, active_mask=coords != 0.0)

    @property
    def dimension(self) -> int:
        return self.coords.size


@dataclass(frozen=True)
class WalkConfig:
    """Immutable parameters shared by every trial of an ensemble.

    The guard sigma = sqrt(2 D dt) < 0.1 keeps the continuum step small
    against the unit simplex scale; it is checked at construction.
    """

    dimension: int
    seed: int
    diffusion: float = 1.0
    dt: float = 1e-4
    chips: int = 100
    stake: float | None = None
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not isinstance(self.dimension, int) or self.dimension < 2:
            raise ValueError("dimension must be an integer >= 2")
        if not isinstance(self.seed, int) or not 0 <= self.seed < (1 << 64):
            raise ValueError("seed must be an unsigned 64-bit integer")
        if not self.diffusion > 0.0:
            raise ValueError("diffusion must be positive")
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        sigma = sqrt(2.0 * self.diffusion * self.dt)
        if not sigma < 0.1:
            raise ValueError(
                f"per-step displacement sqrt(2 D dt) = {sigma:g} must be < 0.1"
            )
        if not isinstance(self.chips, int) or self.chips < 2:
            raise ValueError("chips must be an integer >= 2")
        if self.stake is None:
            object.__setattr__(self, "stake", 1.0 / self.chips)
        elif abs(self.stake * self.chips - 1.0) > CHIP_TOL:
            raise ValueError("stake must equal 1/chips when chips are used")
        if not isinstance(self.max_steps, int) or self.max_steps < 1:
            raise ValueError("max_steps must be an integer >= 1")

    @property
    def step_sigma(self) -> float:
        """Per-coordinate marginal standard deviation of one continuum step."""
        return sqrt(2.0 * self.diffusion * self.dt)


@dataclass(frozen=True)
class WalkOutcome:
    """Result of a single trial.

    winner is None when the step cap was hit before absorption (an
    incomplete trial); elapsed is steps*dt in continuum mode and the raw
    turn count in discrete mode. elimination_order lists eliminated
    coordinate indices oldest first and has length dimension-1 on completed
    walks; coordinates that start with zero weight appear first, in
    ascending index order.
    """

    dimension: int
    winner: int | None
    steps: int
    elapsed: float
    elimination_order: tuple[int, ...]
    trajectory: np.ndarray | None = field(default=None, compare=False)

    @property
    def complete(self) -> bool:
        return self.winner is not None


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    """Derive a per-trial RNG seed from the master seed and trial index.

    SplitMix64-style: the trial seed is the (trial_index+1)-th output of the
    SplitMix64 stream started at master_seed. Distinct indices give distinct
    seeds (the increment is odd, so the pre-mix values never collide and the
    finalizer is a bijection), and the result depends on nothing but the two
    arguments, so any scheduling of trials reproduces identical streams.
    """
    if not 0 <= master_seed < (1 << 64):
        raise ValueError("master_seed must be an unsigned 64-bit integer")
    if trial_index < 0:
        raise ValueError("trial_index must be non-negative")
    z = (master_seed + (trial_index + 1) * _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX_A) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & _MASK64
    return z ^ (z >> 31)


def _trial_rng(config: WalkConfig, trial_index: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(derive_trial_seed(config.seed, trial_index))
    )


def _check_start(start: SimplexPoint, config: WalkConfig) -> None:
    if start.dimension != config.dimension:
        raise InvalidStartError(
            f"start dimension {start.dimension} != config dimension {config.dimension}"
        )
    if np.any(start.coords[start.active_mask] < 0.0):
        raise InvalidStartError("active coordinates must be non-negative")


def _vertex_outcome(start: SimplexPoint, trajectory: bool) -> WalkOutcome:
    winner = int(np.flatnonzero(start.active_mask)[0])
    eliminated = tuple(int(i) for i in np.flatnonzero(~start.active_mask))
    traj = start.coords[None, :].copy() if trajectory else None
    return WalkOutcome(
        dimension=start.dimension,
        winner=winner,
        steps=0,
        elapsed=0.0,
        elimination_order=eliminated,
        trajectory=traj,
    )


def run_discrete_game(
    start: SimplexPoint,
    config: WalkConfig,
    trial_index: int,
    record: bool = False,
) -> WalkOutcome:
    """Play one winner-takes-all chips game.

    Start coordinates are converted to whole chips (x_i * chips must be
    within 1e-9 of an integer). Each turn an unordered pair of active
    players is chosen uniformly, one chip moves between them at even odds,
    and a player reaching zero chips is eliminated. The game ends when one
    player holds every chip.

    Parameters
    ----------
    start : SimplexPoint
    config : WalkConfig
        chips, seed and max_steps are used here.
    trial_index : int
        Selects the deterministic per-trial random stream.
    record : bool
        When true, the outcome carries the full trajectory (chip fractions
        after every turn, row 0 being the start).

    Returns
    -------
    WalkOutcome
        elapsed equals the turn count; incomplete games (step cap hit) have
        winner None.
    """
    _check_start(start, config)
    K = config.chips
    scaled = start.coords * K
    chips = np.rint(scaled).astype(np.int64)
    if np.max(np.abs(scaled - chips)) > CHIP_TOL * K:
        raise NotChipRepresentableError(
            f"coordinates are not multiples of 1/{K} within tolerance"
        )
    if int(chips.sum()) != K:
        raise NotChipRepresentableError(
            f"rounded chips sum to {int(chips.sum())}, expected {K}"
        )
    if np.any(chips[~start.active_mask] != 0):
        raise NotChipRepresentableError("eliminated coordinates must hold no chips")

    eliminated = [int(i) for i in np.flatnonzero(~start.active_mask)]
    active = [int(i) for i in np.flatnonzero(start.active_mask)]
    if len(active) == 1:
        return _vertex_outcome(start, record)

    rng = _trial_rng(config, trial_index)
    hand = chips[active].copy()
    steps = 0
    winner: int | None = None
    rows: list[np.ndarray] = []
    if record:
        rows.append(start.coords.copy())

    while True:
        m = len(active)
        if m == 1:
            winner = active[0]
            break
        if steps >= config.max_steps:
            break
        pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
        pair_i = np.array([p[0] for p in pairs])
        pair_j = np.array([p[1] for p in pairs])
        n_rows = min(_BLOCK, config.max_steps - steps)
        which = rng.integers(0, len(pairs), size=n_rows)
        sign = 2 * rng.integers(0, 2, size=n_rows) - 1
        delta = np.zeros((n_rows, m), dtype=np.int64)
        rr = np.arange(n_rows)
        delta[rr, pair_i[which]] = sign
        delta[rr, pair_j[which]] = -sign
        path = hand + np.cumsum(delta, axis=0)
        broke = path == 0
        hit = broke.any(axis=1)
        if hit.any():
            r = int(np.argmax(hit))
            steps += r + 1
            hand = path[r].copy()
            if record:
                rows.extend(_expand_rows(path[: r + 1] / K, active, start.dimension))
            loser = int(np.argmax(broke[r]))
            eliminated.append(active[loser])
            del active[loser]
            hand = np.delete(hand, loser)
        else:
            steps += n_rows
            hand = path[-1].copy()
            if record:
                rows.extend(_expand_rows(path / K, active, start.dimension))

    trajectory = np.vstack(rows) if record else None
    return WalkOutcome(
        dimension=start.dimension,
        winner=winner,
        steps=steps,
        elapsed=float(steps),
        elimination_order=tuple(eliminated),
        trajectory=trajectory,
    )


def _expand_rows(sub: np.ndarray, active: list[int], n: int) -> list[np.ndarray]:
    out = np.zeros((sub.shape[0], n))
    out[:, active] = sub
    return list(out)


def run_continuum_walk(
    start: SimplexPoint,
    config: WalkConfig,
    trial_index: int,
    record: bool = False,
) -> WalkOutcome:
    """Run one continuum Brownian trial to absorption.

    Steps are isotropic Gaussian increments over the active coordinates,
    projected onto the zero-sum tangent subspace and scaled so each active
    coordinate keeps marginal standard deviation sqrt(2 D dt) per step (the
    projection alone would shrink it by sqrt((m-1)/m)). The coordinate sum
    is thereby conserved.

    A coordinate is eliminated when its Brownian bridge test fires (see the
    module docstring); the test also covers endpoints at or below zero.
    Eliminated mass is redistributed proportionally over the survivors.
    The walk ends when a single active coordinate remains, at value 1.

    Returns
    -------
    WalkOutcome
        elapsed is steps*dt; winner None (incomplete) when max_steps is hit.
    """
    _check_start(start, config)
    eliminated = [int(i) for i in np.flatnonzero(~start.active_mask)]
    active = [int(i) for i in np.flatnonzero(start.active_mask)]
    if len(active) == 1:
        return _vertex_outcome(start, record)

    rng = _trial_rng(config, trial_index)
    sigma2 = 2.0 * config.diffusion * config.dt
    x = start.coords[active].copy()
    steps = 0
    winner: int | None = None
    rows: list[np.ndarray] = []
    if record:
        rows.append(start.coords.copy())

    while True:
        m = len(active)
        if m == 1:
            winner = active[0]
            break
        if steps >= config.max_steps:
            break
        n_rows = min(_BLOCK, config.max_steps - steps)
        g = rng.standard_normal((n_rows, m))
        u = rng.random((n_rows, m))
        scale = sqrt(sigma2 * m / (m - 1.0))
        inc = scale * (g - g.mean(axis=1, keepdims=True))
        path = x + np.cumsum(inc, axis=0)
        prev = np.vstack((x[None, :], path[:-1]))
        # exponent goes large positive when path < 0: exp overflows to inf,
        # which still compares as a sure hit
        with np.errstate(over="ignore"):
            p_hit = np.exp(-2.0 * np.maximum(prev, 0.0) * path / sigma2)
        flags = u < p_hit
        hit = flags.any(axis=1)
        if not hit.any():
            steps += n_rows
            x = path[-1].copy()
            if record:
                rows.extend(_expand_rows(path, active, start.dimension))
            continue

        r = int(np.argmax(hit))
        steps += r + 1
        if record and r > 0:
            rows.extend(_expand_rows(path[:r], active, start.dimension))
        end = path[r].copy()
        dead = flags[r].copy()
        if dead.all():
            # keep the largest coordinate: something must win the step
            keep = int(np.argmax(end))
            dead[keep] = False
        survivors = ~dead
        eliminated.extend(sorted(active[i] for i in np.flatnonzero(dead)))
        active = [active[i] for i in np.flatnonzero(survivors)]
        if len(active) == 1:
            x = np.array([1.0])
        else:
            kept = end[survivors]
            x = kept / kept.sum()
        if record:
            rows.extend(_expand_rows(x[None, :], active, start.dimension))

    trajectory = np.vstack(rows) if record else None
    return WalkOutcome(
        dimension=start.dimension,
        winner=winner,
        steps=steps,
        elapsed=steps * config.dt,
        elimination_order=tuple(eliminated),
        trajectory=trajectory,
    )
