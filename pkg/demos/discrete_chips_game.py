"""The discrete ancestor of the walk: a fair chips game.

Two players hold k and K-k chips; each turn a fair coin moves one chip.
The probability of ending with the whole stack is k/K -- the gambler's ruin
result, and the Born rule in miniature once x = k/K is read as a simplex
coordinate. The linear-system solve, the simulation, and the closed form
all meet here, including the expected game length k(K-k), which rescales to
the continuum mean passage time under dt = 1/(2 D K^2).

Run:  python demos/discrete_chips_game.py
"""

import numpy as np

import bornwalk as bw
from bornwalk.stats import passage_moments

CHIPS = 10
TRIALS = 30_000
SEED = 3


def ruin_solve(total):
    # u_k = (u_{k-1} + u_{k+1})/2 with u_0 = 0, u_K = 1
    interior = total - 1
    A = np.eye(interior)
    b = np.zeros(interior)
    for row in range(interior):
        if row > 0:
            A[row, row - 1] = -0.5
        if row < interior - 1:
            A[row, row + 1] = -0.5
        else:
            b[row] = 0.5
    u = np.zeros(total + 1)
    u[1:total] = np.linalg.solve(A, b)
    u[total] = 1.0
    return u


def main():
    solve = ruin_solve(CHIPS)
    print(f"K = {CHIPS} chain, absorption probabilities from the solve:")
    print("  k      solve        k/K         |diff|")
    for k in range(1, CHIPS):
        print(f"  {k:<6d} {solve[k]:<12.10f} {k / CHIPS:<11.10f} "
              f"{abs(solve[k] - k / CHIPS):.2e}")

    start = bw.SimplexPoint.from_weights(np.array([0.3, 0.7]))
    config = bw.WalkConfig(dimension=2, seed=SEED, chips=CHIPS)
    stats, _ = bw.run_trials(start, config, TRIALS, mode="discrete")
    freq = stats.vertex_counts[0] / stats.completed
    sigma = np.sqrt(0.3 * 0.7 / TRIALS)
    print(f"\n{TRIALS} games from k=3: won {freq:.4f} of them "
          f"(expected 0.3000, sigma {sigma:.4f})")

    mean_turns, se = passage_moments(stats)
    print(f"mean game length {mean_turns:.2f} turns vs k(K-k) = 21 "
          f"(stderr {se:.2f})")

    D = 1.0
    dt = 1.0 / (2.0 * D * CHIPS**2)
    print(f"\nrescaled by dt = 1/(2 D K^2) = {dt}:")
    print(f"  discrete  {21 * dt:.6f}")
    print(f"  continuum {bw.mfpt_2state(0.3, D):.6f}  (x0(1-x0)/(2D), identical)")


if __name__ == "__main__":
    main()
