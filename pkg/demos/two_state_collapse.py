"""A qubit-like measurement, end to end.

Takes the amplitudes (0.6, 0.8i), binds system and detector into the
compound state, and lets the simplex coordinate diffuse until one outcome
absorbs. The punchline: the fraction of walks ending at each vertex matches
|a_i|^2 with no tuning anywhere, because absorption probability of an
unbiased walk is its starting coordinate.

Run:  python demos/two_state_collapse.py
Writes two_state_collapse.png next to this script if matplotlib is around.
"""

from pathlib import Path

import numpy as np

import bornwalk as bw

TRIALS = 20_000
SEED = 7


def main():
    state = bw.make_state([0.6, 0.8j])
    print(f"amplitudes      : {state.amplitudes}")
    print(f"Born weights    : {state.weights}")

    compound = bw.bind_compound(state, bw.form_image(state))
    start = bw.walk_seed(compound)
    print(f"walk start      : {start.coords}\n")

    config = bw.WalkConfig(dimension=2, seed=SEED, diffusion=1.0, dt=1e-4)
    stats, _ = bw.run_trials(start, config, TRIALS)
    verdict = bw.compare_born(stats, state.weights)

    print(f"{TRIALS} walks, dt={config.dt}, sigma per step={config.step_sigma:.5f}")
    for i in range(2):
        print(
            f"  vertex {i}: expected {verdict.expected[i]:.4f}"
            f"  observed {verdict.observed[i]:.4f}  z={verdict.z_scores[i]:+.2f}"
        )
    print(f"  chi-square {verdict.chi_square:.3f} "
          f"(gate {verdict.chi_square_threshold:.2f}) -> "
          f"{'PASS' if verdict.passed else 'FAIL'}\n")

    mean = bw.compare_mfpt(stats, bw.mfpt_2state(float(start.coords[0]), 1.0), dt=config.dt)
    print(f"mean collapse time: observed {mean.observed:.5f} "
          f"vs x0(1-x0)/(2D) = {mean.analytic:.5f}")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed; skipping the trajectory plot")
        return

    fig, ax = plt.subplots(figsize=(8, 4))
    for trial in range(6):
        walk = bw.run_continuum_walk(start, config, trial, record=True)
        t = np.arange(walk.steps + 1) * config.dt
        ax.plot(t, walk.trajectory[:, 0], lw=0.8,
                label=f"trial {trial} -> vertex {walk.winner}")
    ax.axhline(0.36, color="k", ls=":", lw=0.8)
    ax.set_xlabel("pseudo-time")
    ax.set_ylabel("coordinate of outcome 0")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=7)
    ax.set_title("six collapses of |a_0|^2 = 0.36")
    target = Path(__file__).with_suffix(".png")
    fig.tight_layout()
    fig.savefig(target, dpi=120)
    print(f"wrote {target}")


if __name__ == "__main__":
    main()
