import numpy as np
import pytest

from bornwalk import (
    InvalidStartError,
    NotChipRepresentableError,
    SimplexPoint,
    WalkConfig,
    derive_trial_seed,
    run_continuum_walk,
    run_discrete_game,
)
from oracles import (
    ruin_absorption_probs,
    ruin_expected_turns,
    splitmix_stream,
    three_player_absorption,
)


def point(*coords):
    return SimplexPoint.from_weights(np.array(coords, dtype=float))


def win_fraction(outcomes, vertex):
    return np.mean([o.winner == vertex for o in outcomes])


class TestSeedDerivation:
    def test_published_mix_of_seed_zero(self):
        # SplitMix64's first output for seed 0 is 0xe220a8397b1dcdaf
        assert derive_trial_seed(0, 0) == 16294208416658607535

    def test_matches_vectorized_reference(self):
        for master in (0, 1, 42, 2**64 - 1, 0xDEADBEEF):
            stream = splitmix_stream(master, 256)
            for index in (0, 1, 7, 100, 255):
                assert derive_trial_seed(master, index) == int(stream[index])

    def test_million_indices_no_collisions(self):
        stream = splitmix_stream(42, 1_000_000)
        assert np.unique(stream).size == stream.size

    def test_neighbouring_masters_do_not_share_streams(self):
        a = splitmix_stream(7, 4096)
        b = splitmix_stream(8, 4096)
        assert np.intersect1d(a, b).size == 0

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            derive_trial_seed(-1, 0)
        with pytest.raises(ValueError):
            derive_trial_seed(2**64, 0)
        with pytest.raises(ValueError):
            derive_trial_seed(0, -1)


class TestSimplexPoint:
    def test_from_weights_marks_zero_coordinates_inactive(self):
        p = point(0.5, 0.0, 0.5)
        assert p.active_mask.tolist() == [True, False, True]

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            point(-0.1, 1.1)

    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            point(0.3, 0.6)

    def test_rejects_active_zero(self):
        with pytest.raises(ValueError):
            SimplexPoint(
                coords=np.array([0.0, 1.0]),
                active_mask=np.array([True, True]),
            )


class TestWalkConfig:
    def test_step_sigma(self):
        cfg = WalkConfig(dimension=2, seed=0, diffusion=1.0, dt=1e-4)
        assert cfg.step_sigma == pytest.approx(np.sqrt(2e-4))

    def test_rejects_step_sigma_too_coarse(self):
        # sqrt(2 * 1 * 0.01) = 0.1414 > 0.1: bridge correction breaks down
        with pytest.raises(ValueError):
            WalkConfig(dimension=2, seed=0, dt=0.01)

    def test_stake_defaults_to_one_over_chips(self):
        cfg = WalkConfig(dimension=2, seed=0, chips=250)
        assert cfg.stake == pytest.approx(1.0 / 250)

    def test_inconsistent_stake_rejected(self):
        with pytest.raises(ValueError):
            WalkConfig(dimension=2, seed=0, chips=100, stake=0.5)


class TestDiscreteGame:
    def test_vertex_start_ends_immediately(self):
        cfg = WalkConfig(dimension=3, seed=1, chips=10)
        out = run_discrete_game(point(0.0, 1.0, 0.0), cfg, 0)
        assert out.complete and out.winner == 1
        assert out.steps == 0
        assert out.elimination_order == (0, 2)

    def test_unrepresentable_point_rejected(self):
        cfg = WalkConfig(dimension=2, seed=1, chips=10)
        with pytest.raises(NotChipRepresentableError):
            run_discrete_game(point(0.333, 0.667), cfg, 0)

    def test_dimension_mismatch_rejected(self):
        cfg = WalkConfig(dimension=2, seed=1, chips=10)
        with pytest.raises(InvalidStartError):
            run_discrete_game(point(0.5, 0.3, 0.2), cfg, 0)

    def test_two_chip_game_is_a_fair_coin(self):
        cfg = WalkConfig(dimension=2, seed=5, chips=2)
        outcomes = [run_discrete_game(point(0.5, 0.5), cfg, i) for i in range(2000)]
        assert all(o.steps == 1 for o in outcomes)
        freq = win_fraction(outcomes, 0)
        assert abs(freq - 0.5) < 3.0 * np.sqrt(0.25 / 2000)

    def test_ruin_solve_equals_k_over_total(self):
        u = ruin_absorption_probs(10)
        assert np.max(np.abs(u - np.arange(11) / 10.0)) < 1e-12

    def test_simulated_game_matches_ruin_solve(self):
        trials = 20_000
        cfg = WalkConfig(dimension=2, seed=11, chips=10)
        outcomes = [run_discrete_game(point(0.3, 0.7), cfg, i) for i in range(trials)]
        expected = float(ruin_absorption_probs(10)[3])
        freq = win_fraction(outcomes, 0)
        sigma = np.sqrt(expected * (1.0 - expected) / trials)
        assert abs(freq - expected) < 3.0 * sigma

    def test_mean_turns_match_ruin_solve(self):
        trials = 20_000
        cfg = WalkConfig(dimension=2, seed=13, chips=10)
        steps = np.array(
            [run_discrete_game(point(0.5, 0.5), cfg, i).steps for i in range(trials)]
        )
        expected = float(ruin_expected_turns(10)[5])
        stderr = steps.std(ddof=1) / np.sqrt(trials)
        assert abs(steps.mean() - expected) < 3.0 * stderr

    def test_three_player_enumeration_is_exact_martingale(self):
        probs = three_player_absorption((3, 3, 3))
        assert np.max(np.abs(probs - 1.0 / 3.0)) < 1e-12
        probs = three_player_absorption((5, 3, 1))
        assert np.max(np.abs(probs - np.array([5, 3, 1]) / 9.0)) < 1e-12

    def test_three_player_game_matches_enumeration(self):
        trials = 9_000
        cfg = WalkConfig(dimension=3, seed=17, chips=9)
        start = point(3 / 9, 3 / 9, 3 / 9)
        outcomes = [run_discrete_game(start, cfg, i) for i in range(trials)]
        for vertex in range(3):
            freq = win_fraction(outcomes, vertex)
            sigma = np.sqrt((1 / 3) * (2 / 3) / trials)
            assert abs(freq - 1 / 3) < 3.0 * sigma

    def test_deterministic_per_trial(self):
        cfg = WalkConfig(dimension=3, seed=23, chips=12)
        start = point(4 / 12, 5 / 12, 3 / 12)
        a = run_discrete_game(start, cfg, 9, record=True)
        b = run_discrete_game(start, cfg, 9, record=True)
        assert a.winner == b.winner and a.steps == b.steps
        assert a.elimination_order == b.elimination_order
        assert np.array_equal(a.trajectory, b.trajectory)

    def test_trajectory_conserves_chips_and_eliminations(self):
        cfg = WalkConfig(dimension=3, seed=29, chips=12)
        start = point(4 / 12, 5 / 12, 3 / 12)
        for trial in range(25):
            out = run_discrete_game(start, cfg, trial, record=True)
            rows = out.trajectory
            assert rows.shape == (out.steps + 1, 3)
            sums = rows.sum(axis=1)
            assert np.max(np.abs(sums - 1.0)) < 1e-12
            chips = rows * 12
            assert np.max(np.abs(chips - np.rint(chips))) < 1e-9
            active = rows > 0.0
            alive = active.sum(axis=1)
            assert np.all(np.diff(alive) <= 0)
            assert alive[-1] == 1
            # an eliminated player never comes back
            for col in range(3):
                gone = np.where(~active[:, col])[0]
                if gone.size:
                    assert not active[gone[0]:, col].any()

    def test_winner_and_eliminations_partition_players(self):
        cfg = WalkConfig(dimension=3, seed=31, chips=9)
        start = point(3 / 9, 3 / 9, 3 / 9)
        for trial in range(50):
            out = run_discrete_game(start, cfg, trial)
            assert sorted((out.winner, *out.elimination_order)) == [0, 1, 2]


class TestContinuumWalk:
    def test_vertex_start_ends_immediately(self):
        cfg = WalkConfig(dimension=2, seed=1)
        out = run_continuum_walk(point(1.0, 0.0), cfg, 0)
        assert out.complete and out.winner == 0 and out.steps == 0
        assert out.elapsed == 0.0

    def test_two_state_absorption_matches_weights(self):
        trials = 20_000
        cfg = WalkConfig(dimension=2, seed=37)
        start = point(0.3, 0.7)
        outcomes = [run_continuum_walk(start, cfg, i) for i in range(trials)]
        freq = win_fraction(outcomes, 1)
        sigma = np.sqrt(0.3 * 0.7 / trials)
        assert abs(freq - 0.7) < 3.0 * sigma

    def test_three_state_absorption_matches_weights(self):
        trials = 6_000
        cfg = WalkConfig(dimension=3, seed=41)
        start = point(0.5, 0.3, 0.2)
        outcomes = [run_continuum_walk(start, cfg, i) for i in range(trials)]
        for vertex, p in enumerate((0.5, 0.3, 0.2)):
            freq = win_fraction(outcomes, vertex)
            sigma = np.sqrt(p * (1.0 - p) / trials)
            assert abs(freq - p) < 3.0 * sigma

    def test_mean_duration_near_closed_form(self):
        trials = 8_000
        cfg = WalkConfig(dimension=2, seed=43)
        start = point(0.5, 0.5)
        times = np.array(
            [run_continuum_walk(start, cfg, i).elapsed for i in range(trials)]
        )
        stderr = times.std(ddof=1) / np.sqrt(trials)
        assert abs(times.mean() - 0.125) < 3.0 * stderr + 2.0 * cfg.dt

    def test_deterministic_per_trial(self):
        cfg = WalkConfig(dimension=3, seed=47)
        start = point(0.5, 0.3, 0.2)
        a = run_continuum_walk(start, cfg, 4, record=True)
        b = run_continuum_walk(start, cfg, 4, record=True)
        assert a.winner == b.winner and a.steps == b.steps
        assert a.elimination_order == b.elimination_order
        assert np.array_equal(a.trajectory, b.trajectory)

    def test_recording_does_not_change_outcome(self):
        cfg = WalkConfig(dimension=2, seed=53)
        start = point(0.4, 0.6)
        for trial in range(10):
            bare = run_continuum_walk(start, cfg, trial)
            taped = run_continuum_walk(start, cfg, trial, record=True)
            assert bare.winner == taped.winner
            assert bare.steps == taped.steps

    def test_trajectory_stays_on_simplex(self):
        cfg = WalkConfig(dimension=4, seed=59)
        start = point(0.4, 0.3, 0.2, 0.1)
        for trial in range(12):
            out = run_continuum_walk(start, cfg, trial, record=True)
            rows = out.trajectory
            assert rows.shape == (out.steps + 1, 4)
            assert np.max(np.abs(rows.sum(axis=1) - 1.0)) < 1e-9
            assert rows.min() >= 0.0
            alive = (rows > 0.0).sum(axis=1)
            assert np.all(np.diff(alive) <= 0)
            assert alive[-1] == 1

    def test_elapsed_is_steps_times_dt(self):
        cfg = WalkConfig(dimension=2, seed=61, dt=2e-4)
        out = run_continuum_walk(point(0.3, 0.7), cfg, 0)
        assert out.elapsed == pytest.approx(out.steps * 2e-4, rel=0, abs=0)

    def test_step_limit_reports_incomplete(self):
        cfg = WalkConfig(dimension=2, seed=67, max_steps=5)
        out = run_continuum_walk(point(0.5, 0.5), cfg, 0)
        assert not out.complete
        assert out.winner is None
        assert out.steps == 5

    def test_dimension_mismatch_rejected(self):
        cfg = WalkConfig(dimension=3, seed=1)
        with pytest.raises(InvalidStartError):
            run_continuum_walk(point(0.5, 0.5), cfg, 0)
