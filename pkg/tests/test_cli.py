import json

import numpy as np
import pytest

from bornwalk.cli import UsageError, main, parse_args
from oracles import exact_passage_density

SCHEMA_KEYS = [
    "request",
    "expected",
    "observed",
    "z_scores",
    "chi_square",
    "mfpt",
    "incomplete",
    "trials",
    "seed",
    "elapsed_wall_s",
]

REQUEST_KEYS = [
    "command",
    "mode",
    "amps",
    "point",
    "trials",
    "seed",
    "chips",
    "dt",
    "diffusion",
    "max_steps",
]


class TestParsing:
    def test_full_simulate_grammar(self):
        req = parse_args(
            "simulate --point 0.3,0.7 --trials 100000 --seed 42 --mode continuum --dt 1e-4".split()
        )
        assert req.command == "simulate"
        assert req.point == (0.3, 0.7)
        assert req.trials == 100_000
        assert req.seed == 42
        assert req.mode == "continuum"
        assert req.dt == 1e-4
        assert req.start.coords.tolist() == [0.3, 0.7]

    def test_point_must_sum_to_one(self):
        with pytest.raises(UsageError):
            parse_args("simulate --point 0.3,0.6".split())

    def test_analytic_fpp_grammar(self):
        req = parse_args("analytic fpp --point 0.5,0.3,0.2".split())
        assert req.command == "analytic"
        assert req.what == "fpp"
        assert req.start.dimension == 3

    def test_amps_and_point_exclusive(self):
        with pytest.raises(UsageError):
            parse_args("simulate --amps 0.6,0.8 --point 0.36,0.64".split())

    def test_state_required(self):
        with pytest.raises(UsageError):
            parse_args("simulate --trials 10".split())

    def test_unknown_flag_rejected(self):
        with pytest.raises(UsageError):
            parse_args("simulate --point 0.5,0.5 --vibes high".split())

    def test_complex_amplitude_literals(self):
        req = parse_args("simulate --amps 0.6+0.8i,0.0".split())
        assert req.amps == ("0.6+0.8i", "0.0")
        # |0.6 + 0.8i|^2 = 1, second amplitude dead on arrival
        assert req.start.coords.tolist() == [1.0, 0.0]
        assert req.start.active_mask.tolist() == [True, False]

    def test_bad_amplitude_literal(self):
        with pytest.raises(UsageError):
            parse_args("simulate --amps 0.6+0.8x,0.1".split())

    def test_zero_amplitudes_rejected(self):
        with pytest.raises(UsageError):
            parse_args("simulate --amps 0,0".split())

    def test_trace_needs_out(self):
        with pytest.raises(UsageError):
            parse_args("simulate --point 0.5,0.5 --trace".split())

    def test_mfpt_needs_two_states(self):
        with pytest.raises(UsageError):
            parse_args("mfpt --point 0.5,0.3,0.2".split())

    def test_density_is_two_state_continuum_csv(self):
        with pytest.raises(UsageError):
            parse_args("density --point 0.5,0.3,0.2".split())
        with pytest.raises(UsageError):
            parse_args("density --point 0.5,0.5 --mode discrete".split())
        with pytest.raises(UsageError):
            parse_args("density --point 0.5,0.5 --format json".split())

    def test_negative_trials_rejected(self):
        with pytest.raises(UsageError):
            parse_args("simulate --point 0.5,0.5 --trials 0".split())

    def test_seed_range_checked(self):
        with pytest.raises(UsageError):
            parse_args(f"simulate --point 0.5,0.5 --seed {2**64}".split())


class TestAnalyticCommand:
    def test_mfpt_prints_one_eighth(self, capsys):
        assert main(["analytic", "mfpt", "--point", "0.5,0.5"]) == 0
        assert capsys.readouterr().out.strip() == "0.125"

    def test_mfpt_respects_diffusion(self, capsys):
        assert main(["analytic", "mfpt", "--point", "0.5,0.5", "--diffusion", "2"]) == 0
        assert capsys.readouterr().out.strip() == "0.0625"

    def test_fpp_prints_the_point(self, capsys):
        assert main(["analytic", "fpp", "--point", "0.5,0.3,0.2"]) == 0
        values = [float(tok) for tok in capsys.readouterr().out.strip().split(",")]
        np.testing.assert_allclose(values, [0.5, 0.3, 0.2], rtol=0, atol=1e-15)

    def test_fpp_from_amplitudes(self, capsys):
        assert main(["analytic", "fpp", "--amps", "3,4i"]) == 0
        values = [float(tok) for tok in capsys.readouterr().out.strip().split(",")]
        np.testing.assert_allclose(values, [0.36, 0.64], rtol=0, atol=1e-15)

    def test_green_two_state_table(self, capsys):
        assert main(["analytic", "green", "--point", "0.3,0.7"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "x,green"
        assert len(lines) == 202
        first = lines[1].split(",")
        assert float(first[1]) == 0.0

    def test_green_three_state_normalization(self, capsys):
        assert main(["analytic", "green", "--point", "0.5,0.3,0.2"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("k=") and " A=" in out

    def test_mfpt_three_states_is_an_error(self, capsys):
        assert main(["analytic", "mfpt", "--point", "0.5,0.3,0.2"]) == 1


class TestEndToEnd:
    def run_compare(self, tmp_path, name="r.json", extra=()):
        out = tmp_path / name
        code = main(
            ["compare", "--point", "0.3,0.7", "--trials", "300", "--seed", "42",
             "--threads", "1", "--out", str(out), *extra]
        )
        return code, out

    def test_compare_passes_and_writes_schema_ordered_json(self, tmp_path, capsys):
        code, out = self.run_compare(tmp_path)
        assert code == 0
        text = out.read_text()
        parsed = json.loads(text)
        assert list(parsed.keys()) == SCHEMA_KEYS
        assert list(parsed["request"].keys()) == REQUEST_KEYS
        assert "threads" not in text and "out" not in parsed["request"]
        assert parsed["request"]["point"] == [0.3, 0.7]
        assert parsed["request"]["amps"] is None
        assert parsed["trials"] == 300
        assert parsed["seed"] == 42
        assert parsed["elapsed_wall_s"] == 0.0
        assert parsed["incomplete"] == 0
        assert abs(sum(parsed["observed"]) - 1.0) < 1e-12
        assert parsed["mfpt"]["analytic"] == pytest.approx(0.105)
        # 17 significant digits: 0.3 appears in its full binary expansion
        assert "0.29999999999999999" in text
        summary = capsys.readouterr().out
        assert "vertex" in summary and "PASS" in summary

    def test_rerun_is_byte_identical(self, tmp_path):
        _, first = self.run_compare(tmp_path, "a.json")
        _, second = self.run_compare(tmp_path, "b.json")
        assert first.read_bytes() == second.read_bytes()

    def test_thread_count_does_not_change_bytes(self, tmp_path):
        out1 = tmp_path / "one.json"
        out2 = tmp_path / "two.json"
        argv = ["compare", "--point", "0.3,0.7", "--trials", "300", "--seed", "42"]
        assert main([*argv, "--threads", "1", "--out", str(out1)]) == 0
        assert main([*argv, "--threads", "2", "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_statistical_failure_exits_two(self, tmp_path):
        # seed 98 at 30 trials lands 17/30 on a 0.3 vertex: z = 3.19
        out = tmp_path / "fail.json"
        code = main(
            ["compare", "--point", "0.3,0.7", "--trials", "30", "--seed", "98",
             "--threads", "1", "--out", str(out)]
        )
        assert code == 2
        parsed = json.loads(out.read_text())
        assert max(abs(z) for z in parsed["z_scores"]) > 3.0

    def test_artifact_goes_to_stdout_without_out(self, capsys):
        code = main(["simulate", "--point", "0.3,0.7", "--trials", "50",
                     "--seed", "1", "--threads", "1"])
        assert code == 0
        captured = capsys.readouterr()
        parsed = json.loads(captured.out)
        assert list(parsed.keys()) == SCHEMA_KEYS
        assert "vertex" in captured.err

    def test_csv_format(self, tmp_path):
        code, out = self.run_compare(tmp_path, "r.csv", extra=("--format", "csv"))
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "vertex,expected,observed,z_score"
        assert len(lines) == 3

    def test_relative_phase_does_not_move_frequencies(self, tmp_path):
        out_real = tmp_path / "real.json"
        out_imag = tmp_path / "imag.json"
        base = ["simulate", "--trials", "200", "--seed", "6", "--threads", "1"]
        assert main([*base, "--amps", "0.6,0.8", "--out", str(out_real)]) == 0
        assert main([*base, "--amps", "0.6,0.8i", "--out", str(out_imag)]) == 0
        real = json.loads(out_real.read_text())
        imag = json.loads(out_imag.read_text())
        assert real["expected"] == imag["expected"]
        assert real["observed"] == imag["observed"]
        assert real["request"]["amps"] == ["0.6", "0.8"]
        assert imag["request"]["amps"] == ["0.6", "0.8i"]

    def test_discrete_mode_end_to_end(self, tmp_path):
        out = tmp_path / "d.json"
        code = main(
            ["compare", "--point", "0.3,0.7", "--trials", "400", "--seed", "3",
             "--mode", "discrete", "--chips", "10", "--threads", "1", "--out", str(out)]
        )
        assert code == 0
        parsed = json.loads(out.read_text())
        # 3 * 7 = 21 expected turns for the analytic mean
        assert parsed["mfpt"]["analytic"] == 21.0

    def test_unrepresentable_chips_exit_one(self, capsys):
        code = main(["simulate", "--point", "0.333,0.667", "--mode", "discrete",
                     "--chips", "10", "--trials", "10", "--threads", "1"])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_mfpt_command_gates_on_mean(self, tmp_path):
        out = tmp_path / "m.json"
        code = main(["mfpt", "--point", "0.5,0.5", "--trials", "400", "--seed", "2",
                     "--threads", "1", "--out", str(out)])
        assert code == 0
        parsed = json.loads(out.read_text())
        assert parsed["mfpt"]["analytic"] == 0.125

    def test_unwritable_out_exits_one(self, tmp_path, capsys):
        missing = tmp_path / "no" / "such" / "dir" / "r.json"
        code = main(["simulate", "--point", "0.5,0.5", "--trials", "10",
                     "--threads", "1", "--out", str(missing)])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_no_partial_file_on_failure(self, tmp_path):
        target = tmp_path / "r.json"
        code = main(["simulate", "--point", "0.333,0.667", "--mode", "discrete",
                     "--chips", "10", "--trials", "10", "--threads", "1",
                     "--out", str(target)])
        assert code == 1
        assert not target.exists()
        assert list(tmp_path.iterdir()) == []


class TestDensityCommand:
    def test_density_csv_matches_series_oracle(self, tmp_path):
        out = tmp_path / "density.csv"
        code = main(["density", "--point", "0.5,0.5", "--trials", "3000",
                     "--seed", "4", "--threads", "1", "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "t,analytic_density,empirical_density"
        assert len(lines) == 201
        data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
        t, analytic, empirical = data.T
        width = t[1] - t[0]
        assert t[0] == pytest.approx(width / 2)
        # empirical mass: completed trials inside the histogram range
        assert empirical.sum() * width <= 1.0 + 1e-9
        assert empirical.sum() * width > 0.98
        exact = exact_passage_density(t, 0.5, 1.0)
        assert np.max(np.abs(analytic - exact)) < 1e-2 * float(np.max(exact))
        # the Monte Carlo column should hug the analytic one loosely
        mid = slice(10, 120)
        assert np.mean(np.abs(empirical[mid] - analytic[mid])) < 0.25


class TestTrace:
    def test_trace_file_structure(self, tmp_path):
        out = tmp_path / "run.json"
        code = main(["simulate", "--point", "0.3,0.7", "--trials", "5", "--seed", "8",
                     "--threads", "1", "--out", str(out), "--trace"])
        assert code == 0
        trace = tmp_path / "run.trace.csv"
        assert trace.exists()
        lines = trace.read_text().strip().splitlines()
        assert lines[0] == "trial,step,x_0,x_1"
        rows = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
        assert set(rows[:, 0].astype(int)) == {0, 1, 2, 3, 4}
        # each trial starts at step 0 from the requested point
        for trial in range(5):
            sub = rows[rows[:, 0] == trial]
            assert sub[0, 1] == 0
            assert sub[0, 2] == pytest.approx(0.3)
            assert np.array_equal(sub[:, 1], np.arange(sub.shape[0]))
            np.testing.assert_allclose(sub[:, 2] + sub[:, 3], 1.0, atol=1e-9)
            assert sub[-1, 2] in (0.0, 1.0)

    def test_tracing_leaves_artifact_unchanged(self, tmp_path):
        plain = tmp_path / "plain.json"
        traced = tmp_path / "traced.json"
        argv = ["simulate", "--point", "0.3,0.7", "--trials", "40", "--seed", "9",
                "--threads", "1"]
        assert main([*argv, "--out", str(plain)]) == 0
        assert main([*argv, "--out", str(traced), "--trace"]) == 0
        plain_doc = plain.read_text()
        traced_doc = traced.read_text()
        assert plain_doc == traced_doc
