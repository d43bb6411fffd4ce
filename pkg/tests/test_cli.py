import json
import math

import numpy as np
import pytest
from fastapi.testclient import TestClient

import gausschan as gc
from gausschan import serialize
from gausschan.cli import main, parse_rate_grid
from gausschan.service import models as m
from gausschan.service.app import create_app
from gausschan.service import app as svc


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestParsing:
    def test_rate_grid_range_semantics(self):
        rates = parse_rate_grid("0.2:0.5:0.1")
        np.testing.assert_allclose(rates, [0.2, 0.3, 0.4], atol=1e-12)
        # stop is exclusive even when it lands on the grid
        rates = parse_rate_grid("0.0:1.0:0.25")
        np.testing.assert_allclose(rates, [0.0, 0.25, 0.5, 0.75], atol=1e-15)

    def test_rate_grid_comma_list(self):
        assert parse_rate_grid("0.5,1.5") == [0.5, 1.5]

    def test_usage_error_exits_2(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["capacity", "--ns", "1.0"])  # missing channel flag
        assert err.value.code == 2

    def test_two_channel_flags_rejected(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["capacity", "--thermal", "0.5,1", "--loss", "0.7", "--ns", "1"])
        assert err.value.code == 2

    def test_moe_requires_seed(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["moe", "--thermal", "0.5,1", "--alpha", "2.0"])
        assert err.value.code == 2


class TestExitCodes:
    def test_domain_error_returns_2(self, capsys):
        code, _, err = run_cli(capsys, "capacity", "--thermal", "1.5,1", "--ns", "1")
        assert code == 2
        assert "error" in err

    def test_budget_error_returns_3(self, capsys):
        code, _, err = run_cli(
            capsys, "kernel", "--thermal", "0.5,1", "--kmax", "8", "--lmax", "10",
            "--tail-budget", "1e-12",
        )
        assert code == 3
        assert "budget" in err


class TestGoldenOutputs:
    def test_capacity_matches_direct_library_call(self, capsys):
        code, out, _ = run_cli(capsys, "capacity", "--thermal", "0.5,1", "--ns", "2")
        assert code == 0
        ch = gc.make_thermal(0.5, 1.0)
        ns_prime, nb_prime = gc.output_photon_numbers(ch, 2.0)
        expected = serialize.rows_to_csv(
            ["tau", "nu", "NS", "NS_prime", "NB_prime", "capacity_bits"],
            [(ch.tau, ch.nu, 2.0, ns_prime, nb_prime, gc.capacity(ch, 2.0))],
        )
        assert out == expected
        assert format(gc.g(1.5) - gc.g(0.5), ".17g") in out

    def test_decompose_additive(self, capsys):
        code, out, _ = run_cli(capsys, "decompose", "--additive", "1")
        assert code == 0
        assert out.splitlines()[1] == "1,2,0.5,2,false"
        ch = gc.make_additive(1.0)
        dec = gc.decompose(ch)
        expected = serialize.rows_to_csv(
            ["tau", "nu", "T", "G", "quantum_limited"],
            [(ch.tau, ch.nu, dec.T, dec.G, ch.is_quantum_limited)],
        )
        assert out == expected

    def test_kernel_golden(self, capsys):
        code, out, _ = run_cli(
            capsys, "kernel", "--loss", "0.5", "--kmax", "2", "--lmax", "2"
        )
        assert code == 0
        expected = serialize.kernel_csv(gc.channel_kernel(gc.make_loss(0.5), 2, 2))
        assert out == expected
        assert out.startswith("k,l,p\n")
        assert "2,tail,0\n" in out

    def test_kernel_single_row_distribution_format(self, capsys):
        code, out, _ = run_cli(
            capsys, "kernel", "--thermal", "0.5,1", "--kmax", "3", "--lmax", "30",
            "--row", "2",
        )
        assert code == 0
        kern = gc.channel_kernel(gc.make_thermal(0.5, 1.0), 3, 30)
        assert out == serialize.distribution_csv(kern.row(2))
        assert out.splitlines()[0] == "l,p"
        assert out.splitlines()[-1].startswith("tail,")

    def test_sweep_golden(self, capsys):
        args = [
            "sweep", "--thermal", "0.5,1", "--ns", "1",
            "--n", "50,100", "--rates", "0.8:1.3:0.2",
        ]
        code, out, _ = run_cli(capsys, *args)
        assert code == 0
        rows = gc.rate_sweep(
            gc.make_thermal(0.5, 1.0), 1.0, [50, 100], parse_rate_grid("0.8:1.3:0.2")
        )
        assert out == serialize.sweep_csv(rows)
        assert out.splitlines()[0] == serialize.SWEEP_HEADER

    def test_moe_deterministic_given_seed(self, capsys):
        args = [
            "moe", "--thermal", "0.5,1", "--alpha", "2.0", "--cutoff", "6",
            "--trials", "10", "--seed", "42",
        ]
        code, first, _ = run_cli(capsys, *args)
        assert code == 0
        code, second, _ = run_cli(capsys, *args)
        assert first == second
        direct = gc.moe_scan(
            gc.make_thermal(0.5, 1.0), 2.0, 6, 10, np.random.default_rng(42)
        )
        assert format(direct.min_entropy, ".17g") in first

    def test_concentration_golden(self, capsys):
        code, out, _ = run_cli(
            capsys, "concentration", "--thermal", "0.5,1", "--delta2", "0.25",
            "--level", "1", "--n", "1,2",
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "n,threshold,tail,chernoff_log2,mc_tail"
        ch = gc.make_thermal(0.5, 1.0)
        tail1 = gc.concentration_tail(ch, [1], 0.25)
        assert lines[1].split(",")[2] == format(tail1, ".17g")

    def test_bound_golden(self, capsys):
        code, out, _ = run_cli(
            capsys, "bound", "--thermal", "0.5,1", "--ns", "1", "--n", "100",
            "--rate", "2", "--form", "theorem1", "--delta2", "0.01",
            "--alpha", "2", "--eps", "1e-3",
        )
        assert code == 0
        slack = gc.SlackParams.for_theorem(
            delta1=0.0, delta2=0.01, delta3=0.0, alpha=2.0, eps=1e-3, n=100
        )
        inputs = gc.BoundInputs(
            channel=gc.make_thermal(0.5, 1.0), n_s=1.0, n=100, rate=2.0, slack=slack
        )
        report = gc.theorem1_bound(inputs)
        expected = serialize.rows_to_csv(
            ["form", "n", "R", "bound", "clipped", "exponent"],
            [("theorem1", 100, 2.0, report.bound, report.clipped,
              report.exponent_bits_per_mode)],
        )
        assert out == expected

    def test_moe_golden(self, capsys):
        code, out, _ = run_cli(
            capsys, "moe", "--additive", "0.5", "--alpha", "1.5", "--cutoff", "5",
            "--trials", "4", "--seed", "11",
        )
        assert code == 0
        result = gc.moe_scan(
            gc.make_additive(0.5), 1.5, 5, 4, np.random.default_rng(11)
        )
        expected = serialize.rows_to_csv(
            ["alpha", "cutoff", "trials", "seed", "min_entropy", "argmin",
             "vacuum_entropy", "vacuum_overlap", "vacuum_floor", "output_cutoff"],
            [(1.5, 5, 4, 11, result.min_entropy, result.argmin,
              result.vacuum_entropy, result.vacuum_overlap,
              gc.renyi_thermal(0.5, 1.5), result.output_cutoff)],
        )
        assert out == expected

    def test_concentration_full_golden(self, capsys):
        code, out, _ = run_cli(
            capsys, "concentration", "--thermal", "0.5,1", "--delta2", "0.25",
            "--level", "1", "--n", "1,2",
        )
        assert code == 0
        ch = gc.make_thermal(0.5, 1.0)
        rows = []
        for n in (1, 2):
            profile = [1] * n
            threshold = gc.converse.output_mean(ch, profile) + n * 0.25
            rows.append((
                n, threshold,
                gc.concentration_tail(ch, profile, 0.25),
                gc.chernoff_tail(ch, profile, threshold),
                None,
            ))
        expected = serialize.rows_to_csv(
            ["n", "threshold", "tail", "chernoff_log2", "mc_tail"], rows
        )
        assert out == expected

    def test_smooth_check_explicit_values(self, capsys):
        code, out, _ = run_cli(
            capsys, "smooth-check", "--values", "0.6,0.4", "--eps", "0.1",
            "--alpha", "2.0",
        )
        assert code == 0
        row = out.splitlines()[1].split(",")
        assert float(row[4]) == pytest.approx(1.0, abs=1e-9)
        assert row[6] == "true"

    def test_smooth_check_random_needs_seed(self, capsys):
        code, _, err = run_cli(capsys, "smooth-check", "--trials", "5")
        assert code == 2
        assert "seed" in err


class TestFormats:
    def test_csv_and_json_encode_identical_values(self, capsys):
        base = ["capacity", "--amplifier", "2,1", "--ns", "1"]
        _, csv_out, _ = run_cli(capsys, *base)
        _, json_out, _ = run_cli(capsys, *base, "--format", "json")
        header, values = csv_out.splitlines()
        csv_map = dict(zip(header.split(","), values.split(",")))
        payload = json.loads(json_out)
        assert float(csv_map["capacity_bits"]) == payload["capacity_bits"]
        assert float(csv_map["NS_prime"]) == payload["n_s_prime"]
        assert float(csv_map["NB_prime"]) == payload["n_b_prime"]

    def test_sweep_json_mirror_has_components(self, capsys):
        args = [
            "sweep", "--additive", "1", "--ns", "1", "--n", "50",
            "--rates", "2.0,3.0", "--format", "json",
        ]
        code, out, _ = run_cli(capsys, *args)
        assert code == 0
        payload = json.loads(out)
        assert len(payload["rows"]) == 2
        for row in payload["rows"]:
            assert set(row) >= {"n", "R", "bound", "exponent", "delta2", "delta4", "delta5", "components"}

    def test_weak_converse_option(self, capsys):
        code, out, _ = run_cli(
            capsys, "capacity", "--thermal", "0.5,1", "--ns", "1", "--eps", "0.1"
        )
        assert code == 0
        header = out.splitlines()[0]
        assert header == "capacity_bits,eps,weak_converse_rate_bound"
        ch = gc.make_thermal(0.5, 1.0)
        expected = gc.weak_converse_rate_bound(ch, 1.0, 0.1)
        assert out.splitlines()[1].split(",")[2] == format(expected, ".17g")


class TestOutputFiles:
    def test_output_file_and_env_dir(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("GAUSSCHAN_OUTDIR", str(tmp_path))
        code, out, _ = run_cli(
            capsys, "decompose", "--additive", "1", "--output", "dec.csv"
        )
        assert code == 0
        assert out == ""
        assert (tmp_path / "dec.csv").read_text().splitlines()[1] == "1,2,0.5,2,false"

    def test_absolute_output_ignores_env(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("GAUSSCHAN_OUTDIR", str(tmp_path / "nowhere"))
        target = tmp_path / "direct.csv"
        code, _, _ = run_cli(
            capsys, "decompose", "--additive", "1", "--output", str(target)
        )
        assert code == 0
        assert target.exists()

    def test_plot_script_emitted(self, tmp_path, capsys):
        csv_path = tmp_path / "sweep.csv"
        script_path = tmp_path / "plot_sweep.py"
        code, _, _ = run_cli(
            capsys, "sweep", "--thermal", "0.5,1", "--ns", "1", "--n", "50",
            "--rates", "1.0,1.5", "--output", str(csv_path),
            "--plot-script", str(script_path),
        )
        assert code == 0
        assert csv_path.exists()
        text = script_path.read_text()
        assert str(csv_path) in text
        assert "matplotlib" in text
        compile(text, str(script_path), "exec")

    def test_plot_script_requires_output(self, capsys):
        code, _, err = run_cli(
            capsys, "sweep", "--thermal", "0.5,1", "--ns", "1", "--n", "50",
            "--rates", "1.0,1.5", "--plot-script", "x.py",
        )
        assert code == 2
        assert "--output" in err


class TestRemoteDispatch:
    @pytest.fixture
    def fake_http(self, monkeypatch):
        client = TestClient(create_app())

        def fake_post(url, json=None, timeout=None):
            path = url.replace("http://svc", "")
            return client.post(path, json=json)

        monkeypatch.setattr("gausschan.cli.httpx.post", fake_post)

    def test_remote_matches_in_process(self, fake_http, capsys):
        local_args = ["capacity", "--thermal", "0.5,1", "--ns", "2"]
        _, local_out, _ = run_cli(capsys, *local_args)
        code, remote_out, _ = run_cli(capsys, *local_args, "--url", "http://svc")
        assert code == 0
        assert remote_out == local_out

    def test_remote_budget_error_exit_code(self, fake_http, capsys):
        code, _, err = run_cli(
            capsys, "kernel", "--thermal", "0.5,1", "--kmax", "8", "--lmax", "10",
            "--tail-budget", "1e-12", "--url", "http://svc",
        )
        assert code == 3

    def test_remote_domain_error_exit_code(self, fake_http, capsys):
        code, _, _ = run_cli(
            capsys, "capacity", "--thermal", "1.5,1", "--ns", "1", "--url", "http://svc"
        )
        assert code == 2

    def test_remote_infinite_bound_round_trips(self, fake_http, capsys):
        args = [
            "bound", "--thermal", "0.5,1", "--ns", "1", "--n", "1000", "--rate", "0",
            "--form", "corollary", "--delta2", "0.01", "--delta4", "0.1",
            "--delta5", "0.01",
        ]
        _, local_out, _ = run_cli(capsys, *args)
        code, remote_out, _ = run_cli(capsys, *args, "--url", "http://svc")
        assert code == 0
        assert remote_out == local_out
        assert ",inf," in remote_out
