import numpy as np
import pytest
from numpy.testing import assert_allclose

from tomonet.bench import (
    ExperimentConfig,
    frequency_table,
    merge_reports,
    read_report,
    run_accuracy,
    run_positivity,
    run_timing,
    write_report,
)
from tomonet.cli import main
from tomonet.datagen import save_povm
from tomonet.estimators import SolverOptions
from tomonet.measurement import random_srm
from tomonet.qcore import assert_density_matrix


@pytest.fixture(scope="module")
def povm2():
    return random_srm(2, np.random.default_rng(31))


@pytest.fixture(scope="module")
def povm2_file(povm2, tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "srm2.dat"
    save_povm(path, povm2)
    return str(path)


def config_for(povm, estimators=("li",), grid=(0,), n_states=10, seed=0, **kw):
    return ExperimentConfig(povm=povm, estimators=estimators, trial_grid=grid,
                            n_states=n_states, seed=seed, **kw)


class TestConfigValidation:
    def test_rejects_bad_inputs(self, povm2):
        with pytest.raises(ValueError, match="unknown estimator"):
            config_for(povm2, estimators=("li", "bayes"))
        with pytest.raises(ValueError, match="duplicate"):
            config_for(povm2, grid=(0, 100, 100))
        with pytest.raises(ValueError, match="nonnegative"):
            config_for(povm2, grid=(-5,))
        with pytest.raises(ValueError, match="Bloch-head model"):
            config_for(povm2, estimators=("nn-bloch",))


class TestFrequencyTable:
    def test_structure(self, povm2):
        table = frequency_table(config_for(povm2, grid=(0, 50), n_states=8))
        assert len(table) == 8
        for entry in table:
            assert_density_matrix(entry.state)
            assert entry.frequencies[0] is entry.probabilities
            assert entry.frequencies[50].sum() == pytest.approx(1.0)
            counts = entry.frequencies[50] * 50
            assert_allclose(counts, np.round(counts), atol=1e-9)

    def test_deterministic(self, povm2):
        cfg = config_for(povm2, grid=(0, 50), n_states=6, seed=3)
        a = frequency_table(cfg)
        b = frequency_table(cfg)
        for ea, eb in zip(a, b):
            assert np.array_equal(ea.state, eb.state)
            assert np.array_equal(ea.frequencies[50], eb.frequencies[50])

    def test_states_independent_of_grid(self, povm2):
        """The state pool depends on the seed only, not on the trial grid."""
        a = frequency_table(config_for(povm2, grid=(0,), n_states=5, seed=4))
        b = frequency_table(config_for(povm2, grid=(0, 100), n_states=5, seed=4))
        for ea, eb in zip(a, b):
            assert np.array_equal(ea.state, eb.state)


class TestRuns:
    def test_accuracy_exact_linear_inversion(self, povm2):
        rows = run_accuracy(config_for(povm2, grid=(0,), n_states=10))
        assert len(rows) == 1
        assert rows[0].estimator == "li"
        assert rows[0].trials == 0
        assert rows[0].mean_hs < 1e-10
        assert rows[0].n_states == 10

    def test_accuracy_sampling_noise_dominates(self, povm2):
        rows = run_accuracy(config_for(povm2, grid=(0, 100), n_states=10))
        by_trials = {r.trials: r for r in rows}
        assert by_trials[100].mean_hs > 100 * by_trials[0].mean_hs
        assert by_trials[100].q10 <= by_trials[100].q90

    def test_timing_rows(self, povm2):
        rows = run_timing(config_for(povm2, estimators=("li", "li-pos"), grid=(0,), n_states=4))
        assert len(rows) == 2
        for row in rows:
            assert row.mean_seconds > 0
            assert row.n_samples == 4

    def test_positivity_rejects_guaranteed(self, povm2):
        with pytest.raises(ValueError, match="positive by construction"):
            run_positivity(config_for(povm2, estimators=("li", "mle"), grid=(0,)))

    def test_positivity_statistics(self, povm2):
        rows = run_positivity(config_for(povm2, grid=(0, 8), n_states=30, seed=5))
        by_trials = {r.trials: r for r in rows}
        # Exact frequencies invert to the true, positive state.
        assert by_trials[0].psd_fraction == 1.0
        assert by_trials[0].mean_negative_eig == pytest.approx(0.0, abs=1e-12)
        # Eight shots on a qubit routinely push the point estimate outside.
        assert by_trials[8].psd_fraction < 1.0
        assert by_trials[8].mean_negative_eig < 0


class TestReportIo:
    def test_round_trip(self, povm2, tmp_path):
        rows = run_accuracy(config_for(povm2, grid=(0, 50), n_states=5))
        path = tmp_path / "acc.csv"
        write_report(path, "accuracy", 2, rows)
        meta, back = read_report(path)
        assert meta == {"format": "1", "kind": "accuracy", "dim": "2"}
        assert len(back) == len(rows)
        assert back[0]["estimator"] == "li"
        assert float(back[0]["mean_hs"]) == rows[0].mean_hs

    def test_write_deterministic(self, povm2, tmp_path):
        rows = run_accuracy(config_for(povm2, grid=(0,), n_states=5))
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_report(a, "accuracy", 2, rows)
        write_report(b, "accuracy", 2, rows)
        assert a.read_bytes() == b.read_bytes()

    def test_bad_files_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="empty report"):
            write_report(tmp_path / "x.csv", "accuracy", 2, [])
        plain = tmp_path / "plain.csv"
        plain.write_text("estimator,trials\nli,0\n")
        with pytest.raises(ValueError, match="not a tomonet report"):
            read_report(plain)
        ragged = tmp_path / "ragged.csv"
        ragged.write_text("# tomonet-report format=1 kind=accuracy dim=2\na,b\n1,2,3\n")
        with pytest.raises(ValueError, match="row 0 has 3 fields"):
            read_report(ragged)

    def test_merge_joins_on_estimator_and_trials(self, povm2, tmp_path):
        cfg = config_for(povm2, grid=(0, 50), n_states=5)
        acc = tmp_path / "acc.csv"
        tim = tmp_path / "tim.csv"
        write_report(acc, "accuracy", 2, run_accuracy(cfg))
        write_report(tim, "timing", 2, run_timing(cfg))
        dim, cols, rows = merge_reports([read_report(acc), read_report(tim)])
        assert dim == "2"
        assert "mean_hs" in cols and "mean_seconds" in cols
        assert len(rows) == 2
        for row in rows:
            assert "mean_hs" in row and "mean_seconds" in row

    def test_merge_rejects_mixed_dimensions(self, povm2, tmp_path):
        rows = run_accuracy(config_for(povm2, grid=(0,), n_states=3))
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_report(a, "accuracy", 2, rows)
        write_report(b, "accuracy", 3, rows)
        with pytest.raises(ValueError, match="mix dimensions"):
            merge_reports([read_report(a), read_report(b)])


class TestCli:
    def test_gen_povm_deterministic(self, tmp_path, capsys):
        a, b = tmp_path / "a.dat", tmp_path / "b.dat"
        assert main(["gen-povm", "--dim", "2", "--seed", "9", "--out", str(a)]) == 0
        assert main(["gen-povm", "--dim", "2", "--seed", "9", "--out", str(b)]) == 0
        assert "dim=2 outcomes=4" in capsys.readouterr().out
        assert a.read_bytes() == b.read_bytes()

    def test_usage_error_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["gen-povm", "--out", "x.dat"])  # --dim missing
        assert exc.value.code == 2

    def test_runtime_error_exits_1(self, tmp_path, capsys):
        missing = str(tmp_path / "nope.dat")
        code = main(["accuracy", "--povm", missing, "--grid", "0",
                     "--out", str(tmp_path / "out.csv")])
        assert code == 1
        assert "nope.dat" in capsys.readouterr().err

    def test_config_file_defaults_and_overrides(self, tmp_path):
        cfg = tmp_path / "povm.cfg"
        cfg.write_text("dim=2\nseed=1\n# comment line\n\n")
        from_cfg = tmp_path / "cfg.dat"
        assert main(["gen-povm", "--config", str(cfg), "--out", str(from_cfg)]) == 0
        seed1 = tmp_path / "seed1.dat"
        main(["gen-povm", "--dim", "2", "--seed", "1", "--out", str(seed1)])
        assert from_cfg.read_bytes() == seed1.read_bytes()

        overridden = tmp_path / "override.dat"
        assert main(["gen-povm", "--config", str(cfg), "--seed", "2",
                     "--out", str(overridden)]) == 0
        seed2 = tmp_path / "seed2.dat"
        main(["gen-povm", "--dim", "2", "--seed", "2", "--out", str(seed2)])
        assert overridden.read_bytes() == seed2.read_bytes()
        assert overridden.read_bytes() != seed1.read_bytes()

    def test_bad_config_line_exits_1(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("dim 2\n")
        assert main(["gen-povm", "--config", str(cfg), "--out", "x"]) == 1
        assert "key=value" in capsys.readouterr().err

    def test_full_pipeline(self, povm2_file, tmp_path, capsys):
        """gen-data, train, accuracy, positivity and report chained together."""
        data = tmp_path / "data"
        assert main(["gen-data", "--povm", povm2_file, "--count", "12",
                     "--trial-min", "20", "--trial-max", "200",
                     "--out", str(data)]) == 0
        model = tmp_path / "bloch.model"
        assert main(["train", "--data", str(data), "--head", "bloch",
                     "--hidden", "8", "--epochs", "5", "--batches", "2",
                     "--out", str(model)]) == 0
        acc = tmp_path / "acc.csv"
        assert main(["accuracy", "--povm", povm2_file, "--grid", "0,50",
                     "--states", "6", "--estimators", "li,li-pos,nn-bloch",
                     "--bloch-model", str(model), "--out", str(acc)]) == 0
        pos = tmp_path / "pos.csv"
        assert main(["positivity", "--povm", povm2_file, "--grid", "0,50",
                     "--states", "6", "--out", str(pos)]) == 0
        summary = tmp_path / "summary.csv"
        assert main(["report", str(acc), str(pos), "--out", str(summary)]) == 0
        capsys.readouterr()
        meta, rows = read_report(summary)
        assert meta["kind"] == "summary"
        tags = {row["estimator"] for row in rows}
        assert tags == {"li", "li-pos", "nn-bloch"}
        li_rows = [r for r in rows if r["estimator"] == "li"]
        assert all("psd_fraction" in r and r["psd_fraction"] for r in li_rows)

    def test_positivity_rejects_mle_via_cli(self, povm2_file, tmp_path, capsys):
        code = main(["positivity", "--povm", povm2_file, "--grid", "0",
                     "--estimators", "mle", "--out", str(tmp_path / "x.csv")])
        assert code == 1
        assert "positive by construction" in capsys.readouterr().err

    def test_model_head_mismatch_detected(self, povm2_file, tmp_path, capsys):
        data = tmp_path / "data"
        main(["gen-data", "--povm", povm2_file, "--count", "12", "--out", str(data)])
        model = tmp_path / "chol.model"
        main(["train", "--data", str(data), "--head", "cholesky",
              "--hidden", "8", "--epochs", "3", "--batches", "2", "--out", str(model)])
        capsys.readouterr()
        code = main(["accuracy", "--povm", povm2_file, "--grid", "0",
                     "--estimators", "nn-bloch", "--bloch-model", str(model),
                     "--out", str(tmp_path / "x.csv")])
        assert code == 1
        assert "head" in capsys.readouterr().err
