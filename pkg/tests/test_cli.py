import json

import numpy as np
import pytest

from chiralsqueeze import cli

REFERENCE_CONFIG = {
    "mode": "effective",
    "units": {"frequency": "gamma_m"},
    "G_a": 2.5,
    "epsilon": 0.95,
    "theta": 0.0,
    "kappa_0": 0.05,
    "kappa_ex": 2.5,
    "chirality_ratio": [0, 0.05, 0.1],
}


def write_config(tmp_path, name="config.json", **overrides):
    cfg = dict(REFERENCE_CONFIG)
    cfg.update(overrides)
    cfg = {k: v for k, v in cfg.items() if v is not None}
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def load_csv(path):
    return np.genfromtxt(path, delimiter=",", names=True, dtype=None, encoding="utf-8")


class TestSpectrum:
    def test_reference_outputs(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert cli.main(["spectrum", "--config", write_config(tmp_path), "--out", str(out)]) == 0
        csvs = sorted(out.glob("spectrum_*.csv"))
        assert len(csvs) == 3
        ideal = load_csv(out / "spectrum_general_ratio0.csv")
        i0 = int(np.argmin(np.abs(ideal["omega_over_gamma_m"])))
        assert ideal["omega_over_gamma_m"][i0] == 0.0
        assert ideal["F_a_db"].max() == ideal["F_a_db"][i0]
        assert round(float(ideal["F_a_db"][i0]), 2) == 13.45
        for csv in csvs:
            sidecar = json.loads(csv.with_name(csv.name + ".json").read_text())
            assert sidecar["equation_set"]
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest["outputs"]) == 3
        assert "13.45 dB" in capsys.readouterr().out

    def test_all_forms(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path, chirality_ratio=None)
        argv = ["spectrum", "--config", cfg, "--out", str(out), "--grid=-5:5:101"]
        assert cli.main(argv + ["--form", "general", "--form", "ideal", "--form", "oracle"]) == 0
        general = load_csv(out / "spectrum_general.csv")
        oracle = load_csv(out / "spectrum_oracle.csv")
        np.testing.assert_allclose(oracle["S_a"], general["S_a"], rtol=1e-10)
        assert set(oracle["provenance"]) == {"numeric_oracle"}

    def test_passive_config(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path, epsilon=0.0, chirality_ratio=None)
        assert cli.main(["spectrum", "--config", cfg, "--out", str(out)]) == 0
        data = load_csv(out / "spectrum_general.csv")
        np.testing.assert_allclose(data["S_a"], 1.0, atol=1e-12)
        np.testing.assert_allclose(data["S_b"], 1.0, atol=1e-12)

    def test_ideal_form_needs_chirality(self, tmp_path):
        cfg = write_config(tmp_path, G_b=0.3, chirality_ratio=None)
        assert cli.main(["spectrum", "--config", cfg, "--form", "ideal", "--out", str(tmp_path)]) == 2

    def test_unstable_aborts(self, tmp_path, capsys):
        cfg = write_config(tmp_path, epsilon=1.2, chirality_ratio=None)
        assert cli.main(["spectrum", "--config", cfg, "--out", str(tmp_path)]) == 3
        assert "|epsilon| < 1" in capsys.readouterr().err

    def test_config_error_names_location(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"mode": "effective",\n "G_a": }')
        assert cli.main(["spectrum", "--config", str(path), "--out", str(tmp_path)]) == 2
        assert "line 2" in capsys.readouterr().err

    def test_missing_field(self, tmp_path, capsys):
        cfg = write_config(tmp_path, G_a=None)
        assert cli.main(["spectrum", "--config", cfg, "--out", str(tmp_path)]) == 2
        assert "G_a" in capsys.readouterr().err


class TestSweep:
    def test_epsilon_sweep(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path, chirality_ratio=None)
        assert cli.main(["sweep", "--config", cfg, "--var", "epsilon", "--range", "0:0.999:1000", "--out", str(out)]) == 0
        data = load_csv(out / "sweep_epsilon.csv")
        assert abs(data["F_a_db"][0]) < 1e-12
        assert data["F_a_db"][950] == pytest.approx(13.45, abs=0.005)
        summary = json.loads((out / "sweep_epsilon_summary.json").read_text())
        assert summary[0]["interior_maxima"] == 1
        assert 0 < summary[0]["epsilon_opt"] < 0.999

    def test_ratio_blocks(self, tmp_path):
        out = tmp_path / "out"
        argv = ["sweep", "--config", write_config(tmp_path), "--var", "omega", "--range=-3:3:61", "--out", str(out)]
        assert cli.main(argv) == 0
        data = load_csv(out / "sweep_omega.csv")
        peaks = [data["F_b_db"][data["chirality_ratio"] == r].max() for r in (0, 0.05, 0.1)]
        assert abs(peaks[0]) < 1e-12 and peaks[0] < peaks[1] < peaks[2]

    def test_unstable_rows_marked(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path, chirality_ratio=None)
        assert cli.main(["sweep", "--config", cfg, "--var", "epsilon", "--range", "0.5:1.5:11", "--out", str(out)]) == 0
        lines = (out / "sweep_epsilon.csv").read_text().splitlines()[1:]
        assert len(lines) == 11
        assert sum(line.endswith("unstable") for line in lines) == 6

    def test_threads_match_serial(self, tmp_path):
        cfg = write_config(tmp_path)
        base = ["sweep", "--config", cfg, "--var", "epsilon", "--range", "0:0.99:50"]
        assert cli.main(base + ["--out", str(tmp_path / "a")]) == 0
        assert cli.main(base + ["--out", str(tmp_path / "b"), "--threads", "3"]) == 0
        assert (tmp_path / "a/sweep_epsilon.csv").read_bytes() == (tmp_path / "b/sweep_epsilon.csv").read_bytes()

    @pytest.mark.parametrize("rng", ["1:0:5", "0:1:1"])
    def test_bad_range(self, tmp_path, rng):
        cfg = write_config(tmp_path)
        assert cli.main(["sweep", "--config", cfg, "--var", "epsilon", "--range", rng, "--out", str(tmp_path)]) == 2

    def test_swept_variable_not_fixed(self, tmp_path):
        cfg = write_config(tmp_path)
        argv = ["sweep", "--config", cfg, "--var", "chirality_ratio", "--range", "0:0.1:3", "--out", str(tmp_path)]
        assert cli.main(argv) == 2


class TestValidate:
    def test_default_passes(self, capsys):
        assert cli.main(["validate"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines and all(line.startswith("PASS") for line in lines)

    def test_forced_failure(self, capsys):
        assert cli.main(["validate", "--tol", "1e-20"]) == 1
        out = capsys.readouterr().out
        assert "FAIL" in out and "tolerance 1.0e-20" in out


def test_stability_report(tmp_path, capsys):
    assert cli.main(["stability", "--config", write_config(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out.count("stable: True") == 3


def test_byte_identical_reruns(tmp_path):
    cfg = write_config(tmp_path)
    for name in ("a", "b"):
        assert cli.main(["spectrum", "--config", cfg, "--form", "general", "--form", "oracle", "--out", str(tmp_path / name)]) == 0
    for csv in (tmp_path / "a").glob("*.csv"):
        assert csv.read_bytes() == (tmp_path / "b" / csv.name).read_bytes()
