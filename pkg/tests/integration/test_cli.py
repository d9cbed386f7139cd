"""
End-to-end tests of the command line surface: exit codes, CSV tables and the manifest
"""

import csv
import json

import pytest

from config.settings import config_hash, parse_ini, settings_to_ini
from main import main


@pytest.fixture
def config_file(tmp_path, small_settings):
    path = tmp_path / "run.ini"
    path.write_text(settings_to_ini(small_settings), encoding="utf-8")
    return path


@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / "out"


def read_table(path):
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.reader(handle))


def read_manifest(out_dir):
    return json.loads((out_dir / "manifest.json").read_text(encoding="utf-8"))


class TestScatteringCommand:

    def test_writes_table_and_manifest(self, config_file, out_dir, small_settings):
        assert main(["scattering", "--config", str(config_file), "--out", str(out_dir)]) == 0

        rows = read_table(out_dir / "scattering.csv")
        assert rows[0] == ["N", "beta", "ell", "lambda_N", "N_lambda_N", "a0", "sup_err_Nomega_vs_omegainf"]
        assert len(rows) == 2
        assert float(rows[1][0]) == pytest.approx(1e4)
        assert b"\r\n" not in (out_dir / "scattering.csv").read_bytes()

        manifest = read_manifest(out_dir)
        assert manifest["command"] == "scattering"
        assert manifest["config_hash"] == config_hash(small_settings)
        assert "scattering" in manifest["stages"]
        assert "scattering.csv" in manifest["artifacts"]
        assert "numpy" in manifest["versions"]

    def test_particle_sweep_adds_rows(self, config_file, out_dir):
        code = main(["scattering", "--config", str(config_file), "--out", str(out_dir),
                     "--set", "potential.n_sweep=1e3, 1e4"])
        assert code == 0
        rows = read_table(out_dir / "scattering.csv")
        assert [float(row[0]) for row in rows[1:]] == [1e3, 1e4]


class TestConfigCommand:

    def test_show_prints_canonical_ini(self, config_file, small_settings, capsys):
        assert main(["config", "show", "--config", str(config_file)]) == 0
        printed = capsys.readouterr().out
        assert printed == settings_to_ini(small_settings)
        assert config_hash(parse_ini(printed)) == config_hash(small_settings)

    def test_override_shows_up(self, config_file, capsys):
        assert main(["config", "show", "--config", str(config_file), "--seed", "11"]) == 0
        assert "seed = 11" in capsys.readouterr().out


class TestConfigurationErrors:

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[lattice]\nsides = 4\n", encoding="utf-8")
        assert main(["scattering", "--config", str(path)]) == 2

    def test_missing_file(self, tmp_path):
        assert main(["scattering", "--config", str(tmp_path / "absent.ini")]) == 2

    def test_odd_axis_override(self, config_file, out_dir):
        assert main(["condensate", "--config", str(config_file), "--out", str(out_dir),
                     "--set", "lattice.m_axis=15"]) == 2


class TestPipelineCommands:

    def test_condensate(self, config_file, out_dir):
        assert main(["condensate", "--config", str(config_file), "--out", str(out_dir)]) == 0
        assert (out_dir / "condensate.csv").exists()
        assert set(read_manifest(out_dir)["stages"]) >= {"scattering", "condensate"}

    def test_evolve(self, config_file, out_dir):
        assert main(["evolve", "--config", str(config_file), "--out", str(out_dir)]) == 0
        rows = read_table(out_dir / "evolve.csv")
        assert rows[0] == ["t", "V_hs_sq", "sympl_defect", "U_opnorm", "intertwining_defect"]
        assert float(rows[1][0]) == 0.0
        assert float(rows[-1][0]) == pytest.approx(0.01)
        assert max(float(row[2]) for row in rows[1:]) <= 1e-6

    def test_evolve_writes_plot(self, config_file, out_dir):
        assert main(["evolve", "--config", str(config_file), "--out", str(out_dir),
                     "--set", "output.plot=true"]) == 0
        assert (out_dir / "evolve.png").stat().st_size > 0
        assert "evolve.png" in read_manifest(out_dir)["artifacts"]

    def test_covariance(self, config_file, out_dir):
        assert main(["covariance", "--config", str(config_file), "--out", str(out_dir)]) == 0
        rows = read_table(out_dir / "covariance.csv")
        assert rows[0] == ["t", "i", "j", "re_sigma_ij", "im_sigma_ij", "det_sigma", "var_sigma_t"]
        times = sorted({float(row[0]) for row in rows[1:]})
        assert times[0] == 0.0
        assert times[-1] == pytest.approx(0.01)
        assert all(float(row[6]) >= 0.0 for row in rows[1:])
        assert (out_dir / "covariance_plot.csv").exists()
        manifest = read_manifest(out_dir)
        assert manifest["command"] == "covariance"
        assert "covariance" in manifest["stages"]


class TestOracleCommand:

    def test_oracle_verify_passes(self, config_file, out_dir, capsys):
        assert main(["oracle-verify", "--config", str(config_file), "--out", str(out_dir)]) == 0
        verdict = json.loads(capsys.readouterr().out)
        assert verdict["pass"] is True
        assert verdict["M"] == 2
        assert verdict["n_max"] == 10
        assert {check["test"] for check in verdict["checks"]} == {
            "bogoliubov_conjugation", "characteristic_function", "vacuum_number", "one_particle_sector",
        }
        assert json.loads((out_dir / "oracle.json").read_text(encoding="utf-8"))["pass"] is True

    def test_failed_verdict_exit_code(self, config_file, out_dir):
        code = main(["oracle-verify", "--config", str(config_file), "--out", str(out_dir),
                     "--set", "oracle.tolerance=1e-300"])
        assert code == 9
