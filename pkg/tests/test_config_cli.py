import csv
import math
from pathlib import Path

import pytest

from uqsl.cli import main
from uqsl.config import ScenarioConfig, load_config, parse_override, read_flat, write_flat
from uqsl.errors import ConfigError
from uqsl.scenarios import run_scenario, verify_checksums

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
SHIPPED = sorted(CONFIGS.glob("*.ini"))
FAST = ["time.n_points=21"]


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestConfig:
    def test_shipped_configs_validate(self):
        assert SHIPPED
        for path in SHIPPED:
            load_config(path)

    def test_flat_round_trip(self):
        cfg = load_config(CONFIGS / "pt_qubit.ini")
        again = ScenarioConfig.from_flat(read_flat(write_flat(cfg.to_flat())))
        assert again == cfg

    def test_override(self):
        cfg = load_config(CONFIGS / "pt_qubit.ini", ["entropy.mu=0.5", "scenario.pt_qubit.varpi=2"])
        assert cfg.mus == [0.5]
        assert cfg.param("varpi") == "2"

    @pytest.mark.parametrize(
        "override,key",
        [
            ("time.n_points=abc", "time.n_points"),
            ("entropy.alpha=0.5,x", "entropy.alpha"),
            ("scenario.name=nope", "scenario.name"),
            ("bogus.key=1", "bogus.key"),
            ("emit.qsl=maybe", "emit.qsl"),
            ("time.t_max=-1", "time.t_max"),
        ],
    )
    def test_errors_name_the_key(self, override, key):
        with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
            load_config(CONFIGS / "pt_qubit.ini", [override])

    def test_bad_override_syntax(self):
        with pytest.raises(ConfigError):
            parse_override("no_equals_sign")
        with pytest.raises(ConfigError):
            parse_override("nosection=1")

    def test_missing_required(self):
        with pytest.raises(ConfigError, match="entropy.alpha"):
            ScenarioConfig.from_flat({"scenario.name": "xxz"})

    def test_unparseable_text(self):
        with pytest.raises(ConfigError):
            read_flat("this is not ini")


class TestCli:
    def test_list_scenarios(self, capsys):
        assert main(["list-scenarios"]) == 0
        out = capsys.readouterr().out
        for name in ("phase_diagram", "amplitude_damping", "pt_qubit", "xxz", "custom_channel"):
            assert name in out

    def test_validate_ok(self, capsys):
        assert main(["validate-config", "--config", str(CONFIGS / "xxz_chain.ini")]) == 0
        assert "ok" in capsys.readouterr().out

    def test_exit_config_error(self):
        args = ["validate-config", "--config", str(CONFIGS / "xxz_chain.ini"), "--override", "time.n_points=x"]
        assert main(args) == 2

    def test_exit_io_error(self, tmp_path):
        assert main(["validate-config", "--config", str(tmp_path / "missing.ini")]) == 4

    def test_exit_numerical_failure_strict(self, tmp_path):
        # the eta = 2 varpi case drives kappa_min to the floor
        args = ["run", "--config", str(CONFIGS / "pt_qubit.ini"), "--out", str(tmp_path), "--strict"]
        assert main(args + ["--override", "time.n_points=51"]) == 3

    def test_exit_zero_run(self, tmp_path, capsys):
        args = ["run", "--config", str(CONFIGS / "amplitude_damping.ini"), "--out", str(tmp_path)]
        assert main(args + ["--override", "time.n_points=31"]) == 0
        assert (tmp_path / "manifest.ini").exists()

    def test_bad_threads(self, tmp_path):
        args = ["run", "--config", str(CONFIGS / "xxz_chain.ini"), "--out", str(tmp_path), "--threads", "0"]
        assert main(args) == 2


class TestRuns:
    def test_pt_qubit_outputs(self, tmp_path):
        cfg = load_config(CONFIGS / "pt_qubit.ini", FAST)
        res = run_scenario(cfg, tmp_path)
        names = sorted(p.name for p in res.files)
        assert len(names) == 9
        for ratio in ("0.5", "1", "2"):
            for suffix in ("tau_qsl", "delta_normalized", "kappa_min"):
                assert f"pt_qubit_eta{ratio}_{suffix}.csv" in names
        assert res.any_loose

    def test_qsl_rows_respect_tau(self, tmp_path):
        for path in SHIPPED:
            cfg = load_config(path, FAST)
            res = run_scenario(cfg, tmp_path / path.stem)
            for f in res.files:
                if not f.name.endswith("_tau_qsl.csv"):
                    continue
                for row in read_rows(f):
                    tq, tau = float(row["tau_qsl"]), float(row["tau"])
                    assert (0 <= tq <= tau * (1 + 1e-12)) or row["flag_loose"] == "1"

    def test_delta_normalized_range(self, tmp_path):
        cfg = load_config(CONFIGS / "amplitude_damping.ini", FAST)
        res = run_scenario(cfg, tmp_path)
        f = next(p for p in res.files if p.name.endswith("delta_normalized.csv"))
        vals = [float(r["delta_normalized"]) for r in read_rows(f)]
        assert all(0 <= v <= 1 for v in vals if not math.isnan(v))

    def test_manifest_reruns(self, tmp_path):
        cfg = load_config(CONFIGS / "xxz_chain.ini", FAST)
        first = run_scenario(cfg, tmp_path / "a")
        again = load_config(first.manifest)
        second = run_scenario(again, tmp_path / "b")
        assert first.checksums == second.checksums

    def test_checksums_verify(self, tmp_path):
        cfg = load_config(CONFIGS / "custom_dephasing.ini", FAST)
        res = run_scenario(cfg, tmp_path)
        assert all(verify_checksums(res.manifest).values())
        res.files[0].write_text("tampered\n")
        status = verify_checksums(res.manifest)
        assert not status[res.files[0].name]
        assert all(ok for name, ok in status.items() if name != res.files[0].name)

    @pytest.mark.parametrize("path", SHIPPED, ids=lambda p: p.stem)
    def test_threads_do_not_change_output(self, path, tmp_path):
        cfg = load_config(path, FAST)
        a = run_scenario(cfg, tmp_path / "one", threads=1)
        b = run_scenario(cfg, tmp_path / "four", threads=4)
        assert a.checksums == b.checksums
