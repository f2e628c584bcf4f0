import json
import math
import os

import numpy as np
import pytest

from televar.cli_io import (
    RunConfig,
    config_to_dict,
    load_config,
    main,
    render,
    render_csv,
    render_json,
    run,
)
from televar.errors import ConfigError
from televar.schemes import Scheme

MINIMAL = """\
normalized = true
schemes = conventional
fmin = 1e-2
fmax = 1e2
points_per_decade = 12
"""

FULL = """\
# comparison run
normalized = true
schemes = conventional, fds, eprs, qtvr
fmin = 1e-2
fmax = 1e2
points_per_decade = 6
squeeze_db = -18
injection_loss = 0.03
arm_round_trip_loss = 80e-6
sec_loss = 1000e-6
readout_loss = 0.03
fc_round_trip_loss = 45e-6
squeezer_rms_rad = 0.010
lo_rms_rad = 0.010
sec_length_rms_m = 1e-12
fc_length_rms_m = 1e-12
detuning_hz = 49.4e6
carrier_omega_rad_per_s = 1.77e15
"""


def write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestLoadConfig:
    def test_minimal_normalized_file_loads(self, tmp_path):
        cfg = load_config(write(tmp_path, MINIMAL))
        assert cfg.normalized and cfg.schemes == (Scheme.CONVENTIONAL,)
        assert cfg.entanglement.r == 0.0
        assert cfg.budget.is_ideal()
        assert cfg.plant is None

    def test_squeeze_db_to_r(self, tmp_path):
        cfg = load_config(write(tmp_path, MINIMAL + "squeeze_db = -18\n"))
        assert cfg.entanglement.r == pytest.approx(
            math.log(10.0) * 18.0 / 20.0, rel=1e-14)
        assert cfg.entanglement.r == pytest.approx(2.0723, abs=1e-4)

    def test_out_of_range_fraction_rejected(self, tmp_path):
        path = write(tmp_path, MINIMAL + "injection_loss = 1.5\n")
        with pytest.raises(ConfigError, match="injection_loss"):
            load_config(path)

    def test_unknown_key_strict(self, tmp_path):
        path = write(tmp_path, MINIMAL + "typo_key = 3\n")
        with pytest.raises(ConfigError, match="line 6"):
            load_config(path)

    def test_unknown_key_lenient(self, tmp_path, capsys):
        path = write(tmp_path, MINIMAL + "typo_key = 3\n")
        cfg = load_config(path, lenient=True)
        assert cfg.schemes == (Scheme.CONVENTIONAL,)
        assert "typo_key" in capsys.readouterr().err

    def test_missing_required_key_named(self, tmp_path):
        path = write(tmp_path, "normalized = true\nschemes = qtvr\nfmin = 1\n"
                               "fmax = 10\n")
        with pytest.raises(ConfigError, match="points_per_decade"):
            load_config(path)

    def test_unparsable_value_reports_line(self, tmp_path):
        path = write(tmp_path, MINIMAL.replace("fmax = 1e2", "fmax = ten"))
        with pytest.raises(ConfigError, match="line 4"):
            load_config(path)

    def test_absolute_requires_plant(self, tmp_path):
        path = write(tmp_path, MINIMAL.replace("normalized = true",
                                               "normalized = false"))
        with pytest.raises(ConfigError, match="plant"):
            load_config(path)

    def test_incomplete_plant_rejected(self, tmp_path):
        path = write(tmp_path, MINIMAL + "mirror_mass_kg = 100\n")
        with pytest.raises(ConfigError, match="incomplete plant"):
            load_config(path)

    def test_length_rms_needs_wavelength(self, tmp_path):
        path = write(tmp_path, MINIMAL + "sec_length_rms_m = 1e-12\n")
        with pytest.raises(ConfigError, match="carrier"):
            load_config(path)

    def test_grid_invariants(self, tmp_path):
        path = write(tmp_path, MINIMAL.replace("fmin = 1e-2", "fmin = 1e3"))
        with pytest.raises(ConfigError):
            load_config(path)

    def test_bad_scheme_name(self, tmp_path):
        path = write(tmp_path, MINIMAL.replace(
            "schemes = conventional", "schemes = quantum"))
        with pytest.raises(ConfigError, match="quantum"):
            load_config(path)


class TestRun:
    def test_conventional_minimum_is_unity(self, tmp_path):
        cfg = load_config(write(tmp_path, MINIMAL))
        results = run(cfg)
        rel = results[0].curve.s_h_rel_sql
        assert float(np.min(rel)) == pytest.approx(1.0, rel=1e-12)

    def test_full_run_order_and_bound(self, tmp_path):
        cfg = load_config(write(tmp_path, FULL))
        results = run(cfg)
        assert [r.scheme for r in results] == [
            Scheme.CONVENTIONAL, Scheme.FDS, Scheme.EPRS, Scheme.QTVR]
        by = {r.scheme: r for r in results}
        assert np.all(by[Scheme.EPRS].curve.s_h <= by[Scheme.QTVR].curve.s_h)

    def test_deterministic_rendering(self, tmp_path):
        cfg = load_config(write(tmp_path, FULL))
        first = render(run(cfg), "csv", cfg)
        second = render(run(cfg), "csv", cfg)
        assert first == second
        assert render_json(run(cfg), cfg) == render_json(run(cfg), cfg)


class TestEmit:
    def test_csv_schema_and_roundtrip(self, tmp_path):
        cfg = load_config(write(tmp_path, FULL))
        results = run(cfg)
        text = render_csv(results)
        lines = text.strip().split("\n")
        assert lines[0] == "freq_hz,scheme,s_h,s_h_rel_sql,term_victor,term_entanglement"
        rows = [ln.split(",") for ln in lines[1:]]
        n = len(results[0].curve.grid)
        assert len(rows) == 4 * n
        # term columns populated only for QTVR
        for row in rows:
            if row[1] != "QTVR":
                assert row[4] == "" and row[5] == ""
            else:
                assert row[4] != "" and row[5] != ""
        # 17-significant-digit round trip is exact
        qtvr = [r for r in rows if r[1] == "QTVR"]
        got = np.array([float(r[2]) for r in qtvr])
        want = results[-1].curve.s_h
        assert np.array_equal(got, want)

    def test_json_config_echo_roundtrip(self, tmp_path):
        cfg = load_config(write(tmp_path, FULL))
        results = run(cfg)
        payload = json.loads(render_json(results, cfg))
        assert payload["config"] == json.loads(json.dumps(config_to_dict(cfg)))
        assert payload["tool"] == "televar"
        got = np.array(payload["results"][-1]["s_h"])
        assert np.array_equal(got, results[-1].curve.s_h)

    def test_plotdata_blocks(self, tmp_path):
        cfg = load_config(write(tmp_path, FULL))
        text = render(run(cfg), "plotdata", cfg)
        blocks = text.strip().split("\n\n")
        assert len(blocks) == 4
        assert blocks[0].startswith("# scheme: Conventional")
        first = blocks[0].split("\n")[2].split()
        assert len(first) == 2 and float(first[0]) == pytest.approx(1e-2)


class TestMainExitCodes:
    def test_success_writes_file(self, tmp_path, capsys):
        cfg_path = write(tmp_path, FULL)
        out = tmp_path / "out.csv"
        code = main(["run", cfg_path, "--out", str(out)])
        assert code == 0
        assert out.exists()
        # byte-identical on repetition
        data1 = out.read_bytes()
        assert main(["run", cfg_path, "--out", str(out)]) == 0
        assert out.read_bytes() == data1

    def test_config_error_is_exit_2(self, tmp_path, capsys):
        path = write(tmp_path, MINIMAL + "injection_loss = 2\n")
        assert main(["run", path]) == 2
        assert "config error" in capsys.readouterr().err

    def test_missing_file_is_exit_2(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "nope.cfg")]) == 2

    def test_unwritable_output_is_exit_3(self, tmp_path, capsys):
        cfg_path = write(tmp_path, MINIMAL)
        bad = os.path.join(str(tmp_path), "no-such-dir", "out.csv")
        assert main(["run", cfg_path, "--out", bad]) == 3

    def test_scheme_override(self, tmp_path, capsys):
        cfg_path = write(tmp_path, FULL)
        code = main(["run", cfg_path, "--schemes", "qtvr", "--format", "json"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert [r["scheme"] for r in payload["results"]] == ["QTVR"]

    def test_bad_scheme_override_is_exit_2(self, tmp_path, capsys):
        cfg_path = write(tmp_path, FULL)
        assert main(["run", cfg_path, "--schemes", "bogus"]) == 2


class TestSerializationFidelity:
    def test_emitted_curves_reparse_exactly(self, tmp_path):
        cfg = load_config(write(tmp_path, FULL))
        results = run(cfg)
        out = tmp_path / "out.json"
        from televar.cli_io import emit
        emit(results, "json", str(out), cfg)
        payload = json.loads(out.read_text())
        for res, blob in zip(results, payload["results"]):
            got = np.array(blob["s_h"])
            assert float(np.max(np.abs(got / res.curve.s_h - 1.0))) <= 1e-12

    def test_normalized_and_absolute_agree(self, tmp_path):
        gamma = 2.0 * math.pi * 100.0
        power = gamma**3 * 150.0 * 299792458.0 * 9000.0 / (8.0 * 1.77e15)
        absolute = f"""\
normalized = false
schemes = conventional, qtvr
fmin = {gamma * 1e-1 / (2 * math.pi)!r}
fmax = {gamma * 1e1 / (2 * math.pi)!r}
points_per_decade = 8
squeeze_db = -10
mirror_mass_kg = 150
arm_length_m = 9000
circulating_power_w = {power!r}
carrier_omega_rad_per_s = 1.77e15
half_bandwidth_rad_per_s = {gamma!r}
"""
        norm = """\
normalized = true
schemes = conventional, qtvr
fmin = 1e-1
fmax = 1e1
points_per_decade = 8
squeeze_db = -10
"""
        cfg_a = load_config(write(tmp_path, absolute, "a.cfg"))
        cfg_n = load_config(write(tmp_path, norm, "n.cfg"))
        res_a = run(cfg_a)
        res_n = run(cfg_n)
        for a, n in zip(res_a, res_n):
            np.testing.assert_allclose(
                a.curve.s_h_rel_sql, n.curve.s_h, rtol=1e-12)
