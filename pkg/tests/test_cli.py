import json

import numpy as np
import pytest

from nv_deer_sim import __version__
from nv_deer_sim.cli import main, run_command
from nv_deer_sim.config.schema import SimConfig, from_dict
from nv_deer_sim.errors import ValidationError
from nv_deer_sim.output import read_result
from nv_deer_sim.utils.logging import get_verbosity

# Aligned-NV lines at 78.6 G: 2870 +- 2.80317 MHz/G * 78.6 G
F1, F2 = 3090.33, 2649.67


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def rows(out):
    lines = out.splitlines()
    return lines[0], np.array([[float(v) for v in line.split(",")] for line in lines[1:]])


def test_deer_spectrum_csv(capsys):
    code, out, _err = run(capsys, "deer", "--fmin", "100", "--fmax", "400", "--points", "600")
    assert code == 0
    assert out.endswith("\n") and "\r" not in out
    header, data = rows(out)
    assert header == "frequency_mhz,signal_pc"
    assert data.shape == (600, 2)
    assert data[0, 0] == 100.0 and data[-1, 0] == 400.0


def test_deer_spectrum_json_reports_five_dips(tmp_path, capsys):
    path = tmp_path / "deer.json"
    code, out, _err = run(capsys, "deer", "--format", "json", "--out", str(path))
    assert code == 0
    assert out == ""
    result = read_result(path.read_bytes())
    assert result.command == "deer"
    assert result.version == __version__
    assert result.scalars["dips"] == 5
    dips = [result.scalars[f"dip_{i}"] for i in range(1, 6)]
    assert min(abs(d - 160.0) for d in dips) <= 10.0


def test_pl_channel_header(capsys):
    code, out, _err = run(capsys, "deer", "--channel", "pl", "--points", "50")
    assert code == 0
    assert out.splitlines()[0] == "frequency_mhz,signal_pl"


def test_outputs_are_byte_identical(tmp_path, capsys):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["deer", "--points", "200", "--format", "json", "--out"]
    assert run(capsys, *argv, str(first))[0] == 0
    assert run(capsys, *argv, str(second))[0] == 0
    assert first.read_bytes() == second.read_bytes()


def test_json_result_reproduces_config(tmp_path, capsys):
    path = tmp_path / "deer.json"
    code, _out, _err = run(capsys, "deer", "--tau", "800", "--points", "100", "--format", "json", "--out", str(path))
    assert code == 0
    result = read_result(path.read_bytes())
    expected = SimConfig().with_values(**{"pulses.tau_ns": 800.0, "sweep.points": 100})
    assert from_dict(result.config) == expected
    assert result.options == {}

    snapshot = tmp_path / "snapshot.json"
    snapshot.write_text(json.dumps(result.config), encoding="utf-8")
    code, out, _err = run(capsys, "deer", "--config", str(snapshot), "--format", "json", "--verbose")
    assert code == 0
    assert out.encode("utf-8") == path.read_bytes()


def test_calibrate_echoes_options(capsys):
    code, out, _err = run(capsys, "calibrate", "--f1", str(F1), "--f2", str(F2), "--format", "json")
    assert code == 0
    assert read_result(out).options == {"f1": F1, "f2": F2}


def test_calibrate(capsys):
    code, out, _err = run(capsys, "calibrate", "--f1", str(F1), "--f2", str(F2))
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "name,value"
    values = dict(line.split(",") for line in lines[1:])
    assert float(values["field_gauss"]) == pytest.approx(78.6, abs=0.1)
    assert float(values["f1_mhz"]) == F1


def test_rabi_first_minimum(capsys):
    code, out, _err = run(capsys, "rabi", "--tmax", "600", "--points", "601")
    assert code == 0
    header, data = rows(out)
    assert header == "time_ns,signal_pc"
    assert data.shape == (601, 2)
    early = data[data[:, 0] < 300.0]
    assert early[np.argmin(early[:, 1]), 0] == 150.0
    assert data[0, 1] == pytest.approx(1.0)


def test_rabi_reports_earliest_minimum(capsys):
    # 900 ns holds three minima (150, 450, 750 ns) of nearly equal depth
    code, out, _err = run(capsys, "rabi", "--tmax", "900", "--points", "901", "--format", "json")
    assert code == 0
    result = read_result(out)
    assert result.scalars["t_min_ns"] == pytest.approx(150.0, abs=1.0)
    assert result.spectra[0].axis[-1] == 900.0


def test_spectrum_command_json(capsys):
    code, out, _err = run(capsys, "spectrum", "--species", "p1", "--format", "json")
    assert code == 0
    result = read_result(out)
    assert result.spectra[0].channel == "intensity"
    assert result.sticks
    assert result.scalars["center_II"] == pytest.approx(160.0, abs=10.0)


def test_odmr_default_sweep(capsys):
    code, out, _err = run(capsys, "odmr", "--points", "751", "--channel", "pl")
    assert code == 0
    header, data = rows(out)
    assert header == "frequency_mhz,signal_pl"
    assert data[0, 0] == 2500.0 and data[-1, 0] == 3250.0


def test_deer_rabi_trace(capsys):
    code, out, _err = run(capsys, "deer-rabi", "--tmax", "120", "--points", "61", "--format", "json")
    assert code == 0
    result = read_result(out)
    signal, echo = result.spectra
    assert signal.axis_name == "time_ns"
    assert echo.channel == "echo"
    # no RF at t = 0; a bath pi pulse near 60 ns pulls the echo down
    assert echo.signal[0] - echo.signal.min() > 0.2


def test_sequence_template(capsys):
    code, out, _err = run(capsys, "sequence", "--template", "deer")
    assert code == 0
    values = dict(line.split(",") for line in out.splitlines()[1:])
    population = float(values["nv_population"])
    assert 0.0 <= population <= 1.0
    assert float(values["echo"]) == pytest.approx(2.0 * population - 1.0, abs=1e-11)
    assert float(values["duration_ns"]) > 2800.0


def test_sequence_file(tmp_path, capsys):
    path = tmp_path / "pi.seq"
    path.write_text("mw pi @ f2;\nread\n", encoding="utf-8")
    config = tmp_path / "uncoupled.json"
    config.write_text('{"pair": {"coupling_mhz": 0}}', encoding="utf-8")
    code, out, _err = run(capsys, "sequence", "--species", "bare", "--sequence", str(path), "--config", str(config))
    assert code == 0
    values = dict(line.split(",") for line in out.splitlines()[1:])
    assert float(values["nv_population"]) == pytest.approx(0.0, abs=1e-9)


# --- failures -----------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ("rabi", "--quiet", "--verbose"),
    ("odmr", "--fmin", "2600"),
    ("deer", "--species", "bare"),
    ("calibrate", "--f1", "2600", "--f2", "2700"),
    ("calibrate", "--f1", "3000"),
    ("sequence", "--template", "cpmg"),
    ("explode",),
])
def test_validation_failures_exit_1(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1
    assert out == ""
    assert "[ERROR]" in err


def test_bad_config_exits_1(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "ensemble": {"fwmh_mhz": 12}\n}\n', encoding="utf-8")
    code, _out, err = run(capsys, "deer", "--config", str(path))
    assert code == 1
    assert "ensemble.fwmh_mhz" in err


def test_unwritable_output_exits_1(tmp_path, capsys):
    target = tmp_path / "missing" / "out.csv"
    code, _out, err = run(capsys, "calibrate", "--f1", str(F1), "--f2", str(F2), "--out", str(target))
    assert code == 1
    assert "cannot write" in err


def test_quiet_suppresses_progress(capsys):
    code, _out, err = run(capsys, "calibrate", "--f1", str(F1), "--f2", str(F2), "--quiet")
    assert code == 0
    assert err == ""


def test_run_command_rejects_unknown():
    with pytest.raises(ValidationError):
        run_command("nmr", SimConfig())


def test_verbose_enables_debug(capsys):
    code, _out, err = run(capsys, "calibrate", "--f1", str(F1), "--f2", str(F2), "--verbose")
    assert code == 0
    assert get_verbosity() == 2
    assert "[DEBUG]" in err
