import argparse
import json

import pytest
from unittest.mock import patch

from app.cli.router import build_parser
from app.main import main


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


def _summary(out):
    """命令结果是最后打印的 JSON 对象"""
    return json.loads(out[out.index("{\n"):])


@pytest.fixture
def device_file(tmp_path, config_file, capsys):
    path = tmp_path / "device.json"
    code, _ = _run(capsys, "fabricate", "--config", config_file, "--out", path)
    assert code == 0
    return path


def test_parser_lists_all_commands():
    parser = build_parser()
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    commands = subparsers.choices
    assert set(commands) == {
        "fabricate", "challenge", "calibrate", "respond", "corpus", "export-bits",
        "sweep", "enroll", "reconstruct", "nist",
    }


def test_fabricate_is_reproducible(tmp_path, config_file, capsys):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    code, out = _run(capsys, "fabricate", "--config", config_file, "--out", first)
    assert code == 0
    summary = _summary(out)
    assert summary["success"] is True
    assert summary["data"]["channels"] == 4
    assert len(summary["data"]["resonance_offsets_ghz"]) == 4
    _run(capsys, "fabricate", "--config", config_file, "--out", second)
    assert first.read_bytes() == second.read_bytes()


def test_fabricate_mrrs_per_node_flag(tmp_path, config_file, capsys):
    code, out = _run(capsys, "fabricate", "--config", config_file, "--mrrs-per-node", 1, "--seed", 5,
                     "--out", tmp_path / "d.json")
    assert code == 0
    data = _summary(out)["data"]
    assert data["channels"] == 2 and data["fab_seed"] == 5


def test_fabricate_defaults_to_output_dir(tmp_path, config_file, capsys):
    code, _ = _run(capsys, "fabricate", "--config", config_file)
    assert code == 0
    assert (tmp_path / "runs" / "device.json").exists()


def test_invalid_config_exits_with_error(tmp_path, capsys):
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    code, out = _run(capsys, "fabricate", "--config", broken)
    assert code == 2
    assert json.loads(out)["success"] is False

    invalid = tmp_path / "invalid.json"
    invalid.write_text(json.dumps({"alpha": 2.0}))
    assert _run(capsys, "fabricate", "--config", invalid)[0] == 2
    assert _run(capsys, "fabricate", "--config", tmp_path / "missing.json")[0] == 2


def test_challenge_writes_json_and_csv(tmp_path, config_file, capsys):
    out_path = tmp_path / "ch.json"
    code, out = _run(capsys, "challenge", "--config", config_file, "--seed", 4, "--length", 50, "--out", out_path)
    assert code == 0
    assert _summary(out)["data"]["length"] == 50
    assert out_path.with_suffix(".csv").read_text().splitlines()[0] == "x_in,y_out"


def test_calibrate_rejects_zero_jobs(config_file, device_file, capsys):
    assert _run(capsys, "calibrate", "--config", config_file, "--device", device_file, "--jobs", 0)[0] == 2


def test_respond_calibrates_in_memory(tmp_path, config_file, device_file, capsys):
    device_bytes = device_file.read_bytes()
    first = tmp_path / "r1.json"
    code, out = _run(capsys, "respond", "--config", config_file, "--device", device_file,
                     "--challenge-seed", 3, "--out", first)
    assert code == 0
    data = _summary(out)["data"]
    assert data["calibrated_now"] is True
    assert data["key_bits"] == 13 * 4
    assert first.with_suffix(".bin").exists()
    assert device_file.read_bytes() == device_bytes
    assert not (tmp_path / "runs" / "calibration.json").exists()

    calibration = tmp_path / "cal.json"
    assert _run(capsys, "calibrate", "--config", config_file, "--device", device_file, "--crps", 4,
                "--out", calibration)[0] == 0
    assert device_file.read_bytes() == device_bytes

    second = tmp_path / "r2.json"
    code, out = _run(capsys, "respond", "--config", config_file, "--device", device_file,
                     "--challenge-seed", 3, "--calibration", calibration, "--out", second)
    assert code == 0
    assert _summary(out)["data"]["calibrated_now"] is False
    assert first.read_bytes() == second.read_bytes()


def test_calibrate_writes_device_only_to_device_out(tmp_path, config_file, device_file, capsys):
    device_bytes = device_file.read_bytes()
    calibrated = tmp_path / "calibrated" / "device.json"
    code, out = _run(capsys, "calibrate", "--config", config_file, "--device", device_file,
                     "--device-out", calibrated, "--out", tmp_path / "cal.json")
    assert code == 0
    assert _summary(out)["data"]["device_path"] == str(calibrated)
    assert device_file.read_bytes() == device_bytes
    assert json.loads(device_file.read_text())["data"]["adc_range"] is None
    assert json.loads(calibrated.read_text())["data"]["adc_range"] is not None


def test_respond_no_calibrate_requires_calibration(config_file, device_file, capsys):
    code, out = _run(capsys, "respond", "--config", config_file, "--device", device_file,
                     "--challenge-seed", 3, "--no-calibrate")
    assert code == 2
    assert "CalibrationError" in json.loads(out)["errors"]


def test_enroll_reconstruct_and_export(tmp_path, config_file, device_file, capsys):
    response = tmp_path / "r.json"
    assert _run(capsys, "respond", "--config", config_file, "--device", device_file,
                "--challenge-seed", 8, "--out", response)[0] == 0

    helper = tmp_path / "helper.json"
    code, out = _run(capsys, "enroll", "--config", config_file, "--key", response, "-t", 2, "--out", helper)
    assert code == 0
    assert _summary(out)["data"]["key_bits"] == 52

    recovered = tmp_path / "recovered.bin"
    code, out = _run(capsys, "reconstruct", "--config", config_file, "--helper", helper,
                     "--key", response.with_suffix(".bin"), "--out", recovered)
    assert code == 0
    assert _summary(out)["data"]["corrected"] == 0

    code, out = _run(capsys, "export-bits", "--config", config_file, "--input", response,
                     "--out", tmp_path / "bits" / "key")
    assert code == 0
    assert (tmp_path / "bits" / "key.txt").read_text() == json.loads(response.read_text())["data"]["key"]["bits"]
    assert (tmp_path / "bits" / "key.bin").exists()


def test_reconstruct_rejects_foreign_key(tmp_path, config_file, device_file, capsys):
    for seed in (1, 2):
        assert _run(capsys, "respond", "--config", config_file, "--device", device_file,
                    "--challenge-seed", seed, "--out", tmp_path / f"r{seed}.json")[0] == 0
    helper = tmp_path / "helper.json"
    assert _run(capsys, "enroll", "--config", config_file, "--key", tmp_path / "r1.json", "-t", 1,
                "--out", helper)[0] == 0
    code, out = _run(capsys, "reconstruct", "--config", config_file, "--helper", helper,
                     "--key", tmp_path / "r2.json")
    assert code == 2
    assert "ReconstructionRejected" in json.loads(out)["errors"]


def test_corpus_then_nist(tmp_path, config_file, device_file, capsys):
    calibration = tmp_path / "cal.json"
    assert _run(capsys, "calibrate", "--config", config_file, "--device", device_file,
                "--out", calibration)[0] == 0
    corpus = tmp_path / "corpus.bin"
    code, out = _run(capsys, "corpus", "--config", config_file, "--device", device_file,
                     "--calibration", calibration, "--count", 3, "--out", corpus)
    assert code == 0
    assert json.loads(out)["data"]["total_bits"] == 3 * 52

    report_dir = tmp_path / "nist"
    code = main([str(a) for a in ("nist", "--config", config_file, "--input", corpus, "--lenient",
                                  "--permute-block", 52, "--out", report_dir)])
    captured = capsys.readouterr()
    assert code == 0
    assert json.loads(captured.out)["success"] is True
    assert "STATISTICAL TEST" in captured.err
    assert (report_dir / "battery.json").exists()
    assert (report_dir / "battery.txt").read_text().startswith("   P-VALUE")


def test_sweep_ecc_and_bitgrid(tmp_path, config_file, capsys):
    code, out = _run(capsys, "sweep", "ecc", "--config", config_file, "--out", tmp_path / "ecc", "--jobs", 2)
    assert code == 0
    data = _summary(out)["data"]
    assert data["kind"] == "ecc" and data["rows"] == 2
    assert (tmp_path / "ecc" / "ecc.csv").read_text().splitlines()[0].startswith("t,m,parity_bits")

    code, out = _run(capsys, "sweep", "bitgrid", "--config", config_file, "--out", tmp_path / "grid")
    assert code == 0
    assert _summary(out)["data"]["rows"] == 4
    for name in ("bitgrid.csv", "hist_intra.csv", "hist_inter.csv", "bitgrid.json"):
        assert (tmp_path / "grid" / name).exists()


def test_unexpected_error_exits_with_one(tmp_path, config_file, capsys):
    with patch("app.cli.commands.device.fabricate", side_effect=RuntimeError("boom")):
        code, out = _run(capsys, "fabricate", "--config", config_file, "--out", tmp_path / "d.json")
    assert code == 1
    payload = json.loads(out.strip().splitlines()[-1])
    assert payload["success"] is False and payload["code"] == 1
    assert not (tmp_path / "d.json").exists()
