import json
import subprocess
import sys

import pytest

from vqdemark import load_image
from vqdemark.cli import main


@pytest.fixture
def phantom_file(tmp_path):
    path = tmp_path / "ph.pgm"
    rc = main([
        "phantom", "--width", "48", "--height", "48", "--cx", "24", "--cy", "24",
        "--radius", "8", "--seed", "4", "--out", str(path),
    ])
    assert rc == 0
    return path


FAST = ["--codebook-size", "16", "--groups", "4"]


# ---------------------------------------------------------------------------
# exit codes
# ---------------------------------------------------------------------------

def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["vq"])  # missing input
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["vq", "x.pgm", "--codebook-size", "lots"])
    assert exc.value.code == 1
    capsys.readouterr()


def test_missing_input_exits_2(tmp_path, capsys):
    rc = main(["vq", str(tmp_path / "absent.pgm"), "--out", str(tmp_path)])
    assert rc == 2
    assert "i/o error" in capsys.readouterr().err


def test_garbage_input_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"not an image at all")
    rc = main(["vq", str(bad), "--out", str(tmp_path)])
    assert rc == 2
    capsys.readouterr()


def test_invalid_config_exits_3(phantom_file, tmp_path, capsys):
    rc = main(["vq", str(phantom_file), "--codebook-size", "100", "--out", str(tmp_path)])
    assert rc == 3
    assert "invalid request" in capsys.readouterr().err
    rc = main(["vq", str(phantom_file), "--block", "0x3", "--out", str(tmp_path)])
    assert rc == 3
    capsys.readouterr()


def test_bad_truth_exits_3(phantom_file, tmp_path, capsys):
    rc = main(["compare", str(phantom_file), *FAST, "--truth", "24,24"])
    assert rc == 3
    capsys.readouterr()


def test_bad_thread_env_exits_3(phantom_file, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("VQDEMARK_THREADS", "many")
    rc = main(["vq", str(phantom_file), *FAST, "--out", str(tmp_path / "o")])
    assert rc == 3
    capsys.readouterr()


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def test_phantom_writes_loadable_image(phantom_file):
    img = load_image(phantom_file)
    assert (img.width, img.height) == (48, 48)


def test_vq_writes_cluster_outputs(phantom_file, tmp_path, capsys):
    out = tmp_path / "vq_out"
    rc = main(["vq", str(phantom_file), *FAST, "--out", str(out)])
    assert rc == 0
    names = {p.name for p in out.iterdir()}
    assert names == (
        {f"cluster_{g}.pgm" for g in range(4)}
        | {f"edges_{g}.pgm" for g in range(4)}
        | {f"overlay_{g}.pgm" for g in range(4)}
    )
    printed = capsys.readouterr().out.strip().splitlines()
    assert len(printed) == 12


def test_glcm_writes_feature_maps(phantom_file, tmp_path, capsys):
    out = tmp_path / "glcm_out"
    rc = main(["glcm", str(phantom_file), *FAST, "--out", str(out)])
    assert rc == 0
    assert {p.name for p in out.iterdir()} == {
        "glcm_probability.pgm", "glcm_probability_eq.pgm",
        "glcm_entropy.pgm", "glcm_entropy_eq.pgm",
    }
    capsys.readouterr()


def test_watershed_writes_overlay(phantom_file, tmp_path, capsys):
    out = tmp_path / "ws_out"
    rc = main(["watershed", str(phantom_file), *FAST, "--out", str(out)])
    assert rc == 0
    assert {p.name for p in out.iterdir()} == {"watershed.pgm"}
    capsys.readouterr()


def test_canny_subcommand(phantom_file, tmp_path, capsys):
    out = tmp_path / "canny_out"
    rc = main(["canny", str(phantom_file), "--sigma", "1.0", "--out", str(out)])
    assert rc == 0
    assert (out / "canny_edges.pgm").exists()
    rc = main(["canny", str(phantom_file), "--overlay", "--out", str(out)])
    assert rc == 0
    assert (out / "canny_overlay.pgm").exists()
    capsys.readouterr()


def test_compare_prints_report(phantom_file, capsys):
    rc = main(["compare", str(phantom_file), *FAST, "--truth", "24,24,8"])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["codebook_size"] == 16
    assert report["phantom_metrics"] is not None


def test_pipeline_emit_subset(phantom_file, tmp_path, capsys):
    out = tmp_path / "p_out"
    rc = main([
        "pipeline", str(phantom_file), *FAST,
        "--emit", "report", "--out", str(out),
    ])
    assert rc == 0
    assert {p.name for p in out.iterdir()} == {"report.json"}
    report = json.loads(capsys.readouterr().out)
    assert report["group_count"] == 4


# ---------------------------------------------------------------------------
# config file handling
# ---------------------------------------------------------------------------

def test_config_file_with_section(phantom_file, tmp_path, capsys):
    ini = tmp_path / "conf.ini"
    ini.write_text("[pipeline]\ncodebook_size = 16\ngroups = 4\nsigma = 1.0\n")
    rc = main(["compare", str(phantom_file), "-c", str(ini)])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["codebook_size"] == 16
    assert report["group_count"] == 4


def test_config_file_bare_keys(phantom_file, tmp_path, capsys):
    ini = tmp_path / "conf.ini"
    ini.write_text("codebook_size = 16\ngroups = 2\n")
    rc = main(["compare", str(phantom_file), "-c", str(ini)])
    assert rc == 0
    assert json.loads(capsys.readouterr().out)["group_count"] == 2


def test_flags_override_config_file(phantom_file, tmp_path, capsys):
    ini = tmp_path / "conf.ini"
    ini.write_text("[pipeline]\ncodebook_size = 16\ngroups = 4\n")
    rc = main(["compare", str(phantom_file), "-c", str(ini), "--groups", "2"])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["codebook_size"] == 16   # from the file
    assert report["group_count"] == 2      # flag wins


def test_bad_config_value_exits_3(phantom_file, tmp_path, capsys):
    ini = tmp_path / "conf.ini"
    ini.write_text("[pipeline]\ncodebook_size = big\n")
    rc = main(["compare", str(phantom_file), "-c", str(ini)])
    assert rc == 3
    capsys.readouterr()


def test_missing_config_file_exits_2(phantom_file, tmp_path, capsys):
    rc = main(["compare", str(phantom_file), "-c", str(tmp_path / "none.ini")])
    assert rc == 2
    capsys.readouterr()


def test_console_script_is_wired():
    out = subprocess.run(
        [sys.executable, "-m", "vqdemark.cli", "--help"],
        capture_output=True, text=True,
    )
    assert out.returncode == 0
    assert "pipeline" in out.stdout
