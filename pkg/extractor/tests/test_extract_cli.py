"""The extract command end to end, including the consumer-side validator."""

import json
import subprocess
import sys

import pytest

from fergrid_extract.cli import main

from conftest import write_corpus, write_manifest


def run_primary_validate(store_path):
    """The downstream simulator's own validator, as a real subprocess."""
    return subprocess.run(
        [sys.executable, "-m", "fergrid.cli", "validate", "--store", str(store_path)],
        capture_output=True, text=True)


def stderr_error(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_extract_then_downstream_validate(corpus_dir, tmp_path, capsys):
    out = tmp_path / "store.embs"
    rc = main(["--manifest", str(corpus_dir / "manifest.csv"),
               "--sigmas", "0,1,2,3,4", "--encoder", "grid:64",
               "--out", str(out)])
    assert rc == 0
    assert f"wrote {out}: 140 records from 28 images" in capsys.readouterr().out

    result = run_primary_validate(out)
    assert result.returncode == 0, result.stderr
    assert "OK" in result.stdout


def test_default_sigma_list(tmp_path, capsys):
    rows = write_corpus(tmp_path, groups=("g",), identities=("i",),
                        expressions=("fear",))
    manifest = write_manifest(tmp_path / "m.csv", rows)
    out = tmp_path / "store.embs"
    assert main(["--manifest", manifest, "--encoder", "grid:8",
                 "--out", str(out)]) == 0
    assert "5 records" in capsys.readouterr().out


def test_missing_manifest(tmp_path, capsys):
    assert main(["--manifest", str(tmp_path / "absent.csv"),
                 "--encoder", "grid:8", "--out", str(tmp_path / "o.embs")]) == 1
    assert stderr_error(capsys)["error"] == "DataError"


def test_bad_sigmas(tmp_path, capsys):
    rows = write_corpus(tmp_path, groups=("g",), identities=("i",),
                        expressions=("sad",))
    manifest = write_manifest(tmp_path / "m.csv", rows)
    assert main(["--manifest", manifest, "--sigmas", "0,two",
                 "--encoder", "grid:8", "--out", str(tmp_path / "o.embs")]) == 1
    err = stderr_error(capsys)
    assert err["error"] == "ConfigError"
    assert "0,two" in err["message"]


def test_unknown_encoder(tmp_path, capsys):
    rows = write_corpus(tmp_path, groups=("g",), identities=("i",),
                        expressions=("sad",))
    manifest = write_manifest(tmp_path / "m.csv", rows)
    assert main(["--manifest", manifest, "--encoder", "warp:9",
                 "--out", str(tmp_path / "o.embs")]) == 1
    assert stderr_error(capsys)["error"] == "EncoderError"
