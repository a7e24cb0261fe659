import json
import math
import subprocess
import sys

import pytest

from bulkuniv import cli
from bulkuniv.cli import ConfigError, RunConfig, cache_ops, main, run_suite


def _manifest(out):
    return json.loads((out / "manifest.json").read_text())


def test_dets_config_end_to_end(tmp_path):
    man = run_suite(RunConfig.from_dict({"m": 2, "N": [20], "suites": ["dets"], "out_dir": str(tmp_path)}))
    assert man.passed and man.suites["dets"]["status"] == "pass"
    rows = (tmp_path / "dets.csv").read_text().splitlines()
    assert rows[0].startswith("m,det_Tm_prime")
    assert rows[1].split(",")[0] == "2"
    assert _manifest(tmp_path)["suites"]["dets"]["status"] == "pass"


def test_empty_suite_list(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"suites": [], "out_dir": str(tmp_path / "o")}))
    assert main(["run", "--config", str(cfg)]) == 0
    assert _manifest(tmp_path / "o")["suites"] == {}


def test_odd_N_rejected_before_computation(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["universality", "--m", "1", "--N", "21", "--out", str(out)]) == 2
    assert "even" in capsys.readouterr().err
    assert not out.exists()


@pytest.mark.parametrize("d", [{"suites": ["nope"]}, {"bogus": 1}, {"m": 1, "suites": ["dets"]},
                               {"potential": "k3=1"}, {"precision_bits": 32}, {"betas": [2]}])
def test_config_validation(d):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(d)


def test_config_hash_ignores_output_location():
    a = RunConfig.from_dict({"out_dir": "x", "jobs": 1})
    b = RunConfig.from_dict({"out_dir": "y", "jobs": 3})
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != RunConfig.from_dict({"m": 3}).config_hash()


def test_m_range_syntax():
    assert cli._int_range("2..5") == [2, 3, 4, 5]
    assert cli._int_range("3,7") == [3, 7]


def test_cache_purge_empty(tmp_path):
    assert cache_ops("purge", tmp_path)["removed"] == 0


def test_cache_list_missing_directory(tmp_path):
    with pytest.raises(ConfigError):
        cache_ops("list", tmp_path / "missing")


@pytest.fixture()
def filled_cache(tmp_path):
    cdir = tmp_path / "cache"
    out = tmp_path / "out"
    rc = main(["recurrence", "--potential", "k2=1", "--jmax", "6", "--precision-bits", "128",
               "--cache-dir", str(cdir), "--out", str(out)])
    assert rc == 0
    return cdir, out


def test_recurrence_then_verify(filled_cache):
    cdir, out = filled_cache
    rows = (out / "recurrence.csv").read_text().splitlines()
    b0 = float(rows[1].split(",")[2])
    assert b0 == pytest.approx(math.sqrt(0.5), abs=1e-15)
    rep = cache_ops("verify", cdir)
    assert rep["ok"] and rep["checks"][0]["indices"][0] == 0
    assert all(v["rel_dev"] == 0.0 or v["rel_dev"] < 2.0 ** -88 for v in rep["checks"][0]["values"].values())


def test_cache_list_fields(filled_cache):
    cdir, _ = filled_cache
    (entry,) = cache_ops("list", cdir)["entries"]
    assert entry["coeffs"] == "k2=1" and entry["Jmax"] == 6 and entry["precision_bits"] == 128
    assert set(entry) == {"key", "coeffs", "Jmax", "precision_bits"}


def test_corrupt_entry_named_and_quarantined(filled_cache, capsys):
    cdir, _ = filled_cache
    bad = cdir / "deadbeef.json"
    bad.write_text("{not json")
    assert main(["cache", "verify", "--cache-dir", str(cdir)]) == 1
    rep = json.loads(capsys.readouterr().out)
    assert rep["corrupt"][0]["file"] == "deadbeef.json"
    assert not bad.exists() and (cdir / "quarantine" / "deadbeef.json").exists()
    # the healthy entry is still verified
    assert cache_ops("verify", cdir)["ok"]


def test_purge_removes_entries(filled_cache):
    cdir, _ = filled_cache
    assert cache_ops("purge", cdir)["removed"] == 1
    assert cache_ops("list", cdir)["entries"] == []


def test_reruns_are_byte_identical(tmp_path):
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        assert main(["dets", "--m", "2..4", "--out", str(out)]) == 0
        outs.append(out)
    for name in ("dets.csv", "bounds.csv", "dets.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    m0, m1 = (_manifest(o) for o in outs)
    m0.pop("timing"), m1.pop("timing")
    assert m0 == m1


def test_failing_suite_exit_code(tmp_path, monkeypatch, capsys):
    monkeypatch.setitem(cli._RUNNERS, "dets", lambda cfg, out: {"pass": False, "outputs": []})
    assert main(["dets", "--m", "2", "--out", str(tmp_path)]) == 1
    assert "dets" in capsys.readouterr().err


def test_hard_failure_is_named(tmp_path, monkeypatch, capsys):
    def boom(cfg, out):
        raise RuntimeError("broken")
    monkeypatch.setitem(cli._RUNNERS, "riccati", boom)
    assert main(["riccati", "--m", "2", "--out", str(tmp_path)]) == 1
    assert "riccati" in capsys.readouterr().err
    assert _manifest(tmp_path)["suites"]["riccati"]["error"] == "RuntimeError: broken"


def test_bad_flag_exit_code():
    assert main(["dets", "--m", "x"]) == 2


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "bulkuniv", "riccati", "--m", "2", "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert r.stdout.strip() == "riccati: pass"
