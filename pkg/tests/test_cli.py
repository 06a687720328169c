import json
from pathlib import Path

import pytest

from transmon_twin.cli import DEFAULT_SEED, SCHEMAS, run
from transmon_twin.data import load_table2

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _run(capsys, *argv):
    code = run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def _cfg(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def test_quantize_qb0_within_documented_tolerance(tmp_path, capsys):
    code, _, _ = _run(capsys, "quantize", "--format", "json", "--out", tmp_path)
    assert code == 0
    rec = json.loads((tmp_path / "quantize.json").read_text())
    exp = load_table2()["QB-0"]["expected"]
    assert rec["f_q"] == pytest.approx(exp["f_q"], abs=1e3)
    assert rec["g"] == pytest.approx(exp["g"], rel=0.02)
    assert rec["alpha"] == pytest.approx(exp["alpha"], rel=0.10)
    # expected column lists |chi|; the computed shift is negative below the resonator
    assert abs(rec["chi"]) == pytest.approx(exp["chi"], rel=0.10)
    assert rec["dispersive"] is True


def test_manifest_records_config_and_digests(tmp_path, capsys):
    assert _run(capsys, "quantize", "--out", tmp_path)[0] == 0
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["config"]["seed"] == DEFAULT_SEED
    assert set(man["outputs"]) == {"quantize.csv"}
    assert not list(tmp_path.glob(".*tmp*"))


def test_synth_fit_report_bytes_identical(tmp_path, capsys):
    def pipeline(root):
        assert _run(capsys, "synth", "--seed", 7, "--out", root / "s")[0] == 0
        traces = sorted(str(p) for p in (root / "s" / "traces").glob("*.csv"))
        fc = _cfg(root, "fit.json", {"traces": traces})
        assert _run(capsys, "fit", "--config", fc, "--out", root / "f")[0] == 0
        fits = sorted(str(p) for p in (root / "f" / "fits").glob("*.json") if "readout" not in p.name)
        rc = _cfg(root, "rep.json", {"fits": fits, "ground": str(root / "s/traces/readout_ground.csv"),
                                     "excited": str(root / "s/traces/readout_excited.csv")})
        assert _run(capsys, "report", "--config", rc, "--out", root / "r")[0] == 0
        # manifests and configs embed the (different) absolute paths
        skip = {"manifest.json", "fit.json", "rep.json"}
        return {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*"))
                if p.is_file() and p.name not in skip}

    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    ra, rb = pipeline(a), pipeline(b)
    assert ra.keys() == rb.keys()
    assert ra == rb
    text = (a / "r" / "table2.txt").read_text()
    assert "chi/2pi [kHz]" in text and "Exp. QB-0" in text


def test_same_seed_same_qnd_output(tmp_path, capsys):
    for d in ("x", "y"):
        assert _run(capsys, "qnd", "--trials", 2000, "--seed", 3, "--out", tmp_path / d)[0] == 0
    assert (tmp_path / "x/qnd.csv").read_bytes() == (tmp_path / "y/qnd.csv").read_bytes()
    assert (tmp_path / "x/manifest.json").read_bytes() == (tmp_path / "y/manifest.json").read_bytes()


def test_missing_input_exit_code_and_record(tmp_path, capsys):
    cfg = _cfg(tmp_path, "c.json", {"traces": ["absent.csv"]})
    code, _, err = _run(capsys, "fit", "--config", cfg, "--out", tmp_path / "o")
    assert code == 3
    rec = json.loads(err)
    assert rec["error"] == "missing_input" and rec["path"] == "absent.csv"
    assert not (tmp_path / "o").exists()


def test_missing_config_file(tmp_path, capsys):
    code, _, err = _run(capsys, "quantize", "--config", tmp_path / "nope.json")
    assert code == 3 and "nope.json" in json.loads(err)["path"]


@pytest.mark.parametrize("obj, key", [({"bogus": 1}, "bogus"), ({"qubit": 5}, "qubit")])
def test_invalid_config_exit_2(tmp_path, capsys, obj, key):
    code, _, err = _run(capsys, "quantize", "--config", _cfg(tmp_path, "c.json", obj))
    assert code == 2 and json.loads(err)["key"] == key


def test_flag_for_wrong_command(capsys):
    code, _, err = _run(capsys, "quantize", "--trials", 10)
    assert code == 2 and json.loads(err)["key"] == "trials"


def test_runtime_failure_exit_1(tmp_path, capsys):
    code, _, err = _run(capsys, "xsect", "--resolution", 8, "--out", tmp_path)
    assert code == 1 and "resolution" in json.loads(err)["message"]


def test_dry_run_writes_nothing(tmp_path, capsys):
    code, out, _ = _run(capsys, "qnd", "--dry-run", "--trials", 50, "--out", tmp_path / "o")
    assert code == 0
    rec = json.loads(out)
    assert rec["valid"] and rec["config"]["trials"] == 50
    assert not (tmp_path / "o").exists()


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_configs_validate(path, capsys):
    command = {"quantize_qb1": "quantize", "epr_qb0": "epr", "xsect_convergence": "xsect",
               "budget_hybrid": "budget", "qnd_sweep": "qnd", "synth": "synth"}[path.stem]
    assert set(json.loads(path.read_text())) <= set(SCHEMAS[command]) | {"seed", "format"}
    assert _run(capsys, command, "--config", path, "--dry-run")[0] == 0


def test_budget_hybrid_example(tmp_path, capsys):
    code, _, _ = _run(capsys, "budget", "--config", CONFIGS / "budget_hybrid.json", "--format", "json",
                      "--out", tmp_path)
    assert code == 0
    rec = json.loads((tmp_path / "budget.json").read_text())
    # 0.35*feedline + 0.45*pad surface participations
    assert rec["participation"]["SA"] == pytest.approx(0.35 * 1.81e-4 + 0.45 * 1.0e-4)
    assert rec["T1_total"] < min(rec["T1_TLS"], rec["T1_Purcell"])


def test_xsect_output_feeds_budget(tmp_path, capsys):
    assert _run(capsys, "xsect", "--resolution", 64, "--convergence", "64,72,80", "--out", tmp_path / "x")[0] == 0
    assert (tmp_path / "x" / "convergence.csv").exists()
    (tmp_path / "regions.csv").write_text("region,F\nline,0.5\n")
    cfg = _cfg(tmp_path, "b.json", {"energy_report": "regions.csv", "region_xsect": {"line": "x/xsect.csv"}})
    assert _run(capsys, "budget", "--config", cfg, "--format", "json", "--out", tmp_path / "b")[0] == 0
    xs = {r.split(",")[0]: float(r.split(",")[1]) for r in (tmp_path / "x/xsect.csv").read_text().split()[1:]
          if r.startswith("fractions.")}
    rec = json.loads((tmp_path / "b" / "budget.json").read_text())
    assert rec["participation"]["MA"] == pytest.approx(0.5 * xs["fractions.MA"], rel=1e-12)


def test_bad_convergence_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["xsect", "--convergence", "64,abc"])
    assert exc.value.code == 2
