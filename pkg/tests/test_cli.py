import json

import pytest

from bellchains import claims, cli
from bellchains.claims import ClaimRecord, Report, RunManifest


def run(capsys, *argv):
    try:
        code = cli.main(list(argv))
    except SystemExit as e:  # argparse rejects bad flags before main's handler
        code = e.code
    out = capsys.readouterr()
    return code, out.out, out.err


def fake_report(*verdict_flags):
    recs = []
    for i, flag in enumerate(verdict_flags):
        computed = 1.0 if flag == "ok" else 2.0
        recs.append(ClaimRecord.judge(f"c{i}", "g", 1.0, computed, "triplet-cal", 1e-9, ambiguous=flag == "amb"))
    manifest = RunManifest("0", 0, "triplet-cal", "calibrated", 1, 1, 1, {"quoted": 5e-3, "exact": 1e-9}, "t")
    return Report(manifest, recs, [])


@pytest.mark.parametrize("flags,code", [(("ok",), 0), (("ok", "amb"), 3), (("ok", "amb", "bad"), 2)])
def test_verify_exit_codes(monkeypatch, capsys, flags, code):
    monkeypatch.setattr(claims, "verify_all", lambda *a, **k: fake_report(*flags))
    got, out, _ = run(capsys, "verify", "--format", "json")
    assert got == code
    assert len(json.loads(out)["claims"]) == len(flags)


def test_verify_passes_flags(monkeypatch, capsys, tmp_path):
    seen = {}

    def fake(policy, seed, trials, length, tolerances, restarts, workers, timestamp):
        seen.update(policy=policy, seed=seed, trials=trials, length=length, tol=tolerances, restarts=restarts)
        return fake_report("ok")

    monkeypatch.setattr(claims, "verify_all", fake)
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed = 5\ntrials = 7\npreset = section2\n")
    out = tmp_path / "report.txt"
    code, _, _ = run(capsys, "verify", "--config", str(cfg), "--seed", "9", "--tolerance", "0.01", "--out", str(out))
    assert code == 0
    assert seen == dict(policy="section2", seed=9, trials=7, length=1000, tol={"quoted": 0.01}, restarts=64)
    assert out.read_text().startswith("bellchains")


def test_usage_errors_exit_one(capsys, tmp_path):
    assert run(capsys, "verify", "--bogus")[0] == 1
    assert run(capsys)[0] == 1
    assert run(capsys, "show-state", "S9.9")[0] == 1
    assert run(capsys, "simulate", "--preset", "nope")[0] == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert run(capsys, "verify", "--config", str(bad))[0] == 1
    assert run(capsys, "optimize", "--space", "biphoton")[0] == 1  # partition missing


def test_show_state(capsys):
    code, out, _ = run(capsys, "show-state", "S4.6")
    assert code == 0
    assert "Alice-Bob" in out and "index=0.853553" in out and "stated=0.85" in out
    code, out, _ = run(capsys, "show-state")
    assert out.count("roster:") == 19


def test_simulate_json_and_trace(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    code, out, _ = run(
        capsys, "simulate", "--state", "t", "--trials", "4", "--length", "100", "--seed", "2",
        "--format", "json", "--trace", str(trace),
    )
    assert code == 0
    (row,) = json.loads(out)
    assert row["pair"] == "Alice-Bob" and row["L"] == 100 and row["seed"] == 2
    assert row["exact"] == pytest.approx(0.8535533905932737)
    assert trace.read_text().splitlines()[0] == "trial,position,participant_id,kind,outcome,shift"
    again = run(capsys, "simulate", "--state", "t", "--trials", "4", "--length", "100", "--seed", "2", "--format", "json")[1]
    assert again == out


def test_simulate_state_text_and_pair_filter(capsys):
    code, out, _ = run(capsys, "simulate", "--state-text", "|000> + |011>", "--pair", "natalia-bob", "--trials", "2", "--length", "100")
    assert code == 0
    assert "Natalia-Bob" in out and "Alice-Bob" not in out


def test_optimize_commands(capsys):
    code, out, _ = run(capsys, "optimize", "--objective", "single", "--participants", "2", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["value"] == pytest.approx(2**-0.5, abs=1e-10) and doc["space"] == "unrestricted"
    code, out, _ = run(capsys, "optimize", "--objective", "sum", "--space", "classical", "--participants", "4")
    assert "value    = 3.000000000000" in out
    code, out, _ = run(
        capsys, "optimize", "--space", "biphoton-bell", "--partition", "02|1", "--restarts", "4", "--format", "json"
    )
    assert json.loads(out)["value"] == pytest.approx(1 + 2**-0.5 / 2, abs=1e-8)
