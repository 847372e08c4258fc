import json

import numpy as np
import pytest

from bellchains import claims
from bellchains.chsh import SECTION2, TRIPLET_CAL
from bellchains.claims import ClaimRecord, Verdict, emit_report, load_registry, read_csv_report, verify_all

REGRESSION_GATE = [
    "tsirelson.triplet",
    "tsirelson.max-xi",
    "classical.max-xi",
    "classical.max-index",
    "three.classical-sum",
    "four.classical-sum",
    "four.max-sum.biphoton-bell",
    "three.differentiation",
]


def test_registry_counts_and_ids():
    reg = load_registry()
    groups = [s.group for s in reg]
    assert groups.count("three-party") == 6
    assert groups.count("four-party") == 8
    assert sum(s.id.startswith("S6.3") for s in reg) == 2
    assert sum(s.id.startswith("S6.4") for s in reg) == 2
    assert len({s.id for s in reg}) == len(reg) == 18
    for s in reg:
        assert abs(np.linalg.norm(s.state.amplitudes) - 1) <= 1e-12


def test_registry_transcriptions():
    g = claims.lookup_state("S5.G1.1").state.amplitudes
    np.testing.assert_allclose(g[[0b0011, 0b0110, 0b1001, 0b1100]], 0.5, atol=1e-15)
    s = claims.lookup_state("s4.3").state.amplitudes
    np.testing.assert_allclose(s[[0, 3]], 1 / np.sqrt(2), atol=1e-15)
    m = claims.lookup_state("S6.4A").state.amplitudes
    np.testing.assert_allclose(m[[0, 3, 12, 15]], 0.5, atol=1e-15)
    assert [p.id for p in claims.lookup_state("S4.1").participants] == ["Alice", "Natalia", "Bob"]
    assert [p.id for p in claims.lookup_state("S5.G2.1").participants] == ["Alice", "Natasha", "Bob", "Ivan"]


def test_unspecified_claims_for_states_entangling_other_pairs():
    for sid in ("S4.2", "S4.3", "S4.4"):
        s = claims.lookup_state(sid)
        assert all(s.claim(p) is None for p in s.pairs)
    assert claims.lookup_state("S4.6").claim(claims.lookup_state("S4.6").pairs[0]) == 0.85


def test_lookup_unknown():
    with pytest.raises(KeyError):
        claims.lookup_state("S9.9")


def test_judge_rule():
    ok = ClaimRecord.judge("x", "g", 0.85, 0.8536, "p", 5e-3)
    bad = ClaimRecord.judge("x", "g", 0.85, 0.9, "p", 5e-3)
    amb = ClaimRecord.judge("x", "g", 1.157, 1.5, "p", 5e-3, ambiguous=True)
    assert (ok.verdict, bad.verdict, amb.verdict) == (Verdict.CONFIRMED, Verdict.REFUTED, Verdict.AMBIGUOUS)


def test_resolve_preset():
    assert claims.resolve_preset("calibrated")[0] is TRIPLET_CAL
    assert claims.resolve_preset("section2") == (SECTION2, None)


def test_verify_regression_gate(verify_report):
    for cid in REGRESSION_GATE:
        assert verify_report.record(cid).verdict is Verdict.CONFIRMED, cid
    for r in verify_report.records:
        if r.id.startswith("S6."):
            assert r.verdict is Verdict.CONFIRMED and r.tolerance == 1e-9


def test_verify_record_invariant(verify_report):
    for r in verify_report.records:
        assert (r.verdict is Verdict.CONFIRMED) == (abs(r.paper - r.computed) <= r.tolerance)


def test_verify_specific_verdicts(verify_report):
    r = verify_report.record("S4.6:Alice-Bob")
    assert r.verdict is Verdict.CONFIRMED and r.computed == pytest.approx(0.853553, abs=1e-6)
    assert verify_report.record("three.max-sum").verdict is Verdict.AMBIGUOUS
    assert "no optimization domain" in verify_report.record("three.max-sum").note
    assert verify_report.record("minimal.min-max.four").computed == pytest.approx(0.25, abs=1e-7)
    assert verify_report.record("four.max-sum.biphoton").verdict is Verdict.REFUTED
    assert verify_report.exit_code == 2
    assert verify_report.manifest.preset == "triplet-cal"


def test_verify_monte_carlo_readings(verify_report):
    for p in verify_report.readings:
        assert abs(p.mc_estimate - p.exact) <= 5 * p.mc_stderr


def test_report_determinism():
    kw = dict(seed=3, trials=4, length=50, restarts=4, timestamp="2000-01-01T00:00:00Z")
    assert emit_report(verify_all(**kw), "json") == emit_report(verify_all(**kw), "json")


def test_json_single_confirmed():
    rec = ClaimRecord.judge("tsirelson.triplet", "bell-pair", 0.5, 0.5, "triplet-cal", 1e-9)
    doc = json.loads(emit_report([rec], "json"))
    assert set(doc) >= {"manifest", "claims"}
    assert len(doc["claims"]) == 1
    assert doc["claims"][0]["verdict"] == "confirmed"
    assert set(doc["claims"][0]) >= {"id", "paper", "computed", "tolerance", "verdict", "note"}


def test_text_markers():
    recs = [
        ClaimRecord.judge("a", "g", 1.0, 1.0, "p", 1e-9),
        ClaimRecord.judge("b", "g", 1.0, 2.0, "p", 1e-9, note="off by one"),
        ClaimRecord.judge("c", "g", 1.0, 3.0, "p", 1e-9, note="unclear", ambiguous=True),
    ]
    text = emit_report(recs, "text")
    lines = text.splitlines()
    assert any(line.startswith("!! REFUTED") and " b " in line for line in lines)
    assert any(line.startswith("?? AMBIGUOUS") and " c " in line for line in lines)
    assert "note: off by one" in text and "note: unclear" in text


def test_csv_round_trip(verify_report):
    text = emit_report(verify_report, "csv")
    back = read_csv_report(text)
    assert len(back) == len(verify_report.records)
    for a, b in zip(verify_report.records, back):
        assert (a.paper, a.computed, a.tolerance, a.mc_estimate, a.mc_stderr) == (
            b.paper, b.computed, b.tolerance, b.mc_estimate, b.mc_stderr,
        )
        assert a.verdict is b.verdict and a.id == b.id


def test_emit_errors():
    with pytest.raises(ValueError):
        emit_report([], "json")
    with pytest.raises(ValueError):
        emit_report([ClaimRecord.judge("a", "g", 1.0, 1.0, "p", 1e-9)], "xml")


def test_exit_codes():
    ok = ClaimRecord.judge("a", "g", 1, 1, "p", 0)
    bad = ClaimRecord.judge("b", "g", 1, 2, "p", 0)
    amb = ClaimRecord.judge("c", "g", 1, 2, "p", 0, ambiguous=True)
    assert claims.verdict_exit_code([ok]) == 0
    assert claims.verdict_exit_code([ok, amb]) == 3
    assert claims.verdict_exit_code([ok, amb, bad]) == 2
