import csv
import json

import numpy as np
import pytest

from framesync.cli import main
from framesync.config import ConfigError, _build, parse_config, serialize_config


def test_bundled_scenario1_matches_published_setup(scenario1):
    g = scenario1.geometry
    assert (g.N, g.M, g.L_tot, g.L_sw) == (8, 2, 16, 12)
    np.testing.assert_array_equal(
        scenario1.sync_word.vector,
        [-1, 1, -1, 1, -1, 1, 1, -1, 1, -1, 1, -1],
    )
    assert scenario1.e_r0 == 3 and scenario1.e_r1 == 2


def test_bundled_scenario2_matches_published_setup(scenario2):
    g = scenario2.geometry
    assert (g.P_h, g.P_z) == (2, 8)
    np.testing.assert_array_equal(scenario2.sync_word.vector, np.ones(12))
    np.testing.assert_allclose(
        scenario2.noise.variance_profile,
        2.0 + np.cos(2 * np.pi * np.arange(8) / 8),
    )
    np.testing.assert_allclose(scenario2.channel.coeffs[1],
                               [0.53 + 0.62j, 0.41 + 0.37j, 0.20 - 0.34j])


def test_rejects_N_not_exceeding_memory(scenario1):
    doc = serialize_config(scenario1)
    doc["geometry"]["N"] = 2
    with pytest.raises(ConfigError, match="geometry"):
        _build(doc)


def test_rejects_wrong_sync_word_length(scenario1):
    doc = serialize_config(scenario1)
    doc["sync_word"] = doc["sync_word"][:-1]
    with pytest.raises(ConfigError, match="K\\*M"):
        _build(doc)


def test_rejects_sync_symbol_outside_constellation(scenario1):
    doc = serialize_config(scenario1)
    doc["sync_word"] = [-2] + doc["sync_word"][1:]
    with pytest.raises(ConfigError, match="not a symbol"):
        _build(doc)


def test_round_trip_is_stable(scenario1, scenario2, tmp_path):
    for cfg in (scenario1, scenario2):
        doc = serialize_config(cfg)
        p = tmp_path / f"{cfg.name}.json"
        p.write_text(json.dumps(doc))
        again = serialize_config(parse_config(p))
        assert again == doc


def test_missing_config_is_config_error():
    with pytest.raises(ConfigError, match="no such"):
        parse_config("nonexistent-scenario")


def test_sync_word_value_shorthand(scenario1):
    doc = serialize_config(scenario1)
    assert doc["sync_word"][0] == 0  # canonical form stores indices
    cfg = _build(doc)
    np.testing.assert_array_equal(cfg.sync_word.vector, scenario1.sync_word.vector)


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------


@pytest.fixture
def fast_config(tmp_path, scenario1):
    doc = serialize_config(scenario1)
    doc["trials"] = {"roc": 10, "search": 5, "validate": 1500}
    doc["snr_db"] = [0.0]
    doc["sw_search"] = {"snr_db": 0.0, "mode": "sample:3"}
    p = tmp_path / "fast.json"
    p.write_text(json.dumps(doc))
    return p


def test_cli_roc_smoke(fast_config, tmp_path):
    out = tmp_path / "roc_out"
    code = main(["roc", "--config", str(fast_config), "--out", str(out),
                 "--detectors", "ralrt,correlator"])
    assert code == 0
    rows = list(csv.DictReader(open(out / "roc.csv")))
    assert {r["detector"] for r in rows} == {"ralrt", "correlator"}
    assert (out / "roc_+0dB.png").stat().st_size > 0
    # reruns are bit-identical
    first = (out / "roc.csv").read_bytes()
    assert main(["roc", "--config", str(fast_config), "--out", str(out),
                 "--detectors", "ralrt,correlator"]) == 0
    assert (out / "roc.csv").read_bytes() == first


def test_cli_roc_dump_stats(fast_config, tmp_path):
    out = tmp_path / "stats_out"
    code = main(["roc", "--config", str(fast_config), "--out", str(out),
                 "--detectors", "correlator", "--dump-stats"])
    assert code == 0
    rows = list(csv.DictReader(open(out / "statistics.csv")))
    assert len(rows) == 20  # 10 trials per hypothesis
    assert {r["truth"] for r in rows} == {"H0", "H1"}
    assert set(rows[0]) == {"window_id", "truth", "detector", "value"}


def test_cli_missing_config_exits_2(tmp_path):
    assert main(["roc", "--config", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path)]) == 2


def test_cli_unknown_detector_exits_2(fast_config, tmp_path):
    assert main(["roc", "--config", str(fast_config), "--out", str(tmp_path),
                 "--detectors", "wizard"]) == 2


def test_cli_complexity_writes_published_values(tmp_path):
    out = tmp_path / "cx"
    assert main(["complexity", "--config", "scenario1", "--out", str(out)]) == 0
    rows = {r["detector"]: r for r in csv.DictReader(open(out / "complexity.csv"))}
    assert int(rows["lrt"]["cm"]) == 11_799_361
    assert int(rows["alrt"]["cm"]) == 7_145_169
    assert int(rows["ralrt"]["cm"]) == 944_486
    assert int(rows["correlator"]["cm"]) == 13
    assert int(rows["correlator"]["ca"]) == 11
    assert (out / "complexity.png").stat().st_size > 0


def test_cli_search_sw(fast_config, tmp_path):
    out = tmp_path / "search"
    code = main(["search-sw", "--config", str(fast_config), "--out", str(out),
                 "--mode", "sample:3", "--trials", "5"])
    assert code == 0
    lines = [json.loads(l) for l in open(out / "sw_search.jsonl")]
    assert len(lines) == 3
    assert all(set(line) == {"sw", "auc", "trials", "seed"} for line in lines)
    hist = list(csv.DictReader(open(out / "auc_hist.csv")))
    assert len(hist) == 50
    assert (out / "auc_pdf_cdf.png").stat().st_size > 0


def test_cli_validate_passes(fast_config, capsys):
    assert main(["validate", "--config", str(fast_config)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4 and all(l.startswith("[PASS]") for l in lines)


def test_cli_estimate_channel(fast_config, capsys):
    assert main(["estimate-channel", "--config", str(fast_config),
                 "--snr", "20"]) == 0
    out = capsys.readouterr().out
    assert "NMSE" in out and "phase 0" in out
