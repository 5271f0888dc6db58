import json

import mpmath
from mpmath import mpf

from chlab.cli import main


def run(tmp_path, name, cfg, command, extra=()):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    return main([command, "--config", str(path), "--out", str(out), *extra]), out


def read_csv(path):
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:]]


PEAKON_CFG = {
    "peakon": {"speeds": [1, 2], "phases": [0, 0], "times": [0]},
    "grid": {"start": -5, "stop": 5, "points": 21},
}


def test_peakon_single_value_at_crest(tmp_path):
    cfg = {
        "peakon": {"speeds": [2], "phases": [0], "times": [0]},
        "grid": {"start": float(mpmath.log(2)), "stop": 1.0, "points": 2},
    }
    code, out = run(tmp_path, "c.json", cfg, "peakon")
    assert code == 0
    header, rows = read_csv(out / "peakon_profile_t0.csv")
    assert header == ["x", "u"]
    # the first grid point is ln 2 up to float rounding; u there is c = 2
    assert abs(mpf(rows[0][1]) - 2) < mpf("1e-15")
    header, rows = read_csv(out / "peakon_state_t0.csv")
    assert header == ["i", "m_i", "x_i", "c_i"]
    assert mpf(rows[0][1]) == 2


def test_peakon_deterministic_output(tmp_path):
    code, out = run(tmp_path, "c.json", PEAKON_CFG, "peakon")
    assert code == 0
    first = (out / "peakon_profile_t0.csv").read_bytes()
    code, out = run(tmp_path, "c.json", PEAKON_CFG, "peakon")
    assert code == 0
    assert (out / "peakon_profile_t0.csv").read_bytes() == first


def test_empty_grid_rejected(tmp_path):
    cfg = {"peakon": PEAKON_CFG["peakon"], "grid": {"start": 0, "stop": 1, "points": 0}}
    code, _ = run(tmp_path, "c.json", cfg, "peakon")
    assert code == 2


def test_unknown_key_rejected(tmp_path):
    cfg = {"peakon": dict(PEAKON_CFG["peakon"], bogus=1), "grid": PEAKON_CFG["grid"]}
    code, _ = run(tmp_path, "c.json", cfg, "peakon")
    assert code == 2


def test_missing_config_file(tmp_path):
    assert main(["peakon", "--config", str(tmp_path / "nope.json")]) == 2


def test_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["peakon", "--config", str(path)]) == 2


def test_soliton_positive_profile(tmp_path):
    cfg = {
        "soliton": {"kappa": 0.5, "wave_numbers": [1.2], "times": [0]},
        "grid": {"start": -30, "stop": 30, "points": 31},
    }
    code, out = run(tmp_path, "c.json", cfg, "soliton")
    assert code == 0
    _, rows = read_csv(out / "soliton_profile_t0.csv")
    us = [mpf(r[1]) for r in rows]
    assert all(u > 0 for u in us)
    assert us[0] < mpf("1e-6") and us[-1] < mpf("1e-6")


def test_soliton_alpha_shifts_parametric_x(tmp_path):
    base = {
        "soliton": {"kappa": 0.5, "wave_numbers": [1.2], "times": [0],
                    "parametric_points": 7},
        "grid": {"start": -4, "stop": 4, "points": 5},
    }
    code, out = run(tmp_path, "a.json", base, "soliton")
    assert code == 0
    _, rows0 = read_csv(out / "soliton_parametric_t0.csv")
    shifted = {**base, "soliton": dict(base["soliton"], alpha=1.0)}
    code, out = run(tmp_path, "b.json", shifted, "soliton")
    assert code == 0
    _, rows1 = read_csv(out / "soliton_parametric_t0.csv")
    for r0, r1 in zip(rows0, rows1):
        assert abs(mpf(r1[1]) - mpf(r0[1]) - 1) < mpf("1e-70")  # x shifts by alpha
        assert mpf(r1[2]) == mpf(r0[2])                         # u unchanged


def test_soliton_duplicate_wave_numbers_rejected(tmp_path):
    cfg = {
        "soliton": {"kappa": 0.2, "wave_numbers": [1.0, 1.0]},
        "grid": {"start": -1, "stop": 1, "points": 3},
    }
    code, _ = run(tmp_path, "c.json", cfg, "soliton")
    assert code == 2


def test_limit_breakpoints_fixture(tmp_path, capsys):
    code, out = run(tmp_path, "c.json", PEAKON_CFG, "limit")
    assert code == 0
    _, rows = read_csv(out / "limit_breakpoints_t0.csv")
    assert abs(mpf(rows[0][1]) - mpmath.log(mpf(2) / 5)) < mpf("1e-70")
    assert abs(mpf(rows[1][1]) - mpmath.log(4)) < mpf("1e-70")
    summary = capsys.readouterr().out
    value = mpf(summary.split()[-1])
    assert value <= mpf("1e-35")


def test_limit_single_point_grid(tmp_path):
    cfg = {"peakon": {"speeds": [2], "phases": [0], "times": [0]},
           "grid": {"start": 0.5, "stop": 0.5, "points": 1}}
    code, out = run(tmp_path, "c.json", cfg, "limit")
    assert code == 0
    _, rows = read_csv(out / "limit_profile_t0.csv")
    assert len(rows) == 1


def test_verify_small_corpus_passes(tmp_path):
    cfg = {"verify": {"instances": 5, "max_n": 3, "samples": 3, "yt_samples": 4}}
    code, out = run(tmp_path, "c.json", cfg, "verify")
    assert code == 0
    report = json.loads((out / "verify_report.json").read_text())
    assert report["ok"]
    assert mpf(report["families"]["identity_suite"]["max_residual"]) <= mpf("1e-40")


def test_verify_unattainable_threshold_exits_4(tmp_path):
    cfg = {"verify": {"instances": 2, "max_n": 2, "samples": 1, "yt_samples": 2,
                      "threshold": 1e-100}}
    code, out = run(tmp_path, "c.json", cfg, "verify")
    assert code == 4
    report = json.loads((out / "verify_report.json").read_text())
    assert not report["ok"]
    assert report["failures"]  # failing instances serialized for replay


def test_verify_zero_corpus_rejected(tmp_path):
    cfg = {"verify": {"instances": 0}}
    code, _ = run(tmp_path, "c.json", cfg, "verify")
    assert code == 2


def test_converge_small_sweep(tmp_path):
    cfg = {"peakon": {"speeds": [2], "phases": [0]},
           "sweep": {"kappas": [0.5, 0.25, 0.125], "grid_points": 41}}
    code, out = run(tmp_path, "c.json", cfg, "converge")
    assert code == 0
    payload = json.loads((out / "converge.json").read_text())
    assert payload["ok"]
    assert payload["config_echo"]["peakon"]["speeds"] == [2]
    ds = [mpf(e["d_shift"]) for e in payload["entries"]]
    assert ds[0] > ds[1] > ds[2]


def test_converge_flags_bad_entry(tmp_path):
    cfg = {"peakon": {"speeds": [0.4], "phases": [0]},
           "sweep": {"kappas": [0.5, 0.125], "grid_points": 21}}
    code, out = run(tmp_path, "c.json", cfg, "converge")
    payload = json.loads((out / "converge.json").read_text())
    assert payload["entries"][0]["error"] is not None
    assert payload["entries"][1]["error"] is None
    assert code == 5  # the flagged entry fails the acceptance gate


def test_converge_deterministic(tmp_path):
    cfg = {"peakon": {"speeds": [2], "phases": [0]},
           "sweep": {"kappas": [0.5, 0.25, 0.125], "grid_points": 21}}
    code, out = run(tmp_path, "c.json", cfg, "converge")
    assert code == 0
    first = (out / "converge.csv").read_bytes(), (out / "converge.json").read_bytes()
    code, out = run(tmp_path, "c.json", cfg, "converge")
    assert ((out / "converge.csv").read_bytes(), (out / "converge.json").read_bytes()) == first
