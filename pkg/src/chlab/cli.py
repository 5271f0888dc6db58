"""Command-line front end.

    chlab <peakon|soliton|limit|verify|converge> --config <path>
          [--out <dir>] [--seed <u64>] [--bits <n>]

One JSON config per run; unknown keys are rejected. All outputs are
deterministic functions of (config, seed) and files are written atomically.
Exit codes: 0 success, 2 validation, 3 inversion failure, 4 identity failure,
5 convergence-criteria failure. CHLAB_BITS overrides the default precision.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import tempfile
from pathlib import Path

from mpmath import mpf

from . import __version__
from .convergence import SweepConfig, run_sweep
from .corpus import (random_spectral_data, random_subset_spec, random_yt_samples)
from .hankel import IDENTITY_RTOL, identity_suite
from .limitprofile import build_limit_profile, equivalence_check, eval_limit
from .peakon import PeakonSpec, PeakonSpecError, eval_peakon, peakon_state
from .precision import format_real, real, set_precision
from .soliton import (FORM_EQUIVALENCE_RTOL, SECTION5_RTOL, InversionError,
                      PhysicalMap, SolitonSpec, SolitonSpecError,
                      determinant_a_checks, form_equivalence,
                      wronskian_relationship_residual)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INVERSION = 3
EXIT_IDENTITY = 4
EXIT_CONVERGENCE = 5


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config loading / validation
# ---------------------------------------------------------------------------

_BLOCK_KEYS = {
    "": {"precision_bits", "seed", "peakon", "soliton", "grid", "sweep", "verify", "output"},
    "peakon": {"speeds", "phases", "times"},
    "soliton": {"kappa", "wave_numbers", "phases", "alpha", "times", "parametric_points"},
    "grid": {"start", "stop", "points"},
    "sweep": {"kappas", "times", "grid_points", "pad", "diagnostic_points"},
    "verify": {"instances", "max_n", "samples", "yt_samples", "threshold"},
    "output": {"dir"},
}


def _check_keys(block: dict, path: str) -> None:
    allowed = _BLOCK_KEYS[path]
    for key in block:
        if key not in allowed:
            raise ConfigError(f"unknown key '{key}' in config block '{path or '<top>'}'")


def _num(block: dict, path: str, key: str, default=None):
    if key not in block:
        if default is None:
            raise ConfigError(f"missing required key '{key}' in config block '{path}'")
        return real(default)
    v = block[key]
    if not isinstance(v, (int, float, str)):
        raise ConfigError(f"key '{path}.{key}' must be a number")
    try:
        return real(v)
    except Exception as exc:
        raise ConfigError(f"key '{path}.{key}': {exc}") from exc


def _num_list(block: dict, path: str, key: str, default=None):
    if key not in block:
        if default is None:
            raise ConfigError(f"missing required key '{key}' in config block '{path}'")
        return [real(v) for v in default]
    v = block[key]
    if not isinstance(v, list):
        raise ConfigError(f"key '{path}.{key}' must be a list of numbers")
    return [real(x) for x in v]


def _int(block: dict, path: str, key: str, default=None) -> int:
    if key not in block:
        if default is None:
            raise ConfigError(f"missing required key '{key}' in config block '{path}'")
        return default
    v = block[key]
    if not isinstance(v, int) or isinstance(v, bool):
        raise ConfigError(f"key '{path}.{key}' must be an integer")
    return v


def load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top-level config must be an object")
    _check_keys(cfg, "")
    for name in ("peakon", "soliton", "grid", "sweep", "verify", "output"):
        if name in cfg:
            if not isinstance(cfg[name], dict):
                raise ConfigError(f"config block '{name}' must be an object")
            _check_keys(cfg[name], name)
    return cfg


def parse_grid(cfg: dict) -> list[mpf]:
    if "grid" not in cfg:
        raise ConfigError("missing required config block 'grid'")
    g = cfg["grid"]
    start = _num(g, "grid", "start")
    stop = _num(g, "grid", "stop")
    points = _int(g, "grid", "points")
    if points < 1:
        raise ConfigError("grid.points must be at least 1 (empty grid)")
    if points == 1:
        return [start]
    if not stop > start:
        raise ConfigError("grid.stop must exceed grid.start")
    step = (stop - start) / (points - 1)
    return [start + i * step for i in range(points)]


def parse_peakon(cfg: dict) -> tuple[PeakonSpec, list[mpf]]:
    if "peakon" not in cfg:
        raise ConfigError("missing required config block 'peakon'")
    b = cfg["peakon"]
    speeds = _num_list(b, "peakon", "speeds")
    phases = _num_list(b, "peakon", "phases")
    times = _num_list(b, "peakon", "times", default=[0])
    try:
        spec = PeakonSpec(tuple(speeds), tuple(phases))
    except PeakonSpecError as exc:
        raise ConfigError(f"peakon block: {exc}") from exc
    return spec, times


def parse_soliton(cfg: dict) -> tuple[SolitonSpec, list[mpf], int]:
    if "soliton" not in cfg:
        raise ConfigError("missing required config block 'soliton'")
    b = cfg["soliton"]
    kappa = _num(b, "soliton", "kappa")
    k = _num_list(b, "soliton", "wave_numbers")
    phases = _num_list(b, "soliton", "phases", default=[0] * len(k))
    alpha = _num(b, "soliton", "alpha", default=0)
    times = _num_list(b, "soliton", "times", default=[0])
    parametric = _int(b, "soliton", "parametric_points", default=0)
    try:
        spec = SolitonSpec(kappa, tuple(k), tuple(phases), alpha)
    except SolitonSpecError as exc:
        raise ConfigError(f"soliton block: {exc}") from exc
    return spec, times, parametric


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_real(v) if isinstance(v, mpf) else str(v) for v in row))
    atomic_write(path, "\n".join(lines) + "\n")


def write_json_report(path: Path, payload: dict) -> None:
    atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _jsonable(x):
    if isinstance(x, mpf):
        return format_real(x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    return x


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_peakon(cfg: dict, out: Path, seed: int) -> int:
    spec, times = parse_peakon(cfg)
    grid = parse_grid(cfg)
    for idx, t in enumerate(times):
        state = peakon_state(spec, t)
        write_csv(out / f"peakon_profile_t{idx}.csv", ["x", "u"],
                  ((x, eval_peakon(state, x)) for x in grid))
        write_csv(out / f"peakon_state_t{idx}.csv", ["i", "m_i", "x_i", "c_i"],
                  ((i + 1, m, x, c) for i, (m, x, c)
                   in enumerate(zip(state.m, state.x, spec.c))))
    return EXIT_OK


def cmd_soliton(cfg: dict, out: Path, seed: int) -> int:
    spec, times, parametric = parse_soliton(cfg)
    grid = parse_grid(cfg)
    for idx, t in enumerate(times):
        pmap = PhysicalMap(spec, t)
        rows = [(x, pmap.u_of_x(x)) for x in grid]
        write_csv(out / f"soliton_profile_t{idx}.csv", ["x", "u"], rows)
        if parametric > 0:
            lo = spec.kappa * (grid[0] - 2)
            hi = spec.kappa * (grid[-1] + 2)
            step = (hi - lo) / max(parametric - 1, 1)
            prows = []
            for i in range(parametric):
                y = lo + i * step
                x = pmap.x_of_y(y)
                prows.append((y, x, pmap.u_of_y(y)))
            write_csv(out / f"soliton_parametric_t{idx}.csv", ["y", "x", "u"], prows)
    return EXIT_OK


def cmd_limit(cfg: dict, out: Path, seed: int) -> int:
    spec, times = parse_peakon(cfg)
    grid = parse_grid(cfg)
    worst = mpf(0)
    for idx, t in enumerate(times):
        profile = build_limit_profile(spec, t)
        write_csv(out / f"limit_profile_t{idx}.csv", ["x", "u"],
                  ((x, eval_limit(profile, x)) for x in grid))
        write_csv(out / f"limit_breakpoints_t{idx}.csv", ["n", "xbar_n"],
                  ((n + 1, xb) for n, xb in enumerate(profile.xbar)))
        rep = equivalence_check(spec, t, grid)
        worst = max(worst, rep.max_rel_diff)
    print(f"max_limit_vs_peakon_rel_diff {format_real(worst)}")
    return EXIT_OK


def cmd_verify(cfg: dict, out: Path, seed: int) -> int:
    b = cfg.get("verify", {})
    instances = _int(b, "verify", "instances", default=200)
    max_n = _int(b, "verify", "max_n", default=5)
    samples = _int(b, "verify", "samples", default=20)
    yt_count = _int(b, "verify", "yt_samples", default=10)
    # optional single threshold overriding every family's default
    override = _num(b, "verify", "threshold", default=-1) if "threshold" in b else None
    if override is not None and override <= 0:
        raise ConfigError("verify.threshold must be positive")
    if instances < 1 or samples < 1:
        raise ConfigError("verify corpus sizes must be positive")
    thr_identity = override if override is not None else IDENTITY_RTOL
    thr_section5 = override if override is not None else SECTION5_RTOL
    thr_form = override if override is not None else FORM_EQUIVALENCE_RTOL

    rng = random.Random(seed)
    report: dict = {"seed": seed, "instances": instances, "families": {}}
    failures = []

    worst_identity = mpf(0)
    for i in range(instances):
        data = random_spectral_data(rng, max_n)
        rep = identity_suite(data, threshold=thr_identity)
        worst_identity = max(worst_identity, rep.max_residual)
        if not rep.ok:
            failures.append({"family": "identity_suite", "instance": i,
                             "lam": _jsonable(data.lam), "log_e": _jsonable(data.log_e),
                             "violations": _jsonable(rep.violations)})
    report["families"]["identity_suite"] = {"max_residual": format_real(worst_identity)}

    worst_det = mpf(0)
    worst_rel = mpf(0)
    worst_form = mpf(0)
    for i in range(samples):
        sspec = random_subset_spec(rng, max_n)
        yts = random_yt_samples(rng, yt_count)
        arep = determinant_a_checks(sspec, yts, threshold=thr_section5)
        worst_det = max(worst_det, arep.max_residual)
        if not arep.ok:
            failures.append({"family": "determinant_a", "instance": i,
                             "kappa": format_real(sspec.kappa), "k": _jsonable(sspec.k),
                             "violations": _jsonable(arep.violations)})
        for y, t in yts[: max(1, yt_count // 2)]:
            res = wronskian_relationship_residual(sspec, y, t)
            worst_rel = max(worst_rel, res)
            if res > thr_section5:
                failures.append({"family": "wronskian_relationship", "instance": i,
                                 "kappa": format_real(sspec.kappa), "k": _jsonable(sspec.k),
                                 "y": format_real(y), "t": format_real(t),
                                 "residual": format_real(res)})
        frep = form_equivalence(sspec, yts, threshold=thr_form)
        worst_form = max(worst_form, frep.max_residual)
        if not frep.ok:
            failures.append({"family": "form_equivalence", "instance": i,
                             "kappa": format_real(sspec.kappa), "k": _jsonable(sspec.k),
                             "violations": _jsonable(frep.violations)})
    report["families"]["determinant_a"] = {"max_residual": format_real(worst_det)}
    report["families"]["wronskian_relationship"] = {"max_residual": format_real(worst_rel)}
    report["families"]["form_equivalence"] = {"max_residual": format_real(worst_form)}
    report["failures"] = failures
    report["ok"] = not failures
    write_json_report(out / "verify_report.json", report)
    return EXIT_OK if not failures else EXIT_IDENTITY


def cmd_converge(cfg: dict, out: Path, seed: int) -> int:
    spec, _ = parse_peakon(cfg)
    b = cfg.get("sweep", {})
    kappas = _num_list(b, "sweep", "kappas", default=[float(mpf(2) ** -i) for i in range(1, 9)])
    times = _num_list(b, "sweep", "times", default=[0])
    grid_points = _int(b, "sweep", "grid_points", default=801)
    pad = _num(b, "sweep", "pad", default=5)
    config = SweepConfig(kappas=tuple(kappas), times=tuple(times),
                         grid_points=grid_points, pad=pad)
    report = run_sweep(spec, config)
    rows = [(e.kappa, e.t, e.d_raw if e.ok else "", e.d_shift if e.ok else "",
             e.shift if e.ok else "", e.worst_x if e.ok else "", e.bits_used)
            for e in report.entries]
    write_csv(out / "converge.csv",
              ["kappa", "t", "d_raw", "d_shift", "shift", "worst_x", "bits_used"], rows)
    payload = {
        "config_echo": _jsonable(cfg),
        "version": __version__,
        "peak_amplitude": format_real(report.peak_amplitude),
        "tail_monotone": report.tail_monotone,
        "final_below_threshold": report.final_below_threshold,
        "decay_slopes": {format_real(t): format_real(s) for t, s in report.decay_slopes.items()},
        "entries": [
            {"kappa": format_real(e.kappa), "t": format_real(e.t),
             "d_raw": format_real(e.d_raw) if e.ok else None,
             "d_shift": format_real(e.d_shift) if e.ok else None,
             "shift": format_real(e.shift) if e.ok else None,
             "worst_x": format_real(e.worst_x) if e.ok else None,
             "bits_used": e.bits_used, "error": e.error}
            for e in report.entries],
        "ok": report.ok,
    }
    write_json_report(out / "converge.json", payload)
    return EXIT_OK if report.ok else EXIT_CONVERGENCE


_COMMANDS = {
    "peakon": cmd_peakon,
    "soliton": cmd_soliton,
    "limit": cmd_limit,
    "verify": cmd_verify,
    "converge": cmd_converge,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="chlab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default="out")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--bits", type=int, default=None)
    args = parser.parse_args(argv)

    bits = args.bits
    if bits is None and os.environ.get("CHLAB_BITS"):
        try:
            bits = int(os.environ["CHLAB_BITS"])
        except ValueError:
            print("chlab: CHLAB_BITS must be an integer", file=sys.stderr)
            return EXIT_VALIDATION

    try:
        cfg = load_config(args.config)
        if bits is None and "precision_bits" in cfg:
            bits = _int(cfg, "", "precision_bits")
        if bits is not None:
            set_precision(bits)
        seed = args.seed if "seed" not in cfg else _int(cfg, "", "seed")
        if args.seed != 42:
            seed = args.seed  # explicit flag wins over the config echo
        out = Path(cfg.get("output", {}).get("dir", args.out))
        return _COMMANDS[args.command](cfg, out, seed)
    except ConfigError as exc:
        print(f"chlab: config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InversionError as exc:
        print(f"chlab: inversion failure: {exc}", file=sys.stderr)
        return EXIT_INVERSION


if __name__ == "__main__":
    sys.exit(main())
