"""Command-line scenario runner.

    radial-euler run <config> [--out DIR] [--waive-assumptions] [--refine K]
    radial-euler sweep <config> --grid <file> [--out DIR] [--workers N]
    radial-euler verify <run-dir>
    radial-euler affine <config | key=value ...> [--out DIR]

Configs are INI files with sections gas, domain, initial, boundary, solver
and verify. Exit codes: 0 all checks pass, 1 invalid configuration,
2 verification failure, 3 fatal solver error, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import itertools
import logging
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .affine import (AffineMotion, AffineSolution, boundary_conclusions, check_admissibility)
from .gas import (DomainError, FlowField, GasParams, LeftBoundary, Scenario, stretched_grid,
                  uniform_grid)
from .profiles import (PresetSpec, COMPRESSIVE_SPEC, composite_scenario,
                       compressive_scenario, rarefaction_scenario, vacuum_origin_scenario)
from .solver import (RunRecord, SolverConfig, integrate_riccati_along, run, trace_characteristic)
from .verify import (CheckResult, compression_threshold, compute_ledger, ledger_t_star,
                     verify_run, EPS_GRID_CONSTANT)

log = logging.getLogger("radial_euler")

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_FATAL, EXIT_IO = 0, 1, 2, 3, 4
SECTIONS = ("gas", "domain", "initial", "boundary", "solver", "verify")
RICCATI_TOLERANCE = 0.05


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key path."""


# --------------------------------------------------------------------------
# parsing


def _get(cp, section, key, kind=float, default=None, required=False):
    path = f"{section}.{key}"
    if not cp.has_option(section, key):
        if required:
            raise ConfigError(f"missing key {path}")
        return default
    raw = cp.get(section, key).strip()
    try:
        if kind is bool:
            return cp.getboolean(section, key)
        if kind is float:
            return float(raw)
        if kind is int:
            return int(raw)
        if kind == "pair":
            a, b = (float(x) for x in raw.split(","))
            return a, b
        return raw
    except ValueError as exc:
        raise ConfigError(f"type error at {path}: {raw!r} ({exc})") from None


@dataclass
class VerifyOptions:
    traces: int = 10
    eps_constant: float = EPS_GRID_CONSTANT
    riccati_tolerance: float = RICCATI_TOLERANCE
    M: Optional[float] = None


@dataclass
class Parsed:
    scenario: Scenario
    config: SolverConfig
    options: VerifyOptions
    grid: np.ndarray
    text: str
    waived: bool = False
    assumption: str = "ok"
    threshold: Optional[float] = None
    extra: dict = field(default_factory=dict)


def canonical_text(cp: configparser.ConfigParser) -> str:
    """Sorted section/key rendering used for hashing and echoing."""
    lines = []
    for sec in sorted(cp.sections()):
        lines.append(f"[{sec}]")
        for key in sorted(cp.options(sec)):
            lines.append(f"{key} = {cp.get(sec, key).strip()}")
        lines.append("")
    return "\n".join(lines)


def new_parser() -> configparser.ConfigParser:
    """Case-preserving parser (keys such as K, R and T are case-sensitive)."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    return cp


def read_config(path) -> configparser.ConfigParser:
    cp = new_parser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    return cp


def _gas(cp) -> GasParams:
    gamma = _get(cp, "gas", "gamma", required=True)
    K = _get(cp, "gas", "K", default=1.0)
    m = _get(cp, "gas", "m", int, default=1)
    try:
        return GasParams(gamma, K, m)
    except DomainError as exc:
        raise ConfigError(f"gas: {exc}") from None


def _spec(cp, base: PresetSpec) -> PresetSpec:
    kw = {}
    for name in ("u_left", "mach_ratio", "alpha_amp", "beta_amp", "center", "width", "background"):
        v = _get(cp, "initial", name)
        if v is not None:
            kw[name] = v
    return PresetSpec(**{**base.__dict__, **kw})


def _horizon(cp):
    raw = cp.get("domain", "T", fallback="auto").strip()
    if raw == "auto":
        return None
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"type error at domain.T: {raw!r}") from None


def build_scenario(cp, params: GasParams):
    preset = _get(cp, "initial", "preset", str, required=True)
    b = _get(cp, "domain", "b", required=True)
    R = _get(cp, "domain", "R", required=True)
    T = _horizon(cp)
    extra = {}
    if preset == "rarefaction":
        sc = rarefaction_scenario(params, b, R, T, _spec(cp, PresetSpec()),
                                  pad=_get(cp, "boundary", "pad", default=0.5))
    elif preset == "compressive":
        spec = _spec(cp, COMPRESSIVE_SPEC)
        T = 0.1 if T is None else T
        pad = _get(cp, "boundary", "pad", default=0.1)
        mult = _get(cp, "initial", "seed_multiple")
        seed = _get(cp, "initial", "seed")
        if (mult is None) == (seed is None):
            raise ConfigError("initial: give exactly one of seed, seed_multiple")
        base = compressive_scenario(params, 0.0, b, R, T, spec, pad=pad)
        N = compression_threshold(ledger_from_initial(base))
        extra["N_threshold"] = N
        seed = -mult * N if mult is not None else seed
        sc = compressive_scenario(params, seed, b, R, T, spec, pad=pad)
    elif preset == "affine-composite":
        sc = composite_scenario(params, _get(cp, "initial", "rho_c", default=1.0),
                                _get(cp, "initial", "v_a", default=3.0), b, R, T,
                                _get(cp, "initial", "far_alpha", default=0.3),
                                _get(cp, "initial", "far_beta", default=0.3),
                                _get(cp, "initial", "blend", default=0.5))
    elif preset == "vacuum-origin":
        sc = vacuum_origin_scenario(params, b, _get(cp, "initial", "v", default=1.0),
                                    _get(cp, "initial", "c"), R, T)
    else:
        raise ConfigError(f"initial.preset: unknown preset {preset!r}")
    mode = cp.get("boundary", "mode", fallback=sc.boundary.value).strip()
    known = [b.value for b in LeftBoundary]
    if mode not in known:
        raise ConfigError(f"boundary.mode: unknown mode {mode!r} (one of {', '.join(known)})")
    if LeftBoundary(mode) is not sc.boundary:
        raise ConfigError(f"boundary.mode: preset {preset!r} requires {sc.boundary.value!r}")
    return sc, extra


def ledger_from_initial(scenario: Scenario):
    """Ledger from the initial data alone (a zero-length run)."""
    from dataclasses import replace

    rec = run(replace(scenario, T=0.0), SolverConfig(), n=2000)
    rec.scenario = scenario
    return compute_ledger(rec)


def _grid(cp, sc: Scenario, refine: int) -> np.ndarray:
    kind = cp.get("domain", "grid", fallback="uniform").strip()
    left = sc.left_edge()
    if kind == "uniform":
        n = _get(cp, "domain", "cells", int, default=1000) * refine
        return uniform_grid(left, sc.R, n)
    if kind == "stretched":
        zone = _get(cp, "domain", "fine_zone", "pair", required=True)
        fine = _get(cp, "domain", "dr_fine", required=True) / refine
        coarse = _get(cp, "domain", "dr_coarse", required=True) / refine
        return stretched_grid(left, sc.R, zone, fine, coarse)
    raise ConfigError(f"domain.grid: unknown grid kind {kind!r}")


def _solver(cp) -> SolverConfig:
    kw = {}
    for key, kind in (("cfl", float), ("order", int), ("source", str), ("snapshot_every", float),
                      ("blowup_factor", float), ("g_max", float), ("cone_margin", float),
                      ("edge_trim", int)):
        v = _get(cp, "solver", key, kind)
        if v is not None:
            kw[key] = v
    try:
        return SolverConfig(**kw)
    except DomainError as exc:
        raise ConfigError(f"solver: {exc}") from None


def parse_config(path, waive: bool = False, refine: int = 1) -> Parsed:
    """Validated scenario, solver config and verification options."""
    cp = read_config(path)
    return parse_parser(cp, waive, refine)


def parse_parser(cp, waive: bool = False, refine: int = 1) -> Parsed:
    for sec in ("gas", "domain", "initial"):
        if not cp.has_section(sec):
            raise ConfigError(f"missing section [{sec}]")
    for sec in SECTIONS:
        if not cp.has_section(sec):
            cp.add_section(sec)
    if refine < 1:
        raise ConfigError("refine multiplier must be a positive integer")
    params = _gas(cp)
    try:
        sc, extra = build_scenario(cp, params)
    except DomainError as exc:
        raise ConfigError(f"initial: {exc}") from None
    config = _solver(cp)
    opts = VerifyOptions(
        traces=_get(cp, "verify", "traces", int, default=10),
        eps_constant=_get(cp, "verify", "eps_constant", default=EPS_GRID_CONSTANT),
        riccati_tolerance=_get(cp, "verify", "riccati_tolerance", default=RICCATI_TOLERANCE),
        M=_get(cp, "verify", "M"),
    )
    rep = sc.check_assumption()
    compressive = sc.meta.get("preset") == "compressive"
    if not rep.ok and not waive:
        raise ConfigError(f"assumption violated: {rep.describe()} (use --waive-assumptions)")
    if compressive and not waive:
        raise ConfigError("compressive data violates the rarefaction hypotheses; "
                          "blowup experiments need --waive-assumptions")
    grid = _grid(cp, sc, refine)
    text = canonical_text(cp)
    return Parsed(sc, config, opts, grid, text, waived=waive and (compressive or not rep.ok),
                  assumption=rep.describe(), threshold=extra.get("N_threshold"), extra=extra)


# --------------------------------------------------------------------------
# artifacts


def _fmt(x) -> str:
    return repr(float(x))


def snapshot_rows(snap: FlowField, chars):
    cols = (snap.r, snap.rho, snap.u, snap.h, snap.w, snap.z, snap.c1, snap.c2,
            chars.alpha, chars.beta)
    return zip(*cols)


SNAPSHOT_COLUMNS = ("r", "rho", "u", "h", "w", "z", "c1", "c2", "alpha", "beta")


def write_snapshot(path: Path, snap: FlowField, chars) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# t = {_fmt(snap.t)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SNAPSHOT_COLUMNS)
        for row in snapshot_rows(snap, chars):
            w.writerow([_fmt(v) for v in row])


def read_snapshot(path: Path, params: GasParams) -> FlowField:
    with open(path, encoding="utf-8") as fh:
        head = fh.readline()
        if not head.startswith("# t = "):
            raise OSError(f"malformed snapshot header in {path}")
        t = float(head[6:])
        data = np.loadtxt(fh, delimiter=",", skiprows=1, ndmin=2)
    return FlowField(t, data[:, 0], data[:, 1], data[:, 2], params)


def write_kv(path: Path, items) -> None:
    """Atomic key-value text write (temporary file then rename)."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".txt")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for k, v in items:
                fh.write(f"{k} = {v}\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_kv(path: Path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if "=" in line:
                k, v = line.split("=", 1)
                out[k.strip()] = v.strip()
    return out


# --------------------------------------------------------------------------
# orchestration


def trace_starts(record: RunRecord, count: int):
    """Start radii for cross-validation traces, half per family."""
    sc = record.scenario
    prof = sc.meta.get("profile")
    if sc.meta.get("preset") == "rarefaction" and prof is not None:
        spec_center, spec_width = _bump_geometry(sc)
        lo, hi = spec_center - 1.7 * spec_width, spec_center + 1.7 * spec_width
    else:
        lo = sc.b + 0.1 * (sc.R - sc.b)
        hi = sc.R - 0.3 * (sc.R - sc.b)
    n1 = count // 2
    n2 = count - n1
    starts = [(1, x) for x in np.linspace(lo, hi, n1)] if n1 else []
    starts += [(2, x) for x in np.linspace(lo, hi, n2)] if n2 else []
    return starts


def _bump_geometry(sc):
    spec = sc.meta.get("spec")
    if spec is None:
        spec = PresetSpec()
    return spec.center * sc.b, spec.width * sc.b


def riccati_checks(record: RunRecord, opts: VerifyOptions):
    """Traces plus along-trace Riccati integration; returns (check, rows)."""
    rows, worst, where = [], 0.0, None
    if opts.traces <= 0 or len(record.snapshots) < 2:
        return None, rows
    for idx, (fam, r0) in enumerate(trace_starts(record, opts.traces)):
        tr = trace_characteristic(fam, (r0, 0.0), record)
        hist = integrate_riccati_along(tr, record)
        for t, a, b in zip(hist.t, hist.integrated, hist.field):
            rows.append((idx, fam, t, tr.position(t), a, b))
        dev = hist.max_relative_deviation
        if not math.isfinite(dev) or dev > worst:
            worst, where = dev, (float(r0), 0.0)
    margin = opts.riccati_tolerance - worst
    res = CheckResult("riccati_cross_validation", margin >= 0.0, margin,
                      where[0] if where else None, where[1] if where else None,
                      f"(max relative deviation {worst:.4g})")
    return res, rows


def blowup_check(record: RunRecord, ledger, parsed: Parsed):
    seed = record.scenario.meta.get("seed")
    if seed is None or seed >= 0.0 or parsed.threshold is None:
        return None, None
    t_star = ledger_t_star(seed, ledger)
    if seed > -parsed.threshold:
        return None, t_star
    blow = record.blowup_time
    if blow is None:
        return CheckResult("blowup_before_t_star", False, -math.inf,
                           detail=f"(no blowup detected; t* = {t_star:.6g})"), t_star
    return CheckResult("blowup_before_t_star", blow <= t_star, t_star - blow, None, blow,
                       f"(t* = {t_star:.6g})"), t_star


def execute(parsed: Parsed, out: Path) -> tuple:
    """Run, verify and write artifacts; returns (exit code, manifest dict)."""
    t_start = time.perf_counter()
    record = run(parsed.scenario, parsed.config, r=parsed.grid)
    ledger = compute_ledger(record, parsed.options.M)
    report = verify_run(record, ledger, eps=parsed.options.eps_constant * float(np.max(np.diff(parsed.grid))))
    ric, rows = (None, [])
    if record.cause == "horizon reached":
        ric, rows = riccati_checks(record, parsed.options)
    if ric is not None:
        report.results.append(ric)
    bcheck, t_star = blowup_check(record, ledger, parsed)
    if bcheck is not None:
        report.results.append(bcheck)
    write_artifacts(out, parsed, record, ledger, report, rows)
    if record.cause == "fatal":
        code = EXIT_FATAL
    elif not report.ok:
        code = EXIT_VERIFY
    else:
        code = EXIT_OK
    manifest = manifest_items(parsed, record, ledger, report, t_star, time.perf_counter() - t_start)
    write_kv(out / "manifest.txt", manifest)
    return code, dict(manifest)


def write_artifacts(out: Path, parsed: Parsed, record: RunRecord, ledger, report, rows) -> None:
    snaps = out / "snapshots"
    snaps.mkdir(parents=True, exist_ok=True)
    for old in snaps.glob("snapshot_*.csv"):
        old.unlink()
    for k, snap in enumerate(record.snapshots):
        write_snapshot(snaps / f"snapshot_{k:05d}.csv", snap, record.characters(k))
    (out / "config.ini").write_text(parsed.text, encoding="utf-8")
    with open(out / "grid.csv", "w", encoding="utf-8") as fh:
        fh.write("r\n" + "".join(_fmt(x) + "\n" for x in parsed.grid))
    with open(out / "cone.csv", "w", encoding="utf-8") as fh:
        fh.write("t,r\n")
        for t, r in zip(record.diagnostics["cone_t"], record.diagnostics["cone_r"]):
            fh.write(f"{_fmt(t)},{_fmt(r)}\n")
    with open(out / "traces.csv", "w", encoding="utf-8") as fh:
        fh.write("trace,family,t,r,integrated,field\n")
        for row in rows:
            fh.write(f"{row[0]},{row[1]}," + ",".join(_fmt(v) for v in row[2:]) + "\n")
    write_kv(out / "ledger.txt", [(k, v if isinstance(v, int) else _fmt(v))
                                  for k, v in ledger.as_dict().items()])
    (out / "verification.txt").write_text(report.text(), encoding="utf-8")
    with open(out / "verification.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("check", "passed", "worst_margin", "r", "t"))
        for r in report.results:
            w.writerow((r.name, int(r.passed), _fmt(r.worst_margin),
                        "" if r.r is None else _fmt(r.r), "" if r.t is None else _fmt(r.t)))


def manifest_items(parsed, record, ledger, report, t_star, seconds):
    items = [("scenario_hash", hashlib.sha256(parsed.text.encode()).hexdigest())]
    for line in parsed.text.splitlines():
        if line.startswith("["):
            sec = line[1:-1]
        elif "=" in line:
            k, v = line.split("=", 1)
            items.append((f"config.{sec}.{k.strip()}", v.strip()))
    items += [
        ("preset", parsed.scenario.meta.get("preset", parsed.scenario.name)),
        ("cells", parsed.grid.size),
        ("C0", _fmt(parsed.scenario.C0)),
        ("horizon", _fmt(parsed.scenario.T)),
        ("assumption_check", parsed.assumption),
        ("assumptions_waived", str(parsed.waived).lower()),
        ("termination_cause", record.cause),
    ]
    if record.blowup_time is not None:
        items.append(("blowup_time", _fmt(record.blowup_time)))
    if record.error:
        items.append(("error", record.error))
    items.append(("snapshots", len(record.snapshots)))
    items.append(("final_time", _fmt(record.final.t)))
    if parsed.threshold is not None:
        items.append(("N_threshold", _fmt(parsed.threshold)))
    seed = parsed.scenario.meta.get("seed")
    if seed is not None:
        items.append(("seed", _fmt(seed)))
    if t_star is not None:
        items.append(("t_star", _fmt(t_star)))
    passed = sum(r.passed for r in report.results)
    items.append(("checks_passed", passed))
    items.append(("checks_failed", len(report.results) - passed))
    for r in report.results:
        items.append((f"check.{r.name}", f"{'pass' if r.passed else 'fail'} {_fmt(r.worst_margin)}"))
    items.append(("wall_clock_seconds", f"{seconds:.3f}"))
    return items


def run_scenario(parsed: Parsed, out) -> int:
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        code, _ = execute(parsed, out)
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO
    return code


# --------------------------------------------------------------------------
# verify-only mode


def load_record(run_dir) -> tuple:
    """Rebuild (parsed inputs, record) from a run directory."""
    run_dir = Path(run_dir)
    cp = new_parser()
    cp.read_string((run_dir / "config.ini").read_text(encoding="utf-8"))
    man = read_kv(run_dir / "manifest.txt")
    # The stored run already passed (or waived) the parse-time gate.
    parsed = parse_parser(cp, waive=True)
    params = parsed.scenario.params
    files = sorted((run_dir / "snapshots").glob("snapshot_*.csv"))
    if not files:
        raise OSError(f"no snapshots in {run_dir}")
    snaps = [read_snapshot(f, params) for f in files]
    cone = np.loadtxt(run_dir / "cone.csv", delimiter=",", skiprows=1, ndmin=2)
    record = RunRecord(parsed.scenario, parsed.config, [], [], man.get("termination_cause", ""))
    record.diagnostics.update(cone_t=list(cone[:, 0]), cone_r=list(cone[:, 1]))
    if "blowup_time" in man:
        record.blowup_time = float(man["blowup_time"])
    r = snaps[0].r
    for s in snaps:
        record.snapshots.append(s)
        record.masks.append(_mask(record, s.t, r))
    return parsed, record


def _mask(record, t, r):
    sc, cfg = record.scenario, record.config
    if sc.boundary is LeftBoundary.DEPENDENCE_CONE:
        m = r >= record.valid_left_edge(t)
    elif sc.boundary is LeftBoundary.CHARACTERISTIC:
        m = r > sc.left_curve(t)
    else:
        m = np.ones(r.size, dtype=bool)
    m[r.size - cfg.edge_trim:] = False
    return m


def verify_dir(run_dir) -> int:
    parsed, record = load_record(run_dir)
    ledger = compute_ledger(record, parsed.options.M)
    eps = parsed.options.eps_constant * float(np.max(np.diff(record.snapshots[0].r)))
    report = verify_run(record, ledger, eps=eps)
    bcheck, _ = blowup_check(record, ledger, parsed)
    if bcheck is not None:
        report.results.append(bcheck)
    sys.stdout.write(report.text())
    return EXIT_OK if report.ok else EXIT_VERIFY


# --------------------------------------------------------------------------
# sweeps


SWEEP_COLUMNS = ("cell", "exit_code", "gamma", "m", "b", "C0", "seed", "observed_blowup_time",
                 "t_star", "N_threshold", "floors_ok", "signs_ok")


def read_grid(path) -> list:
    """Cartesian product of 'section.key = v1, v2, ...' lines in section [grid]."""
    cp = read_config(path)
    if not cp.has_section("grid"):
        return []
    axes = []
    for key in cp.options("grid"):
        if "." not in key:
            raise ConfigError(f"grid key {key!r} must be section.key")
        values = [v.strip() for v in cp.get("grid", key).split(",") if v.strip()]
        axes.append((key, values))
    if not axes or any(not v for _, v in axes):
        return []
    keys = [k for k, _ in axes]
    return [dict(zip(keys, combo)) for combo in itertools.product(*[v for _, v in axes])]


def _cell_job(args):
    base_text, overrides, out, waive, refine = args
    cp = new_parser()
    cp.read_string(base_text)
    for key, value in overrides.items():
        sec, k = key.split(".", 1)
        if not cp.has_section(sec):
            cp.add_section(sec)
        cp.set(sec, k, value)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        parsed = parse_parser(cp, waive, refine)
    except ConfigError as exc:
        (out / "error.txt").write_text(str(exc) + "\n", encoding="utf-8")
        return EXIT_CONFIG, {}
    try:
        return execute(parsed, out)
    except OSError:
        return EXIT_IO, {}
    except Exception as exc:  # a failing cell must not stop the sweep
        (out / "error.txt").write_text(f"{type(exc).__name__}: {exc}\n", encoding="utf-8")
        return EXIT_FATAL, {}


def sweep(config_path, grid_path, out, workers: int = 1, waive: bool = False,
          refine: int = 1) -> int:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    base = canonical_text(read_config(config_path))
    cells = read_grid(grid_path)
    jobs = [(base, cell, str(out / f"cell_{i:04d}"), waive, refine) for i, cell in enumerate(cells)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell_job, jobs))
    else:
        results = [_cell_job(j) for j in jobs]
    with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for i, (code, man) in enumerate(results):
            w.writerow(_sweep_row(f"cell_{i:04d}", code, man))
    return max((c for c, _ in results), default=EXIT_OK)


def _sweep_row(name, code, man):
    def ok(*names):
        vals = [man.get(f"check.{n}") for n in names]
        vals = [v for v in vals if v is not None]
        return "" if not vals else str(all(v.startswith("pass") for v in vals)).lower()

    return (name, code, man.get("config.gas.gamma", ""), man.get("config.gas.m", ""),
            man.get("config.domain.b", ""), man.get("C0", ""), man.get("seed", ""),
            man.get("blowup_time", ""), man.get("t_star", ""), man.get("N_threshold", ""),
            ok("density_floor_rarefaction", "density_floor_general"),
            ok("character_lower_bound", "character_upper_bound"))


# --------------------------------------------------------------------------
# affine verb


def affine_command(tokens, out) -> int:
    if len(tokens) == 1 and "=" not in tokens[0]:
        cp = read_config(tokens[0])
        vals = {f"{s}.{k}": cp.get(s, k) for s in cp.sections() for k in cp.options(s)}
        vals = {k.split(".", 1)[1]: v for k, v in vals.items()}
    else:
        vals = {}
        for tok in tokens:
            if "=" not in tok:
                raise ConfigError(f"affine parameter {tok!r} is not key=value")
            k, v = tok.split("=", 1)
            vals[k.strip()] = v.strip()
    try:
        params = GasParams(float(vals.get("gamma", 2.0)), float(vals.get("K", 1.0)),
                           int(vals.get("m", 1)))
        motion = AffineMotion(float(vals.get("rho_c", 1.0)), float(vals["v_a"]),
                              float(vals.get("b", 1.0)), params)
        T = float(vals.get("T", 1.0))
    except KeyError as exc:
        raise ConfigError(f"missing affine parameter {exc}") from None
    except (ValueError, DomainError) as exc:
        raise ConfigError(f"affine: {exc}") from None
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    solution = AffineSolution.build(motion, T)
    solution.trajectory.to_csv(out / "trajectory.csv")
    rep = check_admissibility(motion)
    items = [(c.name, f"{'pass' if c.passed else 'fail'} value={_fmt(c.value)} required={_fmt(c.required)}")
             for c in rep.conditions]
    items.append(("near_degenerate", str(rep.near_degenerate).lower()))
    if rep.ok:
        for k, v in boundary_conclusions(solution).items():
            items.append((k, _fmt(v)))
    items.append(("admissible", str(rep.ok).lower()))
    write_kv(out / "admissibility.txt", items)
    for k, v in items:
        sys.stdout.write(f"{k} = {v}\n")
    return EXIT_OK if rep.ok else EXIT_VERIFY


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="radial-euler", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="verb", required=True)
    p = sub.add_parser("run", help="run one scenario and verify it")
    p.add_argument("config")
    p.add_argument("--out", default="run-out")
    p.add_argument("--waive-assumptions", action="store_true")
    p.add_argument("--refine", type=int, default=1)
    p = sub.add_parser("sweep", help="run a parameter grid")
    p.add_argument("config")
    p.add_argument("--grid", required=True)
    p.add_argument("--out", default="sweep-out")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--waive-assumptions", action="store_true")
    p.add_argument("--refine", type=int, default=1)
    p = sub.add_parser("verify", help="re-run assertions on a stored run")
    p.add_argument("run_dir")
    p = sub.add_parser("affine", help="affine trajectory and admissibility report")
    p.add_argument("params", nargs="+")
    p.add_argument("--out", default="affine-out")
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "run":
            parsed = parse_config(args.config, args.waive_assumptions, args.refine)
            return run_scenario(parsed, args.out)
        if args.verb == "sweep":
            return sweep(args.config, args.grid, args.out, args.workers,
                         args.waive_assumptions, args.refine)
        if args.verb == "verify":
            return verify_dir(args.run_dir)
        return affine_command(args.params, args.out)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except OSError as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
