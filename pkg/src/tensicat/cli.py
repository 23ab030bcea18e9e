"""Batch front door: every computation as a subcommand with file outputs.

Each run writes its outputs plus a manifest (framework hash, command,
config, timings, output list) so results can be replayed and compared
byte for byte.  Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import svg
from .catastrophe import (
    DegenerateEnergy,
    catastrophe_degree,
    framework_hash,
    load_witness,
    sample_catastrophe,
    save_witness,
    witness_on_generic_line,
)
from .frameworks import FrameworkError, load_framework_file
from .lifting import ControlPath, LiftError, lift_path
from .oracles import make_oracle
from .stability import SeedCache, chamber_scan, equilibrium_degree, stability_set
from .tracking import TrackerConfig, TrackingError

EXIT_INPUT = 2
EXIT_NUMERIC = 3

_CFG_FIELDS = (
    "newton_tol", "track_tol", "min_step", "max_step", "max_steps",
    "singular_cond_threshold", "batch_size", "rng_seed",
)


def _fail_input(msg: str) -> int:
    print(json.dumps({"error": "input", "message": msg}), file=sys.stderr)
    return EXIT_INPUT


def _fail_numeric(msg: str) -> int:
    print(json.dumps({"error": "numerical", "message": msg}), file=sys.stderr)
    return EXIT_NUMERIC


def build_config(args) -> TrackerConfig:
    """Config file values overridden by CLI flags."""
    values: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            doc = json.load(fh)
        for k in _CFG_FIELDS:
            if k in doc:
                values[k] = doc[k]
    if getattr(args, "seed", None) is not None:
        values["rng_seed"] = args.seed
    return TrackerConfig(**values)


def _load(args):
    model, slc = load_framework_file(args.framework)
    return model, slc


def _write_manifest(args, command: str, cfg: TrackerConfig, outputs: list[Path],
                    timings: dict, extra: dict | None = None) -> Path:
    text = Path(args.framework).read_text()
    doc = {
        "command": command,
        "argv": args.effective_argv,
        "framework_sha256": hashlib.sha256(text.encode()).hexdigest(),
        "framework_path": str(args.framework),
        "config": {k: getattr(cfg, k) for k in _CFG_FIELDS},
        "timings": timings,
        "outputs": [str(p) for p in outputs],
    }
    if extra:
        doc.update(extra)
    out = Path(args.out_dir) / f"{Path(args.framework).stem}_{command}.manifest.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=2))
    return out


def _fmt(v: float) -> str:
    return repr(float(v))


def _witness_for(model, args, cfg, cache):
    key = framework_hash(Path(args.framework).read_text())
    w = load_witness(model, key, cfg.rng_seed)
    if w is None:
        w = witness_on_generic_line(model, cfg, cache)
        save_witness(w, key, cfg.rng_seed)
    return w


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_degree(args) -> int:
    model, _ = _load(args)
    cfg = build_config(args)
    began = time.perf_counter()
    eq = equilibrium_degree(model, cfg)
    cache = SeedCache(model, cfg)
    cat = catastrophe_degree(model, cfg, cache)
    seconds = time.perf_counter() - began
    print(f"equilibrium_degree: {eq}, catastrophe_degree: {cat}")
    _write_manifest(args, "degree", cfg, [], {"seconds": seconds},
                    {"equilibrium_degree": eq, "catastrophe_degree": cat})
    return 0


def cmd_stability(args) -> int:
    missing = _require(args, "at")
    if missing:
        return _fail_input(missing)
    model, _ = _load(args)
    cfg = build_config(args)
    y = [float(v) for v in args.at.split(",")]
    if len(y) != model.n_control:
        return _fail_input(f"--at needs {model.n_control} values, got {len(y)}")
    began = time.perf_counter()
    report = stability_set(model, y, SeedCache(model, cfg), cfg)
    seconds = time.perf_counter() - began
    out = Path(args.out_dir) / f"{Path(args.framework).stem}_stability.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report.to_json(indent=2))
    print(f"n_stable: {report.n_stable}  ({out})")
    _write_manifest(args, "stability", cfg, [out], {"seconds": seconds})
    return 0


def cmd_chambers(args) -> int:
    missing = _require(args, "rect")
    if missing:
        return _fail_input(missing)
    model, _ = _load(args)
    cfg = build_config(args)
    rect = tuple(float(v) for v in args.rect.split(","))
    if len(rect) != 4:
        return _fail_input("--rect needs x0,x1,y0,y1")
    began = time.perf_counter()
    cache = SeedCache(model, cfg)
    stability_set(model, [rect[0], rect[2]], cache, cfg)  # warm caches serially
    xs = np.linspace(rect[0], rect[1], args.res)
    ys = np.linspace(rect[2], rect[3], args.res)
    counts = np.full((args.res, args.res), -1, dtype=int)

    def job(ij):
        i, j = ij
        try:
            return i, j, stability_set(model, [xs[j], ys[i]], cache, cfg).n_stable
        except TrackingError:
            return i, j, -1

    cells = [(i, j) for i in range(args.res) for j in range(args.res)]
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            for i, j, c in pool.map(job, cells):
                counts[i, j] = c
    else:
        for ij in cells:
            i, j, c = job(ij)
            counts[i, j] = c
    seconds = time.perf_counter() - began
    stem = Path(args.framework).stem
    csv_path = Path(args.out_dir) / f"{stem}_chambers.csv"
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    names = list(model.partition.control)
    lines = [f"{names[0]},{names[1]},n_stable"]
    for i in range(args.res):
        for j in range(args.res):
            lines.append(f"{_fmt(xs[j])},{_fmt(ys[i])},{counts[i, j]}")
    csv_path.write_text("\n".join(lines) + "\n")
    svg_path = Path(args.out_dir) / f"{stem}_chambers.svg"
    svg.heatmap_svg(svg_path, xs, ys, counts)
    print(f"chamber counts: {sorted(set(counts.ravel().tolist()))}  ({csv_path})")
    _write_manifest(args, "chambers", cfg, [csv_path, svg_path], {"seconds": seconds})
    return 0


def cmd_sample(args) -> int:
    missing = _require(args, "rect")
    if missing:
        return _fail_input(missing)
    model, _ = _load(args)
    cfg = build_config(args)
    rect = tuple(float(v) for v in args.rect.split(","))
    if len(rect) != 4:
        return _fail_input("--rect needs x0,x1,y0,y1")
    began = time.perf_counter()
    cache = SeedCache(model, cfg)
    witness = _witness_for(model, args, cfg, cache)
    points = sample_catastrophe(model, witness, rect, args.lines, cfg)
    seconds = time.perf_counter() - began
    stem = Path(args.framework).stem
    csv_path = Path(args.out_dir) / f"{stem}_catastrophe.csv"
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["y1,y2,t,line_id,is_C,delta_min,residual"]
    for p in points:
        r = p.as_row()
        lines.append(
            f"{_fmt(r[0])},{_fmt(r[1])},{_fmt(r[2])},{int(r[3])},{int(r[4])},"
            f"{_fmt(r[5])},{_fmt(r[6])}"
        )
    csv_path.write_text("\n".join(lines) + "\n")
    svg_path = Path(args.out_dir) / f"{stem}_catastrophe.svg"
    svg.scatter_svg(
        svg_path,
        [(p.y[0], p.y[1], "solid" if p.is_C else "hollow") for p in points],
        rect,
    )
    n_c = sum(1 for p in points if p.is_C)
    print(f"sampled {len(points)} points ({n_c} in the catastrophe set)  ({csv_path})")
    _write_manifest(args, "sample", cfg, [csv_path, svg_path],
                    {"seconds": seconds}, {"witness_degree": witness.degree})
    return 0


def cmd_track(args) -> int:
    missing = _require(args, "path", "start")
    if missing:
        return _fail_input(missing)
    model, _ = _load(args)
    cfg = build_config(args)
    with open(args.path) as fh:
        path = ControlPath.from_json(json.load(fh))
    x0 = [float(v) for v in args.start.split(",")]
    began = time.perf_counter()
    cache = SeedCache(model, cfg)
    witness = _witness_for(model, args, cfg, cache)
    result = lift_path(model, path, x0, witness, cache, cfg)
    seconds = time.perf_counter() - began
    stem = Path(args.framework).stem
    json_path = Path(args.out_dir) / f"{stem}_lift.json"
    json_path.parent.mkdir(parents=True, exist_ok=True)
    json_path.write_text(json.dumps(result.as_dict(), indent=2))
    csv_path = Path(args.out_dir) / f"{stem}_trajectory.csv"
    names = list(model.partition.control)
    xnames = list(model.partition.internal)
    header = "t," + ",".join(names) + "," + ",".join(xnames) + ",min_eig,stable"
    rows = [header]
    for s in result.trajectory:
        rows.append(
            ",".join(
                [_fmt(s.t)]
                + [_fmt(v) for v in s.y]
                + [_fmt(v) for v in s.point.x]
                + [_fmt(s.min_eigenvalue), str(int(s.stable))]
            )
        )
    csv_path.write_text("\n".join(rows) + "\n")
    print(
        f"lift: {len(result.events)} events, ended_stable={result.ended_stable}  "
        f"({json_path})"
    )
    _write_manifest(args, "track", cfg, [json_path, csv_path], {"seconds": seconds})
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    cfg = build_config(args)
    serve(port=args.port, cfg=cfg, static_dir=args.static)
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="tensicat",
        description="Stable equilibria and catastrophe sets of elastic tensegrity frameworks",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, framework=True):
        if framework:
            p.add_argument("framework", help="framework description JSON file")
        p.add_argument("--seed", type=int, default=None, help="RNG seed")
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--out-dir", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None, help="worker cap for grid scans")

    p = sub.add_parser("degree", help="equilibrium and catastrophe degrees")
    common(p)
    p.set_defaults(fn=cmd_degree)

    p = sub.add_parser("stability", help="stability set at one control point")
    common(p)
    p.add_argument("--at", default=None, help="comma-separated control values")
    p.set_defaults(fn=cmd_stability)

    p = sub.add_parser("chambers", help="grid of stable counts over a rectangle")
    common(p)
    p.add_argument("--rect", default=None, help="x0,x1,y0,y1")
    p.add_argument("--res", type=int, default=None)
    p.set_defaults(fn=cmd_chambers)

    p = sub.add_parser("sample", help="sample the catastrophe set by line sweeps")
    common(p)
    p.add_argument("--rect", default=None, help="x0,x1,y0,y1")
    p.add_argument("--lines", type=int, default=None)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("track", help="lift a control path from a stable start")
    common(p)
    p.add_argument("--path", default=None, help="path JSON file with waypoints")
    p.add_argument("--start", default=None, help="comma-separated internal coordinates")
    p.set_defaults(fn=cmd_track)

    p = sub.add_parser("serve", help="run the HTTP service")
    common(p, framework=False)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--static", default=None, help="directory of UI assets to serve")
    p.set_defaults(fn=cmd_serve)

    args = ap.parse_args(argv)
    args.effective_argv = list(argv) if argv is not None else sys.argv[1:]
    _apply_config_defaults(ap, args)
    try:
        return args.fn(args)
    except (FrameworkError, FileNotFoundError, json.JSONDecodeError, LiftError,
            ValueError) as exc:
        return _fail_input(str(exc))
    except (TrackingError, DegenerateEnergy) as exc:
        return _fail_numeric(str(exc))


_HARD_DEFAULTS = {"out_dir": ".", "threads": 1, "res": 40, "lines": 200, "port": 8473}


def _apply_config_defaults(parser, args) -> None:
    """Config-file values fill any option the command line left unset."""
    doc = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            doc = json.load(fh)
    for key in ("rect", "lines", "res", "threads", "out_dir", "port", "at",
                "path", "start", "static"):
        if hasattr(args, key) and getattr(args, key) is None:
            val = doc.get(key, _HARD_DEFAULTS.get(key))
            if isinstance(val, (list, tuple)):
                val = ",".join(str(v) for v in val)
            setattr(args, key, val)


def _require(args, *names) -> str | None:
    for name in names:
        if getattr(args, name, None) is None:
            return f"--{name.replace('_', '-')} is required (flag or config file)"
    return None


if __name__ == "__main__":
    sys.exit(main())
