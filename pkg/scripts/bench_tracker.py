"""Tracker throughput on the bundled systems, for calibration after changes."""

import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from tensicat.frameworks import bundled_path, load_framework_file
from tensicat.tracking import TrackerConfig, solve_total_degree


def bench(name: str, system, params, cfg) -> None:
    system.kernel(order=1)  # compile outside the timing
    t0 = time.perf_counter()
    res = solve_total_degree(system, cfg, params=params)
    dt = time.perf_counter() - t0
    r = res.report
    print(f"{name:18s} {r.n_paths:6d} paths  {len(res):4d} distinct  "
          f"{r.n_failed:3d} failed  {dt:7.2f}s  ({1e3 * dt / r.n_paths:.2f} ms/path)")


def main() -> None:
    cfg = TrackerConfig(rng_seed=3)
    rng = np.random.default_rng(1)
    for name in ("pendulum", "zeeman", "fourbar"):
        model, _ = load_framework_file(bundled_path(name))
        y = list(rng.standard_normal(2) + 1j * rng.standard_normal(2))
        bench(f"{name} dL", model.critical_system().system, y, cfg)
    model, _ = load_framework_file(bundled_path("zeeman"))
    fold = model.fold_system(rng=cfg.rng(31))
    q = list(rng.standard_normal(4) + 1j * rng.standard_normal(4))
    bench("zeeman folds", fold.system, q, cfg)


if __name__ == "__main__":
    main()
