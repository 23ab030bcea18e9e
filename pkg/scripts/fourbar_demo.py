"""Elastic four-bar walkthrough: degrees, catastrophe sample, one jump.

The fold system's Bezout count is out of reach here, so the witness goes
through the sweep-seeded monodromy path; expect a few minutes.
"""

import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from tensicat import svg
from tensicat.catastrophe import sample_catastrophe, witness_on_generic_line
from tensicat.frameworks import bundled_path, load_framework_file
from tensicat.lifting import ControlPath, lift_path
from tensicat.oracles import make_oracle
from tensicat.stability import SeedCache, equilibrium_degree, stability_set
from tensicat.tracking import TrackerConfig


def main() -> None:
    out = Path("out-fourbar")
    out.mkdir(exist_ok=True)
    cfg = TrackerConfig(rng_seed=3)
    model, _ = load_framework_file(bundled_path("fourbar"))
    cache = SeedCache(model, cfg)

    print("equilibrium degree:", equilibrium_degree(model, cfg))
    t0 = time.perf_counter()
    witness = witness_on_generic_line(model, cfg, cache)
    print(f"catastrophe degree: {witness.degree} (complete={witness.complete}, "
          f"{time.perf_counter() - t0:.0f}s)")

    rect = (-2.0, 4.0, -4.0, 1.0)
    points = sample_catastrophe(model, witness, rect, 80, cfg)
    svg.scatter_svg(
        out / "catastrophe.svg",
        [(p.y[0], p.y[1], "solid" if p.is_C else "hollow") for p in points],
        rect,
    )
    print(f"sampled {len(points)} points -> {out/'catastrophe.svg'}")

    # drag across the nearest fold with enough neighbors to estimate a normal
    oracle = make_oracle(model)
    taut = [p for p in points if p.is_C and p.delta_min >= 0.1]
    ys = np.array([p.y for p in taut])
    for i in range(len(taut)):
        d = np.linalg.norm(ys - ys[i], axis=1)
        near = ys[(d < 0.35) & (d > 1e-9)]
        if len(near) < 3:
            continue
        _, _, Vt = np.linalg.svd(near - near.mean(0), full_matrices=False)
        a, b = ys[i] + 0.3 * Vt[-1], ys[i] - 0.3 * Vt[-1]
        na = stability_set(model, list(a), cache, cfg).n_stable
        nb = stability_set(model, list(b), cache, cfg).n_stable
        if na > nb >= 1:
            rep = stability_set(model, list(a), cache, cfg)
            for p0, _ in rep.stable:
                res = lift_path(model, ControlPath((tuple(a), tuple(b))), p0.x,
                                witness, cache, cfg)
                jumps = [e for e in res.events if e.details.get("jumped")]
                if jumps:
                    x_end = res.trajectory[-1].point.x
                    print(f"drag {np.round(a,3)} -> {np.round(b,3)}: jump of "
                          f"|dx|={np.max(np.abs(x_end - p0.x)):.3f}; basins "
                          f"{oracle.basin_of(list(b), p0.x)} -> "
                          f"{oracle.basin_of(list(b), x_end)}")
                    return
    print("no jump found in the sampled region; rerun with more lines")


if __name__ == "__main__":
    main()
