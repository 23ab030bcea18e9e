"""End-to-end Zeeman machine walkthrough.

Computes both degrees, samples the catastrophe set over [-4,4]^2, scans the
chamber counts on a coarse grid, and runs a hysteresis loop around the far
cusp. Writes CSV/SVG artifacts into ./out-zeeman.
"""

import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from tensicat import svg
from tensicat.catastrophe import sample_catastrophe, witness_on_generic_line
from tensicat.frameworks import bundled_path, load_framework_file
from tensicat.lifting import ControlPath, hysteresis_probe
from tensicat.oracles import make_oracle
from tensicat.stability import SeedCache, chamber_scan, equilibrium_degree, stability_set
from tensicat.tracking import TrackerConfig


def main() -> None:
    out = Path("out-zeeman")
    out.mkdir(exist_ok=True)
    cfg = TrackerConfig(rng_seed=3)
    model, _ = load_framework_file(bundled_path("zeeman"))
    cache = SeedCache(model, cfg)

    print("equilibrium degree:", equilibrium_degree(model, cfg))

    t0 = time.perf_counter()
    witness = witness_on_generic_line(model, cfg, cache)
    print(f"catastrophe degree: {witness.degree}  ({time.perf_counter() - t0:.0f}s)")

    points = sample_catastrophe(model, witness, (-4, 4, -4, 4), 250, cfg)
    svg.scatter_svg(
        out / "catastrophe.svg",
        [(p.y[0], p.y[1], "solid" if p.is_C else "hollow") for p in points],
        (-4, 4, -4, 4),
    )
    print(f"sampled {len(points)} discriminant points -> {out/'catastrophe.svg'}")

    xs, ys, counts = chamber_scan(model, (-4, 4, -4, 4), 40, cache, cfg)
    svg.heatmap_svg(out / "chambers.svg", xs, ys, counts)
    print(f"chamber counts {sorted(set(counts.ravel().tolist()))} -> {out/'chambers.svg'}")

    taut = np.array([p.y for p in points if p.is_C and p.delta_min >= 1.0])
    axis = np.array([2.0, -1.0]) / np.sqrt(5)
    cusp = taut[np.argmin(taut @ axis)]
    r = 0.4 * np.linalg.norm(cusp - taut.mean(0))
    angles = np.linspace(0, 2 * np.pi, 13)
    loop = ControlPath(tuple(tuple(cusp + r * np.array([np.cos(a), np.sin(a)]))
                             for a in angles))
    rep = stability_set(model, list(loop.waypoints[0]), cache, cfg)
    moved, result = hysteresis_probe(model, loop, rep.stable[0][0].x, witness, cache, cfg)
    print(f"loop around cusp at {np.round(cusp, 3)}: hysteresis={moved}, "
          f"{len(result.events)} events")

    oracle = make_oracle(model)
    for y in ([-1.8, 0.9], [3.0, 3.0]):
        rep = stability_set(model, y, cache, cfg)
        print(f"y={y}: solver {rep.n_stable} stable, oracle "
              f"{oracle.count_strict_minima(y)}")


if __name__ == "__main__":
    main()
