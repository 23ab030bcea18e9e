import time

import numpy as np
import pytest

from tensicat.catastrophe import witness_on_generic_line
from tensicat.frameworks import bundled_path, load_framework, load_framework_file
from tensicat.stability import SeedCache
from tensicat.tracking import TrackerConfig

SEED = 3


@pytest.fixture(scope="session")
def cfg():
    return TrackerConfig(rng_seed=SEED)


@pytest.fixture(scope="session")
def zeeman(cfg):
    model, _ = load_framework_file(bundled_path("zeeman"))
    return model


@pytest.fixture(scope="session")
def fourbar(cfg):
    model, _ = load_framework_file(bundled_path("fourbar"))
    return model


@pytest.fixture(scope="session")
def pendulum(cfg):
    model, _ = load_framework_file(bundled_path("pendulum"))
    return model


@pytest.fixture(scope="session")
def pendulum_line():
    """Pendulum with the cable anchor on a horizontal line.

    The line sits slightly off the bar pivot's axis: an anchor line through
    the pivot is mirror-symmetric, which stacks fold points into non-generic
    configurations the standing genericity assumptions exclude.
    """
    model, _ = load_framework(
        {
            "dim": 2,
            "nodes": 3,
            "bars": [{"i": 1, "j": 2, "length": 1.0}],
            "cables": [{"i": 2, "j": 3, "rest": 1.0, "elasticity": 1.0}],
            "partition": {
                "internal": ["p21", "p22"],
                "control": ["p31"],
                "fixed": {"p11": 0.0, "p12": 0.0, "p32": 0.25},
            },
        }
    )
    return model


@pytest.fixture(scope="session")
def zeeman_cache(zeeman, cfg):
    return SeedCache(zeeman, cfg)


@pytest.fixture(scope="session")
def fourbar_cache(fourbar, cfg):
    return SeedCache(fourbar, cfg)


@pytest.fixture(scope="session")
def pendulum_cache(pendulum, cfg):
    return SeedCache(pendulum, cfg)


@pytest.fixture(scope="session")
def zeeman_witnesses(zeeman, zeeman_cache, cfg):
    """Two independently computed witnesses with their wall-clock times."""
    out = []
    for tag in (0, 1):
        t0 = time.perf_counter()
        w = witness_on_generic_line(zeeman, cfg, zeeman_cache, rng_tag=tag)
        out.append((w, time.perf_counter() - t0))
    return out


@pytest.fixture(scope="session")
def zeeman_witness(zeeman_witnesses):
    return zeeman_witnesses[0][0]


@pytest.fixture(scope="session")
def fourbar_witness(fourbar, fourbar_cache, cfg):
    t0 = time.perf_counter()
    w = witness_on_generic_line(fourbar, cfg, fourbar_cache, rng_tag=0)
    w.build_seconds = time.perf_counter() - t0
    return w


@pytest.fixture(scope="session")
def zeeman_taut_samples(zeeman, zeeman_witness, cfg):
    """Catastrophe-set samples of the taut (physical) diamond over [-4,4]^2."""
    from tensicat.catastrophe import sample_catastrophe

    pts = sample_catastrophe(zeeman, zeeman_witness, (-4, 4, -4, 4), 150, cfg)
    return pts


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260808)
