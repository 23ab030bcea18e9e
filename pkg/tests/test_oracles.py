import numpy as np
import pytest

from tensicat.oracles import (
    CircleOracle,
    CouplerOracle,
    count_change_bisect,
    make_oracle,
)


def test_make_oracle_picks_circle_for_pendulum(pendulum):
    orc = make_oracle(pendulum)
    assert isinstance(orc, CircleOracle)
    assert orc.node == 2
    assert orc.radius == pytest.approx(1.0)
    assert orc.center == pytest.approx([0.0, 0.0])


def test_make_oracle_picks_coupler_for_fourbar(fourbar):
    orc = make_oracle(fourbar)
    assert isinstance(orc, CouplerOracle)
    assert orc.crank_node == 4
    assert orc.crank_center == pytest.approx([-1.0, 0.0])
    assert orc.crank_radius == pytest.approx(1.5)
    assert orc.follower_node == 3
    assert orc.coupler_length == pytest.approx(1.0)


def test_circle_counts_closed_forms(pendulum):
    orc = make_oracle(pendulum)
    # taut anchor: one strict minimum (aligned), one maximum
    assert orc.count_strict_minima([3.0, 0.0]) == 1
    # anchor inside the unit disk: the slack arc is exactly flat, no strict minima
    assert orc.count_strict_minima([0.5, 0.0]) == 0


def test_circle_minima_location(pendulum):
    orc = make_oracle(pendulum)
    minima = orc.minima([3.0, 0.0])
    assert len(minima) == 1
    theta, energy = minima[0]
    assert theta == pytest.approx(0.0, abs=1e-3) or theta == pytest.approx(
        2 * np.pi, abs=1e-3
    )
    assert energy == pytest.approx(0.5 * (2.0 - 1.0) ** 2, rel=1e-3)


def test_circle_basin_descent(pendulum):
    orc = make_oracle(pendulum)
    i = orc.basin_of([3.0, 0.0], [np.cos(0.5), np.sin(0.5)])
    theta, E = orc.energies([3.0, 0.0])
    assert theta[i] == pytest.approx(0.0, abs=1e-3) or theta[i] == pytest.approx(
        2 * np.pi, abs=2e-3
    )


def test_coupler_valid_arc_structure(fourbar):
    orc = make_oracle(fourbar)
    phi, crank, branches, energies, valid = orc.sample([0.0, 0.0], 2000)
    assert 0 < valid.sum() < len(phi)
    # follower obeys both bar lengths wherever valid
    i = np.nonzero(valid)[0][len(np.nonzero(valid)[0]) // 2]
    p3 = branches["plus"][i]
    p4 = crank[i]
    assert np.linalg.norm(p3 - np.array([1.0, 0.0])) == pytest.approx(3.0, abs=1e-9)
    assert np.linalg.norm(p3 - p4) == pytest.approx(1.0, abs=1e-9)


def test_coupler_counts_dead_point_minimum(fourbar):
    # cable 46 drags node 4 against its travel limit: the glued-curve count
    # includes the equilibrium parked at the branch point
    orc = make_oracle(fourbar)
    assert orc.count_strict_minima([1.095, 4.604]) == 2


def test_coupler_glued_loops(fourbar):
    orc = make_oracle(fourbar)
    _, _, _, _, valid = orc.sample([0.0, 0.0], 1000)
    loops = orc._loops(valid)
    assert len(loops) == 1
    assert len(loops[0]) == 2 * valid.sum()


def test_coupler_branch_assignment_round_trip(fourbar):
    orc = make_oracle(fourbar)
    phi, crank, branches, _, valid = orc.sample([0.0, 0.0], 2000)
    i = np.nonzero(valid)[0][50]
    x = [branches["minus"][i][0], branches["minus"][i][1], crank[i][0], crank[i][1]]
    phi_got, br = orc.branch_of([0.0, 0.0], x)
    assert br == "minus"
    assert phi_got == pytest.approx(phi[i], abs=1e-9)


def test_count_change_bisect(pendulum):
    orc = make_oracle(pendulum)
    # along the x-axis the strict count flips from 0 to 1 at anchor distance 2
    t = count_change_bisect(
        lambda y: orc.count_strict_minima(list(y)),
        lambda s: np.array([s, 0.0]),
        1.5,
        2.5,
    )
    assert t == pytest.approx(2.0, abs=1e-3)


def test_count_change_bisect_needs_differing_ends(pendulum):
    orc = make_oracle(pendulum)
    with pytest.raises(ValueError):
        count_change_bisect(
            lambda y: orc.count_strict_minima(list(y)),
            lambda s: np.array([s, 0.0]),
            3.0,
            3.1,
        )


def test_make_oracle_rejects_unknown_topology():
    from tensicat.frameworks import load_framework

    model, _ = load_framework(
        {
            "dim": 2,
            "nodes": 2,
            "bars": [],
            "cables": [{"i": 1, "j": 2, "rest": 1.0, "elasticity": 1.0}],
            "partition": {
                "internal": ["p21", "p22"],
                "control": ["p11", "p12"],
                "fixed": {},
            },
        }
    )
    with pytest.raises(ValueError):
        make_oracle(model)
