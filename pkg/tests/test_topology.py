import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mimotopo.errors import ConfigurationError
from mimotopo.topology import (
    COLOCATED,
    FULLY_DISTRIBUTED,
    SEMI_DISTRIBUTED,
    build_ap_ring,
    make_topology,
    perimeter_arc_position,
    sample_placement,
)


def test_semi_distributed_two_per_ap():
    t = make_topology(8, 4, 4)
    assert t.kind == SEMI_DISTRIBUTED
    assert t.antennas_per_ap == 2


@pytest.mark.parametrize("M, L, kind", [(8, 1, COLOCATED), (8, 8, FULLY_DISTRIBUTED), (64, 16, SEMI_DISTRIBUTED)])
def test_classification(M, L, kind):
    assert make_topology(M, L, 4).kind == kind


@pytest.mark.parametrize("args", [(8, 3, 4), (4, 8, 4), (0, 1, 4), (8, 1, 0), (8.0, 1, 4)])
def test_invalid_topologies(args):
    with pytest.raises(ConfigurationError):
        make_topology(*args)


def test_divisibility_message():
    with pytest.raises(ConfigurationError, match="not divisible"):
        make_topology(8, 3, 4)


def test_numpy_integers_accepted():
    t = make_topology(np.int64(8), np.int32(2), 4)
    assert t.M == 8 and type(t.M) is int


@given(st.integers(1, 128), st.integers(1, 128), st.integers(1, 16))
def test_antennas_per_ap_integral(M, L, K):
    if L <= M and M % L == 0:
        t = make_topology(M, L, K)
        assert t.antennas_per_ap * t.L == t.M
        assert np.array_equal(np.bincount(t.ap_of_antenna()), np.full(L, M // L))
    else:
        with pytest.raises(ConfigurationError):
            make_topology(M, L, K)


def test_default_ring():
    g = build_ap_ring(6.0, 64, 0.375)
    assert g.ap_ring.shape == (64, 2)
    assert g.perimeter == 24.0
    # first site is half a spacing from corner (0, 0), counter-clockwise along y = 0
    assert np.allclose(g.ap_ring[0], [0.1875, 0.0])
    assert np.allclose(g.ap_ring[1], [0.5625, 0.0])
    assert math.dist(g.ap_ring[0], g.ap_ring[1]) == pytest.approx(0.375, abs=1e-12)
    assert np.allclose(g.ap_ring[16], [6.0, 0.1875])


def test_ring_perimeter_mismatch():
    with pytest.raises(ConfigurationError, match="perimeter"):
        build_ap_ring(6.0, 63, 0.375)


def test_ring_points_on_walls_and_closed():
    g = build_ap_ring()
    on_wall = np.isclose(g.ap_ring, 0.0) | np.isclose(g.ap_ring, 6.0)
    assert on_wall.any(axis=1).all()
    arcs = np.array([perimeter_arc_position(p, g.side) for p in g.ap_ring])
    gaps = np.diff(np.append(arcs, arcs[0] + g.perimeter))
    assert np.allclose(gaps, 0.375, atol=1e-12)
    assert gaps.sum() == pytest.approx(24.0, abs=1e-9)
    # no site on a corner
    assert not (on_wall.all(axis=1)).any()


def test_ring_is_read_only():
    g = build_ap_ring()
    with pytest.raises(ValueError):
        g.ap_ring[0, 0] = 1.0


def test_ue_area_centered():
    g = build_ap_ring()
    assert g.ue_area_origin == pytest.approx(0.75)


def test_colocated_placement():
    g = build_ap_ring()
    p = sample_placement(g, make_topology(64, 1, 4), np.random.default_rng(1))
    assert p.ap_indices.shape == (1,)
    assert p.ue_positions.shape == (4, 2)
    assert ((p.ue_positions >= 0.75) & (p.ue_positions <= 5.25)).all()


def test_fully_distributed_uses_every_site():
    g = build_ap_ring()
    p = sample_placement(g, make_topology(64, 64, 4), np.random.default_rng(2))
    assert sorted(p.ap_indices.tolist()) == list(range(64))


def test_placement_deterministic():
    g = build_ap_ring()
    t = make_topology(16, 8, 4)
    a = sample_placement(g, t, np.random.default_rng(5))
    b = sample_placement(g, t, np.random.default_rng(5))
    assert np.array_equal(a.ap_indices, b.ap_indices)
    assert np.array_equal(a.ue_positions, b.ue_positions)


def test_placement_rejects_oversized_L():
    g = build_ap_ring(1.0, 8, 0.5, ue_area_side=0.5)
    with pytest.raises(ConfigurationError):
        sample_placement(g, make_topology(16, 16, 4), np.random.default_rng(0))


def test_placement_statistics():
    g = build_ap_ring()
    t = make_topology(16, 8, 4)
    rng = np.random.default_rng(77)
    n = 10_000
    counts = np.zeros(64)
    ue = np.empty((n, 4, 2))
    for i in range(n):
        p = sample_placement(g, t, rng)
        assert len(set(p.ap_indices.tolist())) == t.L
        counts[p.ap_indices] += 1
        ue[i] = p.ue_positions
    prob = t.L / 64
    sigma = math.sqrt(n * prob * (1 - prob))
    assert np.all(np.abs(counts - n * prob) <= 3 * sigma)
    # uniform on [0.75, 5.25]: std 4.5 / sqrt(12)
    coords = ue.reshape(-1, 2)
    se = 4.5 / math.sqrt(12) / math.sqrt(len(coords))
    assert np.all(np.abs(coords.mean(axis=0) - 3.0) <= 3 * se)
