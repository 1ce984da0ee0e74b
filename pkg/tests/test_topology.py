import pytest

from qlocal.topology import (
    Topology,
    build_gd,
    build_script_gd,
    corner_nodes,
    disjoint_copies,
    distance,
    input_nodes,
    neighborhood,
    ring_distance,
    ring_partition,
)


def test_ring_counts():
    ring = build_gd(4)
    assert ring.num_nodes == 12
    assert len(ring.edges) == 12
    assert all(ring.degree(u) == 2 for u in ring.nodes)


def test_augmented_ring_counts():
    g = build_script_gd(2)
    assert g.num_nodes == 9
    assert len(g.edges) == 9
    assert [g.degree(u) for u in (6, 7, 8)] == [1, 1, 1]
    # each input node hangs off its corner
    assert g.neighbors(6) == frozenset({0})
    assert g.neighbors(7) == frozenset({2})
    assert g.neighbors(8) == frozenset({4})


@pytest.mark.parametrize("bad_d", [0, 1, 3, -2])
def test_odd_d_rejected(bad_d):
    with pytest.raises(ValueError):
        build_gd(bad_d)


def test_side_partition_at_d4():
    parts = ring_partition(4)
    assert parts["V_R"] == {1, 2, 3}
    assert parts["V_B"] == {5, 6, 7}
    assert parts["V_L"] == {9, 10, 11}
    assert parts["V_even"] | parts["V_odd"] == set(range(12))
    assert corner_nodes(4) == (0, 4, 8)
    assert input_nodes(4) == (12, 13, 14)


def test_ring_distance_wraps():
    assert ring_distance(2, 0, 5) == 1
    assert ring_distance(4, 1, 11) == 2
    assert ring_distance(4, 3, 3) == 0


def test_validation_errors():
    with pytest.raises(ValueError):
        Topology([0, 1], [(0, 0)])
    with pytest.raises(ValueError):
        Topology([0, 1], [(0, 2)])
    with pytest.raises(ValueError):
        Topology([0, 0, 1], [(0, 1)])
    with pytest.raises(ValueError):
        Topology([0, 1, 2], [(0, 1)])  # disconnected
    t = Topology([0, 1, 2], [(0, 1)], allow_disconnected=True)
    assert not t.is_connected()


def test_neighborhood_and_distance():
    g = build_script_gd(2)
    assert neighborhood(g, 0, 0) == {0}
    assert neighborhood(g, 0, 1) == {0, 1, 5, 6}
    assert distance(g, 6, 3) == 4
    with pytest.raises(ValueError):
        neighborhood(g, 99, 1)


def test_json_roundtrip(tmp_path):
    g = build_script_gd(2)
    path = tmp_path / "g.json"
    g.save(path)
    loaded = Topology.load(path)
    assert loaded.nodes == g.nodes
    assert loaded.edges == g.edges


def test_relabel_preserves_structure():
    g = build_gd(2)
    mapping = {u: f"n{u}" for u in g.nodes}
    relabeled = g.relabel(mapping)
    assert relabeled.num_nodes == g.num_nodes
    assert len(relabeled.edges) == len(g.edges)
    assert relabeled.neighbors("n0") == frozenset({"n1", "n5"})


def test_disjoint_copies():
    g = disjoint_copies(build_gd(2), 3)
    assert g.num_nodes == 18
    assert len(g.edges) == 18
    assert g.neighbors((1, 0)) == frozenset({(1, 1), (1, 5)})
    with pytest.raises(ValueError):
        disjoint_copies(build_gd(2), 0)
