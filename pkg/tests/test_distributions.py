import numpy as np
import pytest

from qlocal.distributions import (
    OutcomeDistribution,
    from_counts,
    load_distribution,
    marginal,
    save_distribution,
    tv_distance,
)

SPACE = ("bits", 2)


def dist(entries, **kw):
    return OutcomeDistribution(entries, space=SPACE, **kw)


def test_probabilities_must_sum_to_one():
    with pytest.raises(ValueError):
        dist({(0, 0): 0.5})
    with pytest.raises(ValueError):
        dist({(0, 0): 1.5, (1, 1): -0.5})
    with pytest.raises(ValueError):
        OutcomeDistribution({(0, 0): 1.0}, space=SPACE, kind="guess")


def test_tv_examples():
    p = dist({(0, 0): 0.75, (1, 1): 0.25})
    q = dist({(0, 0): 0.5, (1, 1): 0.5})
    assert tv_distance(p, q) == pytest.approx(0.25)
    assert tv_distance(p, p) == 0.0
    a = dist({(0, 0): 1.0})
    b = dist({(1, 1): 1.0})
    assert tv_distance(a, b) == 1.0


def test_tv_space_mismatch():
    p = dist({(0, 0): 1.0})
    q = OutcomeDistribution({(0, 0): 1.0}, space=("bits", 3))
    with pytest.raises(ValueError):
        tv_distance(p, q)


def _random_dist(rng, n_outcomes=6):
    w = rng.random(n_outcomes)
    w /= w.sum()
    return dist({(i, 0): float(p) for i, p in zip(range(n_outcomes), w)})


def test_tv_is_a_metric_on_random_triples():
    rng = np.random.default_rng(42)
    for _ in range(100):
        p, q, r = (_random_dist(rng) for _ in range(3))
        assert tv_distance(p, q) == pytest.approx(tv_distance(q, p), abs=1e-15)
        assert tv_distance(p, r) <= tv_distance(p, q) + tv_distance(q, r) + 1e-12
        assert 0.0 <= tv_distance(p, q) <= 1.0


def test_marginal_by_index():
    p = dist({(0, 0): 0.5, (0, 1): 0.25, (1, 1): 0.25})
    m0 = marginal(p, 0)
    assert m0.probability(0) == pytest.approx(0.75)
    m1 = marginal(p, 1)
    assert m1.probability(1) == pytest.approx(0.5)


def test_marginal_of_point_mass():
    p = dist({(1, 0): 1.0})
    assert marginal(p, 0).entries == {1: 1.0}


def test_gamma_space_coordinates():
    g = OutcomeDistribution(
        {((0, 1, 0), (1, 1)): 0.5, ((1, 1, 0), (0, 0)): 0.5},
        space=("gamma", 2),
    )
    assert marginal(g, "b1").probability(1) == pytest.approx(1.0)
    assert marginal(g, "b0").probability(0) == pytest.approx(0.5)
    assert marginal(g, ("x", 0)).probability(1) == pytest.approx(0.5)
    assert marginal(g, "b").probability((0, 1, 0)) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        marginal(g, "b9")


def test_data_processing_inequality_spot_check():
    rng = np.random.default_rng(7)
    for _ in range(20):
        p, q = _random_dist(rng), _random_dist(rng)
        joint = tv_distance(p, q)
        for coord in (0, 1):
            assert tv_distance(marginal(p, coord), marginal(q, coord)) \
                <= joint + 1e-12


def test_from_counts():
    d = from_counts({(0, 0): 3, (1, 1): 1}, space=SPACE)
    assert d.kind == "empirical"
    assert d.shots == 4
    assert d.probability((0, 0)) == pytest.approx(0.75)
    with pytest.raises(ValueError):
        from_counts({}, space=SPACE)


def test_save_load_roundtrip(tmp_path):
    p = OutcomeDistribution(
        {((0, 1), (b"\x01",)): 0.5, ((1, 0), (b"\x00",)): 0.5},
        space=("outputs", ("0", "1")),
        kind="empirical",
        shots=10,
    )
    path = tmp_path / "dist.txt"
    save_distribution(p, path)
    loaded = load_distribution(path)
    assert loaded.space == p.space
    assert loaded.kind == "empirical"
    assert loaded.shots == 10
    assert loaded.entries == p.entries
