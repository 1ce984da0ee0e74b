import itertools

import numpy as np
import pytest

from qlocal.cli import subgraph_fidelity_case
from qlocal.errors import EntangledDisposalError, ProtocolError
from qlocal.network import run, run_exact
from qlocal.protocols import (
    AffineStrategy,
    GraphStateProgram,
    affine_carrier_terms,
    affine_output_string,
    affine_strategy_programs,
    all_affine_strategies,
    derandomize_function_protocol,
    process_pd,
    relation_inputs,
    relation_protocol_programs,
    sampling_protocol_programs,
)
from qlocal.statevector import exact_distribution
from qlocal.topology import Topology, build_script_gd, input_nodes

TRIANGLE = Topology(range(3), [(0, 1), (1, 2), (2, 0)])


def test_full_selection_builds_the_graph_state():
    fid, msg_rounds = subgraph_fidelity_case(TRIANGLE, {0: 1, 1: 1, 2: 1})
    assert fid == pytest.approx(1.0, abs=1e-12)
    assert msg_rounds == 2


def test_partial_selection_builds_induced_subgraph_state():
    # only the 0-1 edge survives; node 2 must end in |+>
    fid, _ = subgraph_fidelity_case(TRIANGLE, {0: 1, 1: 1, 2: 0})
    assert fid == pytest.approx(1.0, abs=1e-12)


def test_no_selection_leaves_product_of_plus_states():
    fid, _ = subgraph_fidelity_case(TRIANGLE, {0: 0, 1: 0, 2: 0})
    assert fid == pytest.approx(1.0, abs=1e-12)


def test_indicator_from_inputs():
    topo = Topology([0, 1], [(0, 1)])
    programs = {u: GraphStateProgram() for u in topo.nodes}
    run(topo, programs, rounds=2, inputs={0: b"\x01", 1: b"\x01"})
    assert programs[0].qubit is not None


def test_missing_indicator_rejected():
    topo = Topology([0, 1], [(0, 1)])
    with pytest.raises(ProtocolError):
        run(topo, {u: GraphStateProgram() for u in topo.nodes}, rounds=2)


def test_relation_protocol_outputs_follow_process_law():
    """Conditioned on an input triple, the distributed protocol's outcome
    law must equal the centralized process law exactly."""
    d, b = 2, (0, 1, 1)
    dist = run_exact(
        build_script_gd(d),
        lambda: relation_protocol_programs(d),
        rounds=2,
        inputs=relation_inputs(d, b),
    )
    reference = exact_distribution(process_pd(d, b))
    for record, p in dist.items():
        x = tuple(record[i][0] for i in range(3 * d))
        assert reference.probability(x) == pytest.approx(p, abs=1e-12)


def test_relation_inputs_shape():
    assert relation_inputs(2, (1, 0, 1)) == {6: b"\x01", 7: b"\x00", 8: b"\x01"}
    with pytest.raises(ValueError):
        relation_inputs(2, (1, 2, 0))


def test_sampling_programs_declare_one_bit_at_inputs():
    programs = sampling_protocol_programs(2)
    for w in input_nodes(2):
        assert programs[w].randomness_bits == 1
    assert programs[0].randomness_bits == 0


def test_process_pd_normalized():
    state = process_pd(2, (1, 1, 1))
    assert abs(state.norm_sq() - 1.0) < 1e-12


# --- affine strategies ------------------------------------------------------


def test_admissible_strategy_count():
    strategies = list(all_affine_strategies())
    assert len(strategies) == 512
    assert all(s.is_admissible() for s in strategies)
    # 32 distinct side triples, each paired with all 16 even functions
    triples = {(s.right, s.bottom, s.left) for s in strategies}
    assert len(triples) == 32


def test_inadmissible_strategy_detected():
    bad = AffineStrategy((0, 0, 0, 0), (1, 0, 0), (0, 0, 0), (0, 0, 0))
    assert not bad.is_admissible()
    with pytest.raises(ValueError):
        affine_strategy_programs(4, bad, rounds=2)


def test_carrier_terms_realize_the_parities():
    strategy = AffineStrategy((1, 1, 0, 1), (0, 1, 1), (1, 1, 0), (1, 1, 0))
    assert strategy.is_admissible()
    d = 4
    from qlocal.verify import parities

    for b in itertools.product((0, 1), repeat=3):
        x = affine_output_string(d, strategy, b)
        p = parities(d, x)
        assert p.as_bits() == strategy.parity_tuple(b)


def test_strategy_protocol_reproduces_output_string():
    strategy = AffineStrategy((0, 1, 0, 0), (1, 1, 0), (0, 0, 1), (1, 1, 1))
    assert strategy.is_admissible()
    d = 4
    for b in itertools.product((0, 1), repeat=3):
        result = run(
            build_script_gd(d),
            affine_strategy_programs(d, strategy, rounds=2),
            rounds=2,
            inputs=relation_inputs(d, b),
            classical_only=True,
        )
        got = tuple(result.outputs[i][0] for i in range(3 * d))
        assert got == affine_output_string(d, strategy, b)


def test_round_budget_enforced():
    strategy = next(all_affine_strategies())
    with pytest.raises(ValueError):
        affine_strategy_programs(4, strategy, rounds=3)  # > d/2


def test_nonconstant_terms_need_visibility():
    # a side term cannot run in a single round: the bit needs one hop to
    # reach the corner and one more to reach the side carrier
    strategy = AffineStrategy((0, 0, 0, 0), (0, 1, 0), (0, 0, 0), (0, 1, 0))
    assert strategy.is_admissible()
    with pytest.raises(ValueError):
        affine_strategy_programs(4, strategy, rounds=1)


def test_constant_strategies_run_in_any_budget():
    strategy = AffineStrategy((1, 0, 0, 0), (1, 0, 0), (1, 0, 0), (0, 0, 0))
    programs = affine_strategy_programs(8, strategy, rounds=1)
    assert len(programs) == 27


def test_carrier_terms_only_use_adjacent_labels():
    d = 6
    for strategy in itertools.islice(all_affine_strategies(), 50):
        for node, (_, coeffs) in affine_carrier_terms(d, strategy).items():
            from qlocal.topology import ring_distance

            for origin in coeffs:
                assert ring_distance(d, node, d * origin) <= 1


# --- derandomization --------------------------------------------------------


def test_derandomize_tie_is_an_error():
    topo = Topology([0, 1], [(0, 1)])
    coin = lambda node, known: {0: 0.5, 1: 0.5}
    programs = derandomize_function_protocol(topo, coin, rounds=1)
    with pytest.raises(ProtocolError):
        run(topo, programs, rounds=1, inputs={0: b"\x00", 1: b"\x00"},
            classical_only=True)


def test_derandomize_majority_output():
    topo = Topology([0, 1], [(0, 1)])
    skew = lambda node, known: {0: 0.3, 1: 0.7}
    programs = derandomize_function_protocol(topo, skew, rounds=1)
    result = run(topo, programs, rounds=1, inputs={0: b"\x00", 1: b"\x01"},
                 classical_only=True)
    assert result.outputs == {0: b"\x01", 1: b"\x01"}
