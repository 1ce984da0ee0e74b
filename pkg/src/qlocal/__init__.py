"""Round-synchronous simulator of classical and quantum message-passing
networks, with the triangle relation and sampling separation experiments
built on top of it."""

from .distributions import (
    OutcomeDistribution,
    from_counts,
    load_distribution,
    marginal,
    save_distribution,
    tv_distance,
)
from .errors import (
    EntangledDisposalError,
    LocalityError,
    ModelViolationError,
    ProtocolError,
    ResourceLimitError,
    SimulationError,
)
from .network import (
    LocalView,
    Message,
    NodeProgram,
    empirical_distribution,
    role_of,
    run,
    run_exact,
    run_sampled,
)
from .protocols import (
    AffineStrategy,
    GraphStateProgram,
    RelationProgram,
    affine_strategy_programs,
    all_affine_strategies,
    process_pd,
    relation_inputs,
    relation_protocol_programs,
    sampling_protocol_programs,
    subgraph_state_program,
)
from .separation import (
    exact_classical_distribution,
    exact_gamma,
    min_tv_affine_adversary,
    sampling_exact_law,
)
from .statevector import (
    Gate,
    StateVector,
    apply_gate,
    build_graph_state,
    exact_distribution,
    fidelity,
    measure_all,
    new_state,
    support,
)
from .topology import (
    Topology,
    build_gd,
    build_script_gd,
    corner_nodes,
    input_nodes,
    neighborhood,
    ring_partition,
)
from .verify import (
    ParityTuple,
    best_affine_success,
    check_prop1,
    classical_success_rate,
    enumerate_support,
    is_valid,
    lemma2_exhaustive,
    parities,
)

__version__ = "0.1.0"
