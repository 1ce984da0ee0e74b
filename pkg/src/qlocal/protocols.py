"""The concrete node programs: distributed graph-state construction, the
ring measurement protocols, classical affine strategies, and the
derandomization transformer.

The graph-state protocol is 2 rounds: round 0 each node entangles a fresh
relay register per neighbor with its own qubit and ships it out together
with its indicator bit; round 1 each node applies CS between its qubit and
every received relay whose two endpoints are both selected, then ships the
relays back; the final round call disentangles and discards the relays.
The pair of CS gates across an edge composes to CZ between the endpoint
qubits, which is exactly the graph-state entangler.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ProtocolError, ResourceLimitError
from .network import Message, NodeProgram, role_of
from .statevector import (
    DEFAULT_MAX_QUBITS,
    StateVector,
    apply_gate,
    build_graph_state,
    h,
    s_power,
)
from .topology import (
    Topology,
    build_gd,
    build_script_gd,
    corner_nodes,
    disjoint_copies,
    input_nodes,
    ring_distance,
)


class GraphStateProgram(NodeProgram):
    """Distributed 2-round subgraph graph-state construction.

    The indicator bit comes from the constructor or, if None, from the
    node's input byte. After the run, `self.qubit` is the node's share of
    the constructed state (|+> for unselected nodes).
    """

    def __init__(self, c=None):
        self._c_arg = c

    def init(self, ctx):
        self.ctx = ctx
        c = self._c_arg
        if c is None:
            if ctx.input is None:
                raise ProtocolError(
                    f"node {ctx.self_id!r} got no subgraph indicator bit"
                )
            c = ctx.input[0]
        if c not in (0, 1):
            raise ValueError("indicator must be a bit")
        self.c = int(c)
        self.qubit = None
        self._relays = {}

    def _round0_payload(self, v) -> bytes:
        return b""

    def _on_round1_message(self, v, payload: bytes):
        pass

    def _after_disentangle(self):
        pass

    def round(self, t, inbox):
        ctx = self.ctx
        neighbors = sorted(ctx.neighbors)
        if t == 0:
            q = ctx.new_qubit()
            ctx.apply("H", q)
            self.qubit = q
            out = {}
            for v in neighbors:
                relay = ctx.new_qubit()
                ctx.apply("CNOT", q, relay)
                self._relays[v] = relay
                out[v] = Message(
                    bytes([self.c]) + self._round0_payload(v), (relay,)
                )
            return out
        if t == 1:
            out = {}
            for v in neighbors:
                msg = inbox[v]
                c_v = msg.payload[0]
                self._on_round1_message(v, msg.payload)
                (relay,) = msg.qubits
                if self.c and c_v:
                    ctx.apply("CS", self.qubit, relay)
                out[v] = Message(b"", (relay,))
            return out
        if t == 2:
            for v in neighbors:
                (relay,) = inbox[v].qubits
                if relay != self._relays[v]:
                    raise ProtocolError(
                        f"node {ctx.self_id!r} got back a foreign register"
                    )
                ctx.apply("CNOT", self.qubit, relay)
                ctx.discard(relay)
            self._after_disentangle()
        return {}


def subgraph_state_program(c) -> GraphStateProgram:
    return GraphStateProgram(c)


class GraphStateSampleProgram(GraphStateProgram):
    """Subgraph construction followed by an H-basis measurement of the
    node's qubit; used by the locality test suite."""

    def _after_disentangle(self):
        self.ctx.apply("H", self.qubit)
        self.ctx.measure(self.qubit)

    def finalize(self, measured):
        return bytes([measured[self.qubit]])


class RelationProgram(GraphStateProgram):
    """One node of the 2-round ring-measurement protocol.

    Roles are read off the degree: degree-1 input nodes hold a bit and
    forward it piggybacked on the round-0 message; degree-3 corners apply
    the conditional phase; every ring node ends with H and a measurement.
    """

    def __init__(self):
        super().__init__(c=None)

    def _input_bit(self, ctx):
        if ctx.input is None:
            raise ProtocolError(f"input node {ctx.self_id!r} got no input bit")
        return ctx.input[0]

    def init(self, ctx):
        self.role = role_of(ctx.view)
        if self.role == "input-node":
            self._c_arg = 0
            self.b = self._input_bit(ctx)
        else:
            self._c_arg = 1
            self.b = None
        super().init(ctx)

    def _round0_payload(self, v) -> bytes:
        if self.role == "input-node":
            return bytes([self.b])
        return b""

    def _on_round1_message(self, v, payload):
        if self.role == "corner" and len(payload) >= 2:
            self.b = payload[1]

    def _after_disentangle(self):
        if self.role == "input-node":
            return
        if self.role == "corner":
            if self.b is None:
                raise ProtocolError("corner received no input bit")
            self.ctx.apply("S_POWER", self.qubit, exponent=self.b)
        self.ctx.apply("H", self.qubit)
        self.ctx.measure(self.qubit)

    def finalize(self, measured):
        if self.role == "input-node":
            return b""
        return bytes([measured[self.qubit]])


class SamplingInputProgram(RelationProgram):
    """Input node of the sampling protocol: draws its bit from its finite
    random string and outputs it."""

    randomness_bits = 1

    def _input_bit(self, ctx):
        return ctx.randomness[0]

    def finalize(self, measured):
        return bytes([self.b])


def relation_protocol_programs(d: int) -> dict:
    """Programs for every node of the augmented ring; input bits are fed
    through the runner's `inputs` map (see `relation_inputs`)."""
    return {u: RelationProgram() for u in build_script_gd(d).nodes}


def relation_inputs(d: int, b) -> dict:
    b = _check_bits(b)
    return {w: bytes([bit]) for w, bit in zip(input_nodes(d), b)}


def sampling_protocol_programs(d: int) -> dict:
    programs = {u: RelationProgram() for u in range(3 * d)}
    for w in input_nodes(d):
        programs[w] = SamplingInputProgram()
    return programs


def k_copies_topology(d: int, k: int) -> Topology:
    return disjoint_copies(build_script_gd(d), k)


def k_copies_programs(d: int, k: int, inputs_per_copy) -> tuple:
    """Programs and inputs for k independent copies of the relation game.

    Returns (programs, inputs); node u of copy c has identifier (c, u).
    """
    inputs_per_copy = [_check_bits(b) for b in inputs_per_copy]
    if len(inputs_per_copy) != k:
        raise ValueError("need one input triple per copy")
    programs = {
        (c, u): RelationProgram()
        for c in range(k)
        for u in build_script_gd(d).nodes
    }
    inputs = {
        (c, w): bytes([bit])
        for c in range(k)
        for w, bit in zip(input_nodes(d), inputs_per_copy[c])
    }
    return programs, inputs


def _check_bits(b) -> tuple:
    b = tuple(b)
    if len(b) != 3 or any(bit not in (0, 1) for bit in b):
        raise ValueError("input must be three bits")
    return b


def process_pd(d: int, b, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    """Centralized reference for the ring measurement process: graph state
    on the 3d-ring, conditional S at the corners, H everywhere. The exact
    distribution of the returned state is the measurement law."""
    b = _check_bits(b)
    ring = build_gd(d)
    if 3 * d > max_qubits:
        raise ResourceLimitError(
            f"ring of {3 * d} qubits exceeds the cap of {max_qubits}"
        )
    state = build_graph_state(ring, max_qubits=max_qubits)
    for i, bit in enumerate(b):
        state = apply_gate(state, s_power(bit, d * i))
    for q in range(3 * d):
        state = apply_gate(state, h(q))
    return state


# --- classical affine strategies -------------------------------------------


@dataclass(frozen=True)
class AffineStrategy:
    """Coefficients of the four affine parity functions.

    even:   q_E(b0,b1,b2) = e[0] ^ e[1]b0 ^ e[2]b1 ^ e[3]b2
    right:  q_R(b0,b1)    = r[0] ^ r[1]b0 ^ r[2]b1
    bottom: q_B(b1,b2)    = t[0] ^ t[1]b1 ^ t[2]b2
    left:   q_L(b0,b2)    = l[0] ^ l[1]b0 ^ l[2]b2
    """

    even: tuple
    right: tuple
    bottom: tuple
    left: tuple

    def __post_init__(self):
        for name, coeffs, width in (
            ("even", self.even, 4),
            ("right", self.right, 3),
            ("bottom", self.bottom, 3),
            ("left", self.left, 3),
        ):
            coeffs = tuple(coeffs)
            object.__setattr__(self, name, coeffs)
            if len(coeffs) != width or any(c not in (0, 1) for c in coeffs):
                raise ValueError(f"{name} needs {width} coefficient bits")

    def q_even(self, b0, b1, b2):
        e = self.even
        return e[0] ^ (e[1] & b0) ^ (e[2] & b1) ^ (e[3] & b2)

    def q_right(self, b0, b1):
        r = self.right
        return r[0] ^ (r[1] & b0) ^ (r[2] & b1)

    def q_bottom(self, b1, b2):
        t = self.bottom
        return t[0] ^ (t[1] & b1) ^ (t[2] & b2)

    def q_left(self, b0, b2):
        l = self.left
        return l[0] ^ (l[1] & b0) ^ (l[2] & b2)

    def is_admissible(self) -> bool:
        """q_R ^ q_B ^ q_L vanishes on all eight inputs."""
        return all(
            self.q_right(b0, b1) ^ self.q_bottom(b1, b2) ^ self.q_left(b0, b2) == 0
            for b0 in (0, 1)
            for b1 in (0, 1)
            for b2 in (0, 1)
        )

    def parity_tuple(self, b) -> tuple:
        b0, b1, b2 = b
        return (
            self.q_even(b0, b1, b2),
            self.q_right(b0, b1),
            self.q_bottom(b1, b2),
            self.q_left(b0, b2),
        )


def affine_carrier_terms(d: int, strategy: AffineStrategy) -> dict:
    """Which ring node outputs which affine term.

    Each parity class is split across the nodes adjacent to the corners
    whose input the class may depend on, so every nonconstant term rides on
    a node that can actually see the needed bit. Returns
    {ring label: (constant bit, {input index: coefficient bit})}.
    """
    terms = {}

    def add(node, const, origin, coeff):
        base, coeffs = terms.get(node, (0, {}))
        coeffs = dict(coeffs)
        if origin is not None and coeff:
            coeffs[origin] = coeffs.get(origin, 0) ^ coeff
            if coeffs[origin] == 0:
                del coeffs[origin]
        terms[node] = (base ^ const, coeffs)

    e, r, t, l = strategy.even, strategy.right, strategy.bottom, strategy.left
    c0, c1, c2 = corner_nodes(d)
    add(c0, e[0], 0, e[1])
    add(c1, 0, 1, e[2])
    add(c2, 0, 2, e[3])
    # odd side nodes nearest the corner that holds the visible bit
    add(1, r[0], 0, r[1])
    add(d - 1, 0, 1, r[2])
    add(d + 1, t[0], 1, t[1])
    add(2 * d - 1, 0, 2, t[2])
    add(3 * d - 1, 0, 0, l[1])
    add(2 * d + 1, l[0], 2, l[2])
    return {n: v for n, v in terms.items() if v[0] or v[1]}


def _encode_known(known: dict) -> bytes:
    return json.dumps(sorted(known.items())).encode()


def _decode_known(payload: bytes) -> dict:
    if not payload:
        return {}
    return {k: v for k, v in json.loads(payload.decode())}


class _FloodingProgram(NodeProgram):
    """Classical full-information flooding for T rounds; subclasses decide
    what seeds the flood and what to output."""

    def __init__(self, rounds: int):
        self.rounds = rounds

    def _seed_known(self, ctx) -> dict:
        return {}

    def init(self, ctx):
        self.ctx = ctx
        self.known = self._seed_known(ctx)

    def round(self, t, inbox):
        for msg in inbox.values():
            self.known.update(_decode_known(msg.payload))
        if t >= self.rounds:
            return {}
        payload = _encode_known(self.known)
        return {v: Message(payload) for v in self.ctx.neighbors}


class AffineTermProgram(_FloodingProgram):
    """Ring node of a classical affine strategy: floods, then outputs its
    assigned affine term of the input bits it has seen."""

    def __init__(self, rounds, const=0, coeffs=None):
        super().__init__(rounds)
        self.const = const
        self.coeffs = dict(coeffs or {})

    def finalize(self, measured):
        bit = self.const
        for origin, coeff in self.coeffs.items():
            if origin not in self.known:
                raise ProtocolError(
                    f"node {self.ctx.self_id!r} never saw input {origin}"
                )
            bit ^= coeff & self.known[origin]
        return bytes([bit])


class InputFloodProgram(_FloodingProgram):
    """Degree-1 input node for classical strategies: floods its bit, and
    outputs nothing (relation game) unless `echo` is set."""

    def __init__(self, rounds, origin, echo=False):
        super().__init__(rounds)
        self.origin = origin
        self.echo = echo

    def _seed_known(self, ctx):
        if ctx.input is None:
            raise ProtocolError(f"input node {ctx.self_id!r} got no input bit")
        return {self.origin: ctx.input[0]}

    def finalize(self, measured):
        if self.echo:
            return bytes([self.known[self.origin]])
        return b""


def affine_strategy_programs(
    d: int, strategy: AffineStrategy, rounds: int, echo_inputs=False
) -> dict:
    """A classical `rounds`-round protocol realizing the strategy's four
    parity functions on the augmented ring.

    Raises if rounds exceeds d/2, if the strategy is not admissible, or if
    some nonconstant term cannot reach its carrier within the round budget
    (the input bit travels one hop from the input node first).
    """
    if rounds > d // 2:
        raise ValueError(f"rounds={rounds} exceeds d/2={d // 2}")
    if not strategy.is_admissible():
        raise ValueError("strategy violates the side-parity constraint")
    carriers = affine_carrier_terms(d, strategy)
    for node, (_, coeffs) in carriers.items():
        for origin in coeffs:
            hops = ring_distance(d, node, d * origin) + 1
            if hops > rounds:
                raise ValueError(
                    f"node v_{node} cannot see input {origin} within "
                    f"{rounds} rounds"
                )
    programs = {}
    for u in range(3 * d):
        const, coeffs = carriers.get(u, (0, {}))
        programs[u] = AffineTermProgram(rounds, const, coeffs)
    for i, w in enumerate(input_nodes(d)):
        programs[w] = InputFloodProgram(rounds, i, echo=echo_inputs)
    return programs


def affine_output_string(d: int, strategy: AffineStrategy, b) -> tuple:
    """The full 3d-bit string the strategy's protocol outputs on input b."""
    b = _check_bits(b)
    carriers = affine_carrier_terms(d, strategy)
    bits = [0] * (3 * d)
    for node, (const, coeffs) in carriers.items():
        bit = const
        for origin, coeff in coeffs.items():
            bit ^= coeff & b[origin]
        bits[node] = bit
    return tuple(bits)


def all_affine_strategies():
    """Every admissible strategy: 16 even-parity functions times the 32
    side triples satisfying the parity constraint."""
    from itertools import product

    for even in product((0, 1), repeat=4):
        for right in product((0, 1), repeat=3):
            for bottom in product((0, 1), repeat=3):
                # constraint forces the left coefficients and ties constants
                left_b0 = right[1]
                left_b2 = bottom[2]
                left_const = right[0] ^ bottom[0]
                if right[2] != bottom[1]:
                    continue
                strategy = AffineStrategy(
                    even, right, bottom, (left_const, left_b0, left_b2)
                )
                yield strategy


# --- derandomization of function-computing protocols ------------------------


class DerandomizedProgram(_FloodingProgram):
    """Deterministic T-round protocol from an output-distribution oracle:
    flood all inputs T hops, then output the most probable value."""

    def __init__(self, rounds, oracle):
        super().__init__(rounds)
        self.oracle = oracle

    def _seed_known(self, ctx):
        if ctx.input is None:
            return {}
        return {ctx.self_id: ctx.input[0]}

    def finalize(self, measured):
        dist = self.oracle(self.ctx.self_id, dict(self.known))
        ranked = sorted(dist.items(), key=lambda kv: (-kv[1], repr(kv[0])))
        if len(ranked) > 1 and abs(ranked[0][1] - ranked[1][1]) < 1e-12:
            raise ProtocolError(
                f"oracle mode tie at node {self.ctx.self_id!r}; the reference "
                f"protocol cannot succeed with probability above 1/2"
            )
        return bytes([ranked[0][0]])


def derandomize_function_protocol(topology: Topology, oracle, rounds: int) -> dict:
    """Programs computing, at every node, the mode of the oracle's output
    distribution given the inputs in the node's T-neighborhood."""
    return {u: DerandomizedProgram(rounds, oracle) for u in topology.nodes}
