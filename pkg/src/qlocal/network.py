"""Round-synchronous execution engine for the classical and quantum LOCAL model.

A T-round execution calls each node program's `round` method T+1 times
(t = 0 .. T). Messages produced in call t are delivered before call t+1;
sending anything in the final call is an error, since there is no round
left to deliver it. Quantum messages are realized as qubit-ownership
transfer inside one global arena, so locality is mechanically enforced:
a program can only touch qubits its node currently owns.

All randomness is finite and handed out at init: a program declares
`randomness_bits` and receives that many bits, derived deterministically
from (run seed, node id). This makes executions replayable and lets the
exact-law routines enumerate every randomness branch.
"""
from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .distributions import OutcomeDistribution, from_counts
from .errors import (
    LocalityError,
    ModelViolationError,
    ProtocolError,
    ResourceLimitError,
)
from .sparse import MAX_SLOTS, SparseState, decode_key
from .topology import Topology


@dataclass(frozen=True)
class LocalView:
    """What a node knows a priori: itself, its incident edges, and n."""

    self_id: object
    neighbors: frozenset
    num_nodes: int

    @property
    def degree(self) -> int:
        return len(self.neighbors)


def role_of(view: LocalView) -> str:
    """Node role in the augmented-ring network, read off the degree."""
    if view.degree == 1:
        return "input-node"
    if view.degree == 3:
        return "corner"
    if view.degree == 2:
        return "side"
    raise ProtocolError(
        f"degree {view.degree} does not occur in an augmented-ring network"
    )


@dataclass(frozen=True)
class Message:
    payload: bytes = b""
    qubits: tuple = ()


EMPTY_MESSAGE = Message()


class NodeProgram:
    """Per-node behavior: init, one handler per round call, finalize.

    `finalize(measured)` receives the terminal measurement outcome of every
    qubit the program flagged via `ctx.measure`. It must be side-effect
    free: the exact-law and multi-shot runners call it repeatedly with
    different outcomes.
    """

    randomness_bits = 0

    def init(self, ctx):
        self.ctx = ctx

    def round(self, t: int, inbox: dict) -> dict:
        return {}

    def finalize(self, measured: dict) -> bytes:
        return b""


class QuantumArena:
    """One global sparse statevector plus a qubit-ownership map."""

    def __init__(self, max_qubits: int = MAX_SLOTS):
        if max_qubits > MAX_SLOTS:
            raise ResourceLimitError(f"arena supports at most {MAX_SLOTS} qubits")
        self.max_qubits = max_qubits
        self.state = SparseState()
        self._slot = {}
        self._owner = {}
        self._free_slots = []
        self._next_qid = 0
        self._next_slot = 0

    @property
    def live_qubits(self) -> tuple:
        return tuple(sorted(self._slot))

    def owner_of(self, qid):
        return self._owner[qid]

    def create(self, owner) -> int:
        if self._free_slots:
            slot = self._free_slots.pop()
        else:
            if self._next_slot >= self.max_qubits:
                raise ResourceLimitError(
                    f"arena qubit limit of {self.max_qubits} reached"
                )
            slot = self._next_slot
            self._next_slot += 1
        qid = self._next_qid
        self._next_qid += 1
        self._slot[qid] = slot
        self._owner[qid] = owner
        return qid

    def _check_owned(self, node, round_index, qids):
        for qid in qids:
            if self._owner.get(qid) != node:
                raise LocalityError(node, round_index, qid)

    def apply(self, node, round_index, kind, qids, exponent=1):
        self._check_owned(node, round_index, qids)
        if len(set(qids)) != len(qids):
            raise ValueError("two-qubit gate needs distinct targets")
        slots = [self._slot[q] for q in qids]
        st = self.state
        if kind == "H":
            st.apply_h(slots[0])
        elif kind == "S":
            st.apply_phase(slots[0], 1j)
        elif kind == "S_POWER":
            if exponent not in (0, 1):
                raise ValueError("S_POWER exponent must be a bit")
            if exponent:
                st.apply_phase(slots[0], 1j)
        elif kind == "CNOT":
            st.apply_cnot(slots[0], slots[1])
        elif kind == "CZ":
            st.apply_cphase(slots[0], slots[1], -1.0)
        elif kind == "CS":
            st.apply_cphase(slots[0], slots[1], 1j)
        else:
            raise ValueError(f"unknown gate kind {kind!r}")

    def discard(self, node, round_index, qid):
        self._check_owned(node, round_index, [qid])
        slot = self._slot[qid]
        self.state.remove_product_qubit(slot)
        del self._slot[qid]
        del self._owner[qid]
        self._free_slots.append(slot)

    def transfer(self, qids, new_owner):
        for qid in qids:
            self._owner[qid] = new_owner

    def distribution_over(self, qids):
        slots = [self._slot[q] for q in qids]
        return self.state.distribution_over(slots)

    def sample_over(self, qids, rng, shots):
        slots = [self._slot[q] for q in qids]
        return self.state.sample_over(slots, rng, shots)

    def dense_state(self, qid_order) -> np.ndarray:
        """Dense statevector over all live qubits, in the given order."""
        if sorted(qid_order) != sorted(self._slot):
            raise ValueError("qid_order must cover exactly the live qubits")
        return self.state.dense_vector([self._slot[q] for q in qid_order])


class NodeContext:
    """A node program's handle onto the execution: view, input, randomness,
    and ownership-checked quantum operations."""

    def __init__(self, view, input_bytes, randomness, arena, allow_quantum):
        self.view = view
        self.input = input_bytes
        self.randomness = randomness
        self._arena = arena
        self._allow_quantum = allow_quantum
        self._round = 0
        self._measure_flags = []

    @property
    def self_id(self):
        return self.view.self_id

    @property
    def neighbors(self):
        return self.view.neighbors

    def _quantum(self):
        if not self._allow_quantum:
            raise ModelViolationError(
                f"node {self.self_id!r} attempted a quantum operation in a "
                f"classical-only execution"
            )
        return self._arena

    def new_qubit(self) -> int:
        return self._quantum().create(self.self_id)

    def apply(self, kind, *qubits, exponent=1):
        self._quantum().apply(self.self_id, self._round, kind, qubits, exponent)

    def discard(self, qubit):
        self._quantum().discard(self.self_id, self._round, qubit)

    def measure(self, qubit):
        """Flag a qubit for the terminal computational-basis measurement."""
        arena = self._quantum()
        if arena.owner_of(qubit) != self.self_id:
            raise LocalityError(self.self_id, self._round, qubit)
        self._measure_flags.append(qubit)


@dataclass(frozen=True)
class TraceRecord:
    round_index: int
    sender: object
    receiver: object
    payload_len: int
    qubits: tuple


@dataclass
class ExecutionTrace:
    rounds: int
    messages: list = field(default_factory=list)
    outputs: dict = field(default_factory=dict)

    def message_rounds(self) -> int:
        return len({m.round_index for m in self.messages})

    def records(self):
        for m in self.messages:
            yield {
                "round": m.round_index,
                "from": repr(m.sender),
                "to": repr(m.receiver),
                "payload_len": m.payload_len,
                "qubits": list(m.qubits),
            }

    def to_jsonl(self) -> str:
        lines = [json.dumps(r, sort_keys=True) for r in self.records()]
        lines.append(
            json.dumps(
                {"outputs": {repr(k): v.hex() for k, v in sorted(
                    self.outputs.items(), key=lambda kv: repr(kv[0]))}},
                sort_keys=True,
            )
        )
        return "\n".join(lines) + "\n"


@dataclass
class ExecutionResult:
    outputs: dict
    trace: ExecutionTrace
    arena: QuantumArena


def node_randomness(seed: int, node, nbits: int) -> tuple:
    """The node's finite random string, derived from (seed, node id)."""
    if nbits == 0:
        return ()
    digest = hashlib.sha256(f"{seed}/{node!r}".encode()).digest()
    stream = int.from_bytes(digest, "big")
    if nbits > 256:
        raise ResourceLimitError("per-node randomness limited to 256 bits")
    return tuple((stream >> i) & 1 for i in range(nbits))


def _execute_rounds(
    topology: Topology,
    programs: dict,
    rounds: int,
    seed: int,
    inputs=None,
    classical_only=False,
    randomness_overrides=None,
    max_qubits: int = MAX_SLOTS,
):
    """Run init plus all round calls; returns (contexts, arena, messages)."""
    if set(programs) != set(topology.nodes):
        raise ValueError("need exactly one program per node")
    if rounds < 0:
        raise ValueError("round count must be nonnegative")
    inputs = inputs or {}
    order = list(topology.nodes)
    arena = QuantumArena(max_qubits=max_qubits)
    trace_messages = []
    contexts = {}
    for u in order:
        prog = programs[u]
        nbits = getattr(prog, "randomness_bits", 0)
        if randomness_overrides is not None and u in randomness_overrides:
            rand = tuple(randomness_overrides[u])
            if len(rand) != nbits:
                raise ValueError(f"randomness override length mismatch at {u!r}")
        else:
            rand = node_randomness(seed, u, nbits)
        view = LocalView(u, topology.neighbors(u), topology.num_nodes)
        ctx = NodeContext(view, inputs.get(u), rand, arena, not classical_only)
        contexts[u] = ctx
        prog.init(ctx)

    inboxes = {u: {v: EMPTY_MESSAGE for v in topology.neighbors(u)} for u in order}
    for t in range(rounds + 1):
        outboxes = {}
        for u in order:
            contexts[u]._round = t
            out = programs[u].round(t, inboxes[u]) or {}
            for v, msg in out.items():
                if v not in topology.neighbors(u):
                    raise ProtocolError(
                        f"node {u!r} addressed non-neighbor {v!r} in round {t}"
                    )
                if not isinstance(msg, Message):
                    raise ProtocolError(f"node {u!r} sent a non-Message object")
            outboxes[u] = out
        if t == rounds:
            for u, out in outboxes.items():
                if out:
                    raise ProtocolError(
                        f"node {u!r} sent a message in the final round call; "
                        f"the execution has no round {t + 1}"
                    )
            break
        # Validate every transfer before mutating ownership: the ownership
        # map updates atomically at the round boundary.
        sent_qubits = set()
        for u in order:
            for v, msg in sorted(outboxes[u].items(), key=lambda kv: repr(kv[0])):
                for qid in msg.qubits:
                    if arena.owner_of(qid) != u:
                        raise LocalityError(u, t, qid)
                    if qid in sent_qubits:
                        raise ProtocolError(
                            f"qubit {qid} sent twice in round {t}"
                        )
                    sent_qubits.add(qid)
        new_inboxes = {
            u: {v: EMPTY_MESSAGE for v in topology.neighbors(u)} for u in order
        }
        for u in order:
            for v, msg in sorted(outboxes[u].items(), key=lambda kv: repr(kv[0])):
                arena.transfer(msg.qubits, v)
                new_inboxes[v][u] = msg
                trace_messages.append(
                    TraceRecord(t, u, v, len(msg.payload), tuple(msg.qubits))
                )
        inboxes = new_inboxes
    return contexts, arena, trace_messages


def _flagged_qubits(contexts, order):
    flagged = []
    for u in order:
        for qid in contexts[u]._measure_flags:
            flagged.append((u, qid))
    return flagged


def _finalize_all(programs, contexts, order, key, flagged):
    bits = decode_key(key, len(flagged)) if flagged else ()
    per_node = {u: {} for u in order}
    for j, (u, qid) in enumerate(flagged):
        per_node[u][qid] = bits[j]
    return {u: programs[u].finalize(per_node[u]) for u in order}


def run(
    topology: Topology,
    programs: dict,
    rounds: int,
    seed: int = 0,
    inputs=None,
    classical_only=False,
    randomness_overrides=None,
    max_qubits: int = MAX_SLOTS,
) -> ExecutionResult:
    """One full execution: T rounds, one terminal measurement, finalize."""
    order = list(topology.nodes)
    contexts, arena, messages = _execute_rounds(
        topology, programs, rounds, seed, inputs, classical_only,
        randomness_overrides, max_qubits,
    )
    flagged = _flagged_qubits(contexts, order)
    if flagged:
        rng = np.random.default_rng(seed)
        key = int(arena.sample_over([q for _, q in flagged], rng, 1)[0])
    else:
        key = 0
    outputs = _finalize_all(programs, contexts, order, key, flagged)
    trace = ExecutionTrace(rounds=rounds, messages=messages, outputs=outputs)
    return ExecutionResult(outputs, trace, arena)


def run_sampled(
    topology: Topology,
    programs: dict,
    rounds: int,
    shots: int,
    seed: int = 0,
    inputs=None,
    randomness_overrides=None,
) -> list:
    """One execution, many independent terminal-measurement samples.

    Valid because the terminal measurement is the only sampled step of an
    execution with fixed randomness; program finalize must be pure.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    order = list(topology.nodes)
    contexts, arena, _ = _execute_rounds(
        topology, programs, rounds, seed, inputs, False, randomness_overrides
    )
    flagged = _flagged_qubits(contexts, order)
    if flagged:
        rng = np.random.default_rng(seed)
        keys = arena.sample_over([q for _, q in flagged], rng, shots)
    else:
        keys = np.zeros(shots, dtype=np.int64)
    return [
        _finalize_all(programs, contexts, order, int(k), flagged) for k in keys
    ]


def _randomness_branches(topology, make_programs, max_random_bits):
    probe = make_programs()
    widths = {u: getattr(probe[u], "randomness_bits", 0) for u in topology.nodes}
    total = sum(widths.values())
    if total > max_random_bits:
        raise ResourceLimitError(
            f"{total} randomness bits exceed the enumeration budget of "
            f"{max_random_bits}"
        )
    nodes_with_bits = [u for u in topology.nodes if widths[u]]
    for combo in itertools.product(
        *[itertools.product((0, 1), repeat=widths[u]) for u in nodes_with_bits]
    ):
        yield dict(zip(nodes_with_bits, combo)), 2.0 ** -total


def output_space(topology: Topology) -> tuple:
    return ("outputs", tuple(repr(u) for u in topology.nodes))


def run_exact(
    topology: Topology,
    make_programs,
    rounds: int,
    inputs=None,
    classical_only=False,
    max_random_bits: int = 24,
) -> OutcomeDistribution:
    """The exact output law: enumerate every randomness branch, and within
    each branch the exact terminal-measurement distribution.

    `make_programs` must build a fresh program map per call. Keys of the
    returned distribution are tuples of output bytes in node order.
    """
    order = None
    entries = {}
    for overrides, weight in _randomness_branches(
        topology, make_programs, max_random_bits
    ):
        programs = make_programs()
        contexts, arena, _ = _execute_rounds(
            topology, programs, rounds, seed=0, inputs=inputs,
            classical_only=classical_only, randomness_overrides=overrides,
        )
        order = list(topology.nodes)
        flagged = _flagged_qubits(contexts, order)
        if flagged:
            keys, probs = arena.distribution_over([q for _, q in flagged])
        else:
            keys, probs = [0], [1.0]
        for key, prob in zip(keys, probs):
            outputs = _finalize_all(programs, contexts, order, int(key), flagged)
            record = tuple(outputs[u] for u in order)
            entries[record] = entries.get(record, 0.0) + weight * float(prob)
    return OutcomeDistribution(entries, space=output_space(topology))


def empirical_distribution(
    topology: Topology,
    make_programs,
    rounds: int,
    shots: int,
    seed: int = 0,
    inputs=None,
) -> OutcomeDistribution:
    """Frequency table of the protocol's outputs over `shots` executions.

    When the total declared randomness is small, shots are stratified over
    randomness branches (multinomial split, then terminal-measurement
    sampling per branch), which is distributionally identical to looping
    single executions but far cheaper.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    probe = make_programs()
    total_bits = sum(
        getattr(probe[u], "randomness_bits", 0) for u in topology.nodes
    )
    counts = {}
    if total_bits <= 16:
        branches = list(_randomness_branches(topology, make_programs, 16))
        per_branch = rng.multinomial(shots, [w for _, w in branches])
        for (overrides, _), n in zip(branches, per_branch):
            if n == 0:
                continue
            programs = make_programs()
            for outputs in run_sampled(
                topology, programs, rounds, int(n),
                seed=int(rng.integers(2**31)),
                inputs=inputs, randomness_overrides=overrides,
            ):
                record = tuple(outputs[u] for u in topology.nodes)
                counts[record] = counts.get(record, 0) + 1
    else:
        for _ in range(shots):
            result = run(
                topology, make_programs(), rounds,
                seed=int(rng.integers(2**31)), inputs=inputs,
            )
            record = tuple(result.outputs[u] for u in topology.nodes)
            counts[record] = counts.get(record, 0) + 1
    return from_counts(counts, space=output_space(topology), shots=shots)
