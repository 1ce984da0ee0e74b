"""Exact laws for the sampling separation.

The target law pairs three unbiased input bits with the ring measurement
outcome of the process run on those bits. A classical adversary from the
lower bound's family draws the bit triple from a product distribution and
emits a deterministic affine outcome string per triple; the search returns
the family's minimum total variation distance to the target.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .distributions import OutcomeDistribution
from .network import run_exact
from .protocols import (
    AffineStrategy,
    affine_carrier_terms,
    affine_output_string,
    all_affine_strategies,
    process_pd,
    sampling_protocol_programs,
)
from .statevector import exact_distribution
from .topology import build_script_gd, ring_distance

_B_TRIPLES = tuple(product((0, 1), repeat=3))


def gamma_space(d: int) -> tuple:
    return ("gamma", d)


def exact_gamma(d: int) -> OutcomeDistribution:
    """The target joint law: uniform bit triple b, then the exact outcome
    law of the ring process on b. Keys are ((b0,b1,b2), (x_0..x_{3d-1}))."""
    if d > 6:
        raise ValueError("exact target law capped at d=6")
    entries = {}
    for b in _B_TRIPLES:
        branch = exact_distribution(process_pd(d, b))
        for x, p in branch.items():
            entries[(b, x)] = p / 8.0
    return OutcomeDistribution(entries, space=gamma_space(d))


def sampling_exact_law(d: int) -> OutcomeDistribution:
    """Exact output law of the distributed 2-round sampling protocol,
    reshaped into the same outcome space as `exact_gamma`.

    This is the independent oracle for the cross-check: the engine
    enumerates the three randomness bits and the terminal measurement,
    knowing nothing about the centralized process.
    """
    topology = build_script_gd(d)
    raw = run_exact(
        topology, lambda: sampling_protocol_programs(d), rounds=2
    )
    entries = {}
    for record, p in raw.items():
        # node order is 0..3d-1 then the three input nodes
        x = tuple(record[i][0] for i in range(3 * d))
        b = tuple(record[3 * d + i][0] for i in range(3))
        entries[(b, x)] = entries.get((b, x), 0.0) + p
    return OutcomeDistribution(entries, space=gamma_space(d))


def exact_classical_distribution(
    make_programs, topology, rounds: int, inputs=None, max_random_bits: int = 24
) -> OutcomeDistribution:
    """Exact output law of a finite-randomness classical protocol."""
    return run_exact(
        topology,
        make_programs,
        rounds,
        inputs=inputs,
        classical_only=True,
        max_random_bits=max_random_bits,
    )


def adversary_gamma_law(
    d: int, strategy: AffineStrategy, biases
) -> OutcomeDistribution:
    """The joint law of one family adversary: b_i ~ Bernoulli(biases[i])
    independently, outcome string deterministic per triple."""
    biases = tuple(float(p) for p in biases)
    if len(biases) != 3 or any(not 0 <= p <= 1 for p in biases):
        raise ValueError("need three bias probabilities in [0, 1]")
    entries = {}
    for b in _B_TRIPLES:
        q = 1.0
        for bit, p in zip(b, biases):
            q *= p if bit else 1.0 - p
        if q > 0:
            x = affine_output_string(d, strategy, b)
            entries[(b, x)] = entries.get((b, x), 0.0) + q
    return OutcomeDistribution(entries, space=gamma_space(d))


@dataclass(frozen=True)
class AdversaryWitness:
    strategy: AffineStrategy
    biases: tuple
    tv: float


def _visible_strategies(d: int, radius: int):
    """Strategies whose every nonconstant term sits on a node within the
    given ring distance of the corner holding that input bit."""
    for strategy in all_affine_strategies():
        ok = True
        for node, (_, coeffs) in affine_carrier_terms(d, strategy).items():
            for origin in coeffs:
                if ring_distance(d, node, d * origin) > radius:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            yield strategy


def _bias_grid():
    # steps of 1/22, which puts both 5/11 and 6/11 on the grid
    return np.arange(23) / 22.0


def min_tv_affine_adversary(d: int, T: int):
    """Minimum total variation distance between the target law and the
    lower bound's classical adversary family at round budget T.

    The family: each input bit is drawn with a bias from the 1/22-step
    grid, and the outcome string is an admissible affine strategy whose
    terms only use bits visible within ring distance 2T-1 of their corner.
    Returns (min tv, witness).
    """
    if T < 1:
        raise ValueError("round budget must be at least 1")
    if T > d // 4:
        raise ValueError(f"T={T} exceeds d/4={d // 4}")
    target = exact_gamma(d)
    # mass of the target on each input triple's branch is exactly 1/8
    grid = _bias_grid()
    b_arr = np.array(_B_TRIPLES, dtype=float)  # (8, 3)
    # q[g, j] = probability the g-th bias combo assigns to triple j
    combos = np.stack(
        np.meshgrid(grid, grid, grid, indexing="ij"), axis=-1
    ).reshape(-1, 3)
    q = np.prod(
        np.where(b_arr[None, :, :] == 1.0, combos[:, None, :],
                 1.0 - combos[:, None, :]),
        axis=2,
    )
    best = None
    for strategy in _visible_strategies(d, 2 * T - 1):
        gamma_hits = np.array(
            [
                target.probability((b, affine_output_string(d, strategy, b)))
                for b in _B_TRIPLES
            ]
        )
        # per bias combo: tv = 1/2 [ sum_b |q_b - gamma_b| + (1 - sum_b gamma_b) ]
        tvs = 0.5 * (
            np.abs(q - gamma_hits[None, :]).sum(axis=1) + 1.0 - gamma_hits.sum()
        )
        g = int(np.argmin(tvs))
        if best is None or tvs[g] < best.tv:
            best = AdversaryWitness(
                strategy, tuple(float(p) for p in combos[g]), float(tvs[g])
            )
    return best.tv, best
