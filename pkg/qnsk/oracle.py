# Copyright (c) 2026 qnsk contributors
#
# This file is part of qnsk, the Quantum Network Simulation Kit.
#
# Licensed to the Apache Software Foundation (ASF) under one
# or more contributor license agreements.  See the NOTICE file
# distributed with this work for additional information
# regarding copyright ownership.  The ASF licenses this file
# to you under the Apache License, Version 2.0 (the
# "License"); you may not use this file except in compliance
# with the License.  You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing,
# software distributed under the License is distributed on an
# "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
# KIND, either express or implied.  See the License for the
# specific language governing permissions and limitations
# under the License.
"""
Closed-form throughput of one swap between two links

Link i delivers E_i ~ Binomial(c_i, p_i) pairs in a slot; the middle node
swaps min(E_1, E_2) of them, each succeeding with probability q. Slot
length and link capacities are derived from measured link characteristics
and the memory coherence time.
"""
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np
from scipy.stats import binom

from qnsk.exceptions import CoherenceTooShort, OracleError
from qnsk.topology import DEFAULT_CLASSICAL_SPEED

DEFAULT_SAMPLES = 5000


@dataclass(frozen=True)
class OracleInput:
    attempt_rates: Tuple[float, float]
    success_probs: Tuple[float, float]
    ent_rates: Tuple[float, float]
    swap_prob: float
    coherence_time: float
    lengths: Tuple[float, float]
    classical_speed: float = DEFAULT_CLASSICAL_SPEED
    t_app: float = 0.0
    samples: int = DEFAULT_SAMPLES
    seed: int = 0

    def __post_init__(self):
        for a, p, r in zip(self.attempt_rates, self.success_probs, self.ent_rates):
            if a <= 0 or r <= 0:
                raise OracleError('attempt and entanglement rates must be positive')
            if not 0 < p <= 1:
                raise OracleError('success probability {} outside (0, 1]'.format(p))
        if not 0 <= self.swap_prob <= 1:
            raise OracleError('swap probability {} outside [0, 1]'.format(self.swap_prob))
        if self.samples < 1:
            raise OracleError('at least one sample is needed')


@dataclass(frozen=True)
class OraclePrediction:
    rate: float
    t_gen: float
    t_slot: float
    expected_capacities: Tuple[float, float]
    pmf: Tuple[float, ...]


def binomial_pmf(k, n, p: float) -> np.ndarray:
    """Binomial pmf over broadcast k and n, evaluated in log space"""
    k, n = np.broadcast_arrays(np.asarray(k), np.asarray(n))
    if p == 0:
        return (k == 0).astype(float)
    if p == 1:
        return (k == n).astype(float)
    with np.errstate(under='ignore'):
        return np.exp(binom.logpmf(k, n, p))


@lru_cache(maxsize=1024)
def _distribution(c1: int, c2: int, p1: float, p2: float, q: float) -> Tuple[float, ...]:
    m_max = min(c1, c2)
    e1 = binomial_pmf(np.arange(c1 + 1), c1, p1)
    e2 = binomial_pmf(np.arange(c2 + 1), c2, p2)
    tail1 = np.cumsum(e1[::-1])[::-1]
    tail2 = np.cumsum(e2[::-1])[::-1]
    m = np.arange(m_max + 1)
    p_min = e1[m] * tail2[m] + e2[m] * tail1[m] - e1[m] * e2[m]

    swaps = binomial_pmf(m[None, :], m[:, None], q)  # row: swaps tried, column: successes
    pmf = p_min @ swaps
    pmf[0] = 1 - pmf[1:].sum()
    return tuple(float(x) for x in pmf)


def e2e_distribution(c1: int, c2: int, p1: float, p2: float, q: float) -> np.ndarray:
    """P(E₁₂ = k) for k = 0..min(c1, c2)"""
    if c1 < 0 or c2 < 0 or int(c1) != c1 or int(c2) != c2:
        raise OracleError('capacities must be non-negative integers, got {} and {}'.format(c1, c2))
    return np.array(_distribution(int(c1), int(c2), float(p1), float(p2), float(q)))


def expected_throughput(pmf: Sequence[float], t_slot: float) -> float:
    pmf = np.asarray(pmf, dtype=float)
    if abs(pmf.sum() - 1) > 1e-12:
        raise OracleError('distribution sums to {!r}, not 1'.format(float(pmf.sum())))
    if t_slot <= 0:
        raise OracleError('slot length must be positive')
    return float(np.arange(len(pmf)) @ pmf) / t_slot


def select_time_slot(r1: float, r2: float, coherence_time: float, max_length: float,
                     classical_speed: float = DEFAULT_CLASSICAL_SPEED,
                     t_app: float = 0.0) -> Tuple[float, float]:
    """(T_gen, T_s): generation phase and whole slot for two links of rates r1, r2"""
    t_her = max_length / classical_speed
    t_cutoff = coherence_time - t_her - t_app
    if t_cutoff <= 0:
        raise CoherenceTooShort('coherence_time', '{} s leaves no time after heralding ({} s) and use ({} s)'.format(
            coherence_time, t_her, t_app
        ))
    t_both = 1 / r1 + 1 / r2 - 1 / (r1 + r2)
    t_gen = min(t_both, t_cutoff)
    return t_gen, t_gen + t_her


def mc_capacity_rounding(c_tilde: float, rng: np.random.Generator) -> int:
    """Round to floor or floor + 1 so the expectation stays c_tilde"""
    if c_tilde < 0:
        raise OracleError('capacity must not be negative, got {}'.format(c_tilde))
    base = math.floor(c_tilde)
    return base + int(rng.random() < c_tilde - base)


def predict(oracle_input: OracleInput) -> OraclePrediction:
    t_gen, t_slot = select_time_slot(
        *oracle_input.ent_rates, oracle_input.coherence_time, max(oracle_input.lengths),
        oracle_input.classical_speed, oracle_input.t_app
    )
    rng = np.random.default_rng(oracle_input.seed)
    expected = tuple(a * t_slot for a in oracle_input.attempt_rates)
    draws = np.column_stack([
        [mc_capacity_rounding(c, rng) for _ in range(oracle_input.samples)] for c in expected
    ])
    combos, counts = np.unique(draws, axis=0, return_counts=True)

    size = int(combos.min(axis=1).max()) + 1
    mixture = np.zeros(size)
    p1, p2 = oracle_input.success_probs
    for (c1, c2), count in zip(combos, counts):
        pmf = e2e_distribution(int(c1), int(c2), p1, p2, oracle_input.swap_prob)
        mixture[:len(pmf)] += count * pmf
    mixture /= oracle_input.samples
    mixture[0] = 1 - mixture[1:].sum()
    return OraclePrediction(
        rate=expected_throughput(mixture, t_slot),
        t_gen=t_gen,
        t_slot=t_slot,
        expected_capacities=expected,
        pmf=tuple(float(x) for x in mixture),
    )


def predict_rate(oracle_input: OracleInput) -> float:
    """Mean E2E pairs per second over the Monte-Carlo capacity samples"""
    return predict(oracle_input).rate
