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
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import binom

from qnsk.exceptions import CoherenceTooShort, OracleError
from qnsk.oracle import (
    OracleInput, e2e_distribution, expected_throughput, mc_capacity_rounding, predict,
    predict_rate, select_time_slot
)


def brute_force(c1, c2, p1, p2, q):
    pmf = np.zeros(min(c1, c2) + 1)
    for e1, e2 in itertools.product(range(c1 + 1), range(c2 + 1)):
        weight = binom.pmf(e1, c1, p1) * binom.pmf(e2, c2, p2)
        m = min(e1, e2)
        for k in range(m + 1):
            pmf[k] += weight * binom.pmf(k, m, q)
    return pmf


@pytest.mark.parametrize('c1, c2', [(c1, c2) for c1 in range(5) for c2 in range(5)])
def test_distribution_matches_enumeration(c1, c2):
    for p1, p2, q in itertools.product((0.0, 0.3, 0.7, 1.0), repeat=3):
        exact = brute_force(c1, c2, p1, p2, q)
        assert np.abs(e2e_distribution(c1, c2, p1, p2, q) - exact).max() < 1e-12


def test_distribution_rejects_fractional_capacity():
    with pytest.raises(OracleError):
        e2e_distribution(1.5, 2, 0.5, 0.5, 1.0)
    with pytest.raises(OracleError):
        e2e_distribution(-1, 2, 0.5, 0.5, 1.0)


@given(
    c1=st.integers(min_value=0, max_value=30),
    c2=st.integers(min_value=0, max_value=30),
    p1=st.floats(min_value=0, max_value=1),
    p2=st.floats(min_value=0, max_value=1),
    q=st.floats(min_value=0, max_value=1),
)
@settings(max_examples=100, deadline=None)
def test_distribution_is_normalised(c1, c2, p1, p2, q):
    pmf = e2e_distribution(c1, c2, p1, p2, q)
    assert len(pmf) == min(c1, c2) + 1
    assert pmf.sum() == pytest.approx(1.0, abs=1e-12)
    assert (pmf >= -1e-12).all()


@given(
    c=st.integers(min_value=1, max_value=30),
    q=st.floats(min_value=0, max_value=1e-300),
    p=st.floats(min_value=0, max_value=1e-300),
)
@settings(max_examples=100, deadline=None)
def test_vanishing_probabilities(c, q, p):
    pmf = e2e_distribution(c, c, 0.5, 0.5, q)
    assert pmf[0] == pytest.approx(1.0)
    assert (pmf >= 0).all()
    assert e2e_distribution(c, c, p, 0.5, 1.0)[0] == pytest.approx(1.0)
    assert predict_rate(oracle_input(swap_prob=q)) == pytest.approx(0.0, abs=1e-200)


def test_subnormal_swap_probability():
    assert e2e_distribution(4, 4, 0.0, 0.0, 2.2e-308).tolist() == [1.0, 0.0, 0.0, 0.0, 0.0]
    assert predict_rate(oracle_input(swap_prob=1.1e-308)) >= 0


def test_throughput():
    assert expected_throughput([0.5, 0.5], 0.01) == pytest.approx(50.0)
    with pytest.raises(OracleError):
        expected_throughput([0.5, 0.4], 0.01)
    with pytest.raises(OracleError):
        expected_throughput([1.0], 0.0)


def test_time_slot():
    t_gen, t_slot = select_time_slot(100, 100, 10.0, 32)
    assert t_gen == pytest.approx(0.015)
    assert t_slot == pytest.approx(0.01516)


def test_time_slot_capped_by_coherence():
    t_gen, t_slot = select_time_slot(100, 100, 0.005, 32, t_app=0.001)
    assert t_gen == pytest.approx(0.005 - 1.6e-4 - 0.001)
    assert t_slot == pytest.approx(0.004)


def test_coherence_too_short():
    with pytest.raises(CoherenceTooShort):
        select_time_slot(100, 100, 1e-4, 32)


def test_capacity_rounding_keeps_the_mean():
    rng = np.random.default_rng(5)
    draws = [mc_capacity_rounding(2.3, rng) for _ in range(20000)]
    assert set(draws) == {2, 3}
    assert np.mean(draws) == pytest.approx(2.3, abs=0.02)
    assert mc_capacity_rounding(4.0, rng) == 4
    with pytest.raises(OracleError):
        mc_capacity_rounding(-0.5, rng)


def oracle_input(**kwargs):
    values = dict(
        attempt_rates=(3125.0, 5555.0), success_probs=(0.1, 0.2), ent_rates=(300.0, 1000.0),
        swap_prob=1.0, coherence_time=0.01, lengths=(32.0, 18.0), samples=500, seed=1,
    )
    values.update(kwargs)
    return OracleInput(**values)


def test_prediction():
    prediction = predict(oracle_input())
    assert prediction.t_slot == pytest.approx(prediction.t_gen + 1.6e-4)
    assert prediction.expected_capacities == pytest.approx(
        (3125 * prediction.t_slot, 5555 * prediction.t_slot)
    )
    assert sum(prediction.pmf) == pytest.approx(1.0)
    assert prediction.rate == pytest.approx(
        sum(k * p for k, p in enumerate(prediction.pmf)) / prediction.t_slot
    )
    assert predict_rate(oracle_input()) == prediction.rate


def test_certain_links_give_the_smaller_capacity():
    prediction = predict(oracle_input(
        attempt_rates=(20000.0, 40000.0), success_probs=(1.0, 1.0), ent_rates=(1000.0, 1000.0),
        coherence_time=math.inf
    ))
    expected = min(prediction.expected_capacities)
    assert prediction.rate * prediction.t_slot == pytest.approx(expected, rel=0.05)


@given(q_low=st.floats(min_value=0, max_value=1), q_high=st.floats(min_value=0, max_value=1))
@settings(max_examples=25, deadline=None)
def test_rate_grows_with_swap_probability(q_low, q_high):
    q_low, q_high = sorted((q_low, q_high))
    low = predict_rate(oracle_input(swap_prob=q_low))
    high = predict_rate(oracle_input(swap_prob=q_high))
    assert low <= high + 1e-9


@pytest.mark.parametrize('kwargs', [
    {'success_probs': (0.0, 0.5)},
    {'success_probs': (0.5, 1.5)},
    {'attempt_rates': (0.0, 10.0)},
    {'ent_rates': (10.0, -1.0)},
    {'swap_prob': 1.2},
    {'samples': 0},
])
def test_invalid_inputs(kwargs):
    with pytest.raises(OracleError):
        oracle_input(**kwargs)
