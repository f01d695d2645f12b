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
import pytest

from conftest import bare_simulation, chain_document, entangle, qubits_at
from qnsk.exceptions import IllegalTransition, InstallError
from qnsk.experiments import UC3_SCENARIOS, use_case_3, validation_path
from qnsk.forwarding import SwapMode, SwapPolicy, bbpssw, merge_spans, segments
from qnsk.lifecycle import QubitState, Trigger
from qnsk.link_models import WernerState
from qnsk.scenario import load_scenario
from qnsk.simulation import Simulation

ROUTE = ('A', 'B', 'C', 'D', 'E')


def test_asap_permits_every_interior_node():
    policy = SwapPolicy.from_config('asap', ROUTE)
    assert policy.mode is SwapMode.ASAP
    assert policy.permits('C', 'B', ROUTE)
    assert not policy.permits('A', 'B', ROUTE)


def test_left_to_right():
    policy = SwapPolicy.from_config('l2r', ROUTE)
    assert dict(policy.ranks) == {'B': 0, 'C': 1, 'D': 2}
    assert policy.permits('B', 'C', ROUTE)
    assert not policy.permits('C', 'B', ROUTE)
    assert policy.permits('C', 'A', ROUTE)
    assert policy.permits('D', 'E', ROUTE)


def test_right_to_left():
    policy = SwapPolicy.from_config('r2l', ROUTE)
    assert dict(policy.ranks) == {'D': 0, 'C': 1, 'B': 2}
    assert policy.permits('D', 'C', ROUTE)
    assert not policy.permits('C', 'D', ROUTE)


def test_explicit_order_with_parallel_group():
    policy = SwapPolicy.from_config([['B', 'D'], 'C'], ROUTE)
    assert dict(policy.ranks) == {'B': 0, 'D': 0, 'C': 1}
    assert policy.permits('B', 'C', ROUTE)
    assert policy.permits('D', 'C', ROUTE)
    assert not policy.permits('C', 'D', ROUTE)


@pytest.mark.parametrize('value', ['zigzag', [['B', 'B'], 'C', 'D'], ['B', 'C'], ['B', 'C', 'D', 'A']])
def test_bad_swap_orders(value):
    with pytest.raises(InstallError):
        SwapPolicy.from_config(value, ROUTE)


def test_bbpssw():
    p, f = bbpssw(0.9, 0.9)
    assert p == pytest.approx(0.87556, abs=1e-5)
    assert f == pytest.approx(0.92640, abs=1e-5)
    assert bbpssw(1.0, 1.0) == pytest.approx((1.0, 1.0))
    p, f = bbpssw(0.25, 0.25)
    assert f == pytest.approx(0.25)


def test_merge_spans():
    assert merge_spans('B', ('A', 'B'), ('B', 'C')) == ('A', 'B', 'C')
    assert merge_spans('B', ('B', 'A'), ('C', 'B')) == ('A', 'B', 'C')
    with pytest.raises(IllegalTransition):
        merge_spans('B', ('A', 'B'), ('C', 'D'))


def test_segments():
    assert list(segments(('A', 'B', 'C'))) == [('A', 'B'), ('A', 'B', 'C'), ('B', 'C')]


def _validation_pairs(sim, w_left, w_right):
    a, = qubits_at(sim, 'A', 'A-B')
    b_left, = qubits_at(sim, 'B', 'A-B')
    b_right, = qubits_at(sim, 'B', 'B-C')
    c, = qubits_at(sim, 'C', 'B-C')
    left = entangle(sim, a, b_left, w=w_left)
    right = entangle(sim, b_right, c, w=w_right)
    return (a, b_left, b_right, c), left, right


def test_swap_multiplies_werner_parameters():
    sim = bare_simulation(validation_path(coherence_time=None))
    qubits, left, right = _validation_pairs(sim, 0.9, 0.8)
    sim.forwarder.wake()
    sim.scheduler.run_until(1.0)

    flow = sim.metrics.flows['AC']
    assert (flow.swap_attempts, flow.swap_successes, flow.delivered) == (1, 1, 1)
    assert flow.mean_fidelity == pytest.approx(WernerState(0.72).fidelity)
    assert flow.mean_fidelity == pytest.approx(0.79)
    ledger = sim.metrics.ledgers['AC']
    assert (ledger.created, ledger.swap_consumed, ledger.delivered, ledger.live) == (3, 2, 1, 0)
    assert all(q.state is QubitState.RAW for q in qubits)
    sim.link.check_invariants()


def test_failed_swap_releases_all_four_qubits():
    sim = bare_simulation(validation_path(coherence_time=None, swap_prob=0.0))
    qubits, left, right = _validation_pairs(sim, 1.0, 1.0)
    sim.forwarder.wake()
    sim.scheduler.run_until(1.0)

    flow = sim.metrics.flows['AC']
    assert (flow.swap_attempts, flow.swap_successes, flow.delivered) == (1, 0, 0)
    ledger = sim.metrics.ledgers['AC']
    assert ledger.swap_consumed == 2
    assert ledger.live == 0
    assert all(q.state is QubitState.RAW and q.epr is None for q in qubits)


def test_end_node_does_not_deliver_a_partial_pair():
    sim = bare_simulation(validation_path(coherence_time=None))
    a, = qubits_at(sim, 'A', 'A-B')
    b, = qubits_at(sim, 'B', 'A-B')
    entangle(sim, a, b)
    sim.forwarder.wake()
    sim.scheduler.run_until(1.0)
    assert sim.metrics.flows['AC'].delivered == 0
    assert a.state is QubitState.ENTANGLED
    assert b.state is QubitState.ELIGIBLE


def test_purification_round_needs_matching_spans():
    sim = bare_simulation(validation_path(coherence_time=None))
    _, left, right = _validation_pairs(sim, 1.0, 1.0)
    with pytest.raises(IllegalTransition):
        sim.forwarder.run_purification_round('A', left, right)


def test_purified_deliveries():
    document = chain_document(
        lengths=(32,), qubits=2, purification=[{'segment': ['N0', 'N1'], 'rounds': 1}]
    )
    for channel in document['channels']:
        channel['fidelity'] = 0.9
    metrics = Simulation(load_scenario(document)).run()
    flow = metrics.flows['P']
    assert flow.purif_attempts > 0
    assert 0 < flow.purif_successes <= flow.purif_attempts
    assert flow.delivered > 0
    assert flow.mean_fidelity == pytest.approx(bbpssw(0.9, 0.9)[1])
    ledger = metrics.ledgers['P']
    assert ledger.purif_consumed >= flow.purif_attempts - 1
    assert ledger.balanced


def test_delivered_fidelity_bounded_by_link_product():
    document = chain_document(lengths=(20, 20, 20), qubits=2, coherence_time=0.01)
    for channel in document['channels']:
        channel['fidelity'] = 0.95
    metrics = Simulation(load_scenario(document)).run()
    flow = metrics.flows['P']
    assert flow.delivered > 0
    bound = WernerState(WernerState.from_fidelity(0.95).w ** 3).fidelity
    assert flow.mean_fidelity <= bound + 1e-12


def test_static_order_swap_count():
    hops = 4
    document = chain_document(lengths=(20,) * hops, qubits=2, swap_policy='l2r')
    metrics = Simulation(load_scenario(document)).run()
    flow = metrics.flows['P']
    assert flow.delivered > 0
    assert flow.swap_successes == flow.swap_attempts
    pending = flow.swap_attempts - (hops - 1) * flow.delivered
    assert 0 <= pending <= 2 * 2 * hops


@pytest.mark.parametrize('idealized', [True, False])
def test_statistical_guard_prevents_conflicts(idealized):
    document = use_case_3(UC3_SCENARIOS[2], 'statistical', idealized_coordination=idealized)
    document['simulation']['duration'] = 0.05
    metrics = Simulation(load_scenario(document)).run()
    assert metrics.conflicts == 0
    assert sum(f.swap_attempts for f in metrics.flows.values()) > 0
    for ledger in metrics.ledgers.values():
        assert ledger.balanced


def test_eligible_qubits_kept_in_arrival_order():
    sim = bare_simulation(chain_document(qubits=2))
    a1, a2 = qubits_at(sim, 'N0', 'N0-N1')
    b1, b2 = qubits_at(sim, 'N1', 'N0-N1')
    entangle(sim, a2, b2)
    entangle(sim, a1, b1)
    assert sim.forwarder.eligible_at('N1', 'P') == []

    sim.forwarder.advance(b2)
    sim.forwarder.advance(b1)
    assert sim.forwarder.eligible_at('N1', 'P') == [b2, b1]
    sim.link.release(b2, Trigger.CONSUMED)
    assert sim.forwarder.eligible_at('N1', 'P') == [b1]
    assert sim.forwarder.eligible_at('N0', 'P') == []


def test_purification_request_waits_for_the_internal_phase():
    document = chain_document(
        lengths=(32,), qubits=2, purification=[{'segment': ['N0', 'N1'], 'rounds': 1}]
    )
    document['timing'] = {'mode': 'sync', 't_ext': 0.25, 't_int': 0.125, 't_app': 0.125}
    sim = bare_simulation(document)
    a1, a2 = qubits_at(sim, 'N0', 'N0-N1')
    b1, b2 = qubits_at(sim, 'N1', 'N0-N1')
    keep = entangle(sim, a1, b1, w=0.9)
    sacrifice = entangle(sim, a2, b2, w=0.9)

    assert sim.forwarder.run_purification_round('N0', keep, sacrifice) is None
    assert sacrifice.live
    assert b2.state is QubitState.ENTANGLED

    sim.scheduler.run_until(0.2)
    assert sacrifice.live
    sim.scheduler.run_until(0.25)
    assert not sacrifice.live
    assert b2.state is QubitState.RAW and b2.epr is None
