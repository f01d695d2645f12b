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
import dataclasses
import math

import pytest

from conftest import chain_document
from qnsk.control_plane import (
    PathInstruction, TimingConfig, TimingMode, compute_path, plan_allocations, validate_route
)
from qnsk.exceptions import InstallError, SchemaViolation, UnknownEntity
from qnsk.experiments import UC3_ROUTES, use_case_3, validation_path
from qnsk.metrics import STATISTICAL_POOL
from qnsk.scenario import load_scenario
from qnsk.simulation import Simulation
from qnsk.topology import load_topology


@pytest.fixture
def timing():
    return TimingConfig(TimingMode.SYNC, t_ext=1.0, t_int=0.5, t_app=0.5)


def test_phases(timing):
    assert timing.slot_length == 2.0
    assert timing.phase_at(0.0) == 'ext'
    assert timing.phase_at(0.999) == 'ext'
    assert timing.phase_at(1.0) == 'int'
    assert timing.phase_at(1.6) == 'app'
    assert timing.phase_at(2.0) == 'ext'
    assert timing.phase_at(1.0 - 1e-12) == 'int'


def test_windows(timing):
    assert timing.window(0.2, 'int') == (1.0, 1.5)
    assert timing.window(1.2, 'int') == (1.2, 1.5)
    assert timing.window(1.7, 'int') == (3.0, 3.5)
    assert timing.external_window(1.7) == (2.0, 3.0)


def test_next_boundary(timing):
    assert timing.next_boundary(0.0) == (1.0, 'int')
    assert timing.next_boundary(1.0) == (1.5, 'app')
    assert timing.next_boundary(1.8) == (2.0, 'ext')


def test_async_timing_has_no_phases():
    timing = TimingConfig.from_config(None)
    assert not timing.is_sync
    assert timing.phase_at(3.0) is None
    assert timing.window(3.0, 'app') == (3.0, math.inf)


def test_sync_phases_must_be_positive():
    with pytest.raises(SchemaViolation):
        TimingConfig(TimingMode.SYNC, t_ext=1.0, t_int=0.0, t_app=1.0)


def test_minimum_hop_route():
    topology = load_topology(use_case_3(['AK']))
    assert compute_path(topology, 'A', 'K') == UC3_ROUTES['AK']
    assert compute_path(topology, 'K', 'A') == UC3_ROUTES['AK'][::-1]


def test_route_ties_break_on_node_ids():
    topology = load_topology({
        'nodes': [{'id': n, 'capacity': 2} for n in 'ABCDX'],
        'channels': [
            {'nodes': list(pair), 'length': 10, 'architecture': 'SiM-DualRail'}
            for pair in ('AC', 'AB', 'CD', 'BD')
        ],
    })
    assert compute_path(topology, 'A', 'D') == ['A', 'B', 'D']
    with pytest.raises(InstallError):
        compute_path(topology, 'A', 'X')
    with pytest.raises(InstallError):
        compute_path(topology, 'A', 'A')
    with pytest.raises(UnknownEntity):
        compute_path(topology, 'A', 'Z')


def test_route_validation():
    topology = load_scenario(chain_document(lengths=(10, 10, 10))).topology
    validate_route(topology, 'ok', ['N0', 'N1', 'N2', 'N3'])
    with pytest.raises(InstallError):
        validate_route(topology, 'gap', ['N0', 'N2'])
    with pytest.raises(InstallError):
        validate_route(topology, 'loop', ['N0', 'N1', 'N0'])
    with pytest.raises(UnknownEntity):
        validate_route(topology, 'ghost', ['N0', 'N9'])
    with pytest.raises(InstallError):
        validate_route(topology, 'short', ['N0'])


def test_end_nodes_cannot_relay():
    document = chain_document()
    document['nodes'][1]['end_node'] = True
    with pytest.raises(InstallError):
        load_scenario(document)


def test_src_dst_paths_are_routed():
    document = chain_document()
    document['paths'] = [{'id': 'P', 'src': 'N2', 'dst': 'N0'}]
    instruction, = load_scenario(document).instructions
    assert instruction.route == ('N2', 'N1', 'N0')


def test_statistical_paths_swap_asap():
    document = chain_document(multiplexing='statistical', swap_policy='l2r')
    with pytest.raises(InstallError):
        load_scenario(document)


def _two_paths(qubits=4, **extra):
    document = chain_document(qubits=qubits)
    document['paths'] = [
        dict({'id': 'P', 'route': ['N0', 'N1', 'N2']}, **extra.get('P', {})),
        dict({'id': 'Q', 'route': ['N0', 'N1']}, **extra.get('Q', {})),
    ]
    return document


def test_buffer_space_split_evenly():
    scenario = load_scenario(_two_paths(
        P={'multiplexing': 'buffer_space'}, Q={'multiplexing': 'buffer_space'}
    ))
    plans = {(p.channel_id, p.pool): p for p in scenario.allocations}
    assert plans['N0-N1', 'P'].count_at('N0') == 2
    assert plans['N0-N1', 'Q'].count_at('N1') == 2
    assert plans['N1-N2', 'P'].count_at('N1') == 4


def test_explicit_vectors_and_statistical_remainder():
    scenario = load_scenario(_two_paths(
        P={'multiplexing': 'statistical'},
        Q={'multiplexing': 'buffer_space', 'allocations': {'N0-N1': {'N0': 1, 'N1': 3}}},
    ))
    plans = {(p.channel_id, p.pool): p for p in scenario.allocations}
    assert plans['N0-N1', 'Q'].counts == (('N0', 1), ('N1', 3))
    assert plans['N0-N1', STATISTICAL_POOL].counts == (('N0', 3), ('N1', 1))


def test_blocking_paths_sharing_a_side_need_vectors():
    with pytest.raises(InstallError):
        load_scenario(_two_paths())


def test_oversubscribed_vectors():
    document = _two_paths(
        P={'allocations': {'N0-N1': {'N0': 3, 'N1': 2}}},
        Q={'allocations': {'N0-N1': {'N0': 2, 'N1': 2}}},
    )
    with pytest.raises(InstallError):
        load_scenario(document)


def test_zero_share_is_rejected():
    topology = load_scenario(chain_document(qubits=1)).topology
    instructions = [
        PathInstruction.from_config(
            {'id': name, 'route': ['N0', 'N1'], 'multiplexing': 'buffer_space'}, topology
        )
        for name in 'PQ'
    ]
    with pytest.raises(InstallError):
        plan_allocations(topology, instructions)


def test_controller_defaults_to_the_center():
    sim = Simulation(load_scenario(validation_path()))
    assert sim.controller.location == 'B'
    assert sim.scheduler.latency('controller', 'A') == pytest.approx(32 / 2e5)


def test_unknown_controller_location():
    document = validation_path()
    document['simulation']['controller'] = {'location': 'Z'}
    with pytest.raises(UnknownEntity):
        Simulation(load_scenario(document))


def test_timed_installation():
    document = chain_document(start_time=0.05)
    sim = Simulation(load_scenario(document))
    sim.controller.install_paths(sim.scenario.instructions)
    sim.scheduler.run_until(0.04)
    assert not sim.controller.has_instruction('N0', 'P')
    assert sim.metrics.ledgers['P'].created == 0
    sim.scheduler.run_until(0.1)
    assert all(sim.controller.has_instruction(n, 'P') for n in ('N0', 'N1', 'N2'))
    assert sim.metrics.ledgers['P'].created > 0


def test_installing_twice():
    sim = Simulation(load_scenario(chain_document()))
    instruction, = sim.scenario.instructions
    sim.controller.install_paths([instruction])
    sim.controller.install_paths([instruction])
    assert sim.controller.has_instruction('N1', 'P')
    with pytest.raises(InstallError):
        sim.controller.install_paths([dataclasses.replace(instruction, start_time=1.0)])


def test_slot_boundaries_notify_listeners():
    document = chain_document()
    document['timing'] = {'mode': 'sync', 't_ext': 0.25, 't_int': 0.125, 't_app': 0.125}
    sim = Simulation(load_scenario(document))
    seen = []
    sim.controller.listeners.append(seen.append)
    assert sim.controller.advance_slot() == 'ext'
    sim.scheduler.run_until(1.0)
    assert seen == ['int', 'app', 'ext', 'int', 'app', 'ext']
