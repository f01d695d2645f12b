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
from qnsk.lifecycle import Trigger
from qnsk.link_models import WernerState
from qnsk.scenario import load_scenario
from qnsk.simulation import Simulation


def chain_document(lengths=(32, 18), qubits=1, coherence_time=None, swap_prob=1.0,
                   architecture='DiM-BK', **path):
    """Linear chain N0-N1-...; every node holds what its channels need"""
    names = ['N{}'.format(i) for i in range(len(lengths) + 1)]
    document = {
        'nodes': [
            {
                'id': name, 'capacity': 2 * qubits, 'swap_prob': swap_prob,
                'coherence_time': coherence_time, 'end_node': name in (names[0], names[-1]),
            }
            for name in names
        ],
        'channels': [
            {'nodes': [a, b], 'length': length, 'architecture': architecture, 'alpha': 0.5,
             'eta_b': 0.95, 'qubits': qubits}
            for a, b, length in zip(names, names[1:], lengths)
        ],
        'paths': [dict({'id': 'P', 'route': names}, **path)],
        'simulation': {'duration': 0.1, 'seed': 3},
    }
    return document


def bare_simulation(document):
    """Simulation with every path installed at every node but no channel activated"""
    scenario = load_scenario(document)
    sim = Simulation(scenario)
    for instruction in scenario.instructions:
        for node in instruction.route:
            sim.forwarder.install_at(node, instruction)
    return sim


def qubits_at(sim, node, channel):
    return [q for q in sim.link.qubits if q.owner_node == node and q.bound_channel == channel]


def entangle(sim, end_a, end_b, w=1.0, created_at=0.0):
    """Drive two RAW qubits through reservation and give them a pair"""
    for qubit in (end_a, end_b):
        qubit.transition(Trigger.START_RESERVATION, created_at)
        qubit.transition(Trigger.REMOTE_AVAILABLE, created_at)
    pair = sim.link.create_pair(
        end_a, end_b, WernerState(w), created_at, (end_a.owner_node, end_b.owner_node),
        (end_a.bound_channel,), end_a.pool
    )
    for qubit in (end_a, end_b):
        qubit.transition(Trigger.EPR_CREATED, created_at)
        qubit.epr = pair
        qubit.view = pair.nodes
    return pair
