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
Nodes, channels and the static memory allocation between them

A scenario document's ``nodes`` and ``channels`` sections are validated
against NODE_SCHEMA / CHANNEL_SCHEMA, then checked for the cross-entity
rules (endpoints exist, per-node allocations fit the memory capacity).
"""
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

import networkx as nx
from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from qnsk.exceptions import (
    AllocationExceeded, DanglingEndpoint, SchemaViolation, UnknownEntity
)
from qnsk.lazy import Lazy

LOG = logging.getLogger(__name__)

DEFAULT_LOSS_DB_PER_KM = 0.2
DEFAULT_CLASSICAL_SPEED = 2e5  # km/s, light in fiber

_UNIT = {'type': 'number', 'exclusiveMinimum': 0, 'maximum': 1}

NODE_SCHEMA = {
    'type': 'object',
    'additionalProperties': False,
    'required': ['id', 'capacity'],
    'properties': {
        'id': {'type': 'string', 'minLength': 1},
        'capacity': {'type': 'integer', 'minimum': 1},
        'local_op_latency': {'type': 'number', 'minimum': 0},
        'swap_prob': {'type': 'number', 'minimum': 0, 'maximum': 1},
        'end_node': {'type': 'boolean'},
        'coherence_time': {'type': ['number', 'null'], 'exclusiveMinimum': 0},
        'reset_latency': {'type': 'number', 'minimum': 0},
    },
}

CHANNEL_SCHEMA = {
    'type': 'object',
    'additionalProperties': False,
    'required': ['nodes', 'length', 'architecture'],
    'properties': {
        'id': {'type': 'string', 'minLength': 1},
        'nodes': {
            'type': 'array', 'items': {'type': 'string'}, 'minItems': 2, 'maxItems': 2
        },
        'primary': {'type': 'string'},
        'length': {'type': 'number', 'exclusiveMinimum': 0},
        'attenuation_length': {'type': 'number', 'exclusiveMinimum': 0},
        'loss_db_per_km': {'type': 'number', 'exclusiveMinimum': 0},
        'architecture': {'enum': ['DiM-BK', 'DiM-DualRail', 'SR-DualRail', 'SiM-DualRail']},
        'alpha': {'type': 'number', 'exclusiveMinimum': 0, 'exclusiveMaximum': 1},
        'eta_b': _UNIT,
        'eta_d': _UNIT,
        'eta_s': _UNIT,
        'eta_r': _UNIT,
        'fidelity': {'type': 'number', 'exclusiveMinimum': 0.25, 'maximum': 1},
        'qubits': {
            'oneOf': [
                {'type': 'integer', 'minimum': 0},
                {
                    'type': 'array', 'items': {'type': 'integer', 'minimum': 0},
                    'minItems': 2, 'maxItems': 2
                },
            ]
        },
        'classical_speed': {'type': 'number', 'exclusiveMinimum': 0},
        'local_op_latency': {'type': 'number', 'minimum': 0},
    },
}

TOPOLOGY_SCHEMA = {
    'type': 'object',
    'required': ['nodes', 'channels'],
    'properties': {
        'nodes': {'type': 'array', 'items': NODE_SCHEMA, 'minItems': 1},
        'channels': {'type': 'array', 'items': CHANNEL_SCHEMA},
    },
}


class Architecture(Enum):
    DIM_BK = 'DiM-BK'
    DIM_DUAL_RAIL = 'DiM-DualRail'
    SR_DUAL_RAIL = 'SR-DualRail'
    SIM_DUAL_RAIL = 'SiM-DualRail'


def attenuation_length_from_db(loss_db_per_km: float) -> float:
    """Fiber attenuation length L₀ in km for a loss given in dB/km"""
    if loss_db_per_km <= 0:
        raise ValueError('Fiber loss must be positive, got {}'.format(loss_db_per_km))
    return 10 / (loss_db_per_km * math.log(10))


@dataclass(frozen=True)
class NodeSpec:
    node_id: str
    memory_capacity: int
    local_op_latency: float = 0.0
    swap_success_prob: float = 1.0
    is_end_node: bool = False
    coherence_time: float = math.inf
    reset_latency: float = 0.0

    def __post_init__(self):
        if self.memory_capacity < 1:
            raise SchemaViolation(self.node_id, 'memory capacity must be at least 1')
        if not 0 <= self.swap_success_prob <= 1:
            raise SchemaViolation(self.node_id, 'swap success probability outside [0, 1]')
        if self.local_op_latency < 0 or self.reset_latency < 0:
            raise SchemaViolation(self.node_id, 'latencies must not be negative')
        if self.coherence_time <= 0:
            raise SchemaViolation(self.node_id, 'coherence time must be positive')


@dataclass(frozen=True)
class ChannelSpec:
    channel_id: str
    primary_node: str
    secondary_node: str
    length: float
    attenuation_length: float
    architecture: Architecture
    alpha: float = 0.5
    eta_b: float = 1.0
    eta_d: float = 1.0
    eta_s: float = 1.0
    eta_r: float = 1.0
    base_fidelity: float = 1.0
    qubits_primary: int = 1
    qubits_secondary: int = 1
    classical_speed: float = DEFAULT_CLASSICAL_SPEED
    local_op_latency: float = 0.0

    def __post_init__(self):
        if self.length <= 0 or self.attenuation_length <= 0:
            raise SchemaViolation(self.channel_id, 'length and attenuation length must be positive')
        if not 0 < self.alpha < 1:
            raise SchemaViolation(self.channel_id, 'alpha must lie in (0, 1)')
        for name in ('eta_b', 'eta_d', 'eta_s', 'eta_r'):
            if not 0 < getattr(self, name) <= 1:
                raise SchemaViolation(self.channel_id, '{} must lie in (0, 1]'.format(name))
        if not 0.25 < self.base_fidelity <= 1:
            raise SchemaViolation(self.channel_id, 'fidelity must lie in (0.25, 1]')
        if self.qubits_primary < 0 or self.qubits_secondary < 0:
            raise SchemaViolation(self.channel_id, 'qubit allocation must not be negative')
        if self.classical_speed <= 0:
            raise SchemaViolation(self.channel_id, 'classical speed must be positive')

    @property
    def endpoints(self) -> Tuple[str, str]:
        return self.primary_node, self.secondary_node

    @property
    def propagation_delay(self) -> float:
        """One-way fiber delay τ_l = L / c₀"""
        return self.length / self.classical_speed

    def other(self, node_id: str) -> str:
        if node_id == self.primary_node:
            return self.secondary_node
        if node_id == self.secondary_node:
            return self.primary_node
        raise UnknownEntity(self.channel_id, 'node {} is not an endpoint'.format(node_id))

    def qubits_at(self, node_id: str) -> int:
        if node_id == self.primary_node:
            return self.qubits_primary
        if node_id == self.secondary_node:
            return self.qubits_secondary
        raise UnknownEntity(self.channel_id, 'node {} is not an endpoint'.format(node_id))


@dataclass(frozen=True)
class NetworkTopology:
    nodes: Dict[str, NodeSpec]
    channels: Dict[str, ChannelSpec]
    adjacency: Dict[str, Tuple[str, ...]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        adjacency = defaultdict(list)
        for channel in self.channels.values():
            for node_id in channel.endpoints:
                if node_id not in self.nodes:
                    raise DanglingEndpoint(channel.channel_id, 'unknown node {}'.format(node_id))
                adjacency[node_id].append(channel.channel_id)
        object.__setattr__(self, 'adjacency', {
            node_id: tuple(adjacency.get(node_id, ())) for node_id in self.nodes
        })
        for node_id, node in self.nodes.items():
            allocated = self.allocated(node_id)
            if allocated > node.memory_capacity:
                raise AllocationExceeded(node_id, '{} qubits allocated to channels, capacity is {}'.format(
                    allocated, node.memory_capacity
                ))

    @Lazy
    def graph(self) -> nx.Graph:
        """Undirected graph with the classical latency of each channel as 'latency'"""
        graph = nx.Graph()
        graph.add_nodes_from(sorted(self.nodes))
        for channel in self.channels.values():
            graph.add_edge(
                *channel.endpoints, channel=channel.channel_id,
                length=channel.length, latency=channel.propagation_delay
            )
        return graph

    @Lazy
    def _pair_index(self) -> Dict[frozenset, str]:
        return {frozenset(c.endpoints): c.channel_id for c in self.channels.values()}

    def allocated(self, node_id: str) -> int:
        return sum(self.channels[c].qubits_at(node_id) for c in self.adjacency[node_id])

    def incident(self, node_id: str) -> Tuple[ChannelSpec, ...]:
        if node_id not in self.nodes:
            raise UnknownEntity(node_id, 'no such node')
        return tuple(self.channels[c] for c in self.adjacency[node_id])

    def neighbors(self, node_id: str):
        return sorted(c.other(node_id) for c in self.incident(node_id))

    def channel_between(self, a: str, b: str) -> Optional[ChannelSpec]:
        channel_id = self._pair_index.get(frozenset((a, b)))
        return None if channel_id is None else self.channels[channel_id]


def _entity_for(document: dict, error) -> Optional[str]:
    path = list(error.absolute_path)
    if len(path) < 2 or not isinstance(path[1], int):
        return path[0] if path else None
    try:
        item = document[path[0]][path[1]]
    except (KeyError, IndexError, TypeError):
        return None
    if isinstance(item, dict):
        if 'id' in item:
            return item['id']
        if isinstance(item.get('nodes'), list):
            return '-'.join(map(str, item['nodes']))
    return '{}[{}]'.format(path[0], path[1])


def validate_document(document: dict, schema: dict):
    """Raise SchemaViolation naming the offending entity for the first schema error"""
    error = best_match(Draft202012Validator(schema).iter_errors(document))
    if error is not None:
        raise SchemaViolation(_entity_for(document, error), error.message)


def _load_node(entry: dict) -> NodeSpec:
    coherence_time = entry.get('coherence_time')
    return NodeSpec(
        node_id=entry['id'],
        memory_capacity=entry['capacity'],
        local_op_latency=entry.get('local_op_latency', 0.0),
        swap_success_prob=entry.get('swap_prob', 1.0),
        is_end_node=entry.get('end_node', False),
        coherence_time=math.inf if coherence_time is None else coherence_time,
        reset_latency=entry.get('reset_latency', 0.0),
    )


def _load_channel(entry: dict, nodes: Dict[str, NodeSpec]) -> ChannelSpec:
    first, second = entry['nodes']
    channel_id = entry.get('id', '{}-{}'.format(first, second))
    for node_id in (first, second):
        if node_id not in nodes:
            raise DanglingEndpoint(channel_id, 'unknown node {}'.format(node_id))
    if first == second:
        raise SchemaViolation(channel_id, 'a channel needs two distinct endpoints')

    qubits = entry.get('qubits', 1)
    counts = dict(zip((first, second), [qubits, qubits] if isinstance(qubits, int) else qubits))
    primary = entry.get('primary', first)
    if primary not in counts:
        raise SchemaViolation(channel_id, 'primary {} is not an endpoint'.format(primary))
    secondary = second if primary == first else first

    if 'attenuation_length' in entry:
        attenuation_length = entry['attenuation_length']
    else:
        attenuation_length = attenuation_length_from_db(
            entry.get('loss_db_per_km', DEFAULT_LOSS_DB_PER_KM)
        )
    local_op_latency = entry.get('local_op_latency', max(
        nodes[first].local_op_latency, nodes[second].local_op_latency
    ))
    return ChannelSpec(
        channel_id=channel_id,
        primary_node=primary,
        secondary_node=secondary,
        length=entry['length'],
        attenuation_length=attenuation_length,
        architecture=Architecture(entry['architecture']),
        alpha=entry.get('alpha', 0.5),
        eta_b=entry.get('eta_b', 1.0),
        eta_d=entry.get('eta_d', 1.0),
        eta_s=entry.get('eta_s', 1.0),
        eta_r=entry.get('eta_r', 1.0),
        base_fidelity=entry.get('fidelity', 1.0),
        qubits_primary=counts[primary],
        qubits_secondary=counts[secondary],
        classical_speed=entry.get('classical_speed', DEFAULT_CLASSICAL_SPEED),
        local_op_latency=local_op_latency,
    )


def load_topology(document: dict) -> NetworkTopology:
    """Build a validated topology from the nodes/channels sections of a scenario"""
    validate_document(document, TOPOLOGY_SCHEMA)

    nodes = {}
    for entry in document['nodes']:
        if entry['id'] in nodes:
            raise SchemaViolation(entry['id'], 'duplicate node id')
        nodes[entry['id']] = _load_node(entry)

    channels = {}
    pairs = set()
    for entry in document['channels']:
        channel = _load_channel(entry, nodes)
        if channel.channel_id in channels:
            raise SchemaViolation(channel.channel_id, 'duplicate channel id')
        pair = frozenset(channel.endpoints)
        if pair in pairs:
            raise SchemaViolation(channel.channel_id, 'parallel channel between {} and {}'.format(
                *channel.endpoints
            ))
        pairs.add(pair)
        channels[channel.channel_id] = channel

    topology = NetworkTopology(nodes, channels)
    LOG.debug('Loaded topology with %d nodes and %d channels', len(nodes), len(channels))
    return topology


def dump_topology(topology: NetworkTopology) -> dict:
    """Inverse of load_topology, with every defaulted field written out"""
    nodes = [
        {
            'id': node.node_id,
            'capacity': node.memory_capacity,
            'local_op_latency': node.local_op_latency,
            'swap_prob': node.swap_success_prob,
            'end_node': node.is_end_node,
            'coherence_time': None if math.isinf(node.coherence_time) else node.coherence_time,
            'reset_latency': node.reset_latency,
        }
        for node in topology.nodes.values()
    ]
    channels = [
        {
            'id': channel.channel_id,
            'nodes': [channel.primary_node, channel.secondary_node],
            'length': channel.length,
            'attenuation_length': channel.attenuation_length,
            'architecture': channel.architecture.value,
            'alpha': channel.alpha,
            'eta_b': channel.eta_b,
            'eta_d': channel.eta_d,
            'eta_s': channel.eta_s,
            'eta_r': channel.eta_r,
            'fidelity': channel.base_fidelity,
            'qubits': [channel.qubits_primary, channel.qubits_secondary],
            'classical_speed': channel.classical_speed,
            'local_op_latency': channel.local_op_latency,
        }
        for channel in topology.channels.values()
    ]
    return {'nodes': nodes, 'channels': channels}
