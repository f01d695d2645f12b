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
Scenario documents: one JSON tree with nodes, channels, paths, timing
and simulation sections
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

from qnsk.control_plane import (
    PATH_SCHEMA, TIMING_SCHEMA, PathInstruction, PoolPlan, TimingConfig, plan_allocations
)
from qnsk.exceptions import SchemaViolation
from qnsk.forwarding import PURIFICATION_RULES
from qnsk.link_models import round_duration
from qnsk.topology import (
    CHANNEL_SCHEMA, NODE_SCHEMA, NetworkTopology, load_topology, validate_document
)
from qnsk.util import read_json

LOG = logging.getLogger(__name__)

SIMULATION_SCHEMA = {
    'type': 'object',
    'additionalProperties': False,
    'properties': {
        'duration': {'type': 'number', 'exclusiveMinimum': 0},
        'seed': {'type': 'integer', 'minimum': 0},
        'runs': {'type': 'integer', 'minimum': 1},
        'purification_rule': {'enum': sorted(PURIFICATION_RULES)},
        'conflict_guard': {'type': 'boolean'},
        'idealized_coordination': {'type': 'boolean'},
        'controller': {
            'type': 'object',
            'additionalProperties': False,
            'properties': {
                'location': {'type': 'string'},
                'latency': {'type': 'number', 'minimum': 0},
            },
        },
        'occupancy_interval': {'type': ['number', 'null'], 'exclusiveMinimum': 0},
    },
}

SCENARIO_SCHEMA = {
    'type': 'object',
    'additionalProperties': False,
    'required': ['nodes', 'channels'],
    'properties': {
        'nodes': {'type': 'array', 'items': NODE_SCHEMA, 'minItems': 1},
        'channels': {'type': 'array', 'items': CHANNEL_SCHEMA},
        'paths': {'type': 'array', 'items': PATH_SCHEMA},
        'timing': TIMING_SCHEMA,
        'simulation': SIMULATION_SCHEMA,
    },
}

SECTION_SCHEMAS = {
    'nodes': NODE_SCHEMA,
    'channels': CHANNEL_SCHEMA,
    'paths': PATH_SCHEMA,
    'timing': TIMING_SCHEMA,
    'simulation': SIMULATION_SCHEMA,
}


@dataclass(frozen=True)
class SimulationSettings:
    duration: float = 1.0
    seed: int = 0
    runs: int = 100
    purification_rule: str = 'bbpssw'
    conflict_guard: bool = True
    idealized_coordination: bool = False
    controller_location: Optional[str] = None
    controller_latency: Optional[float] = None
    occupancy_interval: Optional[float] = None

    @classmethod
    def from_config(cls, document: Optional[dict]) -> 'SimulationSettings':
        document = dict(document or {})
        controller = document.pop('controller', {})
        return cls(
            controller_location=controller.get('location'),
            controller_latency=controller.get('latency'),
            **document
        )


@dataclass(frozen=True)
class Scenario:
    topology: NetworkTopology
    instructions: Tuple[PathInstruction, ...]
    timing: TimingConfig
    settings: SimulationSettings
    allocations: Tuple[PoolPlan, ...]
    document: dict = field(default=None, compare=False, repr=False)


def load_scenario(document: dict) -> Scenario:
    """Validate a scenario document completely; nothing is simulated yet"""
    validate_document(document, SCENARIO_SCHEMA)
    topology = load_topology(document)
    for channel in topology.channels.values():
        try:
            round_duration(channel)
        except ValueError as e:
            raise SchemaViolation(channel.channel_id, str(e)) from None

    instructions = []
    for entry in document.get('paths', []):
        if any(i.request_id == entry['id'] for i in instructions):
            raise SchemaViolation(entry['id'], 'duplicate path id')
        instructions.append(PathInstruction.from_config(entry, topology))

    scenario = Scenario(
        topology=topology,
        instructions=tuple(instructions),
        timing=TimingConfig.from_config(document.get('timing')),
        settings=SimulationSettings.from_config(document.get('simulation')),
        allocations=tuple(plan_allocations(topology, instructions)),
        document=document,
    )
    LOG.debug('Scenario with %d paths and %d channel pools', len(instructions), len(scenario.allocations))
    return scenario


def load_scenario_file(path: str) -> Scenario:
    return load_scenario(read_json(path))
