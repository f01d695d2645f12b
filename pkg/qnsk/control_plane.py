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
Proactive centralised control

Paths are computed and validated before the run. The Controller installs
them in the nodes' local tables, either at start-up or at a path's
start_time through classical controller messages, and drives the slot
phases in synchronous mode.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from qnsk.engine import EventKind, Scheduler
from qnsk.exceptions import InstallError, SchemaViolation, UnknownEntity
from qnsk.forwarding import (
    Forwarder, Multiplexing, MultiplexingMode, PurificationConfig, SwapMode, SwapPolicy, pool_of
)
from qnsk.metrics import STATISTICAL_POOL
from qnsk.topology import NetworkTopology

LOG = logging.getLogger(__name__)

CONTROLLER = 'controller'

_SWAP_POLICY_SCHEMA = {
    'oneOf': [
        {'enum': ['asap', 'l2r', 'r2l']},
        {
            'type': 'array',
            'items': {
                'oneOf': [
                    {'type': 'string'},
                    {'type': 'array', 'items': {'type': 'string'}, 'minItems': 1},
                ]
            },
        },
    ]
}

PATH_SCHEMA = {
    'type': 'object',
    'additionalProperties': False,
    'required': ['id'],
    'properties': {
        'id': {'type': 'string', 'minLength': 1},
        'src': {'type': 'string'},
        'dst': {'type': 'string'},
        'route': {'type': 'array', 'items': {'type': 'string'}, 'minItems': 2},
        'swap_policy': _SWAP_POLICY_SCHEMA,
        'purification': {
            'type': 'array',
            'items': {
                'type': 'object',
                'additionalProperties': False,
                'required': ['segment'],
                'properties': {
                    'segment': {
                        'type': 'array', 'items': {'type': 'string'}, 'minItems': 2, 'maxItems': 2
                    },
                    'rounds': {'type': 'integer', 'minimum': 0},
                },
            },
        },
        'multiplexing': {'enum': [m.value for m in MultiplexingMode]},
        'allocations': {
            'type': 'object',
            'additionalProperties': {
                'type': 'object', 'additionalProperties': {'type': 'integer', 'minimum': 0}
            },
        },
        'start_time': {'type': 'number', 'minimum': 0},
    },
    'oneOf': [{'required': ['route']}, {'required': ['src', 'dst']}],
}

_PHASE = {'type': 'number', 'exclusiveMinimum': 0}

TIMING_SCHEMA = {
    'type': 'object',
    'additionalProperties': False,
    'properties': {
        'mode': {'enum': ['async', 'sync']},
        't_ext': _PHASE,
        't_int': _PHASE,
        't_app': _PHASE,
        't_r': _PHASE,
    },
}


class TimingMode(Enum):
    ASYNC = 'async'
    SYNC = 'sync'


PHASES = ('ext', 'int', 'app')


@dataclass(frozen=True)
class TimingConfig:
    """
    Slot structure; a synchronous slot is T_ext then T_int then T_app

    Phase lookups tolerate float rounding at the boundaries, so a time a
    few ulps short of a boundary already belongs to the next phase.
    """
    mode: TimingMode = TimingMode.ASYNC
    t_ext: float = 0.0
    t_int: float = 0.0
    t_app: float = 0.0
    t_r: Optional[float] = None

    def __post_init__(self):
        if self.mode is TimingMode.SYNC and min(self.t_ext, self.t_int, self.t_app) <= 0:
            raise SchemaViolation('timing', 'every phase duration must be positive in sync mode')

    @classmethod
    def from_config(cls, document: Optional[dict]) -> 'TimingConfig':
        document = document or {}
        return cls(
            TimingMode(document.get('mode', 'async')),
            document.get('t_ext', 0.0), document.get('t_int', 0.0), document.get('t_app', 0.0),
            document.get('t_r'),
        )

    @property
    def is_sync(self) -> bool:
        return self.mode is TimingMode.SYNC

    @property
    def slot_length(self) -> float:
        return self.t_ext + self.t_int + self.t_app

    @property
    def _tolerance(self) -> float:
        return 1e-9 * self.slot_length

    def _bounds(self, phase: str) -> Tuple[float, float]:
        if phase == 'ext':
            return 0.0, self.t_ext
        if phase == 'int':
            return self.t_ext, self.t_ext + self.t_int
        if phase == 'app':
            return self.t_ext + self.t_int, self.slot_length
        raise ValueError('Unknown phase: ' + phase)

    def _slot(self, t: float) -> Tuple[int, float]:
        length = self.slot_length
        k = math.floor(t / length)
        offset = t - k * length
        if offset >= length - self._tolerance:
            k, offset = k + 1, 0.0
        return k, max(offset, 0.0)

    def phase_at(self, t: float) -> Optional[str]:
        if not self.is_sync:
            return None
        _, offset = self._slot(t)
        for phase in PHASES[:-1]:
            if offset < self._bounds(phase)[1] - self._tolerance:
                return phase
        return 'app'

    def window(self, t: float, phase: str) -> Tuple[float, float]:
        """The current window of a phase if t is inside it, otherwise the next one"""
        if not self.is_sync:
            return t, math.inf
        k, offset = self._slot(t)
        lo, hi = self._bounds(phase)
        if offset >= hi - self._tolerance:
            k += 1
        start = k * self.slot_length
        return max(start + lo, t), start + hi

    def external_window(self, t: float) -> Tuple[float, float]:
        return self.window(t, 'ext')

    def next_boundary(self, t: float) -> Tuple[float, str]:
        """Start time and name of the first phase beginning strictly after t"""
        k, _ = self._slot(t)
        return min(
            ((k + i) * self.slot_length + self._bounds(phase)[0], phase)
            for i in (0, 1) for phase in PHASES
            if (k + i) * self.slot_length + self._bounds(phase)[0] > t + self._tolerance
        )


@dataclass(frozen=True)
class PathInstruction:
    request_id: str
    route: Tuple[str, ...]
    swap_policy: SwapPolicy
    purification: PurificationConfig
    multiplexing: Multiplexing
    start_time: float = 0.0

    @property
    def src(self) -> str:
        return self.route[0]

    @property
    def dst(self) -> str:
        return self.route[-1]

    @classmethod
    def from_config(cls, entry: dict, topology: NetworkTopology) -> 'PathInstruction':
        if 'route' in entry:
            route = tuple(entry['route'])
        else:
            route = tuple(compute_path(topology, entry['src'], entry['dst']))
        validate_route(topology, entry['id'], route)
        mode = MultiplexingMode(entry.get('multiplexing', 'blocking'))
        policy = SwapPolicy.from_config(entry.get('swap_policy', 'asap'), route)
        if mode is MultiplexingMode.STATISTICAL and policy.mode is not SwapMode.ASAP:
            raise InstallError(entry['id'], 'statistical multiplexing swaps as soon as possible')
        return cls(
            request_id=entry['id'],
            route=route,
            swap_policy=policy,
            purification=PurificationConfig.from_config(entry.get('purification', ()), route),
            multiplexing=Multiplexing(mode, entry.get('allocations', {})),
            start_time=entry.get('start_time', 0.0),
        )

    def channels(self, topology: NetworkTopology) -> List[str]:
        return [topology.channel_between(a, b).channel_id for a, b in zip(self.route, self.route[1:])]


def validate_route(topology: NetworkTopology, request_id: str, route: Sequence[str]):
    for node in route:
        if node not in topology.nodes:
            raise UnknownEntity(request_id, 'route visits unknown node {}'.format(node))
    if len(set(route)) != len(route) or len(route) < 2:
        raise InstallError(request_id, 'route must be a simple path of at least two nodes')
    for a, b in zip(route, route[1:]):
        if topology.channel_between(a, b) is None:
            raise InstallError(request_id, 'no channel between {} and {}'.format(a, b))
    for node in route[1:-1]:
        if topology.nodes[node].is_end_node:
            raise InstallError(request_id, 'end node {} cannot relay'.format(node))


def compute_path(topology: NetworkTopology, src: str, dst: str) -> List[str]:
    """Minimum-hop route; ties go to the lexicographically smallest node sequence"""
    for node in (src, dst):
        if node not in topology.nodes:
            raise UnknownEntity(node, 'no such node')
    if src == dst:
        raise InstallError(src, 'source and destination are the same node')
    graph = topology.graph
    distance = nx.single_source_shortest_path_length(graph, dst)
    if src not in distance:
        raise InstallError('{}-{}'.format(src, dst), 'nodes are not connected')
    route = [src]
    while route[-1] != dst:
        here = distance[route[-1]]
        route.append(min(n for n in graph.neighbors(route[-1]) if distance.get(n) == here - 1))
    return route


@dataclass(frozen=True)
class PoolPlan:
    channel_id: str
    pool: str
    counts: Tuple[Tuple[str, int], ...]
    orientation: Tuple[str, str]

    def count_at(self, node: str) -> int:
        return dict(self.counts)[node]


def plan_allocations(topology: NetworkTopology, instructions: Sequence[PathInstruction]) -> List[PoolPlan]:
    """
    Split every channel side's qubits between the paths that use it

    Explicit multiplexing vectors are honoured; dedicated paths without one
    and the shared statistical pool split what is left evenly. A blocking
    path sharing a side with any other path must be given explicit counts.
    """
    users = {}  # type: Dict[str, List[PathInstruction]]
    orientation = {}
    for instruction in instructions:
        for i, channel_id in enumerate(instruction.channels(topology)):
            users.setdefault(channel_id, []).append(instruction)
            orientation[channel_id, instruction.request_id] = instruction.route[i], instruction.route[i + 1]

    counts = {}  # type: Dict[Tuple[str, str], Dict[str, int]]
    for channel_id in sorted(users):
        channel = topology.channels[channel_id]
        dedicated = [i for i in users[channel_id] if i.multiplexing.dedicated]
        shared = any(not i.multiplexing.dedicated for i in users[channel_id])
        for node in channel.endpoints:
            total = channel.qubits_at(node)
            explicit = {}
            open_shares = []
            for instruction in dedicated:
                value = instruction.multiplexing.allocations.get(channel_id, {}).get(node)
                if value is not None:
                    explicit[instruction.request_id] = value
                elif (
                    instruction.multiplexing.mode is MultiplexingMode.BLOCKING and
                    len(users[channel_id]) > 1
                ):
                    raise InstallError(instruction.request_id, 'blocking paths sharing {} need explicit allocations'.format(
                        channel_id
                    ))
                else:
                    open_shares.append(instruction.request_id)
            if shared:
                open_shares.append(STATISTICAL_POOL)
            remaining = total - sum(explicit.values())
            if remaining < 0:
                raise InstallError(channel_id, 'multiplexing vectors at {} need {} qubits, {} allocated'.format(
                    node, sum(explicit.values()), total
                ))
            if open_shares:
                base, extra = divmod(remaining, len(open_shares))
                for i, pool in enumerate(open_shares):
                    explicit[pool] = base + (1 if i < extra else 0)
            for pool, count in explicit.items():
                if count == 0:
                    raise InstallError(pool, 'no qubits allocated at {} on {}'.format(node, channel_id))
                counts.setdefault((channel_id, pool), {})[node] = count

    plans = []
    for (channel_id, pool), per_node in sorted(counts.items()):
        channel = topology.channels[channel_id]
        plans.append(PoolPlan(
            channel_id, pool, tuple(sorted(per_node.items())),
            orientation.get((channel_id, pool), channel.endpoints)
        ))
    return plans


class Controller:
    """
    The network's single controller

    Args:
        location: node the controller sits at; defaults to the latency
            barycenter of the topology, smallest id first
        latency: fixed controller-to-node latency overriding the fiber model
    """

    def __init__(self, topology: NetworkTopology, scheduler: Scheduler, timing: TimingConfig,
                 forwarder: Forwarder, link, location: Optional[str] = None,
                 latency: Optional[float] = None):
        self.topology = topology
        self.scheduler = scheduler
        self.timing = timing
        self.forwarder = forwarder
        self.link = link
        self.installed = {}  # type: Dict[str, PathInstruction]
        self.listeners = []
        graph = topology.graph
        if location is None:
            location = self._default_location(graph)
        elif location not in topology.nodes:
            raise UnknownEntity(location, 'controller location is not a node')
        self.location = location
        distances = nx.single_source_dijkstra_path_length(graph, location, weight='latency')
        for node in sorted(topology.nodes):
            node_latency = latency if latency is not None else distances.get(node)
            if node_latency is not None:
                scheduler.connect(CONTROLLER, node, node_latency)
        for channel in topology.channels.values():
            scheduler.connect(channel.primary_node, channel.secondary_node, channel.propagation_delay)

    @staticmethod
    def _default_location(graph: nx.Graph) -> str:
        if nx.is_connected(graph):
            return min(nx.barycenter(graph, weight='latency'))
        return min(graph.nodes)

    def install_paths(self, instructions: Iterable[PathInstruction]):
        """Install each instruction once; re-installing an identical one is a no-op"""
        for instruction in instructions:
            existing = self.installed.get(instruction.request_id)
            if existing is not None:
                if existing != instruction:
                    raise InstallError(instruction.request_id, 'a different instruction is already installed')
                continue
            self.installed[instruction.request_id] = instruction
            if instruction.start_time <= self.scheduler.now:
                for node in instruction.route:
                    self.forwarder.install_at(node, instruction)
                for channel_id in instruction.channels(self.topology):
                    self.link.activate(channel_id, pool_of(instruction))
            else:
                self.scheduler.schedule(
                    instruction.start_time, CONTROLLER, EventKind.CLASSICAL_MESSAGE,
                    self._dispatch, instruction
                )

    def _dispatch(self, instruction: PathInstruction):
        LOG.debug('Installing %s at t=%s', instruction.request_id, self.scheduler.now)
        for node in instruction.route:
            self.scheduler.send_classical(CONTROLLER, node, self._on_instruction, node, instruction)

    def _on_instruction(self, node: str, instruction: PathInstruction):
        self.forwarder.install_at(node, instruction)
        route = instruction.route
        i = route.index(node)
        for neighbor in route[max(i - 1, 0):i] + route[i + 1:i + 2]:
            if instruction.request_id in self.forwarder.tables[neighbor]:
                channel = self.topology.channel_between(node, neighbor)
                self.link.activate(channel.channel_id, pool_of(instruction))
        self.forwarder.retry(node)

    def has_instruction(self, node: str, request_id: str) -> bool:
        return request_id in self.forwarder.tables[node]

    def advance_slot(self) -> Optional[str]:
        """
        Schedule the next phase boundary; each boundary schedules the one
        after it and notifies the listeners with the phase it opens
        """
        if not self.timing.is_sync:
            return None
        now = self.scheduler.now
        start, phase = self.timing.next_boundary(now)
        self.scheduler.schedule(start, CONTROLLER, EventKind.SLOT_BOUNDARY, self._on_boundary, phase)
        return self.timing.phase_at(now)

    def _on_boundary(self, phase: str):
        for listener in self.listeners:
            listener(phase)
        self.advance_slot()
