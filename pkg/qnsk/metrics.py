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
Counters collected during a run and their CSV form
"""
import csv
import logging
import math
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from qnsk.exceptions import SimulationError
from qnsk.util import format_number

LOG = logging.getLogger(__name__)

STATISTICAL_POOL = '*'

FLOW_COLUMNS = (
    'flow', 'pool', 'delivered', 'rate', 'mean_fidelity', 'swap_attempts',
    'swap_successes', 'purif_attempts', 'purif_successes', 'decohered'
)
CHANNEL_COLUMNS = (
    'channel', 'architecture', 'memory_pairs', 'attempts', 'successes',
    'measured_p', 'closed_form_p', 'attempt_rate', 'ent_rate'
)
LEDGER_COLUMNS = (
    'pool', 'created', 'delivered', 'decohered', 'swap_consumed', 'purif_consumed',
    'discarded', 'live'
)
FLOW_SWEEP_METRICS = ('rate', 'mean_fidelity', 'delivered', 'swap_successes', 'decohered')
CHANNEL_SWEEP_METRICS = ('attempt_rate', 'ent_rate', 'measured_p')


@dataclass
class PairLedger:
    """Where every pair created in one pool ended up"""
    pool: str
    created: int = 0
    delivered: int = 0
    decohered: int = 0
    swap_consumed: int = 0
    purif_consumed: int = 0
    discarded: int = 0
    live: int = 0

    def create(self):
        self.created += 1
        self.live += 1

    def retire(self, reason: str):
        if reason not in ('delivered', 'decohered', 'swap_consumed', 'purif_consumed', 'discarded'):
            raise ValueError('Unknown retirement reason: ' + reason)
        setattr(self, reason, getattr(self, reason) + 1)
        self.live -= 1

    @property
    def balanced(self) -> bool:
        return self.created == (
            self.delivered + self.decohered + self.swap_consumed +
            self.purif_consumed + self.discarded + self.live
        )

    def check(self, live_pairs: int):
        if not self.balanced or self.live != live_pairs or self.live < 0:
            raise SimulationError(self.pool, 'pair ledger does not balance: {}'.format(self))


@dataclass
class FlowMetrics:
    flow_id: str
    pool: str
    delivered: int = 0
    fidelity_sum: float = 0.0
    swap_attempts: int = 0
    swap_successes: int = 0
    purif_attempts: int = 0
    purif_successes: int = 0
    decohered: int = 0

    def record_delivery(self, fidelity: float):
        self.delivered += 1
        self.fidelity_sum += fidelity

    @property
    def mean_fidelity(self) -> float:
        return self.fidelity_sum / self.delivered if self.delivered else math.nan


@dataclass
class ChannelMetrics:
    channel_id: str
    architecture: str
    closed_form_p: float
    memory_pairs: int = 0
    attempts: int = 0
    successes: int = 0

    @property
    def measured_p(self) -> float:
        return self.successes / self.attempts if self.attempts else math.nan


@dataclass
class RunMetrics:
    seed: int
    duration: float
    flows: Dict[str, FlowMetrics] = field(default_factory=dict)
    channels: Dict[str, ChannelMetrics] = field(default_factory=dict)
    ledgers: Dict[str, PairLedger] = field(default_factory=dict)
    events: int = 0
    conflicts: int = 0
    stale_updates: int = 0
    wall_clock: float = 0.0
    occupancy: List[Tuple[float, Dict[str, int]]] = field(default_factory=list)

    def rate(self, flow_id: str) -> float:
        return self.flows[flow_id].delivered / self.duration

    def attempt_rate(self, channel_id: str) -> float:
        return self.channels[channel_id].attempts / self.duration

    def ent_rate(self, channel_id: str) -> float:
        return self.channels[channel_id].successes / self.duration

    @property
    def aggregate_rate(self) -> float:
        return sum(f.delivered for f in self.flows.values()) / self.duration

    def flow_value(self, flow_id: str, metric: str) -> float:
        if metric == 'rate':
            return self.rate(flow_id)
        return float(getattr(self.flows[flow_id], metric))

    def channel_value(self, channel_id: str, metric: str) -> float:
        if metric == 'attempt_rate':
            return self.attempt_rate(channel_id)
        if metric == 'ent_rate':
            return self.ent_rate(channel_id)
        return float(getattr(self.channels[channel_id], metric))

    def flow_rows(self):
        for flow_id in sorted(self.flows):
            flow = self.flows[flow_id]
            yield (
                flow_id, flow.pool, flow.delivered, self.rate(flow_id), flow.mean_fidelity,
                flow.swap_attempts, flow.swap_successes, flow.purif_attempts,
                flow.purif_successes, flow.decohered
            )

    def channel_rows(self):
        for channel_id in sorted(self.channels):
            channel = self.channels[channel_id]
            yield (
                channel_id, channel.architecture, channel.memory_pairs, channel.attempts,
                channel.successes, channel.measured_p, channel.closed_form_p,
                self.attempt_rate(channel_id), self.ent_rate(channel_id)
            )

    def ledger_rows(self):
        for pool in sorted(self.ledgers):
            ledger = self.ledgers[pool]
            yield tuple(getattr(ledger, name) for name in LEDGER_COLUMNS)


def _mean_std(values: Sequence[float]) -> Tuple[float, float]:
    x = np.asarray(values, dtype=float)
    x = x[~np.isnan(x)]
    if len(x) == 0:
        return math.nan, math.nan
    return float(x.mean()), float(x.std())


@dataclass
class SweepTable:
    """Per-point mean and standard deviation over repeated runs"""
    axis: str
    points: List[Tuple[object, List[RunMetrics]]] = field(default_factory=list)

    def add(self, value, runs: List[RunMetrics]):
        self.points.append((value, runs))

    def runs_at(self, value) -> List[RunMetrics]:
        for point, runs in self.points:
            if point == value:
                return runs
        raise KeyError(value)

    def flow_stats(self, value, flow_id: str, metric: str) -> Tuple[float, float]:
        return _mean_std([run.flow_value(flow_id, metric) for run in self.runs_at(value)])

    def channel_stats(self, value, channel_id: str, metric: str) -> Tuple[float, float]:
        return _mean_std([run.channel_value(channel_id, metric) for run in self.runs_at(value)])

    def aggregate_stats(self, value) -> Tuple[float, float]:
        return _mean_std([run.aggregate_rate for run in self.runs_at(value)])

    @property
    def columns(self) -> Tuple[str, ...]:
        names = ['value', 'entity', 'id']
        for metric in FLOW_SWEEP_METRICS + CHANNEL_SWEEP_METRICS:
            names += [metric + '_mean', metric + '_std']
        return tuple(names)

    def rows(self):
        blank = ('', '')
        for value, runs in self.points:
            if not runs:
                continue
            first = runs[0]
            for flow_id in sorted(first.flows):
                row = [value, 'flow', flow_id]
                for metric in FLOW_SWEEP_METRICS:
                    row += self.flow_stats(value, flow_id, metric)
                for _ in CHANNEL_SWEEP_METRICS:
                    row += blank
                yield tuple(row)
            for channel_id in sorted(first.channels):
                row = [value, 'channel', channel_id]
                for _ in FLOW_SWEEP_METRICS:
                    row += blank
                for metric in CHANNEL_SWEEP_METRICS:
                    row += self.channel_stats(value, channel_id, metric)
                yield tuple(row)


def write_rows(out: TextIO, header: Sequence[str], rows):
    writer = csv.writer(out, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(cell) for cell in row])


@singledispatch
def emit_csv(table, out: TextIO):
    """Write a run's flow rows or a sweep's per-point rows as CSV"""
    raise TypeError('Cannot emit {} as CSV'.format(type(table).__name__))


@emit_csv.register(RunMetrics)
def _(metrics: RunMetrics, out: TextIO):
    write_rows(out, FLOW_COLUMNS, metrics.flow_rows())


@emit_csv.register(SweepTable)
def _(table: SweepTable, out: TextIO):
    write_rows(out, table.columns, table.rows())


def emit_channel_csv(metrics: RunMetrics, out: TextIO):
    write_rows(out, CHANNEL_COLUMNS, metrics.channel_rows())


def emit_ledger_csv(metrics: RunMetrics, out: TextIO):
    write_rows(out, LEDGER_COLUMNS, metrics.ledger_rows())


def emit_occupancy_csv(metrics: RunMetrics, out: TextIO, states: Optional[Sequence[str]] = None):
    if states is None:
        states = sorted({s for _, counts in metrics.occupancy for s in counts})
    write_rows(out, ('time',) + tuple(states), (
        (time,) + tuple(counts.get(s, 0) for s in states) for time, counts in metrics.occupancy
    ))


PMF_COLUMNS = ('pairs', 'probability')


def emit_pmf_csv(pmf: Sequence[float], out: TextIO):
    """Per-slot distribution of swapped pairs, one row per count"""
    write_rows(out, PMF_COLUMNS, enumerate(pmf))
