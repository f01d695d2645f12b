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
Deterministic discrete-event scheduler

Events are ordered by (time, seq); seq is assigned at schedule time so
two events at the same instant dispatch in the order they were
scheduled. Cancelled events stay in the heap and are skipped on pop.
"""
import heapq
import logging
from enum import Enum
from typing import Callable, Dict, Iterable, List, Optional, TextIO, Tuple

import numpy as np

from qnsk.exceptions import ConnectivityError, SchedulingError
from qnsk.util import format_number, stable_hash

LOG = logging.getLogger(__name__)


class EventKind(Enum):
    ATTEMPT_COMPLETE = 'AttemptComplete'
    CLASSICAL_MESSAGE = 'ClassicalMessage'
    CUTOFF_EXPIRY = 'CutoffExpiry'
    SLOT_BOUNDARY = 'SlotBoundary'
    DELIVER_TO_APP = 'DeliverToApp'
    QUBIT_RESET = 'QubitReset'
    SAMPLE = 'Sample'


class Event:
    __slots__ = ('time', 'seq', 'target', 'kind', 'handler', 'args', 'cancelled')

    def __init__(self, time: float, seq: int, target: str, kind: EventKind,
                 handler: Callable, args: tuple):
        self.time = time
        self.seq = seq
        self.target = target
        self.kind = kind
        self.handler = handler
        self.args = args
        self.cancelled = False

    def cancel(self):
        self.cancelled = True

    def __repr__(self):
        return 'Event({}, {}, {}, {})'.format(self.time, self.seq, self.target, self.kind.value)


class Scheduler:
    """
    Single-threaded event loop with a classical messaging model

    Args:
        trace: optional text sink receiving one "time seq target kind"
            line per dispatched event
    """

    def __init__(self, trace: Optional[TextIO] = None):
        self._queue = []  # type: List[Tuple[float, int, Event]]
        self._seq = 0
        self._clock = 0.0
        self._links = {}  # type: Dict[Tuple[str, str], float]
        self.trace = trace
        self.dispatched = 0

    @property
    def now(self) -> float:
        return self._clock

    @property
    def pending(self) -> int:
        return sum(1 for _, _, event in self._queue if not event.cancelled)

    def schedule(self, time: float, target: str, kind: EventKind,
                 handler: Callable, *args) -> Event:
        if time < self._clock:
            raise SchedulingError(target, 'event {} at {} is before the clock {}'.format(
                kind.value, time, self._clock
            ))
        event = Event(time, self._seq, target, kind, handler, args)
        self._seq += 1
        heapq.heappush(self._queue, (time, event.seq, event))
        return event

    def schedule_after(self, delay: float, target: str, kind: EventKind,
                       handler: Callable, *args) -> Event:
        return self.schedule(self._clock + delay, target, kind, handler, *args)

    def run_until(self, t_end: float) -> int:
        """Dispatch every event with time <= t_end, then park the clock at t_end"""
        if t_end < self._clock:
            raise SchedulingError('cannot run backwards from {} to {}'.format(self._clock, t_end))
        count = 0
        queue = self._queue
        debug = self.trace is None and LOG.isEnabledFor(logging.DEBUG)
        while queue and queue[0][0] <= t_end:
            time, seq, event = heapq.heappop(queue)
            if event.cancelled:
                continue
            assert time >= self._clock, 'event dispatched in the past'
            self._clock = time
            if self.trace is not None:
                self.trace.write('{} {} {} {}\n'.format(
                    format_number(time), seq, event.target, event.kind.value
                ))
            elif debug:
                LOG.debug('%s %d %s %s', format_number(time), seq, event.target, event.kind.value)
            event.handler(*event.args)
            count += 1
        self._clock = t_end
        self.dispatched += count
        LOG.debug('Dispatched %d events up to t=%s', count, t_end)
        return count

    def connect(self, a: str, b: str, latency: float):
        """Declare a bidirectional classical link"""
        if latency < 0:
            raise ValueError('Negative classical latency between {} and {}'.format(a, b))
        self._links[a, b] = self._links[b, a] = latency

    def latency(self, src: str, dst: str, via: Iterable[str] = ()) -> float:
        hops = [src, *via, dst]
        total = 0.0
        for a, b in zip(hops, hops[1:]):
            if a == b:
                continue
            try:
                total += self._links[a, b]
            except KeyError:
                raise ConnectivityError(a, 'no classical link to {}'.format(b)) from None
        return total

    def send_classical(self, src: str, dst: str, handler: Callable, *args,
                       via: Iterable[str] = ()) -> Event:
        """
        Deliver handler(*args) at dst after the classical latency of the hop
        sequence src, *via, dst
        """
        return self.schedule_after(
            self.latency(src, dst, via), dst, EventKind.CLASSICAL_MESSAGE, handler, *args
        )


class RngStreams:
    """
    Independent numpy generators per entity, split from one master seed

    The stream of an entity depends only on (seed, entity id), so adding a
    channel to a scenario does not change the draws of the others.
    """

    def __init__(self, seed: int):
        self.seed = seed
        self._streams = {}  # type: Dict[str, np.random.Generator]

    def stream(self, entity_id: str) -> np.random.Generator:
        try:
            return self._streams[entity_id]
        except KeyError:
            sequence = np.random.SeedSequence(self.seed, spawn_key=(stable_hash(entity_id),))
            generator = self._streams[entity_id] = np.random.default_rng(sequence)
            return generator
