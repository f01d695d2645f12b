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
Qubit state machine and the link layer that drives it

Each memory qubit is bound to one channel and one allocation pool. The
link layer runs the two-way reservation exchange, samples heralded
generation, owns every live EPR pair and releases qubits on cutoff.

Transition table (state, trigger -> state):

    RAW       start_reservation   ACTIVE
    ACTIVE    remote_available    RESERVED
    RESERVED  epr_created         ENTANGLED
    ENTANGLED swap_conditions_met PURIF
    ENTANGLED purif_solicit       PURIF
    PURIF     start_round         PENDING
    PENDING   round_success       PURIF
    PENDING   round_failure       RELEASE
    PURIF     purification_done   ELIGIBLE
    ELIGIBLE  consumed            RELEASE
    RELEASE   freed               RAW

plus consumed/remote_failed/decohered into RELEASE from every state that
holds a pair.
"""
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Deque, Dict, List, Optional, Tuple

from qnsk.engine import Event, EventKind, RngStreams, Scheduler
from qnsk.exceptions import IllegalTransition
from qnsk.link_models import (
    LinkPhysics, WernerState, decayed_werner, initial_werner, link_physics,
    sample_rounds_to_success
)
from qnsk.metrics import ChannelMetrics, PairLedger, RunMetrics
from qnsk.topology import ChannelSpec, NetworkTopology

LOG = logging.getLogger(__name__)


class QubitState(Enum):
    RAW = 'RAW'
    ACTIVE = 'ACTIVE'
    RESERVED = 'RESERVED'
    ENTANGLED = 'ENTANGLED'
    PURIF = 'PURIF'
    PENDING = 'PENDING'
    ELIGIBLE = 'ELIGIBLE'
    RELEASE = 'RELEASE'


class Trigger(Enum):
    START_RESERVATION = 'start_reservation'
    REMOTE_AVAILABLE = 'remote_available'
    EPR_CREATED = 'epr_created'
    SWAP_CONDITIONS_MET = 'swap_conditions_met'
    PURIF_SOLICIT = 'purif_solicit'
    START_ROUND = 'start_round'
    ROUND_SUCCESS = 'round_success'
    ROUND_FAILURE = 'round_failure'
    PURIFICATION_DONE = 'purification_done'
    CONSUMED = 'consumed'
    REMOTE_FAILED = 'remote_failed'
    DECOHERED = 'decohered'
    FREED = 'freed'


S, T = QubitState, Trigger

HOLDING_STATES = frozenset((S.ENTANGLED, S.PURIF, S.PENDING, S.ELIGIBLE))

TRANSITIONS = {
    (S.RAW, T.START_RESERVATION): S.ACTIVE,
    (S.ACTIVE, T.REMOTE_AVAILABLE): S.RESERVED,
    (S.RESERVED, T.EPR_CREATED): S.ENTANGLED,
    (S.ENTANGLED, T.SWAP_CONDITIONS_MET): S.PURIF,
    (S.ENTANGLED, T.PURIF_SOLICIT): S.PURIF,
    (S.PURIF, T.START_ROUND): S.PENDING,
    (S.PENDING, T.ROUND_SUCCESS): S.PURIF,
    (S.PENDING, T.ROUND_FAILURE): S.RELEASE,
    (S.PURIF, T.PURIFICATION_DONE): S.ELIGIBLE,
    (S.PURIF, T.CONSUMED): S.RELEASE,
    (S.PENDING, T.CONSUMED): S.RELEASE,
    (S.ELIGIBLE, T.CONSUMED): S.RELEASE,
    (S.RELEASE, T.FREED): S.RAW,
}
for _state in HOLDING_STATES:
    TRANSITIONS[_state, T.REMOTE_FAILED] = S.RELEASE
    TRANSITIONS[_state, T.DECOHERED] = S.RELEASE
del _state


def next_state(state: QubitState, trigger: Trigger) -> QubitState:
    try:
        return TRANSITIONS[state, trigger]
    except KeyError:
        raise IllegalTransition(state.value, 'no edge for trigger ' + trigger.value) from None


class Qubit:
    """
    One memory qubit

    `listener`, when set, is called as listener(qubit, previous_state) after
    every transition.
    """
    __slots__ = (
        'qubit_id', 'seq', 'owner_node', 'bound_channel', 'pool', 'is_primary',
        'state', 'epr', 'view', 'state_entered_at', 'listener'
    )

    def __init__(self, qubit_id: str, seq: int, owner_node: str, bound_channel: str,
                 pool: Optional[str], is_primary: bool):
        self.qubit_id = qubit_id
        self.seq = seq
        self.owner_node = owner_node
        self.bound_channel = bound_channel
        self.pool = pool
        self.is_primary = is_primary
        self.state = QubitState.RAW
        self.epr = None  # type: Optional[EprPair]
        self.view = None  # type: Optional[Tuple[str, ...]]
        self.state_entered_at = 0.0
        self.listener = None  # type: Optional[Callable[[Qubit, QubitState], None]]

    def transition(self, trigger: Trigger, now: float) -> QubitState:
        previous = self.state
        try:
            self.state = next_state(previous, trigger)
        except IllegalTransition as e:
            raise IllegalTransition(self.qubit_id, str(e)) from None
        self.state_entered_at = now
        if self.listener is not None:
            self.listener(self, previous)
        return self.state

    @property
    def far_end(self) -> Optional[str]:
        """The other end of the pair as far as this qubit knows"""
        if self.view is None:
            return None
        return self.view[-1] if self.view[0] == self.owner_node else self.view[0]

    def __repr__(self):
        return 'Qubit({}, {})'.format(self.qubit_id, self.state.value)


@dataclass(eq=False)
class EprPair:
    epr_id: int
    end_a: Qubit
    end_b: Qubit
    werner: WernerState
    werner_time: float
    created_at: float
    nodes: Tuple[str, ...]
    span: Tuple[str, ...]
    pool: str
    coherence_time: float = math.inf
    purif_rounds_done: int = 0
    busy: bool = False
    claimed_by: Optional[str] = None
    retired: Optional[str] = None
    cutoff_event: Optional[Event] = field(default=None, repr=False)
    delivery_event: Optional[Event] = field(default=None, repr=False)

    @property
    def live(self) -> bool:
        return self.retired is None

    def werner_at(self, now: float) -> WernerState:
        return WernerState(decayed_werner(self.werner.w, now - self.werner_time, self.coherence_time))

    def fidelity_at(self, now: float) -> float:
        return self.werner_at(now).fidelity

    def other(self, qubit: Qubit) -> Qubit:
        if qubit is self.end_a:
            return self.end_b
        if qubit is self.end_b:
            return self.end_a
        raise IllegalTransition(qubit.qubit_id, 'does not hold pair {}'.format(self.epr_id))

    def end_at(self, node_id: str) -> Qubit:
        return self.end_a if self.end_a.owner_node == node_id else self.end_b


@dataclass
class ChannelPool:
    """The qubits of one channel reserved for one pool, on both sides"""
    channel: ChannelSpec
    pool: str
    orientation: Tuple[str, str]
    primary: List[Qubit] = field(default_factory=list)
    secondary: List[Qubit] = field(default_factory=list)
    waiting: Deque[Qubit] = field(default_factory=deque)
    active: bool = False

    @property
    def key(self) -> Tuple[str, str]:
        return self.channel.channel_id, self.pool


class LinkLayer:
    """
    Reservation, generation and cutoff for every channel pool

    Args:
        topology: the network
        scheduler: event loop shared with the rest of the simulation
        rngs: per-entity random streams; channel draws use the channel id
        timing: object answering is_sync and external_window(t)
        metrics: run counters updated in place
    """

    def __init__(self, topology: NetworkTopology, scheduler: Scheduler, rngs: RngStreams,
                 timing, metrics: RunMetrics):
        self.topology = topology
        self.scheduler = scheduler
        self.rngs = rngs
        self.timing = timing
        self.metrics = metrics
        self.physics = {
            cid: link_physics(channel) for cid, channel in topology.channels.items()
        }  # type: Dict[str, LinkPhysics]
        self.pools = {}  # type: Dict[Tuple[str, str], ChannelPool]
        self.qubits = []  # type: List[Qubit]
        self.pairs = {}  # type: Dict[str, Dict[int, EprPair]]
        self.in_flight = {}  # type: Dict[str, Tuple[float, float, str]]
        self._next_epr = 0
        self.on_entangled = lambda qubit: None  # type: Callable[[Qubit], None]
        self.on_retired = lambda pair, reason: None  # type: Callable[[EprPair, str], None]

    @property
    def now(self) -> float:
        return self.scheduler.now

    def ledger(self, pool: str) -> PairLedger:
        if pool not in self.metrics.ledgers:
            self.metrics.ledgers[pool] = PairLedger(pool)
            self.pairs[pool] = {}
        return self.metrics.ledgers[pool]

    def add_pool(self, channel_id: str, pool: str, n_primary: int, n_secondary: int,
                 orientation: Optional[Tuple[str, str]] = None) -> ChannelPool:
        channel = self.topology.channels[channel_id]
        entry = ChannelPool(channel, pool, orientation or channel.endpoints)
        for is_primary, count, target in (
            (True, n_primary, entry.primary), (False, n_secondary, entry.secondary)
        ):
            node_id = channel.primary_node if is_primary else channel.secondary_node
            for i in range(count):
                qubit = Qubit(
                    '{}/{}/{}/{}'.format(node_id, channel_id, pool, i), len(self.qubits),
                    node_id, channel_id, pool, is_primary
                )
                target.append(qubit)
                self.qubits.append(qubit)
        self.pools[entry.key] = entry
        self.ledger(pool)
        stats = self.metrics.channels.setdefault(channel_id, ChannelMetrics(
            channel_id, channel.architecture.value, self.physics[channel_id].p_success
        ))
        stats.memory_pairs += min(n_primary, n_secondary)
        return entry

    def activate(self, channel_id: str, pool: str):
        """Start reservations on a pool once its path is installed at both ends"""
        entry = self.pools[channel_id, pool]
        if entry.active:
            return
        entry.active = True
        LOG.debug('Channel %s pool %s active at t=%s', channel_id, pool, self.now)
        for qubit in entry.primary:
            if qubit.state is QubitState.RAW:
                self.initiate_reservation(qubit)

    def initiate_reservation(self, qubit: Qubit):
        entry = self.pools[qubit.bound_channel, qubit.pool]
        qubit.transition(Trigger.START_RESERVATION, self.now)
        channel = entry.channel
        self.scheduler.send_classical(
            channel.primary_node, channel.secondary_node, self._on_request, entry, qubit
        )

    def _on_request(self, entry: ChannelPool, primary: Qubit):
        for secondary in entry.secondary:
            if secondary.state is QubitState.RAW:
                self._accept(entry, primary, secondary)
                return
        entry.waiting.append(primary)

    def _accept(self, entry: ChannelPool, primary: Qubit, secondary: Qubit):
        secondary.transition(Trigger.START_RESERVATION, self.now)
        channel = entry.channel
        self.scheduler.send_classical(
            channel.secondary_node, channel.primary_node, self._on_confirm, entry, primary, secondary
        )

    def _on_confirm(self, entry: ChannelPool, primary: Qubit, secondary: Qubit):
        primary.transition(Trigger.REMOTE_AVAILABLE, self.now)
        secondary.transition(Trigger.REMOTE_AVAILABLE, self.now)
        self.generate_epr(entry, primary, secondary)

    def generate_epr(self, entry: ChannelPool, primary: Qubit, secondary: Qubit):
        """
        Sample the round of first success and schedule the heralded pair

        In sync mode attempts run only inside T_ext; a success sampled past
        the end of the window turns the window's rounds into failures and
        generation restarts at the next window.
        """
        channel_id = entry.channel.channel_id
        physics = self.physics[channel_id]
        now = self.now
        start, end = now, math.inf
        if self.timing.is_sync:
            start, end = self.timing.external_window(now)
            if start > now:
                self.scheduler.schedule(
                    start, channel_id, EventKind.SLOT_BOUNDARY,
                    self.generate_epr, entry, primary, secondary
                )
                return
        k = sample_rounds_to_success(physics.p_success, self.rngs.stream(channel_id))
        done = now + k * physics.round_duration
        if done < end:
            self.in_flight[primary.qubit_id] = (now, physics.round_duration, channel_id)
            self.scheduler.schedule(
                done, channel_id, EventKind.ATTEMPT_COMPLETE,
                self._on_attempt_complete, entry, primary, secondary, k
            )
            return
        failed = int(math.floor((end - now) / physics.round_duration))
        self.metrics.channels[channel_id].attempts += failed
        next_start, _ = self.timing.external_window(end)
        self.scheduler.schedule(
            next_start, channel_id, EventKind.SLOT_BOUNDARY,
            self.generate_epr, entry, primary, secondary
        )

    def _on_attempt_complete(self, entry: ChannelPool, primary: Qubit, secondary: Qubit, k: int):
        channel = entry.channel
        del self.in_flight[primary.qubit_id]
        stats = self.metrics.channels[channel.channel_id]
        stats.attempts += k
        stats.successes += 1

        by_node = {primary.owner_node: primary, secondary.owner_node: secondary}
        first, second = entry.orientation
        pair = self.create_pair(
            by_node[first], by_node[second], initial_werner(channel), self.now,
            (first, second), (channel.channel_id,), entry.pool
        )
        for qubit in (primary, secondary):
            qubit.transition(Trigger.EPR_CREATED, self.now)
            qubit.epr = pair
            qubit.view = pair.nodes
        self.schedule_cutoff(pair)
        self.on_entangled(by_node[first])
        if by_node[second].epr is not None:
            self.on_entangled(by_node[second])

    def create_pair(self, end_a: Qubit, end_b: Qubit, werner: WernerState, created_at: float,
                    nodes: Tuple[str, ...], span: Tuple[str, ...], pool: str) -> EprPair:
        coherence_time = min(
            self.topology.nodes[end_a.owner_node].coherence_time,
            self.topology.nodes[end_b.owner_node].coherence_time,
        )
        pair = EprPair(
            self._next_epr, end_a, end_b, werner, self.now, created_at,
            nodes, span, pool, coherence_time
        )
        self._next_epr += 1
        self.ledger(pool).create()
        self.pairs[pool][pair.epr_id] = pair
        return pair

    def schedule_cutoff(self, pair: EprPair):
        if math.isinf(pair.coherence_time):
            return
        expiry = max(self.now, pair.created_at + pair.coherence_time)
        pair.cutoff_event = self.scheduler.schedule(
            expiry, 'epr{}'.format(pair.epr_id), EventKind.CUTOFF_EXPIRY, self.expire_pair, pair
        )

    def retire(self, pair: EprPair, reason: str):
        if not pair.live:
            raise IllegalTransition('epr{}'.format(pair.epr_id), 'retired twice')
        pair.retired = reason
        self.ledger(pair.pool).retire(reason)
        del self.pairs[pair.pool][pair.epr_id]
        for event in (pair.cutoff_event, pair.delivery_event):
            if event is not None:
                event.cancel()
        self.on_retired(pair, reason)

    def expire_pair(self, pair: EprPair):
        """Release both members of a pair whose age reached the coherence time"""
        if not pair.live:
            return
        self.retire(pair, 'decohered')
        for qubit in (pair.end_a, pair.end_b):
            if qubit.epr is pair:
                self.release(qubit, Trigger.DECOHERED)

    def release(self, qubit: Qubit, trigger: Trigger):
        qubit.transition(trigger, self.now)
        qubit.epr = None
        qubit.view = None
        reset_latency = self.topology.nodes[qubit.owner_node].reset_latency
        if reset_latency > 0:
            self.scheduler.schedule_after(
                reset_latency, qubit.owner_node, EventKind.QUBIT_RESET, self._reset, qubit
            )
        else:
            self._reset(qubit)

    def _reset(self, qubit: Qubit):
        qubit.transition(Trigger.FREED, self.now)
        entry = self.pools[qubit.bound_channel, qubit.pool]
        if not entry.active:
            return
        if qubit.is_primary:
            self.initiate_reservation(qubit)
        elif entry.waiting:
            self._accept(entry, entry.waiting.popleft(), qubit)

    def live_pairs(self, pool: Optional[str] = None) -> List[EprPair]:
        pools = [pool] if pool is not None else sorted(self.pairs)
        return [pair for p in pools for pair in self.pairs.get(p, {}).values()]

    def finalize(self, t_end: float):
        """Count the rounds of attempts still running when the run stops"""
        for start, tau, channel_id in self.in_flight.values():
            self.metrics.channels[channel_id].attempts += int(math.floor((t_end - start) / tau))
        self.in_flight.clear()

    def occupancy(self) -> Dict[str, int]:
        counts = {state.value: 0 for state in QubitState}
        for qubit in self.qubits:
            counts[qubit.state.value] += 1
        return counts

    def check_invariants(self):
        for qubit in self.qubits:
            holding = qubit.state in HOLDING_STATES
            if holding != (qubit.epr is not None):
                raise IllegalTransition(qubit.qubit_id, 'pair reference out of step with state {}'.format(
                    qubit.state.value
                ))
        for pool, ledger in self.metrics.ledgers.items():
            ledger.check(len(self.pairs.get(pool, {})))
