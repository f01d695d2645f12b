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
Entanglement swapping, purification and delivery

The Forwarder moves qubits from ENTANGLED towards delivery. A qubit at a
route end waits until it knows its pair spans the whole route; a qubit at
an intermediate node swaps once the swap policy allows it. Purification
targets are applied to any pair whose span matches a configured segment.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from qnsk.engine import EventKind, RngStreams, Scheduler
from qnsk.exceptions import IllegalTransition, InstallError
from qnsk.lifecycle import HOLDING_STATES, EprPair, LinkLayer, Qubit, QubitState, Trigger
from qnsk.link_models import WernerState
from qnsk.metrics import STATISTICAL_POOL, RunMetrics
from qnsk.topology import NetworkTopology

LOG = logging.getLogger(__name__)

DELIVER = 'deliver'
SWAP = 'swap'


class SwapMode(Enum):
    ASAP = 'asap'
    STATIC_ORDER = 'static_order'


@dataclass(frozen=True)
class SwapPolicy:
    """
    When an intermediate node may swap

    Under STATIC_ORDER a lower rank swaps first: a node swaps a pair only
    when the far end of that pair is a route end or a node whose rank is
    not lower than its own, that is once every lower-ranked node between
    them has already swapped.
    """
    mode: SwapMode
    ranks: Mapping[str, int] = field(default_factory=dict)

    @classmethod
    def from_config(cls, value, route: Sequence[str]) -> 'SwapPolicy':
        interior = list(route[1:-1])
        if value is None or value == 'asap':
            return cls(SwapMode.ASAP)
        if value == 'l2r':
            return cls(SwapMode.STATIC_ORDER, {node: i for i, node in enumerate(interior)})
        if value == 'r2l':
            return cls(SwapMode.STATIC_ORDER, {node: i for i, node in enumerate(reversed(interior))})
        if isinstance(value, str):
            raise InstallError(value, 'unknown swap policy')

        ranks = {}
        for rank, group in enumerate(value):
            for node in [group] if isinstance(group, str) else group:
                if node in ranks:
                    raise InstallError(node, 'appears twice in the swap order')
                ranks[node] = rank
        if set(ranks) != set(interior):
            raise InstallError('-'.join(route), 'swap order must rank every intermediate node once')
        return cls(SwapMode.STATIC_ORDER, ranks)

    def permits(self, node: str, far_end: str, route: Sequence[str]) -> bool:
        if node in (route[0], route[-1]):
            return False
        if self.mode is SwapMode.ASAP or far_end in (route[0], route[-1]):
            return True
        return self.ranks[far_end] >= self.ranks[node]


@dataclass(frozen=True)
class PurificationTarget:
    segment: Tuple[str, str]
    rounds: int


@dataclass(frozen=True)
class PurificationConfig:
    targets: Tuple[PurificationTarget, ...] = ()

    @classmethod
    def from_config(cls, entries: Iterable[dict], route: Sequence[str]) -> 'PurificationConfig':
        targets = []
        for entry in entries or ():
            a, b = entry['segment']
            if a == b or a not in route or b not in route:
                raise InstallError('{}-{}'.format(a, b), 'purification segment is not on the route')
            targets.append(PurificationTarget((a, b), entry.get('rounds', 1)))
        return cls(tuple(targets))

    def rounds_for(self, nodes: Sequence[str]) -> int:
        ends = {nodes[0], nodes[-1]}
        return max((t.rounds for t in self.targets if set(t.segment) == ends), default=0)


class MultiplexingMode(Enum):
    BLOCKING = 'blocking'
    BUFFER_SPACE = 'buffer_space'
    STATISTICAL = 'statistical'


@dataclass(frozen=True)
class Multiplexing:
    mode: MultiplexingMode
    allocations: Mapping[str, Mapping[str, int]] = field(default_factory=dict)

    @property
    def dedicated(self) -> bool:
        return self.mode is not MultiplexingMode.STATISTICAL


def bbpssw(f1: float, f2: float) -> Tuple[float, float]:
    """Success probability and output fidelity of one recurrence round on Werner inputs"""
    e1, e2 = 1 - f1, 1 - f2
    p = f1 * f2 + f1 * e2 / 3 + f2 * e1 / 3 + 5 * e1 * e2 / 9
    return p, (f1 * f2 + e1 * e2 / 9) / p


PURIFICATION_RULES = {
    'bbpssw': bbpssw,
}


def segments(route: Sequence[str]):
    """Every contiguous sub-route with at least two nodes"""
    for i in range(len(route)):
        for j in range(i + 2, len(route) + 1):
            yield tuple(route[i:j])


def merge_spans(node: str, left: Tuple[str, ...], right: Tuple[str, ...]) -> Tuple[str, ...]:
    """Concatenate two node spans that meet at node"""
    if node not in (left[0], left[-1]) or node not in (right[0], right[-1]):
        raise IllegalTransition(node, 'spans {} and {} are not adjacent here'.format(left, right))
    if left[-1] != node:
        left = left[::-1]
    if right[0] != node:
        right = right[::-1]
    return left + right[1:]


def pool_of(instruction) -> str:
    return instruction.request_id if instruction.multiplexing.dedicated else STATISTICAL_POOL


class Forwarder:
    """
    Swap, purify and deliver for every installed path

    Qubits holding a pair are indexed per node, and ELIGIBLE ones per node,
    pool and channel in the order they became eligible, so an event only
    looks at the qubits it can affect.

    Args:
        settings: scenario simulation settings; uses purification_rule,
            conflict_guard and idealized_coordination
    """

    def __init__(self, topology: NetworkTopology, scheduler: Scheduler, rngs: RngStreams,
                 timing, link: LinkLayer, metrics: RunMetrics, settings):
        self.topology = topology
        self.scheduler = scheduler
        self.rngs = rngs
        self.timing = timing
        self.link = link
        self.metrics = metrics
        self.purify = PURIFICATION_RULES[settings.purification_rule]
        self.conflict_guard = settings.conflict_guard
        self.idealized = settings.idealized_coordination
        self.tables = {node: {} for node in topology.nodes}  # type: Dict[str, Dict[str, object]]
        self.paths = {}
        self._segments = {}  # type: Dict[str, Dict[Tuple[str, ...], Tuple[Tuple[str, ...], List[str]]]]
        self._full_routes = {}  # type: Dict[str, Dict[Tuple[str, ...], List[str]]]
        self._interior = {}  # type: Dict[str, set]
        self._installed_at = {}  # type: Dict[Tuple[str, str], List[object]]
        self._roles = {}  # type: Dict[Tuple[str, str, Tuple[str, ...]], Optional[str]]
        self._holding = {node: {} for node in topology.nodes}  # type: Dict[str, Dict[Qubit, None]]
        self._eligible = {}  # type: Dict[Tuple[str, str], Dict[str, Dict[Qubit, int]]]
        self._stamp = 0
        for qubit in link.qubits:
            qubit.listener = self._on_transition
        link.on_entangled = self.on_entangled
        link.on_retired = self._on_retired

    @property
    def now(self) -> float:
        return self.scheduler.now

    def _on_transition(self, qubit: Qubit, previous: QubitState):
        state = qubit.state
        holding = self._holding[qubit.owner_node]
        if state in HOLDING_STATES:
            holding[qubit] = None
        else:
            holding.pop(qubit, None)
        if state is QubitState.ELIGIBLE:
            by_channel = self._eligible.setdefault((qubit.owner_node, qubit.pool), {})
            by_channel.setdefault(qubit.bound_channel, {})[qubit] = self._stamp
            self._stamp += 1
        elif previous is QubitState.ELIGIBLE:
            del self._eligible[qubit.owner_node, qubit.pool][qubit.bound_channel][qubit]

    def eligible_at(self, node: str, pool: str) -> List[Qubit]:
        """ELIGIBLE qubits of a pool at a node, first to become eligible first"""
        by_channel = self._eligible.get((node, pool), {})
        stamped = [(stamp, q) for queue in by_channel.values() for q, stamp in queue.items()]
        return [q for _, q in sorted(stamped, key=lambda item: item[0])]

    def install_at(self, node: str, instruction):
        """Store the instruction in the node's local table"""
        self.tables[node][instruction.request_id] = instruction
        self._installed_at.clear()
        self._roles.clear()
        if instruction.request_id in self.paths:
            return
        self.paths[instruction.request_id] = instruction
        pool = pool_of(instruction)
        route = tuple(instruction.route)
        index = self._segments.setdefault(pool, {})
        for segment in segments(route):
            for nodes in (segment, segment[::-1]):
                canonical, ids = index.setdefault(nodes, (segment, []))
                ids.append(instruction.request_id)
                ids.sort()
        full = self._full_routes.setdefault(pool, {})
        for nodes in (route, route[::-1]):
            full.setdefault(nodes, []).append(instruction.request_id)
            full[nodes].sort()
        self._interior.setdefault(pool, set()).update(route[1:-1])

    def _installed(self, node: str, pool: str) -> List[object]:
        key = node, pool
        try:
            return self._installed_at[key]
        except KeyError:
            pass
        table = self.tables[node]
        if pool == STATISTICAL_POOL:
            found = [i for i in table.values() if not i.multiplexing.dedicated]
        else:
            found = [table[pool]] if pool in table else []
        self._installed_at[key] = found
        return found

    def flow_for(self, pool: str, nodes: Sequence[str]) -> Optional[str]:
        """The flow a pair's counters are charged to; None for a span no path contains"""
        if pool != STATISTICAL_POOL:
            return pool
        entry = self._segments.get(pool, {}).get(tuple(nodes))
        return entry[1][0] if entry else None

    def valid_segment(self, pool: str, nodes: Tuple[str, ...]) -> bool:
        return len(set(nodes)) == len(nodes) and nodes in self._segments.get(pool, {})

    def canonical(self, pool: str, nodes: Tuple[str, ...]) -> Tuple[str, ...]:
        entry = self._segments.get(pool, {}).get(nodes)
        return entry[0] if entry else nodes

    def _span(self, nodes: Sequence[str]) -> Tuple[str, ...]:
        return tuple(self.topology.channel_between(a, b).channel_id for a, b in zip(nodes, nodes[1:]))

    def _in_phase(self, phase: str) -> bool:
        return not self.timing.is_sync or self.timing.phase_at(self.now) == phase

    def check_swap_conditions(self, node: str, qubit: Qubit) -> bool:
        instructions = self._installed(node, qubit.pool)
        if not instructions:
            return False
        if qubit.pool == STATISTICAL_POOL:
            return node in self._interior.get(qubit.pool, ())
        instruction = instructions[0]
        return instruction.swap_policy.permits(node, qubit.far_end, instruction.route)

    def _role(self, qubit: Qubit) -> Optional[str]:
        if qubit.view is None:
            return None
        key = qubit.owner_node, qubit.pool, qubit.view
        try:
            return self._roles[key]
        except KeyError:
            role = self._roles[key] = self._compute_role(qubit)
            return role

    def _compute_role(self, qubit: Qubit) -> Optional[str]:
        node = qubit.owner_node
        instructions = self._installed(node, qubit.pool)
        if not instructions:
            return None
        if qubit.pool == STATISTICAL_POOL:
            if qubit.view in self._full_routes.get(qubit.pool, {}):
                return DELIVER
        else:
            route = tuple(instructions[0].route)
            if node in (route[0], route[-1]):
                return DELIVER if qubit.view in (route, route[::-1]) else None
        return SWAP if self.check_swap_conditions(node, qubit) else None

    def _rounds_wanted(self, qubit: Qubit) -> int:
        wanted = 0
        for instruction in self._installed(qubit.owner_node, qubit.pool):
            wanted = max(wanted, instruction.purification.rounds_for(qubit.view))
        return wanted

    def on_entangled(self, qubit: Qubit):
        self.advance(qubit)

    def retry(self, node: str, pool: Optional[str] = None):
        """Re-examine the pair-holding qubits at a node, oldest first"""
        waiting = [
            q for q in self._holding[node]
            if q.epr is not None and (pool is None or q.pool == pool)
        ]
        waiting.sort(key=lambda q: (q.state_entered_at, q.seq))
        for qubit in waiting:
            self.advance(qubit)

    def wake(self):
        for node in sorted(self._holding):
            self.retry(node)

    def advance(self, qubit: Qubit):
        pair = qubit.epr
        if pair is None or not pair.live or pair.busy:
            return
        if qubit.state not in (QubitState.ENTANGLED, QubitState.PURIF, QubitState.ELIGIBLE):
            return
        role = self._role(qubit)
        if role is None:
            return
        if qubit.state is QubitState.ENTANGLED:
            qubit.transition(Trigger.SWAP_CONDITIONS_MET, self.now)

        if qubit.state is QubitState.PURIF:
            wanted = self._rounds_wanted(qubit)
            if pair.purif_rounds_done < wanted:
                if qubit.view != pair.nodes:
                    return
                if pair.other(qubit).state is QubitState.ELIGIBLE:
                    pair.purif_rounds_done = wanted
                else:
                    if self._in_phase('int'):
                        self._try_start_round(qubit)
                    return
            qubit.transition(Trigger.PURIFICATION_DONE, self.now)

        if pair.claimed_by is not None:
            return
        if role == DELIVER:
            self._try_deliver(qubit)
        elif self._in_phase('int'):
            self._try_swap(qubit)

    # Swapping

    def select_swap_partner(self, node: str, qubit: Qubit, physical: bool = False) -> Optional[Qubit]:
        """
        Earliest-waiting ELIGIBLE qubit at node whose pair can be merged with
        this one into a segment of an installed path of the same pool
        """
        def nodes_of(q):
            return q.epr.nodes if physical else q.view

        by_channel = self._eligible.get((node, qubit.pool), {})
        best = None
        for channel, queue in by_channel.items():
            if channel == qubit.bound_channel:
                continue
            for other, stamp in queue.items():
                if best is not None and stamp > best[0]:
                    break
                pair = other.epr
                if (
                    pair is None or pair is qubit.epr or not pair.live or pair.busy or
                    pair.claimed_by is not None or self._role(other) != SWAP
                ):
                    continue
                if self.valid_segment(qubit.pool, merge_spans(node, nodes_of(qubit), nodes_of(other))):
                    best = stamp, other
                    break
        return best[1] if best is not None else None

    def _try_swap(self, qubit: Qubit):
        node = qubit.owner_node
        statistical = qubit.pool == STATISTICAL_POOL
        partner = self.select_swap_partner(node, qubit, physical=statistical and self.idealized)
        if partner is None:
            return
        if statistical and self.conflict_guard and not self.idealized:
            self._propose(node, qubit, partner)
        else:
            self.attempt_swap(node, qubit, partner)

    def _relay(self, node: str, nodes: Tuple[str, ...]) -> Tuple[str, List[str]]:
        """Far end of a span seen from one of its ends, and the hops between"""
        oriented = nodes if nodes[0] == node else nodes[::-1]
        return oriented[-1], list(oriented[1:-1])

    def _propose(self, node: str, qubit: Qubit, partner: Qubit):
        left, right = qubit.epr, partner.epr
        left.claimed_by = right.claimed_by = node
        rtt = 2 * max(
            self.scheduler.latency(node, *self._relay(node, pair.nodes)) for pair in (left, right)
        )
        self.scheduler.schedule_after(
            rtt, node, EventKind.CLASSICAL_MESSAGE, self._commit, node, qubit, partner, left, right
        )

    def _commit(self, node: str, qubit: Qubit, partner: Qubit, left: EprPair, right: EprPair):
        left.claimed_by = right.claimed_by = None
        intact = (
            left.live and right.live and qubit.epr is left and partner.epr is right and
            qubit.state is QubitState.ELIGIBLE and partner.state is QubitState.ELIGIBLE
        )
        if intact and self._in_phase('int') and self.valid_segment(
            qubit.pool, merge_spans(node, left.nodes, right.nodes)
        ):
            self.attempt_swap(node, qubit, partner)
            return
        for pair in (left, right):
            if pair.live:
                for end in (pair.end_a, pair.end_b):
                    if end.owner_node != node and end.epr is pair:
                        self.advance(end)
        for waiting in self.eligible_at(node, left.pool):
            self.advance(waiting)

    def attempt_swap(self, node: str, left_qubit: Qubit, right_qubit: Qubit) -> Optional[EprPair]:
        """
        Bell measurement at node on two local qubits

        Returns the merged pair on success, None on failure. Both measured
        qubits are released either way and the remote ends are told by
        SWAP_UPDATE.
        """
        left, right = left_qubit.epr, right_qubit.epr
        nodes = merge_spans(node, left.nodes, right.nodes)
        pool = left.pool
        now = self.now
        remote_left, remote_right = left.other(left_qubit), right.other(right_qubit)
        werner = left.werner_at(now).w * right.werner_at(now).w
        created_at = min(left.created_at, right.created_at)
        flow = self.flow_for(pool, nodes)
        if flow is not None:
            self.metrics.flows[flow].swap_attempts += 1

        q = self.topology.nodes[node].swap_success_prob
        success = self.rngs.stream(node).random() < q
        notices = [(remote_left, left), (remote_right, right)]
        for pair, qubit in ((left, left_qubit), (right, right_qubit)):
            self.link.retire(pair, 'swap_consumed')
            self.link.release(qubit, Trigger.CONSUMED)
        if not success:
            for remote, pair in notices:
                self._notify(node, remote, pair, pair.nodes, failed=True)
            return None

        nodes = self.canonical(pool, nodes)
        first, second = (
            (remote_left, remote_right) if remote_left.owner_node == nodes[0] else (remote_right, remote_left)
        )
        merged = self.link.create_pair(
            first, second, WernerState(werner), created_at, nodes, self._span(nodes), pool
        )
        remote_left.epr = remote_right.epr = merged
        if self.valid_segment(pool, nodes):
            self.link.schedule_cutoff(merged)
            if flow is not None:
                self.metrics.flows[flow].swap_successes += 1
        else:
            LOG.debug('Conflictual swap at %s produced %s', node, '-'.join(nodes))
            self.metrics.conflicts += 1
            self.link.retire(merged, 'discarded')
        for remote, pair in notices:
            self._notify(node, remote, merged, pair.nodes, failed=False)
        return merged

    def _notify(self, node: str, remote: Qubit, pair: EprPair, via_nodes: Tuple[str, ...], failed: bool):
        target, via = self._relay(node, via_nodes)
        self.scheduler.send_classical(
            node, target, self.handle_swap_update, remote, pair, pair.nodes, failed, via=via
        )

    def handle_swap_update(self, qubit: Qubit, pair: EprPair, nodes: Tuple[str, ...], failed: bool):
        if qubit.epr is not pair:
            self.metrics.stale_updates += 1
            return
        if failed or not pair.live:
            self.link.release(qubit, Trigger.REMOTE_FAILED)
            return
        qubit.view = nodes
        self.advance(qubit)

    # Purification

    def _select_sacrifice(self, qubit: Qubit) -> Optional[EprPair]:
        keep = qubit.epr
        spans = (keep.nodes, keep.nodes[::-1])
        best = None
        for other in self._holding[qubit.owner_node]:
            pair = other.epr
            if (
                pair is None or pair is keep or not pair.live or pair.busy or
                pair.claimed_by is not None or pair.pool != keep.pool or
                pair.nodes not in spans or other.view != pair.nodes
            ):
                continue
            if any(
                end.epr is not pair or end.state not in (QubitState.ENTANGLED, QubitState.PURIF)
                for end in (pair.end_a, pair.end_b)
            ):
                continue
            if best is None or (pair.created_at, pair.epr_id) < (best.created_at, best.epr_id):
                best = pair
        return best

    def _try_start_round(self, qubit: Qubit):
        keep = qubit.epr
        node = qubit.owner_node
        sacrifice = self._select_sacrifice(qubit)
        if sacrifice is None:
            return
        keep.busy = sacrifice.busy = True
        local = sacrifice.end_at(node)
        if local.state is QubitState.ENTANGLED:
            local.transition(Trigger.PURIF_SOLICIT, self.now)
        local.transition(Trigger.START_ROUND, self.now)
        qubit.transition(Trigger.START_ROUND, self.now)
        flow = self.flow_for(keep.pool, keep.nodes)
        if flow is not None:
            self.metrics.flows[flow].purif_attempts += 1
        target, via = self._relay(node, keep.nodes)
        self.scheduler.send_classical(
            node, target, self.run_purification_round, node, keep, sacrifice, via=via
        )

    def run_purification_round(self, initiator: str, keep: EprPair, sacrifice: EprPair) -> Optional[bool]:
        """
        Responder side of a round: draw the outcome, update the kept pair,
        consume the sacrifice and answer the initiator

        In sync mode a request arriving outside T_int waits for the next
        internal window; None is returned for a deferred round.
        """
        now = self.now
        if keep.nodes not in (sacrifice.nodes, sacrifice.nodes[::-1]):
            raise IllegalTransition('epr{}'.format(keep.epr_id), 'purified with a pair of another span')
        responder = keep.nodes[-1] if keep.nodes[0] == initiator else keep.nodes[0]
        if not self._in_phase('int'):
            start, _ = self.timing.window(now, 'int')
            self.scheduler.schedule(
                start, responder, EventKind.CLASSICAL_MESSAGE, self.run_purification_round, initiator, keep, sacrifice
            )
            return None
        success = False
        fidelity = None
        if keep.live and sacrifice.live:
            p, fidelity = self.purify(keep.fidelity_at(now), sacrifice.fidelity_at(now))
            success = self.rngs.stream(responder).random() < p

        for pair in (keep, sacrifice):
            local = pair.end_at(responder)
            if local.epr is not pair:
                continue
            if local.state is QubitState.ENTANGLED:
                local.transition(Trigger.PURIF_SOLICIT, now)
            local.transition(Trigger.START_ROUND, now)
            if pair is sacrifice:
                self.link.release(local, Trigger.CONSUMED)
            elif success:
                local.transition(Trigger.ROUND_SUCCESS, now)
            else:
                self.link.release(local, Trigger.ROUND_FAILURE)

        if sacrifice.live:
            self.link.retire(sacrifice, 'purif_consumed')
        if keep.live:
            if success:
                keep.werner = WernerState.from_fidelity(fidelity)
                keep.werner_time = now
                keep.purif_rounds_done += 1
                flow = self.flow_for(keep.pool, keep.nodes)
                if flow is not None:
                    self.metrics.flows[flow].purif_successes += 1
            else:
                self.link.retire(keep, 'purif_consumed')

        target, via = self._relay(responder, keep.nodes)
        self.scheduler.send_classical(
            responder, target, self._on_round_result, initiator, keep, sacrifice, success, via=via
        )
        return success

    def _on_round_result(self, initiator: str, keep: EprPair, sacrifice: EprPair, success: bool):
        now = self.now
        local = sacrifice.end_at(initiator)
        if local.epr is sacrifice:
            self.link.release(local, Trigger.CONSUMED)
        local = keep.end_at(initiator)
        if local.epr is not keep:
            return
        if success and keep.live:
            local.transition(Trigger.ROUND_SUCCESS, now)
            keep.busy = False
            self.advance(local)
            self.advance(keep.other(local))
        else:
            self.link.release(local, Trigger.ROUND_FAILURE)

    # Delivery

    def _try_deliver(self, qubit: Qubit):
        pair = qubit.epr
        remote = pair.other(qubit)
        if remote.state is not QubitState.ELIGIBLE or self._role(remote) != DELIVER:
            return
        if self._in_phase('app'):
            self.deliver_to_app(qubit.owner_node, pair)
        elif pair.delivery_event is None:
            start, _ = self.timing.window(self.now, 'app')
            pair.delivery_event = self.scheduler.schedule(
                start, qubit.owner_node, EventKind.DELIVER_TO_APP, self._deliver_due, qubit.owner_node, pair
            )

    def _deliver_due(self, node: str, pair: EprPair):
        pair.delivery_event = None
        if pair.live and pair.end_a.epr is pair and pair.end_b.epr is pair:
            self.deliver_to_app(node, pair)

    def deliver_to_app(self, node: str, pair: EprPair):
        assert self._in_phase('app'), 'delivery outside the application phase'
        fidelity = pair.fidelity_at(self.now)
        flow = pair.pool
        if flow == STATISTICAL_POOL:
            flow = self._full_routes[flow][pair.nodes][0]
        self.metrics.flows[flow].record_delivery(fidelity)
        self.link.retire(pair, 'delivered')
        for qubit in (pair.end_a, pair.end_b):
            self.link.release(qubit, Trigger.CONSUMED)

    def _on_retired(self, pair: EprPair, reason: str):
        if reason == 'decohered':
            flow = self.flow_for(pair.pool, pair.nodes)
            if flow is not None:
                self.metrics.flows[flow].decohered += 1
