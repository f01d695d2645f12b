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
import logging
import time
from typing import Optional, TextIO

from qnsk.control_plane import Controller
from qnsk.engine import EventKind, RngStreams, Scheduler
from qnsk.exceptions import UnsupportedFeature
from qnsk.forwarding import Forwarder, pool_of
from qnsk.lifecycle import LinkLayer
from qnsk.link_models import success_probability
from qnsk.metrics import ChannelMetrics, FlowMetrics, RunMetrics
from qnsk.scenario import Scenario

LOG = logging.getLogger(__name__)


class OccupancySampler:
    """Records how many qubits sit in each state every `interval` seconds"""

    def __init__(self, scheduler: Scheduler, link: LinkLayer, metrics: RunMetrics, interval: float):
        self.scheduler = scheduler
        self.link = link
        self.metrics = metrics
        self.interval = interval
        self.taken = 0

    def start(self):
        self.scheduler.schedule(0.0, 'sampler', EventKind.SAMPLE, self._sample)

    def _sample(self):
        self.metrics.occupancy.append((self.scheduler.now, self.link.occupancy()))
        self.taken += 1
        self.scheduler.schedule(self.taken * self.interval, 'sampler', EventKind.SAMPLE, self._sample)


class Simulation:
    """
    One deterministic run of a scenario

    Args:
        scenario: validated scenario
        seed: master seed; defaults to the scenario's
        trace: optional sink for the dispatch trace
        duration: simulated seconds; defaults to the scenario's
    """

    def __init__(self, scenario: Scenario, seed: Optional[int] = None,
                 trace: Optional[TextIO] = None, duration: Optional[float] = None):
        if scenario.timing.t_r is not None:
            raise UnsupportedFeature('t_r', 'reactive mode unimplemented')
        settings = scenario.settings
        self.scenario = scenario
        self.seed = settings.seed if seed is None else seed
        self.duration = settings.duration if duration is None else duration
        self.scheduler = Scheduler(trace)
        self.rngs = RngStreams(self.seed)
        self.metrics = RunMetrics(self.seed, self.duration)

        topology = scenario.topology
        for channel_id in sorted(topology.channels):
            channel = topology.channels[channel_id]
            self.metrics.channels[channel_id] = ChannelMetrics(
                channel_id, channel.architecture.value, success_probability(channel)
            )
        for instruction in scenario.instructions:
            self.metrics.flows[instruction.request_id] = FlowMetrics(
                instruction.request_id, pool_of(instruction)
            )

        self.link = LinkLayer(topology, self.scheduler, self.rngs, scenario.timing, self.metrics)
        for plan in scenario.allocations:
            channel = topology.channels[plan.channel_id]
            self.link.add_pool(
                plan.channel_id, plan.pool, plan.count_at(channel.primary_node),
                plan.count_at(channel.secondary_node), plan.orientation
            )
        self.forwarder = Forwarder(
            topology, self.scheduler, self.rngs, scenario.timing, self.link, self.metrics, settings
        )
        self.controller = Controller(
            topology, self.scheduler, scenario.timing, self.forwarder, self.link,
            settings.controller_location, settings.controller_latency
        )
        self.controller.listeners.append(self._on_phase)
        self.sampler = None
        if settings.occupancy_interval:
            self.sampler = OccupancySampler(
                self.scheduler, self.link, self.metrics, settings.occupancy_interval
            )

    def _on_phase(self, phase: str):
        if phase == 'int':
            self.forwarder.wake()

    def run(self) -> RunMetrics:
        started = time.perf_counter()
        self.controller.install_paths(self.scenario.instructions)
        self.controller.advance_slot()
        if self.sampler is not None:
            self.sampler.start()
        self.scheduler.run_until(self.duration)
        self.link.finalize(self.duration)
        self.link.check_invariants()
        self.metrics.events = self.scheduler.dispatched
        self.metrics.wall_clock = time.perf_counter() - started
        LOG.info('Seed %d: %d events in %.3f s', self.seed, self.metrics.events, self.metrics.wall_clock)
        return self.metrics


def run_scenario(scenario: Scenario, seed: Optional[int] = None, trace: Optional[TextIO] = None,
                 duration: Optional[float] = None) -> RunMetrics:
    return Simulation(scenario, seed, trace, duration).run()
