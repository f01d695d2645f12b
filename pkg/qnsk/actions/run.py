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
from argparse import ArgumentParser
from contextlib import ExitStack

from colorama import Fore

from qnsk.console_action import ConsoleAction
from qnsk.metrics import emit_channel_csv, emit_csv, emit_occupancy_csv
from qnsk.simulation import Simulation
from qnsk.util import colored, format_number

LOG = logging.getLogger(__name__)


class RunAction(ConsoleAction):
    def __init__(self, args):
        self.scenario = self.load(args.config)
        self.seed = args.seed
        self.duration = args.duration
        self.channel_out = args.channel_out
        self.occupancy_out = args.occupancy_out
        if self.occupancy_out and not self.scenario.settings.occupancy_interval:
            LOG.warning('simulation.occupancy_interval is not set; the occupancy series will be empty')

    @staticmethod
    def register(parser: ArgumentParser):
        parser.add_argument('-c', '--config', required=True, help='Scenario file or bundled scenario name')
        parser.add_argument('-s', '--seed', type=int, help='Master seed (default: the scenario\'s)')
        parser.add_argument('-d', '--duration', type=float, help='Simulated seconds')
        parser.add_argument('-t', '--trace', help='File receiving one line per dispatched event')
        parser.add_argument('--channel-out', help='CSV file for per-channel counters')
        parser.add_argument('--occupancy-out', help='CSV file for the qubit state series')

    def perform(self):
        with ExitStack() as stack:
            trace = stack.enter_context(self.opened(self.trace)) if self.trace else None
            metrics = Simulation(self.scenario, self.seed, trace, self.duration).run()

        with self.opened(self.out) as f:
            emit_csv(metrics, f)
        if self.channel_out:
            with self.opened(self.channel_out) as f:
                emit_channel_csv(metrics, f)
        if self.occupancy_out:
            with self.opened(self.occupancy_out) as f:
                emit_occupancy_csv(metrics, f)

        if self.out:
            for flow_id, flow in sorted(metrics.flows.items()):
                print('{}: {} pairs/s, mean fidelity {}'.format(
                    colored(flow_id), format_number(metrics.rate(flow_id)),
                    format_number(flow.mean_fidelity)
                ))
            print('{} events in {:.2f} s'.format(metrics.events, metrics.wall_clock))
            print('Wrote', colored(self.out, Fore.GREEN))
        return 0
