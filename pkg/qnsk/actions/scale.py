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
from argparse import ArgumentParser

from colorama import Fore

from qnsk.console_action import ConsoleAction
from qnsk.experiments import generate_random_topology
from qnsk.metrics import write_rows
from qnsk.scenario import load_scenario
from qnsk.simulation import run_scenario
from qnsk.util import colored

SCALE_COLUMNS = (
    'nodes', 'channels', 'capacity', 'requests', 'sim_seconds', 'events', 'delivered', 'wall_clock'
)


class ScaleAction(ConsoleAction):
    """Time one run of a random statistical-multiplexing workload"""

    def __init__(self, args):
        self.nodes = args.nodes
        self.capacity = args.capacity
        self.sim_seconds = args.sim_seconds
        self.document = generate_random_topology(
            args.nodes, args.degree, args.capacity, args.seed, args.sim_seconds
        )

    @staticmethod
    def register(parser: ArgumentParser):
        parser.add_argument('-n', '--nodes', type=int, required=True)
        parser.add_argument('-C', '--capacity', type=int, required=True, help='Qubits per channel side')
        parser.add_argument('-S', '--sim-seconds', type=float, required=True)
        parser.add_argument('-D', '--degree', type=float, default=2.5, help='Average node degree')
        parser.add_argument('-s', '--seed', type=int, default=0)

    def perform(self):
        metrics = run_scenario(load_scenario(self.document))
        delivered = sum(flow.delivered for flow in metrics.flows.values())
        print('{} nodes, {} requests: {} events, {} pairs delivered in {} s wall clock'.format(
            self.nodes, len(self.document['paths']), metrics.events, delivered,
            colored('{:.2f}'.format(metrics.wall_clock), Fore.YELLOW)
        ))
        if self.out:
            with self.opened(self.out) as f:
                write_rows(f, SCALE_COLUMNS, [(
                    self.nodes, len(self.document['channels']), self.capacity,
                    len(self.document['paths']), self.sim_seconds, metrics.events,
                    delivered, metrics.wall_clock
                )])
            print('Wrote', colored(self.out, Fore.GREEN))
        return 0
