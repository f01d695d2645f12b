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
from qnsk.experiments import parse_value, run_sweep
from qnsk.metrics import emit_csv
from qnsk.util import colored, format_number


class SweepAction(ConsoleAction):
    def __init__(self, args):
        self.scenario = self.load(args.config)
        self.axis = args.axis
        self.values = [parse_value(v) for v in args.values]
        self.runs = args.runs
        self.seed = args.seed

    @staticmethod
    def register(parser: ArgumentParser):
        parser.add_argument('-c', '--config', required=True, help='Scenario file or bundled scenario name')
        parser.add_argument('-a', '--axis', required=True, help='Dotted field path, e.g. channels.B-C.qubits')
        parser.add_argument('--values', nargs='+', required=True, help='Axis values, parsed as JSON')
        parser.add_argument('-r', '--runs', type=int, help='Seeds per point (default: the scenario\'s)')
        parser.add_argument('-s', '--seed', type=int, help='First seed of every point')
        parser.add_argument('-w', '--workers', type=int, default=1, help='Processes running the seeds')

    def perform(self):
        table = run_sweep(self.scenario.document, self.axis, self.values, self.runs, self.seed, self.workers)
        with self.opened(self.out) as f:
            emit_csv(table, f)
        if self.out:
            for value, _ in table.points:
                mean, std = table.aggregate_stats(value)
                print('{} = {}: {} ± {} pairs/s'.format(
                    self.axis, colored(value), format_number(mean), format_number(std)
                ))
            print('Wrote', colored(self.out, Fore.GREEN))
        return 0
