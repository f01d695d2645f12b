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
from qnsk.metrics import emit_pmf_csv
from qnsk.oracle import DEFAULT_SAMPLES, OracleInput, predict
from qnsk.topology import DEFAULT_CLASSICAL_SPEED
from qnsk.util import colored, format_number


class OracleAction(ConsoleAction):
    def __init__(self, args):
        self.oracle_input = OracleInput(
            attempt_rates=tuple(args.attempt_rate),
            success_probs=tuple(args.success_prob),
            ent_rates=tuple(args.ent_rate),
            swap_prob=args.swap_prob,
            coherence_time=args.coherence_time,
            lengths=tuple(args.lengths),
            classical_speed=args.classical_speed,
            t_app=args.t_app,
            samples=args.samples,
            seed=args.seed,
        )

    @staticmethod
    def register(parser: ArgumentParser):
        pair = dict(nargs=2, type=float, required=True)
        parser.add_argument('--attempt-rate', metavar=('A1', 'A2'), help='Attempts per second', **pair)
        parser.add_argument('--success-prob', metavar=('P1', 'P2'), help='Per-attempt success', **pair)
        parser.add_argument('--ent-rate', metavar=('R1', 'R2'), help='Link pairs per second', **pair)
        parser.add_argument('--lengths', metavar=('L1', 'L2'), help='Link lengths in km', **pair)
        parser.add_argument('--swap-prob', type=float, required=True)
        parser.add_argument('--coherence-time', type=float, required=True, help='Seconds')
        parser.add_argument('--classical-speed', type=float, default=DEFAULT_CLASSICAL_SPEED, help='km/s')
        parser.add_argument('--t-app', type=float, default=0.0, help='Seconds the application holds a pair')
        parser.add_argument('--samples', type=int, default=DEFAULT_SAMPLES, help='Capacity rounding samples')
        parser.add_argument('-s', '--seed', type=int, default=0)

    def perform(self):
        prediction = predict(self.oracle_input)
        print('Rate: {} pairs/s'.format(colored(format_number(prediction.rate))))
        print('Slot: {} s, generation window {} s, capacities {}'.format(
            format_number(prediction.t_slot), format_number(prediction.t_gen),
            ', '.join(map(format_number, prediction.expected_capacities))
        ))
        if self.out:
            with self.opened(self.out) as f:
                emit_pmf_csv(prediction.pmf, f)
            print('Wrote', colored(self.out, Fore.GREEN))
        return 0
