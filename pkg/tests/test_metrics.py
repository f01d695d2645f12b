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
import io
import math

import pytest

from conftest import chain_document
from qnsk.exceptions import SimulationError
from qnsk.metrics import (
    CHANNEL_COLUMNS, FLOW_COLUMNS, LEDGER_COLUMNS, ChannelMetrics, FlowMetrics, PairLedger,
    RunMetrics, SweepTable, emit_channel_csv, emit_csv, emit_ledger_csv, emit_occupancy_csv,
    emit_pmf_csv
)
from qnsk.scenario import load_scenario
from qnsk.simulation import run_scenario
from qnsk.util import format_number, jain_index


def test_ledger_balance():
    ledger = PairLedger('P')
    for _ in range(4):
        ledger.create()
    ledger.retire('delivered')
    ledger.retire('swap_consumed')
    assert ledger.balanced
    assert ledger.live == 2
    ledger.check(2)
    with pytest.raises(SimulationError):
        ledger.check(3)
    with pytest.raises(ValueError):
        ledger.retire('lost')


def test_flow_and_channel_metrics():
    flow = FlowMetrics('P', 'P')
    assert math.isnan(flow.mean_fidelity)
    flow.record_delivery(0.9)
    flow.record_delivery(0.8)
    assert flow.mean_fidelity == pytest.approx(0.85)
    channel = ChannelMetrics('A-B', 'DiM-BK', 0.1)
    assert math.isnan(channel.measured_p)
    channel.attempts, channel.successes = 40, 4
    assert channel.measured_p == 0.1


def _metrics(delivered=(3, 5), fidelity=0.9):
    metrics = RunMetrics(seed=0, duration=2.0)
    for flow_id, count in zip(('Q', 'P'), delivered):
        flow = metrics.flows[flow_id] = FlowMetrics(flow_id, flow_id)
        for _ in range(count):
            flow.record_delivery(fidelity)
    metrics.channels['A-B'] = ChannelMetrics('A-B', 'SiM-DualRail', 0.5, 1, 20, 8)
    return metrics


def test_rates():
    metrics = _metrics()
    assert metrics.rate('P') == 2.5
    assert metrics.aggregate_rate == 4.0
    assert metrics.attempt_rate('A-B') == 10.0
    assert metrics.ent_rate('A-B') == 4.0


def test_flow_csv():
    out = io.StringIO()
    emit_csv(_metrics(), out)
    lines = out.getvalue().splitlines()
    assert lines[0] == ','.join(FLOW_COLUMNS)
    assert lines[1] == 'P,P,5,2.5,0.9,0,0,0,0,0'
    assert lines[2].startswith('Q,Q,3,1.5,0.9,')

    out = io.StringIO()
    emit_csv(_metrics((0, 0)), out)
    assert out.getvalue().splitlines()[1] == 'P,P,0,0,nan,0,0,0,0,0'


def test_channel_and_ledger_csv():
    metrics = _metrics()
    out = io.StringIO()
    emit_channel_csv(metrics, out)
    assert out.getvalue().splitlines() == [
        ','.join(CHANNEL_COLUMNS), 'A-B,SiM-DualRail,1,20,8,0.4,0.5,10,4'
    ]
    metrics.ledgers['P'] = PairLedger('P', created=2, delivered=1, live=1)
    out = io.StringIO()
    emit_ledger_csv(metrics, out)
    assert out.getvalue().splitlines() == [','.join(LEDGER_COLUMNS), 'P,2,1,0,0,0,0,1']


def test_occupancy_and_pmf_csv():
    metrics = RunMetrics(0, 1.0)
    metrics.occupancy = [(0.0, {'RAW': 4, 'ENTANGLED': 0}), (0.5, {'RAW': 2, 'ENTANGLED': 2})]
    out = io.StringIO()
    emit_occupancy_csv(metrics, out)
    assert out.getvalue() == 'time,ENTANGLED,RAW\n0,0,4\n0.5,2,2\n'

    out = io.StringIO()
    emit_pmf_csv([0.25, 0.75], out)
    assert out.getvalue() == 'pairs,probability\n0,0.25\n1,0.75\n'


def test_unknown_table_type():
    with pytest.raises(TypeError):
        emit_csv(object(), io.StringIO())


def test_number_format():
    assert format_number(True) == '1'
    assert format_number(3) == '3'
    assert format_number(0.1 + 0.2) == '0.3'
    assert format_number(math.nan) == 'nan'
    assert format_number('x') == 'x'


def test_sweep_statistics():
    table = SweepTable('channels.A-B.qubits')
    table.add(1, [_metrics((3, 5)), _metrics((3, 5))])
    table.add(2, [_metrics((2, 4)), _metrics((4, 6))])
    assert table.flow_stats(1, 'P', 'rate') == (2.5, 0.0)
    mean, std = table.flow_stats(2, 'P', 'rate')
    assert (mean, std) == (pytest.approx(2.5), pytest.approx(0.5))
    assert table.aggregate_stats(2) == (pytest.approx(4.0), pytest.approx(1.0))
    assert table.channel_stats(1, 'A-B', 'measured_p') == (pytest.approx(0.4), 0.0)
    with pytest.raises(KeyError):
        table.runs_at(3)

    out = io.StringIO()
    emit_csv(table, out)
    lines = out.getvalue().splitlines()
    assert lines[0].split(',')[:5] == ['value', 'entity', 'id', 'rate_mean', 'rate_std']
    assert [line.split(',')[:3] for line in lines[1:]] == [
        ['1', 'flow', 'P'], ['1', 'flow', 'Q'], ['1', 'channel', 'A-B'],
        ['2', 'flow', 'P'], ['2', 'flow', 'Q'], ['2', 'channel', 'A-B'],
    ]


def test_fidelity_statistics_skip_empty_runs():
    table = SweepTable('x')
    table.add(0, [_metrics((0, 0)), _metrics((0, 0))])
    mean, std = table.flow_stats(0, 'P', 'mean_fidelity')
    assert math.isnan(mean) and math.isnan(std)
    table.add(1, [_metrics((0, 0)), _metrics((3, 5), fidelity=0.8)])
    assert table.flow_stats(1, 'P', 'mean_fidelity') == (pytest.approx(0.8), 0.0)


def test_jain_index():
    assert jain_index([1, 1, 1]) == 1.0
    assert jain_index([1, 0]) == 0.5
    assert jain_index([]) == 1.0
    assert jain_index([0, 0]) == 1.0


def test_output_is_reproducible():
    scenario = load_scenario(chain_document(coherence_time=0.01))
    outputs = []
    for _ in range(2):
        out = io.StringIO()
        metrics = run_scenario(scenario, seed=9)
        emit_csv(metrics, out)
        emit_channel_csv(metrics, out)
        emit_ledger_csv(metrics, out)
        outputs.append(out.getvalue())
    assert outputs[0] == outputs[1]
    assert run_scenario(scenario, seed=9).events == run_scenario(scenario, seed=9).events
