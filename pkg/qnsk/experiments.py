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
Experiment harness: parameter sweeps, isolated-link characterisation,
random topologies and the scenario documents of the bundled use cases
"""
import copy
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from qnsk.exceptions import UnknownAxis, UnknownEntity
from qnsk.metrics import RunMetrics, SweepTable
from qnsk.oracle import OracleInput
from qnsk.scenario import SECTION_SCHEMAS, load_scenario
from qnsk.simulation import run_scenario
from qnsk.util import jain_index

LOG = logging.getLogger(__name__)

LIST_SECTIONS = ('nodes', 'channels', 'paths')
REQUEST_SHARE = 0.2


def parse_value(text: str):
    """Sweep values are JSON where they parse as JSON and strings otherwise"""
    try:
        return json.loads(text)
    except ValueError:
        return text


def _item_id(section: str, item: dict) -> str:
    if section == 'channels' and 'id' not in item:
        return '-'.join(item['nodes'])
    return item.get('id')


def _find_item(document: dict, section: str, key: str, path: str) -> dict:
    items = document.get(section, [])
    for item in items:
        if _item_id(section, item) == key:
            return item
    if key.isdigit() and int(key) < len(items):
        return items[int(key)]
    raise UnknownAxis(path, 'no {} entry {}'.format(section, key))


def set_axis(document: dict, path: str, value) -> dict:
    """
    Copy of a scenario document with one field replaced

    Args:
        path: dotted path; list entries are addressed by id (channels also
            by their default "<a>-<b>" id) or by index, for instance
            ``channels.B-C.qubits`` or ``paths.AK.allocations.E-F.E``
    """
    document = copy.deepcopy(document)
    parts = path.split('.')
    section = parts[0]
    if section not in SECTION_SCHEMAS:
        raise UnknownAxis(path, 'unknown section ' + section)
    if section in LIST_SECTIONS:
        if len(parts) < 3:
            raise UnknownAxis(path, 'list sections need an entry and a field')
        target = _find_item(document, section, parts[1], path)
        rest = parts[2:]
    else:
        if len(parts) < 2:
            raise UnknownAxis(path, 'no field given')
        target = document.setdefault(section, {})
        rest = parts[1:]

    if rest[0] not in SECTION_SCHEMAS[section]['properties']:
        raise UnknownAxis(path, '{} has no field {}'.format(section, rest[0]))
    for key in rest[:-1]:
        target = target.setdefault(key, {})
        if not isinstance(target, dict):
            raise UnknownAxis(path, '{} is not a mapping'.format(key))
    target[rest[-1]] = value
    return document


def _run_task(document: dict, seed: int) -> RunMetrics:
    return run_scenario(load_scenario(document), seed)


def run_sweep(document: dict, axis: str, values: Sequence, runs: Optional[int] = None,
              seed: Optional[int] = None, workers: int = 1) -> SweepTable:
    """
    Run every axis value over `runs` seeds and aggregate per point

    Seeds are base, base + 1, ... at every point, so a metric that does not
    depend on the axis is compared on identical random streams. Results are
    merged in submission order whatever the worker count.
    """
    documents = [set_axis(document, axis, value) for value in values]
    scenarios = [load_scenario(d) for d in documents]
    if not scenarios:
        return SweepTable(axis)
    settings = scenarios[0].settings
    runs = settings.runs if runs is None else runs
    base = settings.seed if seed is None else seed
    seeds = [base + i for i in range(runs)]

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [
                [executor.submit(_run_task, d, s) for s in seeds] for d in documents
            ]
            results = [[f.result() for f in point] for point in futures]
    else:
        results = [[run_scenario(scenario, s) for s in seeds] for scenario in scenarios]

    table = SweepTable(axis)
    for value, point in zip(values, results):
        LOG.info('%s=%s: %d runs', axis, value, len(point))
        table.add(value, point)
    return table


def fairness(runs: Sequence[RunMetrics], baselines: Optional[Mapping[str, float]] = None) -> float:
    """
    Jain index over the flows' mean delivery rates

    With baselines, each flow's rate is first divided by its baseline (the
    rate it reaches running alone), so flows of different lengths count as
    equally served when they keep the same share of what they could get.
    """
    if not runs:
        return 1.0
    flows = sorted(runs[0].flows)
    rates = [float(np.mean([run.rate(f) for run in runs])) for f in flows]
    if baselines is not None:
        missing = [f for f in flows if not baselines.get(f)]
        if missing:
            raise UnknownEntity(missing[0], 'no positive baseline rate for this flow')
        rates = [rate / baselines[f] for rate, f in zip(rates, flows)]
    return jain_index(rates)


def fit_capacities(document: dict) -> dict:
    """Set every node's capacity to the qubits its channels hold at it"""
    totals = {}  # type: Dict[str, int]
    for channel in document['channels']:
        qubits = channel.get('qubits', 1)
        counts = qubits if isinstance(qubits, list) else [qubits, qubits]
        for node, count in zip(channel['nodes'], counts):
            totals[node] = totals.get(node, 0) + count
    for node in document['nodes']:
        node['capacity'] = max(totals.get(node['id'], 0), 1)
    return document


def generate_random_topology(n_nodes: int, avg_degree: float = 2.5, capacity: int = 10,
                             seed: int = 0, sim_seconds: float = 3.0) -> dict:
    """
    Random connected network with a statistical SWAP-ASAP workload

    A random recursive tree guarantees connectivity; uniformly drawn extra
    edges then raise the mean degree to `avg_degree`. Every channel side
    holds `capacity` qubits and ceil(0.2 n) distinct source/destination
    pairs are requested.

    Returns:
        dict: scenario document
    """
    if n_nodes < 2:
        raise ValueError('A network needs at least two nodes, got {}'.format(n_nodes))
    rng = np.random.default_rng(seed)
    width = len(str(n_nodes - 1))
    names = ['n{:0{}d}'.format(i, width) for i in range(n_nodes)]

    graph = nx.Graph()
    graph.add_nodes_from(range(n_nodes))
    for i in range(1, n_nodes):
        graph.add_edge(int(rng.integers(0, i)), i)
    target = min(max(n_nodes - 1, round(avg_degree * n_nodes / 2)), n_nodes * (n_nodes - 1) // 2)
    candidates = list(nx.non_edges(graph))
    extra = target - graph.number_of_edges()
    if extra > 0:
        for k in sorted(rng.choice(len(candidates), size=extra, replace=False)):
            graph.add_edge(*candidates[k])
    if not nx.is_connected(graph):
        raise AssertionError('random backbone is not connected')

    document = {
        'nodes': [{'id': name, 'capacity': 1, 'coherence_time': 0.005} for name in names],
        'channels': [
            {
                'nodes': [names[a], names[b]], 'length': 30, 'architecture': 'SR-DualRail',
                'loss_db_per_km': 0.2, 'eta_d': 0.95, 'eta_s': 0.95, 'qubits': capacity,
            }
            for a, b in sorted(tuple(sorted(edge)) for edge in graph.edges)
        ],
        'paths': [],
        'simulation': {'duration': sim_seconds, 'seed': seed, 'runs': 1},
    }
    fit_capacities(document)

    requested = set()
    n_requests = math.ceil(REQUEST_SHARE * n_nodes)
    max_pairs = n_nodes * (n_nodes - 1)
    while len(requested) < min(n_requests, max_pairs):
        src, dst = (int(i) for i in rng.choice(n_nodes, size=2, replace=False))
        if (src, dst) in requested:
            continue
        requested.add((src, dst))
        document['paths'].append({
            'id': 'r{}'.format(len(document['paths'])), 'src': names[src], 'dst': names[dst],
            'swap_policy': 'asap', 'multiplexing': 'statistical',
        })
    LOG.debug('Random topology: %d nodes, %d edges, %d requests',
              n_nodes, graph.number_of_edges(), len(document['paths']))
    return document


@dataclass(frozen=True)
class LinkCharacteristics:
    attempt_rate: float
    success_prob: float
    ent_rate: float


def isolated_link_scenario(channel: dict, duration: float = 1.0, coherence_time: Optional[float] = None) -> dict:
    """Two nodes joined by `channel` and a one-hop path that consumes every pair"""
    channel = dict(channel, id='link')
    a, b = channel['nodes']
    document = {
        'nodes': [{'id': a, 'capacity': 1, 'end_node': True}, {'id': b, 'capacity': 1, 'end_node': True}],
        'channels': [channel],
        'paths': [{'id': 'link', 'route': [a, b]}],
        'simulation': {'duration': duration},
    }
    if coherence_time is not None:
        for node in document['nodes']:
            node['coherence_time'] = coherence_time
    return fit_capacities(document)


def characterize_link(channel: dict, runs: int = 10, seed: int = 0, duration: float = 1.0) -> LinkCharacteristics:
    """Attempt rate, per-attempt success probability and entanglement rate of one link"""
    scenario = load_scenario(isolated_link_scenario(channel, duration))
    results = [run_scenario(scenario, seed + i) for i in range(runs)]
    attempts = sum(r.channels['link'].attempts for r in results)
    successes = sum(r.channels['link'].successes for r in results)
    total = duration * runs
    return LinkCharacteristics(attempts / total, successes / attempts if attempts else math.nan, successes / total)


def path_oracle_input(document: dict, runs: int = 10, seed: int = 0, t_app: float = 0.0) -> OracleInput:
    """
    Oracle input for a three-node path, its links characterised in isolation

    The middle node supplies the swap probability and coherence time.
    """
    scenario = load_scenario(document)
    channels = list(document['channels'])
    if len(channels) != 2 or len(scenario.topology.nodes) != 3:
        raise ValueError('The oracle models exactly one swap between two links')
    links = [characterize_link(c, runs, seed) for c in channels]
    specs = [scenario.topology.channels[_item_id('channels', c)] for c in channels]
    middle = next(iter(set(specs[0].endpoints) & set(specs[1].endpoints)))
    node = scenario.topology.nodes[middle]
    return OracleInput(
        attempt_rates=(links[0].attempt_rate, links[1].attempt_rate),
        success_probs=(links[0].success_prob, links[1].success_prob),
        ent_rates=(links[0].ent_rate, links[1].ent_rate),
        swap_prob=node.swap_success_prob,
        coherence_time=node.coherence_time,
        lengths=(specs[0].length, specs[1].length),
        classical_speed=specs[0].classical_speed,
        t_app=t_app,
        seed=seed,
    )


VALIDATION_LINK = {'architecture': 'DiM-BK', 'alpha': 0.5, 'eta_b': 0.95}


def validation_link(length: float = 32, memory_pairs: int = 1) -> dict:
    channel = dict(VALIDATION_LINK, nodes=['A', 'B'], length=length, qubits=memory_pairs)
    return isolated_link_scenario(channel)


def validation_path(coherence_time: float = 0.1, swap_prob: float = 1.0) -> dict:
    """A-B-C over the 32 km and 18 km validation links, one memory pair each"""
    document = {
        'nodes': [
            {'id': 'A', 'capacity': 1, 'end_node': True, 'coherence_time': coherence_time},
            {'id': 'B', 'capacity': 2, 'swap_prob': swap_prob, 'coherence_time': coherence_time},
            {'id': 'C', 'capacity': 1, 'end_node': True, 'coherence_time': coherence_time},
        ],
        'channels': [
            dict(VALIDATION_LINK, nodes=['A', 'B'], length=32, qubits=1),
            dict(VALIDATION_LINK, nodes=['B', 'C'], length=18, qubits=1),
        ],
        'paths': [{'id': 'AC', 'route': ['A', 'B', 'C'], 'swap_policy': 'asap'}],
        'simulation': {'duration': 1.0},
    }
    return document


UC1_PROFILES = [(x, y) for x in range(1, 6) for y in range(1, 7 - x)]
UC1_COHERENCE_TIMES = (0.005, 0.01)


def use_case_1(profile: Tuple[int, int] = (3, 3), coherence_time: float = 0.01) -> dict:
    """
    Memory allocation at the center of a two-architecture path

    The left 30 km link is DiM-BK, the right one SiM-DualRail; the profile
    gives the qubits of each link, at both its ends.
    """
    left, right = profile
    return {
        'nodes': [
            {'id': 'A', 'capacity': 6, 'end_node': True, 'coherence_time': coherence_time},
            {'id': 'B', 'capacity': 6, 'coherence_time': coherence_time},
            {'id': 'C', 'capacity': 6, 'end_node': True, 'coherence_time': coherence_time},
        ],
        'channels': [
            {'nodes': ['A', 'B'], 'length': 30, 'architecture': 'DiM-BK', 'eta_b': 0.8, 'qubits': left},
            {'nodes': ['B', 'C'], 'length': 30, 'architecture': 'SiM-DualRail', 'eta_d': 0.9, 'qubits': right},
        ],
        'paths': [{'id': 'AC', 'route': ['A', 'B', 'C'], 'swap_policy': 'asap'}],
        'simulation': {'duration': 1.0},
    }


UC2_CHAIN = ('S', 'R1', 'R2', 'R3', 'R4', 'D')
UC2_LENGTHS = (32, 18, 35, 16, 24)
UC2_ALLOCATIONS = {'uniform': (3, 3, 3, 3, 3), 'skewed': (4, 2, 4, 2, 4)}
UC2_STRATEGIES = {
    'asap': 'asap',
    'baln': [['R1', 'R3'], 'R2', 'R4'],
    'baln2': [['R2', 'R4'], 'R3', 'R1'],
    'l2r': 'l2r',
    'r2l': 'r2l',
}
UC2_COHERENCE_TIMES = (0.005, 0.01, 0.02)


def use_case_2(allocation: Sequence[int] = UC2_ALLOCATIONS['uniform'], strategy: str = 'asap',
               coherence_time: float = 0.01) -> dict:
    """Swap order against memory allocation on the six-node chain"""
    nodes = []
    for node in UC2_CHAIN:
        entry = {'id': node, 'capacity': 6, 'coherence_time': coherence_time}
        if node in (UC2_CHAIN[0], UC2_CHAIN[-1]):
            entry['end_node'] = True
        nodes.append(entry)
    channels = [
        dict(VALIDATION_LINK, nodes=[a, b], length=length, qubits=qubits)
        for a, b, length, qubits in zip(UC2_CHAIN, UC2_CHAIN[1:], UC2_LENGTHS, allocation)
    ]
    return {
        'nodes': nodes,
        'channels': channels,
        'paths': [{'id': 'SD', 'route': list(UC2_CHAIN), 'swap_policy': copy.deepcopy(UC2_STRATEGIES[strategy])}],
        'simulation': {'duration': 1.0},
    }


UC3_ROUTES = {
    'AK': ['A', 'E', 'F', 'J', 'K'],
    'BL': ['B', 'E', 'F', 'J', 'L'],
    'CI': ['C', 'E', 'F', 'I'],
    'DH': ['D', 'E', 'F', 'H'],
    'GM': ['G', 'F', 'J', 'M'],
}
UC3_SCENARIOS = {
    1: ('AK', 'CI'),
    2: ('AK', 'BL'),
    3: ('AK', 'CI', 'DH'),
    4: ('AK', 'BL', 'CI', 'DH', 'GM'),
}
# per scenario: channel -> flow -> per-node qubits on the contested trunks
UC3_VECTORS = {
    1: {'E-F': {'AK': {'E': 16, 'F': 25}, 'CI': {'E': 16, 'F': 25}}},
    2: {
        'E-F': {'AK': {'E': 16, 'F': 25}, 'BL': {'E': 16, 'F': 25}},
        'F-J': {'AK': {'F': 25, 'J': 16}, 'BL': {'F': 25, 'J': 16}},
    },
    3: {'E-F': {'AK': {'E': 11, 'F': 17}, 'CI': {'E': 11, 'F': 17}, 'DH': {'E': 10, 'F': 16}}},
    4: {
        'E-F': {
            'AK': {'E': 8, 'F': 17}, 'BL': {'E': 8, 'F': 17},
            'CI': {'E': 8, 'F': 16}, 'DH': {'E': 8, 'F': 12},
        },
        'F-J': {'AK': {'F': 17, 'J': 11}, 'BL': {'F': 17, 'J': 11}, 'GM': {'F': 16, 'J': 10}},
    },
}
# (id, transmitter, receiver)
UC3_CHANNELS = (
    ('A-E', 'A', 'E'), ('B-E', 'B', 'E'), ('C-E', 'C', 'E'), ('D-E', 'D', 'E'),
    ('E-F', 'F', 'E'), ('F-G', 'F', 'G'), ('F-H', 'F', 'H'), ('F-I', 'F', 'I'),
    ('F-J', 'F', 'J'), ('J-K', 'J', 'K'), ('J-L', 'J', 'L'), ('J-M', 'J', 'M'),
)
UC3_TRANSMITTER_QUBITS = 50
UC3_RECEIVER_QUBITS = 32


def use_case_3(flows: Sequence[str], multiplexing: str = 'buffer_space', scenario: Optional[int] = None,
               idealized_coordination: bool = True) -> dict:
    """
    Thirteen-node multiplexing study

    Args:
        flows: flow ids from UC3_ROUTES
        multiplexing: 'buffer_space' or 'statistical'
        scenario: key of UC3_VECTORS whose multiplexing vectors apply in
            buffer-space mode
    """
    vectors = UC3_VECTORS.get(scenario, {}) if multiplexing == 'buffer_space' else {}
    channels = []
    for channel_id, tx, rx in UC3_CHANNELS:
        tx_qubits = UC3_TRANSMITTER_QUBITS
        if channel_id in vectors:
            tx_qubits = max(tx_qubits, sum(v[tx] for v in vectors[channel_id].values()))
        channels.append({
            'id': channel_id, 'nodes': [tx, rx], 'length': 30, 'architecture': 'SR-DualRail',
            'loss_db_per_km': 0.17, 'eta_d': 0.5, 'eta_s': 0.8, 'fidelity': 0.99,
            'qubits': [tx_qubits, UC3_RECEIVER_QUBITS],
        })
    ends = {node for route in UC3_ROUTES.values() for node in (route[0], route[-1])}
    nodes = sorted({node for _, tx, rx in UC3_CHANNELS for node in (tx, rx)})
    document = {
        'nodes': [
            dict({'id': node, 'capacity': 1, 'swap_prob': 0.5, 'coherence_time': 0.1},
                 **({'end_node': True} if node in ends else {}))
            for node in nodes
        ],
        'channels': channels,
        'paths': [],
        'simulation': {'duration': 1.0, 'idealized_coordination': idealized_coordination},
    }
    for flow in flows:
        path = {'id': flow, 'route': list(UC3_ROUTES[flow]), 'swap_policy': 'asap', 'multiplexing': multiplexing}
        allocations = {cid: per_flow[flow] for cid, per_flow in vectors.items() if flow in per_flow}
        if allocations:
            path['allocations'] = allocations
        document['paths'].append(path)
    return fit_capacities(document)


def uc3_baselines(flows: Sequence[str], multiplexing: str = 'buffer_space', runs: int = 10, seed: int = 0,
                  duration: Optional[float] = None) -> Dict[str, float]:
    """Mean rate of every flow running alone on the thirteen-node network"""
    baselines = {}
    for flow in flows:
        scenario = load_scenario(use_case_3((flow,), multiplexing))
        rates = [run_scenario(scenario, seed + i, duration=duration).rate(flow) for i in range(runs)]
        baselines[flow] = float(np.mean(rates))
    return baselines
