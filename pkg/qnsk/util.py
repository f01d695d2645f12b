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
import json
import zlib
from glob import glob
from os.path import join, dirname, basename, splitext
from typing import Iterable

import numpy as np
from colorama import Fore, Style

from qnsk.exceptions import UnknownEntity, UnreadableScenario


def stable_hash(text: str) -> int:
    """Process-independent 32 bit hash, unlike the builtin hash() of a str"""
    return zlib.crc32(str(text).encode('utf-8'))


def format_number(value) -> str:
    """Fixed textual form of a number so written tables are byte-stable"""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return '{:.10g}'.format(float(value))
    return str(value)


def colored(text, color=Fore.BLUE) -> str:
    return '{}{}{}'.format(color + Style.BRIGHT, text, Style.RESET_ALL)


def jain_index(values: Iterable[float]) -> float:
    """(Σx)² / (n·Σx²); 1.0 means a perfectly even share"""
    x = np.asarray(list(values), dtype=float)
    if len(x) == 0 or not np.any(x):
        return 1.0
    return float(x.sum() ** 2 / (len(x) * np.square(x).sum()))


def read_json(path):
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise UnreadableScenario(path, 'invalid JSON at line {} column {}: {}'.format(
            e.lineno, e.colno, e.msg
        )) from e
    except OSError as e:
        raise UnreadableScenario(path, e.strerror or str(e)) from e


def get_scenarios():
    scenarios = glob(join(dirname(__file__), 'scenarios', '*.json'))
    scenarios.sort()
    return scenarios


def scenario_path(name: str) -> str:
    """Path of a bundled scenario given its file stem, e.g. 'use_case_1'"""
    for path in get_scenarios():
        if splitext(basename(path))[0] == name:
            return path
    raise UnknownEntity(name, 'neither a scenario file nor a bundled scenario')
