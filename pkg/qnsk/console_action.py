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
import sys
from abc import ABCMeta, abstractmethod
from argparse import ArgumentParser
from contextlib import contextmanager
from os.path import isfile

from qnsk.exceptions import UnwritableOutput
from qnsk.global_context import GlobalContext
from qnsk.scenario import Scenario, load_scenario_file
from qnsk.util import scenario_path


class ConsoleAction(GlobalContext, metaclass=ABCMeta):
    @staticmethod
    @abstractmethod
    def register(parser: ArgumentParser):
        pass

    @abstractmethod
    def perform(self):
        pass

    @staticmethod
    def load(config: str) -> Scenario:
        """Load a scenario file, or a bundled scenario given its name"""
        return load_scenario_file(config if isfile(config) else scenario_path(config))

    @staticmethod
    @contextmanager
    def opened(path, mode='w'):
        """File at `path`, or stdout when no path is given"""
        if path is None or path == '-':
            yield sys.stdout
        else:
            try:
                f = open(path, mode, newline='')
            except OSError as e:
                raise UnwritableOutput(path, e.strerror or str(e)) from e
            with f:
                yield f
