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


class QnskException(Exception):
    exit_code = 1

    def __init__(self, entity, message=None):
        if message is None:
            entity, message = None, entity
        self.entity = entity
        super().__init__(message if entity is None else '{}: {}'.format(entity, message))


class ConfigError(QnskException):
    """Scenario or command line input that cannot be simulated"""
    pass


class SchemaViolation(ConfigError):
    pass


class AllocationExceeded(ConfigError):
    """
    raised when the qubits assigned to the channels of a node add up to
    more than the node's memory capacity
    """
    pass


class DanglingEndpoint(ConfigError):
    """raised when a channel names a node that does not exist"""
    pass


class UnknownEntity(ConfigError):
    pass


class UnreadableScenario(ConfigError):
    """raised when a scenario file cannot be read or is not valid JSON"""
    pass


class UnwritableOutput(ConfigError):
    pass


class InstallError(ConfigError):
    """
    raised when a path instruction cannot be installed, for instance when
    its multiplexing vectors oversubscribe a channel side
    """
    pass


class UnknownAxis(ConfigError):
    pass


class UnsupportedFeature(ConfigError):
    pass


class CoherenceTooShort(ConfigError):
    pass


class OracleError(QnskException):
    pass


class SimulationError(QnskException):
    exit_code = 2


class SchedulingError(SimulationError):
    pass


class ConnectivityError(SimulationError):
    pass


class IllegalTransition(SimulationError, AssertionError):
    """
    raised when a qubit is driven along an edge that is not in the
    lifecycle transition table; this is always a simulator bug
    """
    pass
