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
Heralded entanglement generation on one channel

Closed-form per-round heralding probabilities and round durations for the
four link architectures, geometric sampling of the attempt count, and the
Werner-parameter noise model used by every later stage.
"""
import math
from dataclasses import dataclass

import numpy as np

from qnsk.topology import Architecture, ChannelSpec


@dataclass(frozen=True)
class LinkPhysics:
    architecture: Architecture
    p_success: float
    round_duration: float
    eta_ab: float  # BSM-side transmissivity η_b·e^{-L/2L₀}
    eta_as: float  # source-side transmissivity η_d·e^{-L/2L₀}

    @property
    def attempt_rate(self) -> float:
        return 1 / self.round_duration

    @property
    def expected_rate(self) -> float:
        """Pairs per second for one continuously reserved qubit pair"""
        return self.p_success / self.round_duration


def _transmissivities(channel: ChannelSpec):
    half = math.exp(-channel.length / (2 * channel.attenuation_length))
    return channel.eta_b * half, channel.eta_d * half


def success_probability(channel: ChannelSpec) -> float:
    eta_ab, eta_as = _transmissivities(channel)
    arch = channel.architecture
    if arch is Architecture.DIM_BK:
        p = 2 * channel.alpha ** 2 * eta_ab ** 2
    elif arch is Architecture.DIM_DUAL_RAIL:
        p = 2 * channel.alpha * (1 - channel.alpha) * eta_ab ** 2
    elif arch is Architecture.SR_DUAL_RAIL:
        p = channel.eta_d * math.exp(-channel.length / channel.attenuation_length)
    elif arch is Architecture.SIM_DUAL_RAIL:
        p = eta_as ** 2
    else:
        raise ValueError('Unknown architecture: {}'.format(arch))
    return p * channel.eta_s * channel.eta_r


def round_duration(channel: ChannelSpec) -> float:
    """
    Time from the start of one attempt until the next may begin

    τ_l is the full one-way fiber delay L/c₀ for every architecture and τ₀
    the channel's local operation latency.
    """
    tau_l = channel.propagation_delay
    tau_0 = channel.local_op_latency
    arch = channel.architecture
    if arch is Architecture.DIM_BK:
        duration = 2 * (tau_l + tau_0)
    elif arch is Architecture.SR_DUAL_RAIL:
        duration = 2 * tau_l + tau_0
    else:
        duration = tau_l + tau_0
    if duration <= 0:
        raise ValueError('Channel {} has a zero round duration'.format(channel.channel_id))
    return duration


def link_physics(channel: ChannelSpec) -> LinkPhysics:
    eta_ab, eta_as = _transmissivities(channel)
    return LinkPhysics(
        architecture=channel.architecture,
        p_success=success_probability(channel),
        round_duration=round_duration(channel),
        eta_ab=eta_ab,
        eta_as=eta_as,
    )


def sample_rounds_to_success(p: float, rng: np.random.Generator) -> int:
    """Index of the first successful round, k >= 1"""
    if not 0 < p <= 1:
        raise ValueError('Success probability must lie in (0, 1], got {}'.format(p))
    if p == 1:
        return 1
    return int(rng.geometric(p))


@dataclass(frozen=True)
class WernerState:
    w: float

    def __post_init__(self):
        if not 0 <= self.w <= 1:
            raise ValueError('Werner parameter outside [0, 1]: {}'.format(self.w))

    @property
    def fidelity(self) -> float:
        return (3 * self.w + 1) / 4

    @classmethod
    def from_fidelity(cls, fidelity: float) -> 'WernerState':
        return cls(min(1.0, max(0.0, (4 * fidelity - 1) / 3)))


def initial_werner(channel: ChannelSpec) -> WernerState:
    f0 = channel.base_fidelity
    if not 0.25 < f0 <= 1:
        raise ValueError('Base fidelity must lie in (0.25, 1], got {}'.format(f0))
    return WernerState.from_fidelity(f0)


def decayed_werner(w0: float, dt: float, coherence_time: float) -> float:
    if dt < 0:
        raise ValueError('Negative storage time: {}'.format(dt))
    if coherence_time <= 0:
        raise ValueError('Coherence time must be positive, got {}'.format(coherence_time))
    if math.isinf(coherence_time):
        return w0
    return w0 * math.exp(-dt / coherence_time)
