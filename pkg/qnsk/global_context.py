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
from typing import Optional

from qnsk.lazy import Lazy, unset


class GlobalContext:
    """Settings of one command line invocation, shared by every action"""
    out = Lazy(lambda s: None, shared=True)  # type: Optional[str]
    trace = Lazy(lambda s: None, shared=True)  # type: Optional[str]
    workers = Lazy(lambda s: 1, shared=True)  # type: int
    verbosity = Lazy(unset, shared=True)  # type: int
