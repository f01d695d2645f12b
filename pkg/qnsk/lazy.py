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
from functools import update_wrapper


def unset(instance):
    raise NotImplementedError('{} attribute read before it was set'.format(
        type(instance).__name__
    ))


class Lazy:
    """
    Attribute computed on first read and memoised

    By default the value is stored per instance. With shared=True the value
    lives on the descriptor and is seen by every instance of every subclass.
    """
    initial_val = []

    def __init__(self, func, shared=False):
        update_wrapper(self, func)
        self.func = func
        self.shared = shared
        self.name = getattr(func, '__name__', None)
        self.return_val = self.initial_val

    def __set_name__(self, owner, name):
        self.name = name

    def __set__(self, instance, value):
        if self.shared:
            self.return_val = value
        else:
            instance.__dict__[self.name] = value

    def __get__(self, instance, owner):
        if instance is None:
            return self
        if self.shared:
            if self.return_val is self.initial_val:
                self.return_val = self.func(instance)
            return self.return_val
        try:
            return instance.__dict__[self.name]
        except KeyError:
            value = instance.__dict__[self.name] = self.func(instance)
            return value
