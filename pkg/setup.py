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
from setuptools import setup

setup(
    name='qnsk',
    version='0.1.0',  # Also update in qnsk/__init__.py
    packages=['qnsk', 'qnsk.actions'],
    package_data={'qnsk': ['scenarios/*']},
    install_requires=['numpy', 'scipy', 'networkx', 'jsonschema', 'colorama'],
    extras_require={
        'test': ['pytest', 'hypothesis'],
    },
    python_requires='>=3.7',
    license='Apache-2.0',
    author='qnsk contributors',
    description='Quantum Network Simulation Kit',
    entry_points={
        'console_scripts': {
            'qnsk=qnsk.__main__:main'
        }
    }
)
