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
import logging
import sys
from argparse import ArgumentParser

from colorama import Fore, init as colorama_init

from qnsk.actions.oracle import OracleAction
from qnsk.actions.run import RunAction
from qnsk.actions.scale import ScaleAction
from qnsk.actions.sweep import SweepAction
from qnsk.exceptions import QnskException
from qnsk.global_context import GlobalContext
from qnsk.util import colored

LOG = logging.getLogger(__name__)

action_names = {
    RunAction: ['run', 'simulate'],
    SweepAction: ['sweep'],
    OracleAction: ['oracle', 'predict'],
    ScaleAction: ['scale'],
}


def main():
    parser = ArgumentParser(prog='qnsk', description='Quantum network entanglement distribution simulator')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true', help='Log debug messages')
    verbosity.add_argument('-q', '--quiet', action='store_true', help='Only log errors')

    subparsers = parser.add_subparsers(dest='action')
    subparsers.required = True
    action_to_cls = {}
    for cls, names in action_names.items():
        subparser = subparsers.add_parser(names[0], aliases=names[1:])
        subparser.add_argument('-o', '--out', help='CSV output file (default: stdout)')
        cls.register(subparser)
        action_to_cls.update({name: cls for name in names})

    args = parser.parse_args(sys.argv[1:])

    context = GlobalContext()
    context.verbosity = logging.DEBUG if args.verbose else logging.ERROR if args.quiet else logging.WARNING
    context.out = args.out
    context.trace = getattr(args, 'trace', None)
    context.workers = getattr(args, 'workers', 1)

    logging.basicConfig(level=context.verbosity, format='%(levelname)s %(name)s: %(message)s')
    colorama_init()

    try:
        return action_to_cls[args.action](args).perform()
    except QnskException as e:
        print(colored('{}: {}'.format(e.__class__.__name__, str(e)), Fore.RED), file=sys.stderr)
        return e.exit_code
    except AssertionError as e:
        LOG.debug('Invariant violated', exc_info=True)
        print(colored('{}: {}'.format(e.__class__.__name__, str(e)), Fore.RED), file=sys.stderr)
        return 2
    except (KeyboardInterrupt, EOFError):
        pass


if __name__ == '__main__':
    sys.exit(main())
