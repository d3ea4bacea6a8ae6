# -*- coding: utf-8 -*-
# --------------------------
# Copyright © 2022 -            Qentinel Group.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ---------------------------
"""Keywords for benchmark problems.

A problem is selected with ``UseProblem`` and stays active for the
solver keywords until another one is selected.
"""
from __future__ import annotations
from typing import Any, Optional, Union

from robot.api import logger
from robot.api.deco import keyword
from UASolver.internal import util
from UASolver.internal.exceptions import UAConfigurationError, UAValidationError
from UASolver.internal.problems import (PROBLEMS, BenchmarkProblem, HamiltonianProblem,
                                        get_problem, hamiltonian_value)

ACTIVE_PROBLEM: Optional[BenchmarkProblem] = None


def active_problem() -> BenchmarkProblem:
    if ACTIVE_PROBLEM is None:
        raise UAConfigurationError('No active problem. Select one with UseProblem')
    return ACTIVE_PROBLEM


@keyword(tags=["Problems"])
def use_problem(name: str, eps: Optional[Union[str, list[Any]]] = None) -> str:
    r"""Select benchmark problem for all solver keywords.

    Examples
    --------
    .. code-block:: robotframework

         UseProblem     hh3                         # default scales (0.1, 0.01)
         UseProblem     hh3     0.001, 0.000001
         UseProblem     hh4     ${EPS}              # list of three scales

    Parameters
    ----------
    name : str
        Registered problem: hh3, hh4, expsin or linear-decay.
    eps : str | list
        Scales, largest first. Comma separated string or list.
        Problem defaults when not given.

    Related keywords
    ----------------
    \`ListProblems\`, \`SolveUA\`
    """
    global ACTIVE_PROBLEM  # pylint:disable=global-statement
    ACTIVE_PROBLEM = get_problem(name, None if eps is None else util.parse_floats(eps))
    logger.info('Using problem {} with eps {}'.format(ACTIVE_PROBLEM.name,
                                                     ACTIVE_PROBLEM.scales))
    return ACTIVE_PROBLEM.name


@keyword(tags=("Problems", "Getters"))
def list_problems() -> list[str]:
    r"""Return names of the registered problems and log their descriptions.

    Examples
    --------
    .. code-block:: robotframework

         ${NAMES}    ListProblems
    """
    for entry in PROBLEMS.values():
        logger.info('{}: {} (default eps {})'.format(entry.name, entry.description,
                                                     entry.default_eps))
    return list(PROBLEMS)


@keyword(tags=("Problems", "Getters"))
def get_finest_period() -> float:
    r"""Return the shortest period of the active problem's phases.

    Examples
    --------
    .. code-block:: robotframework

         UseProblem     hh4     0.001, 0.00011, 0.000003
         ${PERIOD}      GetFinestPeriod     # about 1.885e-5
    """
    return active_problem().scales.finest_period


@keyword(tags=("Problems", "Getters"))
def get_hamiltonian(w: Union[str, list[Any]], t: Union[str, float] = 0.0) -> float:
    r"""Return the Hamiltonian of the active problem at rotating-frame state w and time t.

    Examples
    --------
    .. code-block:: robotframework

         UseProblem     hh3
         ${H}           GetHamiltonian    0.12, 0.12, 0.12, 0.12, 0.12, 0.12

    Parameters
    ----------
    w : str | list
        State in rotating-frame variables.
    t : float
        Time, default 0.
    """
    problem = active_problem()
    if not isinstance(problem, HamiltonianProblem):
        raise UAValidationError('Problem {} has no Hamiltonian'.format(problem.name))
    return hamiltonian_value(problem, util.as_state(util.parse_floats(w)), float(t))
