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
"""Uniformly accurate solver for ODEs with several fast time scales.

Robot Framework library; see ``python -m UASolver --help`` for the
command line interface.
"""
from typing import Callable, Any
import traceback
import types

from functools import wraps
from UASolver.keywords import config, problems, solver, experiments
from robot.api import logger
from robot.libraries.BuiltIn import BuiltIn, RobotNotRunningError


class UASolver:

    ROBOT_LIBRARY_SCOPE = 'Global'

    def __init__(self, run_on_failure_keyword: str = "Log Solver State") -> None:
        """Adds all the keywords to the instance."""
        self._run_on_failure_keyword = run_on_failure_keyword
        for module in (config, problems, solver, experiments):
            for name in dir(module):
                if not name.startswith("_"):
                    attr = getattr(module, name)
                    if isinstance(attr, types.FunctionType) and hasattr(attr, "robot_name"):
                        setattr(self, name, self._run_on_failure_decorator(attr))

    def _run_on_failure_decorator(self, keyword_method: Callable[..., Any]) -> Callable[..., Any]:
        """Wraps a keyword so a failure first logs the solver state and then re-raises."""

        @wraps(keyword_method)
        def inner(*args: Any, **kwargs: Any) -> Any:
            logger.debug('args: {}, kwargs: {}'.format(args, kwargs))
            try:
                return keyword_method(*args, **kwargs)
            except Exception:  # pylint: disable=W0703
                logger.debug(traceback.format_exc())
                if not self._is_run_on_failure_keyword(keyword_method):
                    self._run_on_failure()
                raise

        return inner

    def _run_on_failure(self) -> None:
        try:
            BuiltIn().run_keyword(self._run_on_failure_keyword)
        except RobotNotRunningError:
            method = getattr(self, self._run_on_failure_keyword.replace(" ", "_").lower(), None)
            if method is not None:
                method()

    def _is_run_on_failure_keyword(self, method: Callable[..., Any]) -> bool:
        """True for the state logging keyword itself, which must not recurse."""
        return self._run_on_failure_keyword.replace(" ", "_").lower() == method.__name__


# pylint: disable=wrong-import-position
from ._version import get_versions  # noqa: E402

__version__ = get_versions()['version']
del get_versions
