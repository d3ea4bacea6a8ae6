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
"""
Wall clock measurements for solver runs.

Meas object is either enabled or disabled. When disabled, start/stop
are no-ops and ``stop`` returns None, so calls can stay in production
code. Timers nest: ``stop`` always pops the latest started timer.

Usage:
from UASolver.internal.meas import MEAS
MEAS.start("ua hh3")
# solve
elapsed = MEAS.stop()

with MEAS.measure("reference") as timer:
    ...
timer.elapsed
"""
from __future__ import annotations
from contextlib import contextmanager
from typing import Iterator, Optional

import timeit
from robot.api import logger


class Timer:

    def __init__(self, comment: str) -> None:
        self.comment = comment
        self.elapsed: float = 0.0


class Meas:

    def __init__(self, enabled: bool = True) -> None:
        self.enabled = enabled
        self.timers: list[tuple[float, str]] = []

    def start(self, comment: str = '') -> None:
        """Start a timer. Can be called multiple times without
           a stop in between."""
        if self.enabled:
            self.timers.append((timeit.default_timer(), comment))

    def stop(self, log: bool = True) -> Optional[float]:
        """Returns elapsed time of the last started timer."""
        if not self.enabled:
            return None
        start_t, comment = self.timers.pop()
        t = timeit.default_timer() - start_t
        if log:
            self.log(t, comment)
        return t

    @contextmanager
    def measure(self, comment: str = '', log: bool = True) -> Iterator[Timer]:
        timer = Timer(comment)
        start_t = timeit.default_timer()
        try:
            yield timer
        finally:
            timer.elapsed = timeit.default_timer() - start_t
            if log and self.enabled:
                self.log(timer.elapsed, comment)

    @staticmethod
    def log(t: float, comment: str) -> None:
        logger.debug("Elapsed time {:.4f} s \t{}".format(t, comment))


# Set to False to silence timing measurements
MEAS: Meas = Meas(True)
