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
from __future__ import annotations
from dataclasses import dataclass, asdict, replace
from typing import Any, Optional

import copy
from UASolver.internal import util
from UASolver.internal.exceptions import UAValidationError


class Config:

    DROPPED_DELIMITER_CHARS: str = " _-"

    def __init__(self, config_defaults: dict[str, Any]) -> None:
        self._names: dict[str, str] = {}
        self._config_defaults = {}
        for k, v in config_defaults.items():
            _k = self._clean_string(k)
            self._names[_k] = k
            self._config_defaults[_k] = copy.deepcopy(v)
        self.config = copy.deepcopy(self._config_defaults)

    def is_value(self, par: str) -> bool:
        """ Return True if parameter exists. """
        return self._clean_string(par) in self.config

    def get_value(self, par: str) -> Optional[Any]:
        """ Return value for given parameter,
            or None if parameter doesn't exist. """
        config_value, _ = self.config.get(self._clean_string(par), (None, None))
        return config_value

    def get_all_values(self) -> dict[str, Any]:
        """
        Return all configuration values keyed with their display names.
        :return: configuration dict
        """
        return {self._names[k]: copy.deepcopy(v[0]) for k, v in self.config.items()}

    def set_value(self, par: str, value: Any) -> Any:
        """ Set value for given parameter. Value is passed through the adapter function
        defined in config_defaults before storage. Returns old value. """
        _par = self._clean_string(par)
        if not self.is_value(_par):
            raise UAValidationError("Parameter {} doesn't exist".format(par))
        old_val, adapter_func = self.config[_par]
        stored_value = adapter_func(value) if adapter_func else value
        self.config[_par] = (stored_value, adapter_func)
        return old_val

    def reset_value(self, par: Optional[str] = None) -> None:
        """ Reset value(s) to original. """
        if par:
            _par = self._clean_string(par)
            if _par not in self._config_defaults:
                raise UAValidationError("Parameter {} doesn't exist".format(par))
            self.config[_par] = copy.deepcopy(self._config_defaults[_par])
        else:
            self.config = copy.deepcopy(self._config_defaults)

    def __getitem__(self, par: str) -> Any:
        """ Allow accessing parameters in dictionary like syntax."""
        config_value, _ = self.config[self._clean_string(par)]
        return config_value

    def __str__(self) -> str:
        return "{}".format(self.get_all_values())

    @staticmethod
    def _clean_string(string_value: str) -> str:
        trans_table = str.maketrans(dict.fromkeys(Config.DROPPED_DELIMITER_CHARS))
        return string_value.lower().translate(trans_table)


@dataclass(frozen=True)
class SolverConfig:
    """Per-run solver settings.

    Values not given explicitly are snapshotted from the global
    configuration by ``from_config``; the object itself is immutable
    so it can be shared by parallel runs.
    """
    dt: float
    t_final: float
    fp_tol: float = 1e-14
    fp_max_iter: int = 100
    quad_nodes: int = 8
    fd_dx: float = 1e-3
    midpoint_tol: float = 1e-12
    midpoint_max_iter: int = 100
    provider: str = "auto"
    coarse_phases: str = "auto"
    validation_points: int = 20
    seed: int = 2020

    def __post_init__(self) -> None:
        for name in ("dt", "t_final", "fp_tol", "fd_dx", "midpoint_tol"):
            object.__setattr__(self, name, util.positive_float(getattr(self, name)))
        for name in ("fp_max_iter", "quad_nodes", "midpoint_max_iter", "validation_points"):
            object.__setattr__(self, name, util.positive_int(getattr(self, name)))
        object.__setattr__(self, "seed", util.non_negative_int(self.seed))
        object.__setattr__(self, "provider", util.provider_validation(self.provider))
        object.__setattr__(self, "coarse_phases", util.coarse_phase_validation(self.coarse_phases))
        if self.t_final < self.dt:
            raise UAValidationError('t_final ({}) must not be smaller than dt ({})'.format(
                self.t_final, self.dt))

    @classmethod
    def from_config(cls, dt: float, t_final: float, **overrides: Any) -> SolverConfig:
        # pylint: disable=import-outside-toplevel
        from UASolver.internal.config_defaults import CONFIG
        values = dict(fp_tol=CONFIG["FpTol"],
                      fp_max_iter=CONFIG["FpMaxIter"],
                      quad_nodes=CONFIG["QuadNodes"],
                      fd_dx=CONFIG["FdDx"],
                      midpoint_tol=CONFIG["MidpointTol"],
                      midpoint_max_iter=CONFIG["MidpointMaxIter"],
                      provider=CONFIG["Provider"],
                      coarse_phases=CONFIG["CoarsePhaseTerms"],
                      validation_points=CONFIG["ValidationPoints"],
                      seed=CONFIG["Seed"])
        values.update(overrides)
        return cls(dt=dt, t_final=t_final, **values)

    def replace(self, **changes: Any) -> SolverConfig:
        return replace(self, **changes)

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)
