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
"""Keywords for experiment sweeps defined by presets or JSON configs."""
from __future__ import annotations
from typing import Optional, Union

from robot.api import logger
from robot.api.deco import keyword
from UASolver.internal import util
from UASolver.internal.exceptions import UAConfigurationError
from UASolver.internal.experiment import SummaryReport, run_experiment
from UASolver.internal.presets import list_presets, load_spec

LAST_REPORT: Optional[SummaryReport] = None


def _report(report: Optional[SummaryReport]) -> SummaryReport:
    report = report or LAST_REPORT
    if report is None:
        raise UAConfigurationError('No experiment has been run')
    return report


@keyword(tags=["Experiments"])
def run_experiment_preset(preset: Optional[str] = None,
                          config: Optional[str] = None,
                          out_dir: Optional[str] = None,
                          workers: Optional[Union[int, str]] = None,
                          fail_on_gate: Union[bool, str] = True) -> SummaryReport:
    r"""Run an experiment from a shipped preset or a JSON config file.

    Gate failures fail the keyword unless fail_on_gate=False; the report
    is returned and kept for ``VerifyGates`` and ``GetReportValue`` either way.

    Examples
    --------
    .. code-block:: robotframework

         RunExperimentPreset    hh3-default
         RunExperimentPreset    config=${CURDIR}/my_sweep.json    out_dir=${OUTPUT_DIR}
         ${REPORT}              RunExperimentPreset    hh4-default    fail_on_gate=False

    Parameters
    ----------
    preset : str
        Name of a shipped preset, see ``ListExperimentPresets``.
    config : str
        Path of a JSON experiment config.
    out_dir : str
        Directory of CSV and summary files; the config's output when not given.
    workers : int
        Worker processes, Workers config when not given.
    fail_on_gate : bool
        Fail when any gate fails.

    Related keywords
    ----------------
    \`GetReportValue\`, \`ListExperimentPresets\`, \`VerifyGates\`
    """
    global LAST_REPORT  # pylint:disable=global-statement
    spec = load_spec(config=config, preset=preset)
    LAST_REPORT = run_experiment(spec, out_dir, None if workers is None else
                                 util.positive_int(workers))
    if util.par2bool(fail_on_gate):
        LAST_REPORT.raise_on_failure()
    return LAST_REPORT


@keyword(tags=("Experiments", "Verification"))
def verify_gates(report: Optional[SummaryReport] = None) -> None:
    r"""Verify every gate of the last (or given) experiment report passed.

    Examples
    --------
    .. code-block:: robotframework

         RunExperimentPreset    hh4-default    fail_on_gate=False
         VerifyGates
    """
    report = _report(report)
    for name, ok in report.verdicts.items():
        logger.info('{}: {} ({})'.format(name, 'pass' if ok else 'FAIL',
                                         report.metrics.get(name)))
    report.raise_on_failure()


@keyword(tags=("Experiments", "Getters"))
def get_report_value(name: str, report: Optional[SummaryReport] = None) -> float:
    r"""Return a metric of the last (or given) experiment report.

    Examples
    --------
    .. code-block:: robotframework

         ${SLOPE}    GetReportValue    slope[0.1,0.01]
         ${SPEED}    GetReportValue    speedup
    """
    report = _report(report)
    if name not in report.metrics:
        raise UAConfigurationError('Report {} has no metric {}. Available: {}'.format(
            report.name, name, ', '.join(sorted(report.metrics))))
    return report.metrics[name]


@keyword(tags=("Experiments", "Getters"))
def list_experiment_presets() -> list[str]:
    r"""Return names of the shipped experiment presets.

    Examples
    --------
    .. code-block:: robotframework

         ${PRESETS}    ListExperimentPresets
    """
    return list_presets()
