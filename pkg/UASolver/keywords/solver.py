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
"""Keywords for solving the active problem.

Every solve stores its trajectory under the method name (ua, direct,
averaged, reference) so later keywords can compare them.
"""
from __future__ import annotations
from typing import Any, Optional, Union

from robot.api import logger
from robot.api.deco import keyword
from UASolver.internal import util
from UASolver.internal.config import SolverConfig
from UASolver.internal.config_defaults import CONFIG
from UASolver.internal.exceptions import UAConfigurationError, UAGateFailure
from UASolver.internal.integrator import RecoveredWindow, Trajectory, integrate, recover_window
from UASolver.internal.maps import DiagnosticsGrid, map_diagnostics
from UASolver.internal.reference import (averaged_method, direct_im2nd, error_at_final,
                                         hamiltonian_error_series, rk45_reference,
                                         validated_reference)
from UASolver.keywords import problems
from UASolver.keywords.problems import active_problem

TRAJECTORIES: dict[str, Trajectory] = {}

Number = Union[str, int, float]


def stored_trajectory(method: str) -> Trajectory:
    if method not in TRAJECTORIES:
        raise UAConfigurationError('No {} trajectory. Solved so far: {}'.format(
            method, ', '.join(TRAJECTORIES) or 'none'))
    return TRAJECTORIES[method]


def _x0(x0: Optional[Union[str, list[Any]]]) -> Any:
    return active_problem().x0 if x0 is None else util.parse_floats(x0)


def _store(method: str, traj: Trajectory) -> Trajectory:
    TRAJECTORIES[method] = traj
    logger.info('{} solve of {} finished at t={} ({} nodes, {:.2f} s)'.format(
        method, active_problem().name, traj.final_time, len(traj.times),
        traj.meta.get("wall_clock", 0.0)))
    return traj


@keyword(tags=["Solver"])
def solve_ua(dt: Number,
             t_final: Number,
             x0: Optional[Union[str, list[Any]]] = None,
             **overrides: Any) -> Trajectory:
    r"""Solve the active problem with the multiscale method.

    The slow equation is integrated with the integral midpoint scheme and
    the oscillatory solution is recovered at every node.

    Examples
    --------
    .. code-block:: robotframework

         UseProblem     hh3     0.001, 0.000001
         SolveUA        0.1     1
         SolveUA        0.1     1       quad_nodes=4    provider=numeric

    Parameters
    ----------
    dt : float
        Step of the slow equation. Does not depend on the scales.
    t_final : float
        Final time.
    x0 : str | list
        Initial state, problem default when not given.
    overrides
        SolverConfig fields for this run only (fp_tol, quad_nodes, ...).

    Related keywords
    ----------------
    \`SolveDirect\`, \`SolveReference\`, \`RecoverWindow\`
    """
    problem = active_problem()
    cfg = SolverConfig.from_config(float(dt), float(t_final), **overrides)
    traj = integrate(problem.decompose(cfg), problem.scales, cfg, _x0(x0),
                     invariant=problem.invariant)
    return _store("ua", traj)


@keyword(tags=["Solver"])
def solve_direct(dt: Number,
                 t_final: Number,
                 x0: Optional[Union[str, list[Any]]] = None,
                 quad_nodes: Optional[Number] = None,
                 name: str = "direct") -> Trajectory:
    r"""Solve the original stiff field with the integral midpoint scheme.

    A step that fails marks the trajectory failed and ends it early.

    Examples
    --------
    .. code-block:: robotframework

         SolveDirect    0.1         1
         SolveDirect    0.000005    1       quad_nodes=2    name=direct-fine

    Parameters
    ----------
    dt : float
        Time step.
    t_final : float
        Final time.
    x0 : str | list
        Initial state, problem default when not given.
    quad_nodes : int
        Gauss-Legendre nodes per step, QuadNodes when not given.
    name : str
        Name the trajectory is stored under.
    """
    problem = active_problem()
    cfg = SolverConfig.from_config(float(dt), float(t_final))
    nodes = None if quad_nodes is None else util.positive_int(quad_nodes)
    traj = direct_im2nd(problem.field, problem.scales, cfg, _x0(x0), quad_nodes=nodes,
                        invariant=problem.invariant)
    return _store(name, traj)


@keyword(tags=["Solver"])
def solve_averaged(dt: Number, t_final: Number,
                   x0: Optional[Union[str, list[Any]]] = None) -> Trajectory:
    r"""Solve y' = mean field of the active problem, without map corrections.

    Examples
    --------
    .. code-block:: robotframework

         SolveAveraged    0.1    1
    """
    problem = active_problem()
    cfg = SolverConfig.from_config(float(dt), float(t_final))
    traj = averaged_method(problem.decompose(cfg), cfg, _x0(x0), invariant=problem.invariant)
    return _store("averaged", traj)


@keyword(tags=["Solver"])
def solve_reference(t_final: Number,
                    step: Optional[Number] = None,
                    rtol: Optional[Number] = None,
                    x0: Optional[Union[str, list[Any]]] = None,
                    validate: Union[bool, str] = False) -> Trajectory:
    r"""Dormand-Prince reference solution of the active problem.

    With step the fifth order solution is propagated at that fixed step,
    which must resolve the finest period (see RefSamplesPerPeriod). With
    rtol the adaptive solver is used. validate=True reruns at half the
    step and stores the difference in the trajectory metadata as error_bar.

    Examples
    --------
    .. code-block:: robotframework

         SolveReference    1    step=0.00002
         SolveReference    1    step=0.00002    validate=True
         SolveReference    1    rtol=1e-10

    Parameters
    ----------
    t_final : float
        Final time.
    step : float
        Fixed step.
    rtol : float
        Relative tolerance of the adaptive solver.
    x0 : str | list
        Initial state, problem default when not given.
    validate : bool
        Pair the fixed step run with a half step run.
    """
    problem = active_problem()
    start = _x0(x0)
    if step is not None and util.par2bool(validate):
        traj, _ = validated_reference(problem.field, problem.scales, start, float(t_final),
                                      float(step), invariant=problem.invariant)
    else:
        traj = rk45_reference(problem.field, problem.scales, start, float(t_final),
                              step=None if step is None else float(step),
                              rtol=None if rtol is None else float(rtol),
                              invariant=problem.invariant)
    return _store("reference", traj)


@keyword(tags=("Solver", "Getters"))
def error_at_final_time(method: str = "ua", other: str = "reference") -> float:
    r"""Return the l2 distance of two stored trajectories at the final time of the first.

    Examples
    --------
    .. code-block:: robotframework

         ${ERR}    ErrorAtFinalTime                     # ua against reference
         ${ERR}    ErrorAtFinalTime    direct    ua
    """
    return error_at_final(stored_trajectory(method), stored_trajectory(other))


@keyword(tags=("Solver", "Getters"))
def get_final_state(method: str = "ua") -> list[float]:
    r"""Return the final state of a stored trajectory.

    Examples
    --------
    .. code-block:: robotframework

         ${X}    GetFinalState    ua
    """
    return [float(v) for v in stored_trajectory(method).final_state]


@keyword(tags=("Solver", "Getters"))
def get_trajectory_info(method: str = "ua", key: Optional[str] = None) -> Any:
    r"""Return metadata of a stored trajectory, or one entry of it.

    Entries include wall_clock, steps, slow_rhs_calls, iters_P, iters_D,
    max_outer, failed and failed_step depending on the method.

    Examples
    --------
    .. code-block:: robotframework

         ${MAX}     GetTrajectoryInfo    ua    max_outer
         ${META}    GetTrajectoryInfo    direct
    """
    meta = stored_trajectory(method).meta
    if key is None:
        return dict(meta)
    if key not in meta:
        raise UAConfigurationError('Trajectory {} has no {}. Available: {}'.format(
            method, key, ', '.join(meta)))
    return meta[key]


@keyword(tags=("Solver", "Verification"))
def verify_hamiltonian_drift(max_relative: Number, method: str = "ua") -> float:
    r"""Verify relative Hamiltonian error stays below max_relative at every node.

    Returns the largest relative error.

    Examples
    --------
    .. code-block:: robotframework

         SolveUA                   0.1     1
         VerifyHamiltonianDrift    1e-3
    """
    traj = stored_trajectory(method)
    worst = max(rel for _, _, rel in hamiltonian_error_series(traj))
    logger.info('Largest relative Hamiltonian error of {}: {:.3e}'.format(method, worst))
    if traj.failed or worst > float(max_relative):
        raise UAGateFailure('Relative Hamiltonian error of {} is {:.3e}, allowed {}{}'.format(
            method, worst, max_relative, ' (run failed)' if traj.failed else ''))
    return worst


@keyword(tags=("Solver", "Getters"))
def get_max_hamiltonian_error(method: str = "ua", relative: Union[bool, str] = True) -> float:
    r"""Return the largest Hamiltonian error of a stored trajectory.

    Examples
    --------
    .. code-block:: robotframework

         ${UA}        GetMaxHamiltonianError    ua
         ${DIRECT}    GetMaxHamiltonianError    direct    relative=False
    """
    series = hamiltonian_error_series(stored_trajectory(method))
    column = 2 if util.par2bool(relative) else 1
    return max(row[column] for row in series)


@keyword(tags=["Solver"])
def recover_solution_window(t_a: Number,
                            t_b: Number,
                            samples: Number = 200,
                            csv: Optional[str] = None) -> RecoveredWindow:
    r"""Recover the oscillatory solution on [t_a, t_b] from the stored ua trajectory.

    The slow solution is interpolated linearly between the coarse nodes and
    mapped to the fine solution at every sample, with the solver settings
    of the stored solve.

    Examples
    --------
    .. code-block:: robotframework

         SolveUA                  0.5    3
         RecoverSolutionWindow    0.5    0.501    samples=200    csv=window.csv
    """
    problem = active_problem()
    traj = stored_trajectory("ua")
    cfg = traj.config or SolverConfig.from_config(float(traj.meta["dt"]),
                                                  float(traj.meta["t_final"]))
    window = recover_window(problem.decompose(cfg), problem.scales, traj, float(t_a), float(t_b),
                            util.positive_int(samples), cfg)
    if csv:
        window.to_csv(csv)
        logger.info('Window written to {}'.format(csv))
    return window


@keyword(tags=["Solver"])
def get_map_diagnostics(y: Union[str, float, list[Any]] = 0.2,
                        resolution: Number = 16) -> DiagnosticsGrid:
    r"""Map stack quantities of the active problem on a grid of its two finest phases.

    Examples
    --------
    .. code-block:: robotframework

         ${GRID}    GetMapDiagnostics    0.2    resolution=16
    """
    problem = active_problem()
    values = util.parse_floats(y)
    state = values * problem.d if len(values) == 1 else values
    cfg = SolverConfig.from_config(1.0, 1.0)
    return map_diagnostics(problem.decompose(cfg), problem.scales, util.as_state(state),
                           util.positive_int(resolution), cfg)


@keyword(tags=["Solver"])
def write_trajectory(path: str, method: str = "ua") -> str:
    r"""Write a stored trajectory as CSV (t, y_i, x_i and the Hamiltonian when tracked).

    Examples
    --------
    .. code-block:: robotframework

         WriteTrajectory    ${OUTPUT_DIR}/ua.csv
    """
    return stored_trajectory(method).to_csv(path, invariant_name="hamiltonian")


@keyword(tags=["Solver"])
def log_solver_state() -> None:
    r"""Log the active problem, configuration and stored trajectories.

    Default keyword run when a library keyword fails.
    """
    problem = problems.ACTIVE_PROBLEM
    if problem is None:
        logger.info('No active problem')
    else:
        logger.info('Active problem {} with eps {}'.format(problem.name, problem.scales))
    logger.info('Configuration: {}'.format(CONFIG))
    for method, traj in TRAJECTORIES.items():
        logger.info('{} trajectory: {}'.format(
            method, {k: v for k, v in traj.meta.items() if k != "stats"}))
