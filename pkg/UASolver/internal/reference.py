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
"""Baselines for the multiscale integrator.

* ``direct_im2nd``: the same integral midpoint scheme applied to the
  original stiff field.
* ``rk45_reference``: Dormand-Prince 5(4), fixed step (fifth order
  propagation) or adaptive through scipy.
* ``averaged_method``: midpoint integration of the mean field only.
"""
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import math
import numpy as np
from robot.api import logger
from scipy.integrate import solve_ivp
from UASolver.internal import quadrature, util
from UASolver.internal.config import SolverConfig
from UASolver.internal.config_defaults import CONFIG
from UASolver.internal.decomposition import FieldDecomposition, MultiscaleField
from UASolver.internal.exceptions import (UAConfigurationError, UAMidpointSolveError,
                                          UAEvaluationError, UARangeError, UAValidationError)
from UASolver.internal.integrator import (Invariant, Trajectory, check_covered,
                                          implicit_midpoint_step, time_grid)
from UASolver.internal.meas import MEAS
from UASolver.internal.scales import ScaleVector

# Dormand-Prince tableau, rows of a and fifth order weights b
DP_C: tuple[float, ...] = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
DP_A: tuple[tuple[float, ...], ...] = (
    (1 / 5, ),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
DP_B: tuple[float, ...] = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)

MAX_STORED_POINTS: int = 20000


@dataclass
class ErrorReport:
    problem: str
    method: str
    eps: tuple[float, ...]
    dt: float
    error_l2_final: float
    wall_clock: float = 0.0
    hamiltonian_error_series: Optional[list[tuple[float, float, float]]] = None
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.error_l2_final >= 0:
            raise UAValidationError('Error must be non-negative, got {}'.format(
                self.error_l2_final))

    def as_row(self) -> dict[str, Any]:
        row: dict[str, Any] = dict(problem=self.problem, method=self.method, dt=self.dt,
                                   error_l2_final=self.error_l2_final,
                                   wall_clock_s=self.wall_clock)
        for i, e in enumerate(self.eps):
            row["eps{}".format(i + 1)] = e
        row.update(self.extra)
        return row


def _field_at_time(field_: MultiscaleField, eps: ScaleVector) -> Callable[[float, np.ndarray],
                                                                         np.ndarray]:
    if eps.n != field_.n:
        raise UAValidationError('Field has {} phases but {} scales were given'.format(
            field_.n, eps.n))

    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        return field_.eval(eps.phases(t), x)

    return rhs


def direct_im2nd(field_: MultiscaleField,
                 eps: ScaleVector,
                 cfg: SolverConfig,
                 x0: Sequence[float],
                 quad_nodes: Optional[int] = None,
                 invariant: Optional[Invariant] = None,
                 raise_on_failure: bool = False) -> Trajectory:
    """Integral midpoint scheme on the original field x' = f(t/eps, x).

    A step that can not be solved marks the run failed and ends it; the
    partial trajectory is returned with ``meta["failed_step"]``.
    """
    rhs = _field_at_time(field_, eps)
    nodes = quad_nodes or cfg.quad_nodes
    x_init = util.as_state(x0)
    times = time_grid(cfg.dt, cfg.t_final)
    xs = np.empty((len(times), x_init.size))
    xs[0] = x_init
    last = len(times) - 1
    failed_step: Optional[int] = None
    midpoint_iters = 0
    with MEAS.measure('direct {} eps={} dt={}'.format(field_.name, eps, cfg.dt)) as timer:
        for m in range(len(times) - 1):
            t_a, t_b = float(times[m]), float(times[m + 1])
            try:
                xs[m + 1], iters = implicit_midpoint_step(
                    lambda mid, a=t_a, b=t_b: quadrature.integrate(lambda s: rhs(s, mid), a, b,
                                                                   nodes),
                    xs[m], cfg.midpoint_tol, cfg.midpoint_max_iter, m)
                midpoint_iters += iters
            except (UAMidpointSolveError, UAEvaluationError) as e:
                if raise_on_failure:
                    raise
                logger.warn('Direct solve of {} failed at step {}: {}'.format(field_.name, m, e))
                failed_step = m
                last = m
                break
    traj = Trajectory(times[:last + 1], xs[:last + 1].copy(), xs[:last + 1].copy(),
                      method="direct")
    traj.meta.update(eps=eps.eps, dt=cfg.dt, t_final=cfg.t_final, steps=last,
                     quad_nodes=nodes, midpoint_iters=midpoint_iters, wall_clock=timer.elapsed,
                     failed=failed_step is not None, failed_step=failed_step)
    if invariant is not None:
        traj.track(invariant)
    return traj


def reference_guard(eps: ScaleVector, step: float, span: float) -> int:
    """Checks the fixed reference step and returns the number of steps.

    The step must resolve the finest period by RefSamplesPerPeriod samples
    and the run must stay below MaxReferenceSteps.
    """
    period = eps.finest_period
    samples = CONFIG["RefSamplesPerPeriod"]
    if step > period / samples:
        raise UAConfigurationError(
            'Reference step {} does not resolve finest period {:.4e} with {} samples '
            '(step must be <= {:.4e})'.format(step, period, samples, period / samples))
    steps = int(math.ceil(span / step - 1e-9))
    if steps > CONFIG["MaxReferenceSteps"]:
        raise UAConfigurationError(
            'Reference would need {} steps, limit is {}'.format(steps,
                                                               CONFIG["MaxReferenceSteps"]),
            cost_estimate=float(steps))
    return steps


def _dp5_step(rhs: Callable[[float, np.ndarray], np.ndarray], t: float, x: np.ndarray,
              h: float) -> np.ndarray:
    k = [rhs(t, x)]
    for c, row in zip(DP_C[1:6], DP_A):
        stage = x + h * sum(a * kk for a, kk in zip(row, k))
        k.append(rhs(t + c * h, stage))
    return x + h * sum(b * kk for b, kk in zip(DP_B, k))


def rk45_reference(field_: MultiscaleField,
                   eps: ScaleVector,
                   x0: Sequence[float],
                   t_final: float,
                   step: Optional[float] = None,
                   rtol: Optional[float] = None,
                   atol: float = 1e-12,
                   t0: float = 0.0,
                   store_every: Optional[int] = None,
                   invariant: Optional[Invariant] = None) -> Trajectory:
    """Dormand-Prince reference on [t0, t_final].

    With ``step`` the fifth order solution is propagated at that fixed step,
    storing every ``store_every``-th node (default keeps about 20000 nodes;
    the final node is always stored). With ``rtol`` scipy's adaptive RK45 is
    used, its step capped to the guarded fixed step.
    """
    rhs = _field_at_time(field_, eps)
    x = util.as_state(x0)
    span = t_final - t0
    if span < 0:
        raise UAValidationError('t_final must not be before t0')
    if step is None and rtol is None:
        raise UAValidationError('Reference needs either a fixed step or rtol')
    with MEAS.measure('reference {} eps={}'.format(field_.name, eps)) as timer:
        if step is not None:
            steps = reference_guard(eps, step, span) if span > 0 else 0
            every = store_every or max(1, steps // MAX_STORED_POINTS)
            h = span / steps if steps else 0.0
            times, states = [t0], [x]
            for i in range(steps):
                x = _dp5_step(rhs, t0 + i * h, x, h)
                if (i + 1) % every == 0 or i + 1 == steps:
                    times.append(t0 + (i + 1) * h if i + 1 < steps else t_final)
                    states.append(x)
            mode = "fixed"
        else:
            max_step = eps.finest_period / CONFIG["RefSamplesPerPeriod"]
            sol = solve_ivp(rhs, (t0, t_final), x, method="RK45", rtol=rtol, atol=atol,
                            max_step=max_step)
            if not sol.success:
                raise UAConfigurationError('Adaptive reference failed: {}'.format(sol.message))
            times, states = list(sol.t), list(sol.y.T)
            steps = len(sol.t) - 1
            mode = "adaptive"
    xs = np.array(states)
    traj = Trajectory(np.array(times, dtype=float), xs, xs.copy(), method="reference")
    traj.meta.update(eps=eps.eps, mode=mode, step=step, rtol=rtol, steps=steps,
                     wall_clock=timer.elapsed, t0=t0, t_final=t_final)
    if invariant is not None:
        traj.track(invariant)
    logger.debug('Reference {} eps={} ({} mode, {} steps) took {:.2f} s'.format(
        field_.name, eps, mode, steps, timer.elapsed))
    return traj


def validated_reference(field_: MultiscaleField,
                        eps: ScaleVector,
                        x0: Sequence[float],
                        t_final: float,
                        step: float,
                        invariant: Optional[Invariant] = None) -> tuple[Trajectory, float]:
    """Reference at ``step`` paired with a half step rerun.

    Returns the reference and the final state difference of the pair, used
    as the reference's own error bar.
    """
    ref = rk45_reference(field_, eps, x0, t_final, step=step, invariant=invariant)
    half = rk45_reference(field_, eps, x0, t_final, step=step / 2)
    error_bar = error_at_final(ref, half)
    ref.meta["error_bar"] = error_bar
    logger.debug('Reference error bar for {} eps={}: {:.3e}'.format(field_.name, eps, error_bar))
    return ref, error_bar


def averaged_method(decomp: FieldDecomposition, cfg: SolverConfig, x0: Sequence[float],
                    invariant: Optional[Invariant] = None) -> Trajectory:
    """Midpoint integration of y' = mean(y); no recovery, x = y."""
    y_init = util.as_state(x0)
    times = time_grid(cfg.dt, cfg.t_final)
    ys = np.empty((len(times), y_init.size))
    ys[0] = y_init
    midpoint_iters = 0
    with MEAS.measure('averaged {} dt={}'.format(decomp.field.name, cfg.dt)) as timer:
        for m in range(len(times) - 1):
            h = float(times[m + 1] - times[m])
            ys[m + 1], iters = implicit_midpoint_step(
                lambda mid, h=h: h * np.asarray(decomp.mean(mid), dtype=float), ys[m],
                cfg.midpoint_tol, cfg.midpoint_max_iter, m)
            midpoint_iters += iters
    traj = Trajectory(times, ys, ys.copy(), method="averaged")
    traj.meta.update(dt=cfg.dt, t_final=cfg.t_final, steps=len(times) - 1,
                     midpoint_iters=midpoint_iters, wall_clock=timer.elapsed)
    if invariant is not None:
        traj.track(invariant)
    return traj


def error_at_final(a: Trajectory, b: Trajectory) -> float:
    """||x_a(T) - x_b(T)||_2 at T = a's final time, b interpolated linearly."""
    T = a.final_time
    try:
        check_covered(b, T, T)
    except UARangeError as e:
        raise UARangeError('Trajectories do not share final time {}: {}'.format(T, e)) from e
    return float(np.linalg.norm(a.final_state - b.state_at(T)))


def hamiltonian_error_series(traj: Trajectory) -> list[tuple[float, float, float]]:
    """(t, |H(t) - H(0)|, |H(t) - H(0)| / |H(0)|) for a tracked trajectory."""
    if traj.invariant is None:
        raise UAValidationError('Trajectory has no tracked invariant')
    h0 = float(traj.invariant[0])
    scale = abs(h0) if h0 != 0.0 else 1.0
    return [(float(t), abs(float(h) - h0), abs(float(h) - h0) / scale)
            for t, h in zip(traj.times, traj.invariant)]
