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
"""Integral midpoint integration of the slow equation and solution recovery.

One step solves

    y_(m+1) = y_m + integral_(t_m)^(t_(m+1)) F(s, (y_m + y_(m+1)) / 2) ds

by fixed point iteration on y_(m+1), with the time integral evaluated by
Gauss-Legendre quadrature. Steps do not depend on the scales because F
is not stiff.
"""
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import csv
import math
import numpy as np
from robot.api import logger
from UASolver.internal import quadrature, util
from UASolver.internal.config import SolverConfig
from UASolver.internal.decomposition import FieldDecomposition
from UASolver.internal.exceptions import UAMidpointSolveError, UARangeError, UAValidationError
from UASolver.internal.maps import MapStackState, coarse_phase_levels, lift, slow_rhs
from UASolver.internal.meas import MEAS
from UASolver.internal.scales import ScaleVector

Invariant = Callable[[np.ndarray, float], float]


@dataclass
class SolverStats:
    slow_rhs_calls: int = 0
    iters_P: int = 0
    iters_D: int = 0
    max_outer: int = 0
    midpoint_iters: int = 0

    def add(self, stack: MapStackState) -> None:
        self.slow_rhs_calls += 1
        self.iters_P += stack.iters_P
        self.iters_D += stack.iters_D
        self.max_outer = max(self.max_outer, stack.iters_P, stack.iters_D)

    def as_dict(self) -> dict[str, int]:
        return dict(slow_rhs_calls=self.slow_rhs_calls, iters_P=self.iters_P,
                    iters_D=self.iters_D, max_outer=self.max_outer,
                    midpoint_iters=self.midpoint_iters)


@dataclass
class Trajectory:
    """Slow states ``y`` and recovered states ``x`` on the time grid ``times``.

    Arrays are (steps + 1, d). ``invariant`` is an optional scalar series,
    for example the Hamiltonian. ``config`` is the solver configuration of
    the run when it is known.
    """
    times: np.ndarray
    y: np.ndarray
    x: np.ndarray
    invariant: Optional[np.ndarray] = None
    method: str = "ua"
    meta: dict[str, Any] = field(default_factory=dict)
    config: Optional[SolverConfig] = None

    @property
    def d(self) -> int:
        return int(self.x.shape[1])

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.x[-1]

    @property
    def failed(self) -> bool:
        return bool(self.meta.get("failed", False))

    def track(self, invariant: Invariant) -> Trajectory:
        """Evaluates ``invariant(x, t)`` on every node."""
        self.invariant = np.array([invariant(x, t) for x, t in zip(self.x, self.times)])
        return self

    def state_at(self, t: float) -> np.ndarray:
        """x linearly interpolated to t."""
        check_covered(self, t, t)
        return np.array([np.interp(t, self.times, self.x[:, i]) for i in range(self.d)])

    def to_csv(self, path: str, invariant_name: str = "invariant") -> str:
        header = ["t"] + ["y_{}".format(i + 1) for i in range(self.d)] + \
            ["x_{}".format(i + 1) for i in range(self.d)]
        if self.invariant is not None:
            header.append(invariant_name)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for m, t in enumerate(self.times):
                row = [repr(float(t))] + [repr(float(v)) for v in self.y[m]] + \
                    [repr(float(v)) for v in self.x[m]]
                if self.invariant is not None:
                    row.append(repr(float(self.invariant[m])))
                writer.writerow(row)
        logger.info('Trajectory written to {}'.format(path))
        return path


@dataclass
class RecoveredWindow:
    times: np.ndarray
    y: np.ndarray
    x: np.ndarray

    def to_csv(self, path: str, reference: Optional[np.ndarray] = None) -> str:
        d = self.x.shape[1]
        header = ["t"] + ["y_{}".format(i + 1) for i in range(d)] + \
            ["x_{}".format(i + 1) for i in range(d)]
        if reference is not None:
            header += ["ref_{}".format(i + 1) for i in range(d)]
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for m, t in enumerate(self.times):
                row = [repr(float(t))] + [repr(float(v)) for v in self.y[m]] + \
                    [repr(float(v)) for v in self.x[m]]
                if reference is not None:
                    row += [repr(float(v)) for v in reference[m]]
                writer.writerow(row)
        return path


def time_grid(dt: float, t_final: float, t0: float = 0.0) -> np.ndarray:
    """Uniform grid from t0 with spacing dt; the last step is shortened to hit t_final."""
    span = t_final - t0
    if dt <= 0 or span < 0:
        raise UAValidationError('Need dt > 0 and t_final >= t0, got dt={}, span={}'.format(
            dt, span))
    steps = int(math.floor(span / dt + 1e-9))
    times = t0 + dt * np.arange(steps + 1, dtype=float)
    if span - steps * dt > 1e-9 * dt:
        times = np.append(times, t_final)
    if len(times) > 1:
        times[-1] = t_final
    return times


def implicit_midpoint_step(increment: Callable[[np.ndarray], np.ndarray], y_m: np.ndarray,
                           tol: float, max_iter: int, step: int) -> tuple[np.ndarray, int]:
    """Solves y = y_m + increment((y_m + y) / 2) by fixed point iteration from y_m.

    Returns the solution and the number of iterations.
    """
    current = y_m
    history: list[float] = []
    for i in range(max_iter):
        new = y_m + increment(0.5 * (y_m + current))
        if not np.all(np.isfinite(new)):
            raise UAMidpointSolveError('Midpoint step {} produced non-finite state'.format(step),
                                       residuals=history, step=step)
        residual = util.max_norm(new - current)
        history.append(residual)
        current = new
        if residual <= tol * max(1.0, util.max_norm(new)):
            return new, i + 1
    raise UAMidpointSolveError(
        'Midpoint step {} did not converge in {} iterations, last residual {:.3e}'.format(
            step, max_iter, history[-1]), residuals=history, step=step)


def step_time_integral(decomp: FieldDecomposition,
                       eps: ScaleVector,
                       t_a: float,
                       t_b: float,
                       y_mid: np.ndarray,
                       cfg: SolverConfig,
                       warm: Optional[list[Optional[MapStackState]]] = None,
                       stats: Optional[SolverStats] = None) -> np.ndarray:
    """Integral of F(s, y_mid) over [t_a, t_b] with cfg.quad_nodes Gauss nodes.

    ``warm`` holds one stack per node and is updated in place so repeated
    calls over the same step start next to the previous solution.
    """
    points, weights = quadrature.gauss_legendre(cfg.quad_nodes, t_a, t_b)
    total = np.zeros(decomp.d)
    for j, (s, w) in enumerate(zip(points, weights)):
        seed = warm[j] if warm is not None else None
        F, stack = slow_rhs(decomp, eps, float(s), y_mid, cfg, warm=seed)
        if warm is not None:
            warm[j] = stack
        if stats is not None:
            stats.add(stack)
        total = total + w * F
    return total


def integrate(decomp: FieldDecomposition,
              eps: ScaleVector,
              cfg: SolverConfig,
              x0: Sequence[float],
              invariant: Optional[Invariant] = None) -> Trajectory:
    """Solves the slow equation on [0, cfg.t_final] and recovers x at every node.

    y(0) = x(0) since every map is the identity at zero phase.
    """
    y0 = util.as_state(x0)
    times = time_grid(cfg.dt, cfg.t_final)
    ys = np.empty((len(times), y0.size))
    xs = np.empty_like(ys)
    ys[0] = y0
    xs[0] = y0
    stats = SolverStats()
    warm: list[Optional[MapStackState]] = [None] * cfg.quad_nodes
    lift_stack: Optional[MapStackState] = None
    with MEAS.measure('ua {} eps={} dt={}'.format(decomp.field.name, eps, cfg.dt)) as timer:
        for m in range(len(times) - 1):
            t_a, t_b = float(times[m]), float(times[m + 1])
            ys[m + 1], iters = implicit_midpoint_step(
                lambda mid, a=t_a, b=t_b: step_time_integral(decomp, eps, a, b, mid, cfg, warm,
                                                             stats),
                ys[m], cfg.midpoint_tol, cfg.midpoint_max_iter, m)
            stats.midpoint_iters += iters
            xs[m + 1], lift_stack = lift(decomp, eps, t_b, ys[m + 1], cfg, warm=lift_stack)
            util.check_finite(xs[m + 1], t_b, 'Recovered state')
    traj = Trajectory(times, ys, xs, method="ua", config=cfg)
    traj.meta.update(stats.as_dict())
    traj.meta.update(eps=eps.eps, dt=cfg.dt, t_final=cfg.t_final, steps=len(times) - 1,
                     provider=decomp.provider, coarse_levels=list(coarse_phase_levels(eps, cfg)),
                     wall_clock=timer.elapsed)
    if invariant is not None:
        traj.track(invariant)
    logger.debug('UA {} eps={} dt={}: {} steps, {} slow field calls, iterations P={} D={}, '
                 'max outer {}'.format(decomp.field.name, eps, cfg.dt, len(times) - 1,
                                       stats.slow_rhs_calls, stats.iters_P, stats.iters_D,
                                       stats.max_outer))
    return traj


def check_covered(traj: Trajectory, t_a: float, t_b: float) -> None:
    slack = 1e-12 * max(1.0, abs(traj.final_time))
    if t_a < traj.times[0] - slack or t_b > traj.times[-1] + slack or t_b < t_a:
        raise UARangeError('Window [{}, {}] is not covered by trajectory on [{}, {}]'.format(
            t_a, t_b, traj.times[0], traj.times[-1]))


def recover_window(decomp: FieldDecomposition, eps: ScaleVector, traj: Trajectory, t_a: float,
                   t_b: float, samples: int, cfg: SolverConfig) -> RecoveredWindow:
    """Fine series x(s) = Phi(y(s)) on [t_a, t_b], y linear between coarse nodes.

    A zero width window gives a single point.
    """
    check_covered(traj, t_a, t_b)
    if t_b == t_a:
        samples = 1
    elif samples < 2:
        raise UAValidationError('Window needs at least two samples, got {}'.format(samples))
    times = np.linspace(t_a, t_b, samples)
    ys = np.empty((samples, traj.y.shape[1]))
    xs = np.empty_like(ys)
    stack: Optional[MapStackState] = None
    for i, s in enumerate(times):
        ys[i] = [np.interp(s, traj.times, traj.y[:, c]) for c in range(traj.y.shape[1])]
        xs[i], stack = lift(decomp, eps, float(s), ys[i], cfg, warm=stack)
    return RecoveredWindow(times, ys, xs)
