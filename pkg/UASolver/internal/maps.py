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
"""Implicit midpoint composition maps and the transformed slow field.

Phi^k(x) = x + eps_k * anti^k((x + Phi^k(x)) / 2) is a near-identity map
absorbing the k-th scale. The oscillatory state is the cumulative
composition x = Phi^n(...Phi^1(y)) of a slow state y, and the slow
state follows the non-stiff field computed by ``slow_rhs``. Every
implicit relation is solved by fixed point iteration; running out of
iterations is an error, never a silent fallback.

Phi^k depends on every phase t_1..t_k, so the time derivative of the
stack also carries (eps_k / eps_i) * d anti^k / d t_i for the coarser
phases i < k. ``coarse_phase_levels`` decides for which levels these
terms are kept.
"""
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Type

import numpy as np
from UASolver.internal import util
from UASolver.internal.config import SolverConfig
from UASolver.internal.decomposition import (FieldDecomposition, antiderivative_g,
                                             coarse_phase_derivative_g, fluctuation, jacobian_g)
from UASolver.internal.exceptions import (UAInvertibilityError, UANonConvergenceError,
                                          UAValidationError)
from UASolver.internal.scales import ScaleVector

# Step quadrature nodes needed per period of phase k before its coarse terms are kept
COARSE_NODES_PER_PERIOD: float = 4.0


@dataclass
class MapStackState:
    """Working vectors of one lift/slow field evaluation.

    ``P[k]`` is Phi^k(...Phi^1(y)) with ``P[0] = y``. ``R``, ``T`` and ``B``
    hold levels 1..n at index k-1; ``D`` holds D_1..D_(n+1) at index k-1.
    ``T[k-1]`` is the time derivative of Phi^k at a fixed argument, coarse
    phase terms included only for the levels in ``coarse_levels``.
    """
    t: float
    y: np.ndarray
    phases: tuple[float, ...]
    P: list[np.ndarray]
    R: list[np.ndarray] = field(default_factory=list)
    T: list[np.ndarray] = field(default_factory=list)
    B: list[np.ndarray] = field(default_factory=list)
    D: list[np.ndarray] = field(default_factory=list)
    iters_P: int = 0
    iters_D: int = 0
    residuals_P: list[float] = field(default_factory=list)
    residuals_D: list[float] = field(default_factory=list)
    coarse_levels: tuple[int, ...] = ()

    @property
    def x(self) -> np.ndarray:
        return self.P[-1]

    @property
    def rhs(self) -> Optional[np.ndarray]:
        return self.D[0] if self.D else None


def _fixed_point(update: Callable[[np.ndarray], np.ndarray],
                 start: np.ndarray,
                 cfg: SolverConfig,
                 what: str,
                 level: int,
                 error: Type[UANonConvergenceError] = UANonConvergenceError) -> np.ndarray:
    current = start
    history: list[float] = []
    for _ in range(cfg.fp_max_iter):
        new = update(current)
        residual = util.max_norm(new - current)
        history.append(residual)
        if residual <= cfg.fp_tol * max(1.0, util.max_norm(new)):
            return new
        current = new
    raise error('{} at level {} did not converge in {} iterations, last residual {:.3e}'.format(
        what, level, cfg.fp_max_iter, history[-1]), residuals=history, level=level)


def _scale(eps: ScaleVector, decomp: FieldDecomposition, k: int) -> float:
    if eps.n != decomp.n:
        raise UAValidationError('Field has {} phases but {} scales were given'.format(
            decomp.n, eps.n))
    if not 1 <= k <= eps.n:
        raise UAValidationError('Scale index must be in 1..{}, got {}'.format(eps.n, k))
    return eps.effective[k - 1]


def coarse_phase_levels(eps: ScaleVector, cfg: SolverConfig) -> tuple[int, ...]:
    """Levels k >= 2 whose coarser phase derivatives enter the slow field.

    ``on`` keeps every level and ``off`` none. ``auto`` keeps level k while
    the step quadrature samples the period of phase k at least
    COARSE_NODES_PER_PERIOD times, i.e. 4 * dt <= quad_nodes * eps_k.
    Unresolved, these terms oscillate at 1/eps_k and alias in the step
    integral.
    """
    levels = range(2, eps.n + 1)
    if cfg.coarse_phases == "on":
        return tuple(levels)
    if cfg.coarse_phases == "off":
        return ()
    return tuple(k for k in levels
                 if COARSE_NODES_PER_PERIOD * cfg.dt <= cfg.quad_nodes * eps.effective[k - 1])


def phi_apply(decomp: FieldDecomposition, eps: ScaleVector, k: int, phases: Sequence[float],
              x: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    """Phi^k(x) at phases t_1..t_k. Returns x unchanged when t_k = 0."""
    e_k = _scale(eps, decomp, k)
    x = np.asarray(x, dtype=float)
    if phases[k - 1] == 0.0:
        return x.copy()
    ph = tuple(phases[:k])
    start = x + e_k * antiderivative_g(decomp, k, ph, x)
    return _fixed_point(lambda phi: x + e_k * antiderivative_g(decomp, k, ph, 0.5 * (x + phi)),
                        start, cfg, 'Map', k)


def phi_dt(decomp: FieldDecomposition, eps: ScaleVector, k: int, phases: Sequence[float],
           x: np.ndarray, phi_x: np.ndarray, cfg: SolverConfig) -> tuple[np.ndarray, np.ndarray]:
    """Phase derivative of Phi^k as (d Phi^k / d t_k, T_k).

    T_k = f^k(mid) + eps_k/2 * J T_k is iterated in its scaled form and
    d Phi^k / d t_k = eps_k * T_k.
    """
    e_k = _scale(eps, decomp, k)
    ph = tuple(phases[:k])
    mid = 0.5 * (np.asarray(x, dtype=float) + np.asarray(phi_x, dtype=float))
    f_k = fluctuation(decomp, k, ph, mid)
    jac = jacobian_g(decomp, k, ph, mid)
    half = 0.5 * e_k
    t_k = _fixed_point(lambda t: f_k + half * (jac @ t), f_k, cfg, 'Phase derivative', k)
    return e_k * t_k, t_k


def phi_jac_inv_apply(decomp: FieldDecomposition, eps: ScaleVector, k: int,
                      phases: Sequence[float], x: np.ndarray, phi_x: np.ndarray, K: np.ndarray,
                      cfg: SolverConfig) -> np.ndarray:
    """(d Phi^k / dx)^-1 K without forming the inverse."""
    e_k = _scale(eps, decomp, k)
    ph = tuple(phases[:k])
    K = np.asarray(K, dtype=float)
    mid = 0.5 * (np.asarray(x, dtype=float) + np.asarray(phi_x, dtype=float))
    jac = jacobian_g(decomp, k, ph, mid)
    half = 0.5 * e_k
    return _fixed_point(lambda v: K - half * (jac @ (K + v)), K, cfg, 'Inverse Jacobian', k,
                        UAInvertibilityError)


def _lift_at_phases(decomp: FieldDecomposition, eps: ScaleVector, t: float,
                    phases: tuple[float, ...], y: np.ndarray, cfg: SolverConfig,
                    warm: Optional[MapStackState] = None) -> MapStackState:
    n = decomp.n
    scales = [_scale(eps, decomp, k) for k in range(1, n + 1)]
    y = np.asarray(y, dtype=float)
    if warm is not None and len(warm.P) == n + 1:
        shift = y - warm.y
        P = [y] + [p + shift for p in warm.P[1:]]
    else:
        P = [y] * (n + 1)
    state = MapStackState(t=t, y=y, phases=phases, P=P)
    for _ in range(cfg.fp_max_iter):
        new = [y]
        for k in range(1, n + 1):
            mid = 0.5 * (P[k - 1] + P[k])
            new.append(P[k - 1] + scales[k - 1] * antiderivative_g(decomp, k, phases, mid))
        residual = util.stack_residual(new[1:], P[1:])
        state.residuals_P.append(residual)
        state.iters_P += 1
        P = new
        if residual <= cfg.fp_tol * util.stack_scale(P):
            break
    else:
        raise UANonConvergenceError(
            'Map stack did not converge in {} iterations at t={}, last residual {:.3e}'.format(
                cfg.fp_max_iter, t, state.residuals_P[-1]), residuals=state.residuals_P)
    state.P = P
    state.R = [0.5 * (P[k - 1] + P[k]) for k in range(1, n + 1)]
    return state


def lift(decomp: FieldDecomposition, eps: ScaleVector, t: float, y: np.ndarray,
         cfg: SolverConfig,
         warm: Optional[MapStackState] = None) -> tuple[np.ndarray, MapStackState]:
    """x = Phi^n(...Phi^1(y)) at time t, with the converged stack.

    All levels are swept simultaneously per iteration. A stack from a
    nearby state seeds the iteration when given as ``warm``.
    """
    state = _lift_at_phases(decomp, eps, t, eps.phases(t), y, cfg, warm)
    return state.x.copy(), state


def _coarse_terms(decomp: FieldDecomposition, eps: ScaleVector, phases: tuple[float, ...],
                  state: MapStackState, levels: Sequence[int]) -> list[np.ndarray]:
    terms = [np.zeros(decomp.d) for _ in range(decomp.n)]
    for k in levels:
        e_k = eps.effective[k - 1]
        for i in range(1, k):
            ratio = e_k / eps.effective[i - 1]
            terms[k - 1] = terms[k - 1] + ratio * coarse_phase_derivative_g(
                decomp, k, i, phases, state.R[k - 1])
    return terms


def _slow_rhs_at_phases(decomp: FieldDecomposition, eps: ScaleVector, t: float,
                        phases: tuple[float, ...], y: np.ndarray, cfg: SolverConfig,
                        warm: Optional[MapStackState] = None) -> MapStackState:
    state = _lift_at_phases(decomp, eps, t, phases, y, cfg, warm)
    n, d = decomp.n, decomp.d
    halves = [0.5 * _scale(eps, decomp, k) for k in range(1, n + 1)]
    # J_k, f^k and the coarse terms at the converged midpoints stay fixed during the iteration
    jacs = [jacobian_g(decomp, k, phases, state.R[k - 1]) for k in range(1, n + 1)]
    flucts = [fluctuation(decomp, k, phases, state.R[k - 1]) for k in range(1, n + 1)]
    state.coarse_levels = coarse_phase_levels(eps, cfg)
    sources = [f + c for f, c in zip(flucts,
                                     _coarse_terms(decomp, eps, phases, state,
                                                   state.coarse_levels))]
    top = decomp.field.eval(phases, state.P[n])
    T = [np.zeros(d) for _ in range(n)]
    D = [np.zeros(d) for _ in range(n)] + [top]
    B = [np.zeros(d) for _ in range(n)]
    for _ in range(cfg.fp_max_iter):
        new_T = list(T)
        new_D = list(D)
        for k in range(n, 0, -1):
            i = k - 1
            new_T[i] = sources[i] + halves[i] * (jacs[i] @ T[i])
            B[i] = D[k] - new_T[i]
            new_D[i] = B[i] - halves[i] * (jacs[i] @ (B[i] + D[i]))
        residual = max(util.stack_residual(new_D[:n], D[:n]), util.stack_residual(new_T, T))
        state.residuals_D.append(residual)
        state.iters_D += 1
        T, D = new_T, new_D
        if residual <= cfg.fp_tol * util.stack_scale(D + T):
            break
    else:
        raise UANonConvergenceError(
            'Slow field iteration did not converge in {} iterations at t={}, last residual '
            '{:.3e}'.format(cfg.fp_max_iter, t, state.residuals_D[-1]),
            residuals=state.residuals_D)
    state.T, state.D, state.B = T, D, B
    return state


def slow_rhs(decomp: FieldDecomposition, eps: ScaleVector, t: float, y: np.ndarray,
             cfg: SolverConfig,
             warm: Optional[MapStackState] = None) -> tuple[np.ndarray, MapStackState]:
    """Right-hand side F(t, y) of the slow equation, with the converged stack."""
    state = _slow_rhs_at_phases(decomp, eps, t, eps.phases(t), y, cfg, warm)
    return state.D[0].copy(), state


@dataclass
class DiagnosticsGrid:
    """Map quantities over a uniform grid of the two finest phases.

    Arrays are indexed [i, j, component] with phases (grid[i], grid[j]);
    ``T`` carries every level, ``T[k-1]`` being level k.
    """
    grid: np.ndarray
    y: np.ndarray
    eps: ScaleVector
    f_minus_d1: np.ndarray
    p_minus_y: np.ndarray
    T: np.ndarray
    iterations: np.ndarray

    def ranges(self) -> dict[str, tuple[float, float]]:
        """Smallest and largest absolute value of every quantity."""
        quantities = {"f_minus_d1": self.f_minus_d1, "p_minus_y": self.p_minus_y}
        for k in range(self.T.shape[0]):
            quantities["T{}".format(k + 1)] = self.T[k]
        return {name: (float(np.min(np.abs(value))), float(np.max(np.abs(value))))
                for name, value in quantities.items()}

    def fine_phase_dependence(self, level: int,
                              components: Optional[Sequence[int]] = None) -> float:
        """Largest change of T_level along the finest phase axis.

        Components are 1-based, all when not given.
        """
        values = self.T[level - 1]
        if components is not None:
            values = values[..., [c - 1 for c in components]]
        return float(np.max(np.abs(values - values[:, :1, :])))


def map_diagnostics(decomp: FieldDecomposition, eps: ScaleVector, y: np.ndarray,
                    resolution: int, cfg: SolverConfig) -> DiagnosticsGrid:
    """f - D_1, P_n - y and T_k on a resolution x resolution phase grid.

    The grid spans the two finest phases, coarser phases are held at zero.
    """
    n, d = decomp.n, decomp.d
    if n < 2:
        raise UAValidationError('Diagnostics grid needs at least two phases, got {}'.format(n))
    if resolution < 1:
        raise UAValidationError('Resolution must be positive, got {}'.format(resolution))
    y = util.as_state(y)
    grid = np.arange(resolution, dtype=float) / resolution
    f_minus_d1 = np.empty((resolution, resolution, d))
    p_minus_y = np.empty((resolution, resolution, d))
    T = np.empty((n, resolution, resolution, d))
    iterations = np.empty((resolution, resolution, 2), dtype=int)
    head = (0.0, ) * (n - 2)
    for i, coarse in enumerate(grid):
        warm: Optional[MapStackState] = None
        for j, fine in enumerate(grid):
            phases = head + (float(coarse), float(fine))
            state = _slow_rhs_at_phases(decomp, eps, 0.0, phases, y, cfg, warm)
            warm = state
            f_minus_d1[i, j] = decomp.field.eval(phases, y) - state.D[0]
            p_minus_y[i, j] = state.P[n] - y
            for k in range(n):
                T[k, i, j] = state.T[k]
            iterations[i, j] = (state.iters_P, state.iters_D)
    return DiagnosticsGrid(grid, y, eps, f_minus_d1, p_minus_y, T, iterations)
