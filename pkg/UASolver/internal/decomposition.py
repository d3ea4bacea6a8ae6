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
"""Nested mean/fluctuation decomposition of multiscale fields.

For a field f(t_1, ..., t_n, x), 1-periodic in every phase, the cascade

    mean^(n+1) = f
    mean^k(t_1..t_(k-1), x) = integral_0^1 mean^(k+1)(t_1..t_(k-1), s, x) ds
    fluct^k = mean^(k+1) - mean^k

gives f = mean^1 + sum_k fluct^k. The antiderivatives
anti^k = integral_0^(t_k) fluct^k ds and their x-Jacobians drive the
composition maps. Closed forms can be supplied (analytic provider) or
everything is built with quadrature (numeric provider).
"""
from __future__ import annotations
from dataclasses import dataclass
from math import gcd
from typing import Callable, Optional, Sequence, Union

import numpy as np
from robot.api import logger
from UASolver.internal import quadrature, util
from UASolver.internal.config import SolverConfig
from UASolver.internal.exceptions import UAValidationError
from UASolver.internal.scales import ScaleVector

PhaseFunc = Callable[[Sequence[float], np.ndarray], np.ndarray]
MeanFunc = Callable[[np.ndarray], np.ndarray]

RECONSTRUCTION_TOL: float = 1e-10
CLOSED_FORM_TOL: float = 1e-9
JACOBIAN_TOL: float = 1e-6
ZERO_MEAN_NODES: int = 64
ANTI_CHECK_NODES: int = 32
PERIODICITY_TOL: float = 1e-8
PHASE_STEP: float = 1e-5


@dataclass(frozen=True)
class MultiscaleField:
    """Field f(phases, x) with d state components and n fast phases."""
    d: int
    n: int
    func: PhaseFunc
    name: str = "field"

    def eval(self, phases: Sequence[float], x: np.ndarray) -> np.ndarray:
        value = np.asarray(self.func(phases, x), dtype=float)
        return util.check_finite(value, (tuple(phases), np.array(x)), 'Field {}'.format(self.name))


@dataclass(frozen=True)
class AnalyticForms:
    """User supplied closed forms. Index k-1 holds level k."""
    mean: MeanFunc
    fluct: tuple[PhaseFunc, ...]
    anti: tuple[PhaseFunc, ...]
    anti_jac: tuple[PhaseFunc, ...]


@dataclass(frozen=True)
class FieldDecomposition:
    field: MultiscaleField
    mean: MeanFunc
    fluct: tuple[PhaseFunc, ...]
    anti: tuple[PhaseFunc, ...]
    anti_jac: tuple[PhaseFunc, ...]
    provider: str
    quad_nodes: int
    fd_dx: float

    @property
    def n(self) -> int:
        return self.field.n

    @property
    def d(self) -> int:
        return self.field.d


@dataclass(frozen=True)
class RationalCollapse:
    """Two finest scales with eps_n = (m1/m2) * eps_(n-1)."""
    m1: int
    m2: int

    def __post_init__(self) -> None:
        for m in (self.m1, self.m2):
            if isinstance(m, bool) or not float(m).is_integer() or m <= 0:
                raise UAValidationError(
                    'Rational collapse needs positive integers, got ({}, {})'.format(
                        self.m1, self.m2))
        m1, m2 = int(self.m1), int(self.m2)
        divisor = gcd(m1, m2)
        object.__setattr__(self, "m1", m1 // divisor)
        object.__setattr__(self, "m2", m2 // divisor)

    @property
    def ratio(self) -> float:
        return self.m1 / self.m2


@dataclass(frozen=True)
class IrrationalCollapse:
    """Two finest scales with an irrational ratio."""


Collapse = Union[RationalCollapse, IrrationalCollapse]


def _check_level(n: int, k: int) -> None:
    if not 1 <= k <= n:
        raise UAValidationError('Scale index must be in 1..{}, got {}'.format(n, k))


def cascade_mean(field: MultiscaleField, k: int, upper_mean: PhaseFunc,
                 nodes: int = 8) -> PhaseFunc:
    """Returns mean^k(t_1..t_(k-1), x), the average of ``upper_mean`` over t_k.

    ``upper_mean`` is mean^(k+1), or ``field.eval`` when k = n.
    """
    _check_level(field.n, k)
    points, weights = quadrature.rectangle_rule(nodes)

    def mean(phases: Sequence[float], x: np.ndarray) -> np.ndarray:
        head = tuple(phases[:k - 1])
        total = weights[0] * upper_mean(head + (points[0], ), x)
        for s, w in zip(points[1:], weights[1:]):
            total = total + w * upper_mean(head + (s, ), x)
        return total

    return mean


def cascade_fluct(field: MultiscaleField, k: int, upper_mean: PhaseFunc,
                  own_mean: PhaseFunc) -> PhaseFunc:
    """Returns fluct^k(t_1..t_k, x) = mean^(k+1) - mean^k."""
    _check_level(field.n, k)

    def fluct(phases: Sequence[float], x: np.ndarray) -> np.ndarray:
        return upper_mean(tuple(phases[:k]), x) - own_mean(tuple(phases[:k - 1]), x)

    return fluct


def _cascade(field: MultiscaleField, nodes: int) -> tuple[list[PhaseFunc], list[PhaseFunc]]:
    """Means indexed 1..n+1 (index 0 unused) and fluctuations indexed 0..n-1."""
    means: list[PhaseFunc] = [field.eval] * (field.n + 2)
    flucts: list[PhaseFunc] = [field.eval] * field.n
    for k in range(field.n, 0, -1):
        means[k] = cascade_mean(field, k, means[k + 1], nodes)
        flucts[k - 1] = cascade_fluct(field, k, means[k + 1], means[k])
    return means, flucts


def _numeric_anti(field: MultiscaleField, k: int, upper_mean: PhaseFunc,
                  nodes: int) -> PhaseFunc:
    # fluct^k integrated in the discrete Fourier basis of mean^(k+1) on the mean's nodes
    points, _ = quadrature.rectangle_rule(nodes)

    def anti(phases: Sequence[float], x: np.ndarray) -> np.ndarray:
        t_k = phases[k - 1]
        if t_k == 0.0:
            return np.zeros(field.d)
        head = tuple(phases[:k - 1])
        samples = np.array([upper_mean(head + (s, ), x) for s in points])
        return quadrature.periodic_antiderivative(samples, t_k)

    return anti


def central_difference_jacobian(func: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                                dx: float) -> np.ndarray:
    """d x d matrix of central differences, column i perturbs x_i by +-dx."""
    x = np.asarray(x, dtype=float)
    d = x.size
    jac = np.empty((d, d))
    for i in range(d):
        step = np.zeros(d)
        step[i] = dx
        jac[:, i] = (func(x + step) - func(x - step)) / (2.0 * dx)
    return jac


def _numeric_jac(field: MultiscaleField, anti: PhaseFunc, dx: float, k: int) -> PhaseFunc:

    def anti_jac(phases: Sequence[float], x: np.ndarray) -> np.ndarray:
        if phases[k - 1] == 0.0:
            return np.zeros((field.d, field.d))
        return central_difference_jacobian(lambda z: anti(phases, z), x, dx)

    return anti_jac


def antiderivative_g(decomp: FieldDecomposition, k: int, phases: Sequence[float],
                     x: np.ndarray) -> np.ndarray:
    """anti^k(t_1..t_k, x); exactly zero when t_k = 0."""
    _check_level(decomp.n, k)
    if phases[k - 1] == 0.0:
        return np.zeros(decomp.d)
    return np.asarray(decomp.anti[k - 1](tuple(phases[:k]), x), dtype=float)


def jacobian_g(decomp: FieldDecomposition, k: int, phases: Sequence[float],
               x: np.ndarray) -> np.ndarray:
    """x-Jacobian of anti^k; zero matrix when t_k = 0."""
    _check_level(decomp.n, k)
    if phases[k - 1] == 0.0:
        return np.zeros((decomp.d, decomp.d))
    return np.asarray(decomp.anti_jac[k - 1](tuple(phases[:k]), x), dtype=float)


def coarse_phase_derivative_g(decomp: FieldDecomposition, k: int, i: int,
                              phases: Sequence[float], x: np.ndarray,
                              step: float = PHASE_STEP) -> np.ndarray:
    """d anti^k / d t_i for a coarser phase i < k, by central difference.

    Zero when t_k = 0 since anti^k vanishes there for every t_i.
    """
    _check_level(decomp.n, k)
    if not 1 <= i < k:
        raise UAValidationError('Coarse phase of level {} must be in 1..{}, got {}'.format(
            k, k - 1, i))
    if phases[k - 1] == 0.0:
        return np.zeros(decomp.d)
    ahead = list(phases[:k])
    behind = list(phases[:k])
    ahead[i - 1] += step
    behind[i - 1] -= step
    diff = (np.asarray(decomp.anti[k - 1](tuple(ahead), x), dtype=float)
            - np.asarray(decomp.anti[k - 1](tuple(behind), x), dtype=float))
    return diff / (2.0 * step)


def fluctuation(decomp: FieldDecomposition, k: int, phases: Sequence[float],
                x: np.ndarray) -> np.ndarray:
    _check_level(decomp.n, k)
    return np.asarray(decomp.fluct[k - 1](tuple(phases[:k]), x), dtype=float)


def periodicity_defect(field: MultiscaleField, samples: int = 10, seed: int = 2020) -> float:
    """Largest |f(.., t_k + 1, ..) - f(.., t_k, ..)| over random points."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        phases = rng.random(field.n)
        x = rng.uniform(-0.5, 0.5, field.d)
        base = field.eval(tuple(phases), x)
        for k in range(field.n):
            shifted = phases.copy()
            shifted[k] += 1.0
            worst = max(worst, util.max_norm(field.eval(tuple(shifted), x) - base))
    return worst


def validate_analytic(field: MultiscaleField, forms: AnalyticForms,
                      config: SolverConfig) -> dict[str, float]:
    """Checks closed forms at random points. Returns worst scaled residuals.

    Reconstruction, zero mean of every fluctuation, vanishing antiderivative
    at t_k = 1, antiderivative against Gauss-Legendre integration of the
    fluctuation and Jacobian against central differences are checked.
    """
    n, d = field.n, field.d
    for name in ("fluct", "anti", "anti_jac"):
        if len(getattr(forms, name)) != n:
            raise UAValidationError('Closed forms need {} {} functions, got {}'.format(
                n, name, len(getattr(forms, name))))
    rng = np.random.default_rng(config.seed)
    worst = {"reconstruction": 0.0, "zero_mean": 0.0, "periodicity": 0.0,
             "antiderivative": 0.0, "jacobian": 0.0}
    worst_point: dict[str, tuple[tuple[float, ...], list[float]]] = {}

    def record(name: str, value: float, phases: np.ndarray, x: np.ndarray) -> None:
        if value > worst[name]:
            worst[name] = value
            worst_point[name] = (tuple(phases), list(x))

    for _ in range(config.validation_points):
        phases = rng.random(n)
        x = rng.uniform(-0.5, 0.5, d)
        f = field.eval(tuple(phases), x)
        total = np.asarray(forms.mean(x), dtype=float)
        for k in range(1, n + 1):
            total = total + np.asarray(forms.fluct[k - 1](tuple(phases[:k]), x), dtype=float)
        record("reconstruction", util.max_norm(f - total) / max(1.0, util.max_norm(f)),
               phases, x)
        for k in range(1, n + 1):
            head = tuple(phases[:k - 1])
            fluct_k = forms.fluct[k - 1]
            anti_k = forms.anti[k - 1]
            mean = quadrature.periodic_mean(lambda s: np.asarray(fluct_k(head + (s, ), x)),
                                            ZERO_MEAN_NODES)
            record("zero_mean", util.max_norm(mean), phases, x)
            record("periodicity", util.max_norm(np.asarray(anti_k(head + (1.0, ), x))),
                   phases, x)
            t_k = phases[k - 1]
            integral = quadrature.integrate(lambda s: np.asarray(fluct_k(head + (s, ), x)),
                                            0.0, t_k, ANTI_CHECK_NODES)
            anti_value = np.asarray(anti_k(head + (t_k, ), x), dtype=float)
            record("antiderivative", util.max_norm(anti_value - integral), phases, x)
            jac = np.asarray(forms.anti_jac[k - 1](head + (t_k, ), x), dtype=float)
            fd = central_difference_jacobian(
                lambda z: np.asarray(anti_k(head + (t_k, ), z), dtype=float), x, 1e-4)
            record("jacobian", util.max_norm(jac - fd), phases, x)

    limits = {"reconstruction": RECONSTRUCTION_TOL, "zero_mean": CLOSED_FORM_TOL,
              "periodicity": CLOSED_FORM_TOL, "antiderivative": CLOSED_FORM_TOL,
              "jacobian": JACOBIAN_TOL}
    failed = [name for name, value in worst.items() if value > limits[name]]
    if failed:
        name = max(failed, key=lambda key: worst[key] / limits[key])
        raise UAValidationError(
            'Closed forms of {} failed self-check ({}). Worst residual {:.3e} for {} '
            'at phases={}, x={}'.format(field.name, ', '.join(failed), worst[name], name,
                                        *worst_point[name]))
    logger.debug('Closed forms of {} passed self-check: {}'.format(field.name, worst))
    return worst


def decompose(field: MultiscaleField, config: SolverConfig,
              analytic: Optional[AnalyticForms] = None) -> FieldDecomposition:
    """Builds the decomposition with the provider selected in ``config``.

    ``auto`` uses closed forms when they are given and quadrature otherwise.
    """
    provider = config.provider
    if provider == "auto":
        provider = "analytic" if analytic is not None else "numeric"
    defect = periodicity_defect(field, samples=max(1, config.validation_points // 4),
                                seed=config.seed)
    if defect > PERIODICITY_TOL:
        raise UAValidationError('Field {} is not 1-periodic in its phases, defect {:.3e}'.format(
            field.name, defect))
    if provider == "analytic":
        if analytic is None:
            raise UAValidationError('Analytic provider requested but {} has no closed '
                                    'forms'.format(field.name))
        validate_analytic(field, analytic, config)
        return FieldDecomposition(field, analytic.mean, tuple(analytic.fluct),
                                  tuple(analytic.anti), tuple(analytic.anti_jac), "analytic",
                                  config.quad_nodes, config.fd_dx)
    nodes = config.quad_nodes
    means, flucts = _cascade(field, nodes)
    antis = tuple(
        _numeric_anti(field, k, means[k + 1], nodes) for k in range(1, field.n + 1))
    jacs = tuple(_numeric_jac(field, antis[k - 1], config.fd_dx, k) for k in range(1, field.n + 1))
    mean_1 = means[1]
    logger.debug('Numeric decomposition of {} with {} nodes, dx={}'.format(
        field.name, nodes, config.fd_dx))
    return FieldDecomposition(field, lambda x: mean_1((), x), tuple(flucts), antis, jacs,
                              "numeric", nodes, config.fd_dx)


def collapsed_scale_mean(field: MultiscaleField, k: int, collapse: Collapse,
                         nodes: int = 8) -> PhaseFunc:
    """Mean over the two finest phases when their scales collapse.

    k is the index of the finer collapsed scale and must be n. The returned
    function takes the n-2 coarser phases. Rational collapse averages
    along the closed orbit (m1*s, m2*s), s in [0, 1); irrational collapse
    averages over the whole 2-torus.
    """
    if field.n < 2 or k != field.n:
        raise UAValidationError('Collapse applies to the two finest scales, got k={} for '
                                'n={}'.format(k, field.n))
    if isinstance(collapse, RationalCollapse):
        m1, m2 = collapse.m1, collapse.m2
        points, weights = quadrature.rectangle_rule(nodes * max(m1, m2))

        def rational_mean(phases: Sequence[float], x: np.ndarray) -> np.ndarray:
            head = tuple(phases[:k - 2])
            total = np.zeros(field.d)
            for s, w in zip(points, weights):
                total = total + w * field.eval(head + ((m1 * s) % 1.0, (m2 * s) % 1.0), x)
            return total

        return rational_mean
    if isinstance(collapse, IrrationalCollapse):
        points, weights = quadrature.rectangle_rule(nodes)

        def torus_mean(phases: Sequence[float], x: np.ndarray) -> np.ndarray:
            head = tuple(phases[:k - 2])
            total = np.zeros(field.d)
            for s1, w1 in zip(points, weights):
                for s2, w2 in zip(points, weights):
                    total = total + (w1 * w2) * field.eval(head + (s1, s2), x)
            return total

        return torus_mean
    raise UAValidationError('Unknown collapse {}'.format(collapse))


def collapse_field(field: MultiscaleField, eps: ScaleVector,
                   collapse: RationalCollapse) -> tuple[MultiscaleField, ScaleVector]:
    """Merges the two finest phases of a rationally collapsed field.

    The merged phase runs at scale m1 * eps_(n-1), so the returned field has
    n-1 phases and every downstream operation works unchanged.
    """
    if not isinstance(collapse, RationalCollapse):
        raise UAValidationError('Only rational collapse has a merged phase, use '
                                'collapsed_scale_mean for the torus average')
    if field.n < 2 or eps.n != field.n:
        raise UAValidationError('Collapse needs matching scales with n >= 2, got field n={} '
                                'and {} scales'.format(field.n, eps.n))
    expected = collapse.ratio * eps.eps[-2]
    if abs(eps.eps[-1] - expected) > 1e-9 * expected:
        raise UAValidationError('Scales {} do not satisfy eps_n = {}/{} * eps_(n-1)'.format(
            eps, collapse.m1, collapse.m2))
    m1, m2 = collapse.m1, collapse.m2
    inner = field.func

    def merged(phases: Sequence[float], x: np.ndarray) -> np.ndarray:
        theta = phases[-1]
        return inner(tuple(phases[:-1]) + ((m1 * theta) % 1.0, (m2 * theta) % 1.0), x)

    merged_scale = m1 * eps.eps[-2]
    # the merged phase must stay the finest one and a fast one
    if merged_scale >= 1.0 or (eps.n > 2 and merged_scale > eps.eps[-3]):
        raise UAValidationError('Merged scale {} * {} = {} breaks the ordering of {}'.format(
            m1, eps.eps[-2], merged_scale, eps))
    merged_field = MultiscaleField(field.d, field.n - 1, merged,
                                   '{} collapsed {}:{}'.format(field.name, m1, m2))
    return merged_field, eps.with_eps(eps.eps[:-2] + (merged_scale, ))
