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
"""Benchmark problems with their closed form decompositions.

The Hamiltonian problems are written in rotating-frame variables w,
where each stiff pair (q_i, p_i) with frequency 1/eps is replaced by

    w_(2i-1) = cos(t/eps) q_i - sin(t/eps) p_i
    w_(2i)   = sin(t/eps) q_i + cos(t/eps) p_i

so the stiffness moves into the phases. Angles are written as
a_k = 2*pi*theta_k with theta_k 1-periodic, and the scale vectors of these
problems carry ``phase_scale=2*pi``. Means, fluctuations, antiderivatives
and Jacobians of the w-fields are derived once per process with sympy.
"""
from __future__ import annotations
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Optional, Sequence

import math
import numpy as np
import sympy as sp
from robot.api import logger
from sympy.simplify.fu import TR8
from UASolver.internal import util
from UASolver.internal.config import SolverConfig
from UASolver.internal.decomposition import (AnalyticForms, FieldDecomposition, MultiscaleField,
                                             PhaseFunc, decompose)
from UASolver.internal.exceptions import UAConfigurationError, UAValidationError
from UASolver.internal.meas import MEAS
from UASolver.internal.scales import ScaleVector

TWO_PI: float = 2.0 * math.pi


@dataclass(frozen=True)
class BenchmarkProblem:
    name: str
    scales: ScaleVector
    field: MultiscaleField
    analytic: Optional[AnalyticForms] = None
    x0: tuple[float, ...] = ()
    description: str = ""

    @property
    def d(self) -> int:
        return self.field.d

    @property
    def invariant(self) -> Optional[Callable[[np.ndarray, float], float]]:
        return None

    def decompose(self, cfg: SolverConfig) -> FieldDecomposition:
        return decompose(self.field, cfg, self.analytic)


@dataclass(frozen=True)
class HamiltonianProblem(BenchmarkProblem):
    """Hamiltonian system sum (p_i^2 + q_i^2) / (2 eps_i) + V(q).

    ``pair_scales[i]`` is the 1-based scale index of pair i, or None for
    the pair with unit frequency that is not rotated.
    """
    pair_scales: tuple[Optional[int], ...] = ()
    potential: Callable[..., float] = lambda *q: 0.0
    potential_grad: Callable[..., Sequence[float]] = lambda *q: ()

    @property
    def dof(self) -> int:
        return len(self.pair_scales)

    @property
    def invariant(self) -> Callable[[np.ndarray, float], float]:
        return lambda w, t: hamiltonian_value(self, w, t)

    def _frequency_scale(self, i: int) -> float:
        k = self.pair_scales[i]
        return 1.0 if k is None else self.scales.eps[k - 1]

    def _angle(self, i: int, t: float) -> float:
        k = self.pair_scales[i]
        return 0.0 if k is None else TWO_PI * self.scales.phase(t, k)

    def hamiltonian(self, p: Sequence[float], q: Sequence[float]) -> float:
        quadratic = sum((p[i]**2 + q[i]**2) / (2.0 * self._frequency_scale(i))
                        for i in range(self.dof))
        return float(quadratic + self.potential(*q))

    def to_w(self, p: Sequence[float], q: Sequence[float], t: float) -> np.ndarray:
        w = np.empty(2 * self.dof)
        for i in range(self.dof):
            phi = self._angle(i, t)
            c, s = math.cos(phi), math.sin(phi)
            w[2 * i] = c * q[i] - s * p[i]
            w[2 * i + 1] = s * q[i] + c * p[i]
        return w

    def from_w(self, w: Sequence[float], t: float) -> tuple[np.ndarray, np.ndarray]:
        p, q = np.empty(self.dof), np.empty(self.dof)
        for i in range(self.dof):
            phi = self._angle(i, t)
            c, s = math.cos(phi), math.sin(phi)
            q[i] = c * w[2 * i] + s * w[2 * i + 1]
            p[i] = -s * w[2 * i] + c * w[2 * i + 1]
        return p, q

    def canonical_field(self, p: Sequence[float],
                        q: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
        """(dp/dt, dq/dt) of the original stiff system."""
        grad = np.asarray(self.potential_grad(*q), dtype=float)
        scales = np.array([self._frequency_scale(i) for i in range(self.dof)])
        p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
        return -q / scales - grad, p / scales


def hamiltonian_value(problem: HamiltonianProblem, w: Sequence[float], t: float) -> float:
    """H(from_w(w, t))."""
    p, q = problem.from_w(w, t)
    return problem.hamiltonian(p, q)


@dataclass(frozen=True)
class _Derivation:
    field: PhaseFunc
    forms: AnalyticForms
    potential: Callable[..., float]
    potential_grad: Callable[..., Sequence[float]]


def _linearize(expr: sp.Expr) -> sp.Expr:
    """Products and powers of sines and cosines as sums of single harmonics."""
    return sp.expand(TR8(sp.expand(expr)))


def _split_harmonic(term: sp.Expr, angle: sp.Symbol) -> Optional[tuple[sp.Expr, Any, Any, Any]]:
    """term = coeff * trig(c * angle + shift) as (coeff, trig, c, shift).

    trig is None for terms free of the angle, the result None for anything
    that is not a single harmonic.
    """
    coeff, rest = term.as_independent(angle, as_Add=False)
    if rest == 1:
        return coeff, None, 0, 0
    if isinstance(rest, (sp.sin, sp.cos)):
        arg = rest.args[0]
        c = arg.coeff(angle)
        shift = sp.expand(arg - c * angle)
        if c.is_number and c != 0 and not shift.has(angle):
            return coeff, type(rest), c, shift
    return None


def _angle_mean(expr: sp.Expr, angle: sp.Symbol) -> sp.Expr:
    """Average over angle in [0, 2 pi]; harmonics with c != 0 average to zero."""
    total = sp.S.Zero
    for term in sp.Add.make_args(expr):
        split = _split_harmonic(term, angle)
        if split is None:
            total += sp.integrate(term, (angle, 0, 2 * sp.pi)) / (2 * sp.pi)
        elif split[1] is None:
            total += term
    return _linearize(total)


def _angle_antiderivative(expr: sp.Expr, angle: sp.Symbol) -> sp.Expr:
    # theta-integral from 0 to theta equals angle-integral over [0, a] / (2 pi)
    total = sp.S.Zero
    for term in sp.Add.make_args(expr):
        split = _split_harmonic(term, angle)
        if split is None or split[1] is None:
            u = sp.Dummy("u")
            total += sp.integrate(term.subs(angle, u), (u, 0, angle))
            continue
        coeff, trig, c, shift = split
        if trig is sp.sin:
            total += coeff * (sp.cos(shift) - sp.cos(c * angle + shift)) / c
        else:
            total += coeff * (sp.sin(c * angle + shift) - sp.sin(shift)) / c
    return _linearize(total / (2 * sp.pi))


def _compile(args: Sequence[sp.Symbol], exprs: Any) -> Callable[..., Any]:
    return sp.lambdify(list(args), exprs, modules="math", cse=True)


def _phase_function(fn: Callable[..., Any], k: int) -> PhaseFunc:

    def evaluate(phases: Sequence[float], x: np.ndarray) -> np.ndarray:
        return np.array(fn(*[TWO_PI * p for p in phases[:k]], *x), dtype=float)

    return evaluate


def _derive(name: str, w: Sequence[sp.Symbol], angles: Sequence[sp.Symbol],
            exprs: Sequence[sp.Expr], q: Sequence[sp.Symbol], potential: sp.Expr) -> _Derivation:
    n = len(angles)
    with MEAS.measure('closed forms of {}'.format(name)):
        upper = [_linearize(e) for e in exprs]
        field = _phase_function(_compile(list(angles) + list(w), list(exprs)), n)
        fluct: list[PhaseFunc] = [field] * n
        anti: list[PhaseFunc] = [field] * n
        jac: list[PhaseFunc] = [field] * n
        for k in range(n, 0, -1):
            angle = angles[k - 1]
            args = list(angles[:k]) + list(w)
            mean_k = [_angle_mean(e, angle) for e in upper]
            fluct_k = [sp.expand(a - b) for a, b in zip(upper, mean_k)]
            anti_k = [_angle_antiderivative(e, angle) for e in fluct_k]
            jac_k = sp.Matrix(anti_k).jacobian(list(w))
            fluct[k - 1] = _phase_function(_compile(args, fluct_k), k)
            anti[k - 1] = _phase_function(_compile(args, anti_k), k)
            jac[k - 1] = _phase_function(_compile(args, jac_k.tolist()), k)
            upper = mean_k
        mean_fn = _compile(list(w), upper)
        logger.debug('Mean field of {}: {}'.format(name, upper))
    forms = AnalyticForms(mean=lambda x: np.array(mean_fn(*x), dtype=float), fluct=tuple(fluct),
                          anti=tuple(anti), anti_jac=tuple(jac))
    grad = [sp.diff(potential, qi) for qi in q]
    return _Derivation(field, forms, _compile(q, potential), _compile(q, grad))


@lru_cache(maxsize=None)
def _henon_heiles_3scale_forms() -> _Derivation:
    w1, w2, w3, w4, w5, w6 = w = sp.symbols("w1:7")
    a1, a2 = angles = sp.symbols("a1 a2")
    q1, q2, q3 = q = sp.symbols("q1:4")
    Q1 = w1 * sp.cos(a2) + w2 * sp.sin(a2)
    Q2 = w3 * sp.cos(a1) + w4 * sp.sin(a1)
    force_2 = 2 * Q2 * w5 + Q1**2 - Q2**2
    exprs = [
        2 * sp.sin(a2) * Q1 * Q2,
        -2 * sp.cos(a2) * Q1 * Q2,
        sp.sin(a1) * force_2,
        -sp.cos(a1) * force_2,
        w6,
        w5**2 - w5 - Q2**2,
    ]
    potential = q1**2 * q2 - q2**3 / 3 + q2**2 * q3 - q3**3 / 3
    return _derive("hh3", w, angles, exprs, q, potential)


@lru_cache(maxsize=None)
def _hamiltonian_4scale_forms() -> _Derivation:
    w1, w2, w3, w4, w5, w6, w7, w8 = w = sp.symbols("w1:9")
    a1, a2, a3 = angles = sp.symbols("a1:4")
    q1, q2, q3, q4 = q = sp.symbols("q1:5")
    Q1 = w1 * sp.cos(a3) + w2 * sp.sin(a3)
    Q2 = w3 * sp.cos(a2) + w4 * sp.sin(a2)
    Q3 = w5 * sp.cos(a1) + w6 * sp.sin(a1)
    force_2 = Q1**2 + 2 * Q2 * Q3 - Q2**2
    force_3 = Q2**2 + 2 * Q3 * w7 - Q3**2
    exprs = [
        2 * sp.sin(a3) * Q1 * Q2,
        -2 * sp.cos(a3) * Q1 * Q2,
        sp.sin(a2) * force_2,
        -sp.cos(a2) * force_2,
        sp.sin(a1) * force_3,
        -sp.cos(a1) * force_3,
        w8,
        w7**2 - w7 - Q3**2,
    ]
    potential = q1**2 * q2 + q2**2 * q3 + q3**2 * q4 - q2**3 / 3 - q3**3 / 3 - q4**3 / 3
    return _derive("hh4", w, angles, exprs, q, potential)


def henon_heiles_3scale(eps1: float, eps2: float) -> HamiltonianProblem:
    """Three-scale Henon-Heiles system in rotating-frame variables.

    (q1, p1) rotates at 1/eps2, (q2, p2) at 1/eps1 and (q3, p3) is slow.
    """
    scales = ScaleVector((eps1, eps2), phase_scale=TWO_PI)
    forms = _henon_heiles_3scale_forms()
    return HamiltonianProblem(name="hh3",
                              scales=scales,
                              field=MultiscaleField(6, 2, forms.field, "hh3"),
                              analytic=forms.forms,
                              x0=(0.12, ) * 6,
                              description="Three-scale Henon-Heiles system, w in R^6",
                              pair_scales=(2, 1, None),
                              potential=forms.potential,
                              potential_grad=forms.potential_grad)


def hamiltonian_4scale(eps1: float, eps2: float, eps3: float) -> HamiltonianProblem:
    """Four-scale Hamiltonian chain in rotating-frame variables.

    Pairs 1, 2 and 3 rotate at 1/eps3, 1/eps2 and 1/eps1; (q4, p4) is slow.
    """
    scales = ScaleVector((eps1, eps2, eps3), phase_scale=TWO_PI)
    forms = _hamiltonian_4scale_forms()
    return HamiltonianProblem(name="hh4",
                              scales=scales,
                              field=MultiscaleField(8, 3, forms.field, "hh4"),
                              analytic=forms.forms,
                              x0=(0.44, ) * 8,
                              description="Four-scale Hamiltonian chain, w in R^8",
                              pair_scales=(3, 2, 1, None),
                              potential=forms.potential,
                              potential_grad=forms.potential_grad)


def _exp_sin(phases: Sequence[float], x: np.ndarray) -> np.ndarray:
    rate = 1.5 - math.exp(math.sin(TWO_PI * phases[0]) + math.sin(TWO_PI * phases[1]))
    return rate * np.asarray(x, dtype=float)


def exp_sin_scalar(eps1: float, eps2: float) -> BenchmarkProblem:
    """x' = (1.5 - exp(sin(2 pi t/eps1) + sin(2 pi t/eps2))) x.

    No closed forms, the decomposition is always built by quadrature.
    """
    return BenchmarkProblem(name="expsin",
                            scales=ScaleVector((eps1, eps2)),
                            field=MultiscaleField(1, 2, _exp_sin, "expsin"),
                            x0=(0.48, ),
                            description="Scalar ODE with exp-sin coefficient")


def _zero_phase_function(d: int) -> PhaseFunc:
    return lambda phases, x: np.zeros(d)


def linear_decay(eps1: float = 0.1, eps2: float = 0.01, d: int = 1) -> BenchmarkProblem:
    """x' = -x written as a two-scale field without fluctuations."""
    d = util.positive_int(d)
    zero_vector = _zero_phase_function(d)
    forms = AnalyticForms(mean=lambda x: -np.asarray(x, dtype=float),
                          fluct=(zero_vector, zero_vector),
                          anti=(zero_vector, zero_vector),
                          anti_jac=(lambda phases, x: np.zeros((d, d)), ) * 2)
    return BenchmarkProblem(name="linear-decay",
                            scales=ScaleVector((eps1, eps2)),
                            field=MultiscaleField(d, 2, lambda phases, x: -np.asarray(
                                x, dtype=float), "linear-decay"),
                            analytic=forms,
                            x0=(1.0, ) * d,
                            description="Linear decay without fluctuations (sanity field)")


@dataclass(frozen=True)
class ProblemEntry:
    name: str
    builder: Callable[..., BenchmarkProblem]
    default_eps: tuple[float, ...]
    description: str

    def build(self, eps: Optional[Sequence[float]] = None) -> BenchmarkProblem:
        values = tuple(eps) if eps is not None else self.default_eps
        if len(values) != len(self.default_eps):
            raise UAValidationError('Problem {} takes {} scales, got {}'.format(
                self.name, len(self.default_eps), len(values)))
        return self.builder(*values)


PROBLEMS: dict[str, ProblemEntry] = {
    "hh3": ProblemEntry("hh3", henon_heiles_3scale, (0.1, 0.01),
                        "Three-scale Henon-Heiles system (6 dim, analytic)"),
    "hh4": ProblemEntry("hh4", hamiltonian_4scale, (1e-3, 1.1e-4, 3e-6),
                        "Four-scale Hamiltonian chain (8 dim, analytic)"),
    "expsin": ProblemEntry("expsin", exp_sin_scalar, (7e-2, 1.1e-4),
                           "Scalar exp-sin ODE (1 dim, numeric)"),
    "linear-decay": ProblemEntry("linear-decay", linear_decay, (0.1, 0.01),
                                 "Linear decay without fluctuations (1 dim, analytic)"),
}


def get_problem(name: str, eps: Optional[Sequence[float]] = None) -> BenchmarkProblem:
    """Builds registered problem ``name`` at scales ``eps`` (defaults when None)."""
    entry = PROBLEMS.get(str(name).strip().lower())
    if entry is None:
        raise UAConfigurationError('Unknown problem {}. Available: {}'.format(
            name, ', '.join(PROBLEMS)))
    return entry.build(eps)
