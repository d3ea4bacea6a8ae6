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
"""Quadrature rules used by the averaging cascade and the time steppers.

Means over one period use the uniform rectangle rule, which is
spectrally accurate for smooth periodic integrands. Partial period
integrals of periodic functions integrate the trigonometric interpolant
on the same nodes; time step integrals use Gauss-Legendre nodes.
"""
from __future__ import annotations
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from UASolver.internal.exceptions import UAValidationError


def _frozen(*arrays: np.ndarray) -> tuple[np.ndarray, ...]:
    for a in arrays:
        a.setflags(write=False)
    return arrays


@lru_cache(maxsize=None)
def rectangle_rule(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform nodes j/N on [0, 1) with equal weights 1/N."""
    if nodes < 1:
        raise UAValidationError('Quadrature needs at least one node, got {}'.format(nodes))
    points = np.arange(nodes, dtype=float) / nodes
    weights = np.full(nodes, 1.0 / nodes)
    return _frozen(points, weights)  # type: ignore[return-value]


@lru_cache(maxsize=None)
def _gauss_legendre_reference(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    if nodes < 1:
        raise UAValidationError('Quadrature needs at least one node, got {}'.format(nodes))
    points, weights = leggauss(nodes)
    return _frozen(points, weights)  # type: ignore[return-value]


def gauss_legendre(nodes: int, a: float = 0.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [a, b]."""
    points, weights = _gauss_legendre_reference(nodes)
    half = 0.5 * (b - a)
    return a + half * (points + 1.0), half * weights


def periodic_mean(func: Callable[[float], np.ndarray], nodes: int) -> np.ndarray:
    """Mean of a 1-periodic function over one period."""
    points, weights = rectangle_rule(nodes)
    total = weights[0] * func(points[0])
    for s, w in zip(points[1:], weights[1:]):
        total = total + w * func(s)
    return total


def integrate(func: Callable[[float], np.ndarray], a: float, b: float, nodes: int) -> np.ndarray:
    """Integral of func over [a, b] with Gauss-Legendre nodes."""
    points, weights = gauss_legendre(nodes, a, b)
    total = weights[0] * func(points[0])
    for s, w in zip(points[1:], weights[1:]):
        total = total + w * func(s)
    return total


def periodic_antiderivative(samples: np.ndarray, t: float) -> np.ndarray:
    """Integral over [0, t] of the mean-free trigonometric interpolant of ``samples``.

    ``samples[j]`` is the value at j/N; rows may be vectors. The result is
    exactly 1-periodic in t.
    """
    samples = np.asarray(samples, dtype=float)
    nodes = samples.shape[0]
    coeffs = np.fft.rfft(samples, axis=0) / nodes
    if coeffs.shape[0] < 2:
        return np.zeros(samples.shape[1:])
    omega = 2.0 * np.pi * np.arange(1, coeffs.shape[0])
    weights = np.full(omega.size, 2.0)
    if nodes % 2 == 0:
        weights[-1] = 1.0
    factors = weights * (np.exp(1j * omega * t) - 1.0) / (1j * omega)
    return np.real(np.tensordot(factors, coeffs[1:], axes=(0, 0)))
