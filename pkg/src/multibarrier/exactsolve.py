"""Exact boundary-matching solve for a finite number of barriers.

Unknowns, left to right: A (reflected), then a coefficient pair for every
barrier and every gap, then Z (transmitted). The barrier runs from x=0 to
x=a+b. Every region uses basis functions anchored at its own edges, so an
evanescent pair e^{q(x-x_r)}, e^{-q(x-x_l)} never exceeds 1 in magnitude.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .core import INFINITE, BarrierCount, BarrierSpec, Regime, derive_params, spec_from_length_ratio
from .errors import DomainError, IllConditionedError, MultiBarrierError
from .transfer import transmission_limit

COND_LIMIT = 1e12


@dataclass(frozen=True)
class BoundarySystem:
    dimension: int
    matrix: np.ndarray
    rhs: np.ndarray
    warning: str | None = None


@dataclass(frozen=True)
class FiniteNSolution:
    amplitudes: np.ndarray
    reflection_R: float
    transmission_T: float
    condition: float
    warning: str | None = None


def _barrier_basis(q: float, over: bool, width: float, x: float):
    """(values, derivatives) of the two barrier basis functions at local x in [0, width]."""
    if over:
        ep, em = np.exp(1j * q * x), np.exp(-1j * q * x)
        return (ep, em), (1j * q * ep, -1j * q * em)
    ep, em = np.exp(q * (x - width)), np.exp(-q * x)
    return (ep, em), (q * ep, -q * em)


def _free_basis(k: float, x: float):
    ep, em = np.exp(1j * k * x), np.exp(-1j * k * x)
    return (ep, em), (1j * k * ep, -1j * k * em)


def build_system(spec: BarrierSpec, e: float, conjugate: bool = False) -> BoundarySystem:
    """4N x 4N matching conditions: value and slope at each of the 2N interfaces.

    conjugate=True rebuilds with the time-reversed plane-wave convention (k -> -k,
    and q -> -q for oscillatory barriers); T must not change.
    """
    if not spec.is_finite:
        raise DomainError("build_system needs a finite barrier count")
    w = derive_params(spec, e)
    N = spec.n_barriers
    over = w.regime is Regime.OVER
    k = -w.k if conjugate else w.k
    q = -w.q if (conjugate and over) else w.q
    width, gap = spec.barrier_width, spec.gap_width
    warning = None
    if N == 1 and spec.total_gap_b > 0:
        warning = "single barrier: total_gap_b is unused"

    n = 4 * N
    M = np.zeros((n, n), dtype=complex)
    rhs = np.zeros(n, dtype=complex)
    # x = 0: e^{ikx} + A e^{-ikx} meets barrier 1
    M[0, 0], M[1, 0] = 1.0, -1j * k
    rhs[0], rhs[1] = -1.0, -1j * k
    (v0, v1), (d0, d1) = _barrier_basis(q, over, width, 0.0)
    M[0, 1], M[0, 2], M[1, 1], M[1, 2] = -v0, -v1, -d0, -d1

    col = 1
    for j in range(N):
        r = 2 + 4 * j
        (v0, v1), (d0, d1) = _barrier_basis(q, over, width, width)
        M[r, col], M[r, col + 1], M[r + 1, col], M[r + 1, col + 1] = v0, v1, d0, d1
        if j == N - 1:
            # transmitted wave Z e^{ik(x-(a+b))}
            M[r, col + 2], M[r + 1, col + 2] = -1.0, -1j * k
            break
        (g0, g1), (h0, h1) = _free_basis(k, 0.0)
        M[r, col + 2], M[r, col + 3], M[r + 1, col + 2], M[r + 1, col + 3] = -g0, -g1, -h0, -h1
        (g0, g1), (h0, h1) = _free_basis(k, gap)
        (v0, v1), (d0, d1) = _barrier_basis(q, over, width, 0.0)
        M[r + 2, col + 2], M[r + 2, col + 3] = g0, g1
        M[r + 3, col + 2], M[r + 3, col + 3] = h0, h1
        M[r + 2, col + 4], M[r + 2, col + 5] = -v0, -v1
        M[r + 3, col + 4], M[r + 3, col + 5] = -d0, -d1
        col += 4

    # scale each interface pair of rows; the first pair only holds O(k, q)
    # entries and stays unscaled so the right side keeps its plain form
    for r in range(2, n, 2):
        s = max(1.0, np.abs(M[r:r + 2]).max())
        M[r:r + 2] /= s
        rhs[r:r + 2] /= s
    return BoundarySystem(n, M, rhs, warning)


def condition_estimate(lu_piv, matrix: np.ndarray) -> float:
    lu, _ = lu_piv
    anorm = np.abs(matrix).sum(axis=0).max()
    rcond, info = lapack.zgecon(lu, anorm, norm="1")
    if info != 0 or rcond == 0:
        return np.inf
    return 1.0 / rcond


def solve_amplitudes(spec: BarrierSpec, e: float, conjugate: bool = False) -> FiniteNSolution:
    system = build_system(spec, e, conjugate=conjugate)
    lu_piv = sla.lu_factor(system.matrix, check_finite=True)
    cond = condition_estimate(lu_piv, system.matrix)
    if not cond < COND_LIMIT:
        raise IllConditionedError("boundary system is numerically singular", cond)
    x = sla.lu_solve(lu_piv, system.rhs)
    return FiniteNSolution(x, float(abs(x[0]) ** 2), float(abs(x[-1]) ** 2), cond, system.warning)


@dataclass(frozen=True)
class SweepTemplate:
    """Fixed parameters of a sweep. Sweeping `a` keeps c fixed, so b = c a."""

    n_barriers: BarrierCount
    length_L: float
    ratio_c: float
    height_v: float
    energy_e: float
    mass_m: float = 0.5
    hbar: float = 1.0

    def spec(self) -> BarrierSpec:
        return spec_from_length_ratio(self.length_L, self.ratio_c, self.n_barriers,
                                      self.height_v, self.mass_m, self.hbar)


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    T: float
    R: float
    flag: str = ""


SWEEP_AXES = ("c", "a", "N", "e")


def _point(template: SweepTemplate, axis: str, value: float) -> tuple[SweepTemplate, float]:
    if axis == "c":
        return dataclasses.replace(template, ratio_c=value), template.energy_e
    if axis == "a":
        return dataclasses.replace(template, length_L=value * (1 + template.ratio_c)), template.energy_e
    if axis == "N":
        if value != int(value):
            raise DomainError(f"N must be an integer, got {value}")
        return dataclasses.replace(template, n_barriers=int(value)), template.energy_e
    return template, value


def transmission_sweep(template: SweepTemplate, axis: str, grid: Sequence[float]) -> list[SweepRow]:
    """T and R along one axis. Finite N uses the exact solve, INFINITE the closed form.

    Points that fail are kept as flagged rows with NaN values.
    """
    if axis not in SWEEP_AXES:
        raise DomainError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
    rows = []
    for value in grid:
        value = float(value)
        try:
            tpl, e = _point(template, axis, value)
            spec = tpl.spec()
            if spec.n_barriers is INFINITE:
                T = transmission_limit(spec, e)
                rows.append(SweepRow(axis, value, T, 1.0 - T))
            else:
                sol = solve_amplitudes(spec, e)
                rows.append(SweepRow(axis, value, sol.transmission_T, sol.reflection_R,
                                     "b_unused" if sol.warning else ""))
        except MultiBarrierError as exc:
            rows.append(SweepRow(axis, value, np.nan, np.nan, type(exc).__name__))
    return rows
