"""Levels of the continuum barrier system in a periodic box and their spacing statistics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from .core import BarrierSpec, check_energy, cos_sinc, wave_terms
from .errors import DomainError, InsufficientDataError

RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class QuantizationProblem:
    spec: BarrierSpec
    box_half_width_C: float
    e_min: float
    e_max: float
    regime: str = "both"   # "both", "over" or "under"
    points_per_period: int = 40

    def __post_init__(self):
        if not self.box_half_width_C > self.spec.length_L:
            raise DomainError("box half-width C must exceed the system length L")
        if not 0 < self.e_min < self.e_max:
            raise DomainError("need 0 < e_min < e_max")
        if self.regime not in ("both", "over", "under"):
            raise DomainError(f"unknown regime filter {self.regime!r}")
        if self.points_per_period < 8:
            raise DomainError("points_per_period must be at least 8")


@dataclass(frozen=True)
class LevelSet:
    energies: np.ndarray
    unfolded: np.ndarray | None = None
    spacings: np.ndarray | None = None
    residuals: np.ndarray | None = field(default=None, repr=False)


def _terms(problem: QuantizationProblem, e):
    s = problem.spec
    k, _, _, _, _, f, d, p2 = wave_terms(s.total_width_a, s.total_gap_b, s.height_v, e,
                                         s.mass_m, s.hbar)
    cs, sc = cos_sinc(p2)
    return k, f, d, cs, sc, k * s.length_L


def _residual_and_scale(problem: QuantizationProblem, e):
    """Expanded periodic-box determinant and the sum of its term magnitudes."""
    k, f, d, cs, sc, z = _terms(problem, e)
    K = 2 * k * problem.box_half_width_C
    with np.errstate(over="ignore", invalid="ignore"):
        A = 1 + (d * sc) ** 2
        B = cs * cs - (f * sc) ** 2
        F = 2 * f * sc
        re = (np.cos(2 * K) * A + np.cos(2 * z) * B
              + F * (np.sin(2 * z) * cs - np.sin(K + z)) - 2 * np.cos(K + z) * cs)
        im = (np.sin(2 * K) * A + np.sin(2 * z) * B
              + F * (np.cos(K + z) - np.cos(2 * z) * cs) - 2 * np.sin(K + z) * cs)
        scale = np.abs(A) + np.abs(B) + 2 * np.abs(F) + 2 * np.abs(cs)
    return re + 1j * im, scale


def quantization_residual(problem: QuantizationProblem, e: float) -> complex:
    check_energy(problem.spec, e)
    r, _ = _residual_and_scale(problem, float(e))
    return complex(r)


def relative_residual(problem: QuantizationProblem, e) -> np.ndarray:
    r, scale = _residual_and_scale(problem, e)
    return np.abs(r) / scale


def _grid(problem: QuantizationProblem) -> np.ndarray:
    """Uniform in k: the determinant oscillates as 4kC, so each period pi/(2C) in k
    gets `points_per_period` samples."""
    s = problem.spec
    scale = np.sqrt(2 * s.mass_m) / s.hbar
    k_lo, k_hi = scale * np.sqrt(problem.e_min), scale * np.sqrt(problem.e_max)
    dk = np.pi / (2 * problem.box_half_width_C) / problem.points_per_period
    n = int(np.ceil((k_hi - k_lo) / dk)) + 1
    e = (np.linspace(k_lo, k_hi, n) / scale) ** 2
    e[0], e[-1] = problem.e_min, problem.e_max
    return e[e != s.height_v]


def box_eigenvalues(problem: QuantizationProblem, e):
    """mu_+- = e^{2ikC} lambda_+-; the box determinant equals Q22^2 (mu_+ - 1)(mu_- - 1)."""
    k, f, d, cs, sc, z = _terms(problem, e)
    with np.errstate(over="ignore", invalid="ignore"):
        q22 = np.exp(1j * z) * (cs - 1j * f * sc)
        ph = np.exp(2j * k * problem.box_half_width_C)
        return ph * (1 + 1j * d * sc) / q22, ph * (1 - 1j * d * sc) / q22


def find_levels(problem: QuantizationProblem) -> LevelSet:
    """Real energies where the real and imaginary parts of the box determinant both vanish.

    Brackets come from the factored form: each unimodular mu_+- passes through 1
    where its imaginary part changes sign with positive real part. Each bracket
    is refined with Brent's method, and only energies whose relative residual in
    the expanded determinant is at most 1e-8 are kept.
    """
    e = _grid(problem)
    found = []
    for branch in (0, 1):
        mu = box_eigenvalues(problem, e)[branch]
        im, re = mu.imag, mu.real
        idx = np.where((np.sign(im[:-1]) != np.sign(im[1:])) & (re[:-1] > 0) & (re[1:] > 0))[0]
        fun = lambda x, b=branch: float(box_eigenvalues(problem, x)[b].imag)
        for i in idx:
            lo, hi = e[i], e[i + 1]
            x = lo if im[i] == 0 else brentq_safe(fun, lo, hi)
            found.append(x)
    ev = np.sort(np.array(found, dtype=float))
    rv = relative_residual(problem, ev) if ev.size else np.zeros(0)
    ok = rv <= RESIDUAL_TOL
    ev, rv = ev[ok], rv[ok]
    v = problem.spec.height_v
    if problem.regime == "over":
        keep = ev > v
    elif problem.regime == "under":
        keep = ev < v
    else:
        keep = np.ones(ev.shape, bool)
    ev, rv = ev[keep], rv[keep]
    if ev.size > 1:
        distinct = np.concatenate([[True], np.diff(ev) > 1e-8 * np.maximum(1.0, ev[1:])])
        ev, rv = ev[distinct], rv[distinct]
    return LevelSet(ev, residuals=rv)


def brentq_safe(fun, lo, hi):
    return optimize.brentq(fun, lo, hi, xtol=1e-15 * max(1.0, abs(hi)), rtol=4 * np.finfo(float).eps,
                           maxiter=200)


def unfold(levels: LevelSet | np.ndarray, degree: int = 5) -> LevelSet:
    """Map levels through a polynomial fit of the cumulative staircase.

    Unfolded values are rescaled so that their spacings have mean exactly 1.
    """
    e = np.asarray(levels.energies if isinstance(levels, LevelSet) else levels, dtype=float)
    if e.size < 20:
        raise InsufficientDataError(f"unfolding needs at least 20 levels, got {e.size}")
    if np.any(np.diff(e) <= 0):
        raise DomainError("levels must be strictly increasing")
    staircase = np.arange(1, e.size + 1, dtype=float)
    fit = np.polynomial.Polynomial.fit(e, staircase, degree)
    u = fit(e)
    raw = np.diff(u)
    u = u / raw.mean()
    s = np.diff(u)
    res = levels.residuals if isinstance(levels, LevelSet) else None
    return LevelSet(e, u, s, res)


def wigner_pdf(s):
    return 0.5 * np.pi * s * np.exp(-0.25 * np.pi * s * s)


def wigner_cdf(s):
    return 1 - np.exp(-0.25 * np.pi * np.asarray(s) ** 2)


def poisson_pdf(s):
    return np.exp(-s)


def poisson_cdf(s):
    return 1 - np.exp(-np.asarray(s))


@dataclass(frozen=True)
class SpacingStatistics:
    bin_edges: np.ndarray
    density: np.ndarray
    wigner_distance: float
    poisson_distance: float
    count: int


def spacing_statistics(levels: LevelSet | np.ndarray, bins: int = 20,
                       s_max: float | None = None) -> SpacingStatistics:
    """Normalized spacing histogram and KS distances to the Wigner and Poisson laws."""
    if bins < 4:
        raise DomainError("need at least 4 bins")
    s = levels.spacings if isinstance(levels, LevelSet) else np.asarray(levels, float)
    if s is None:
        raise DomainError("levels are not unfolded")
    s = np.asarray(s, float)
    if s.size == 0:
        raise InsufficientDataError("no spacings")
    top = s_max if s_max is not None else max(4.0, float(s.max()))
    dens, edges = np.histogram(s, bins=bins, range=(0.0, top), density=True)
    return SpacingStatistics(edges, dens,
                             float(stats.kstest(s, wigner_cdf).statistic),
                             float(stats.kstest(s, poisson_cdf).statistic),
                             int(s.size))
