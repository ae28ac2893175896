"""S-matrix, eigenphases and cross sections of the continuum barrier system."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import INFINITE, BarrierSpec, cos_sinc, derive_params, wave_terms
from .errors import DomainError, PoleProximityError
from .transfer import TransferMatrix2, limit_matrix

POLE_EPS = 1e-14


@dataclass(frozen=True)
class SMatrix:
    entries: np.ndarray  # maps (A_in_left, B_in_right) to (A_out_right, B_out_left)


@dataclass(frozen=True)
class PhaseShiftPair:
    lambda_plus: complex
    lambda_minus: complex
    delta_plus: float   # mod pi
    delta_minus: float

    @property
    def sigma_plus(self) -> float:
        return 2.0 * (1.0 - self.lambda_plus.real)

    @property
    def sigma_minus(self) -> float:
        return 2.0 * (1.0 - self.lambda_minus.real)


def _q22(Q: TransferMatrix2) -> complex:
    q22 = complex(Q.entries[1, 1])
    if abs(q22) < POLE_EPS:
        raise PoleProximityError(f"|Q22| = {abs(q22):.2e}; energy sits on a resonance pole")
    return q22


def s_matrix(Q: TransferMatrix2) -> SMatrix:
    q22 = _q22(Q)
    m = Q.entries
    return SMatrix(np.array([[1.0, m[0, 1]], [-m[1, 0], 1.0]]) / q22)


def eigenphases(Q: TransferMatrix2, ds: float | None = None) -> PhaseShiftPair:
    """Eigenvalues (1 +- i ds)/Q22 of the S-matrix and their half-phases.

    `ds` is the signed product d sin(phi)/phi. Without it only |Q12| is known
    and ds = |Q12| is used, which swaps the +/- labels whenever d < 0.
    """
    q22 = _q22(Q)
    if ds is None:
        ds = abs(Q.entries[0, 1])
    lp = (1 + 1j * ds) / q22
    lm = (1 - 1j * ds) / q22
    return PhaseShiftPair(lp, lm, _half_phase(lp), _half_phase(lm))


def _half_phase(lam: complex) -> float:
    return float(np.mod(np.angle(lam) / 2, np.pi))


def _signed_ds(spec: BarrierSpec, e: float) -> float:
    w = derive_params(spec, e)
    return float(w.d * cos_sinc(w.phi_sq)[1])


def phase_shifts(spec: BarrierSpec, e: float) -> PhaseShiftPair:
    spec = _limit_spec(spec)
    return eigenphases(limit_matrix(spec, e), _signed_ds(spec, e))


def _limit_spec(spec: BarrierSpec) -> BarrierSpec:
    return spec if not spec.is_finite else spec.with_n(INFINITE)


def cos_two_delta(a, b, v, e, m=0.5, hbar=1.0):
    """cos(2 delta_+), cos(2 delta_-) in closed form, vectorized over e."""
    k, _, _, _, _, f, d, p2 = wave_terms(a, b, v, e, m, hbar)
    cs, sc = cos_sinc(p2)
    z = k * (a + b)
    sz, cz = np.sin(z), np.cos(z)
    with np.errstate(over="ignore", invalid="ignore"):
        den = cs * cs + (f * sc) ** 2
        base = cz * cs + f * sz * sc
        odd = d * (sz * sc * cs - f * cz * sc * sc)
        plus, minus = (base + odd) / den, (base - odd) / den
        # strongly evanescent: divide through by (sinh|phi|/|phi|)^2 before it overflows
        deep = p2 < -1.0
        if np.any(deep):
            rt = np.sqrt(np.abs(p2))
            r = rt / np.tanh(rt)       # cosh / sinc
            u = rt / np.sinh(rt)       # 1 / sinc, underflows harmlessly to 0
            den_s = r * r + f * f
            base_s = cz * r * u + f * sz * u
            odd_s = d * (sz * r - f * cz)
            plus = np.where(deep, (base_s + odd_s) / den_s, plus)
            minus = np.where(deep, (base_s - odd_s) / den_s, minus)
    if np.ndim(plus) == 0:
        return plus[()], minus[()]
    return plus, minus


def cross_sections(spec: BarrierSpec, e: float) -> tuple[float, float]:
    """sigma_+ and sigma_- = 2 (1 - cos 2 delta)."""
    spec = _limit_spec(spec)
    derive_params(spec, e)  # validation
    cp, cm = cos_two_delta(spec.total_width_a, spec.total_gap_b, spec.height_v, e,
                           spec.mass_m, spec.hbar)
    return float(2 * (1 - cp)), float(2 * (1 - cm))


def cross_section_curve(spec: BarrierSpec, energies: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    e = np.asarray(energies, dtype=float)
    if np.any(e <= 0) or np.any(e == spec.height_v):
        raise DomainError("energies must be > 0 and differ from the barrier height")
    cp, cm = cos_two_delta(spec.total_width_a, spec.total_gap_b, spec.height_v, e,
                           spec.mass_m, spec.hbar)
    return 2 * (1 - cp), 2 * (1 - cm)


def peak_positions(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Interior local maxima of y on a uniform grid, refined by a 3-point parabola."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    i = np.where((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]))[0] + 1
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    den = y0 - 2 * y1 + y2
    shift = np.where(den != 0, 0.5 * (y0 - y2) / np.where(den != 0, den, 1), 0.0)
    return x[i] + shift * (x[1] - x[0])


def period_grid(e_min: float, e_max: float, samples_per_period: int = 20) -> np.ndarray:
    """Uniform grid with at least `samples_per_period` points per 4 pi^2 + 4 pi sqrt(e) at e_min."""
    period = 4 * np.pi ** 2 + 4 * np.pi * np.sqrt(e_min)
    n = int(np.ceil((e_max - e_min) / period * samples_per_period)) + 1
    return np.linspace(e_min, e_max, max(n, 3))


@dataclass(frozen=True)
class SaturationResult:
    b_star: float            # nan when the scan never settles
    b_values: np.ndarray
    metric: np.ndarray       # max over the e-grid of |sigma_+(b) - sigma_+(b + db)|


def cross_section_b_saturation(a: float, v: float, energies: Sequence[float], *,
                               step_fraction: float = 0.1, b_max_factor: float = 20.0,
                               tol: float = 1e-3, m: float = 0.5, hbar: float = 1.0) -> SaturationResult:
    """Smallest b on the scan beyond which sigma_+ stops changing with b."""
    e = np.asarray(energies, dtype=float)
    if e.size == 0:
        raise DomainError("energy grid is empty")
    if np.any(e <= 0) or np.any(e == v):
        raise DomainError("energies must be > 0 and differ from v")
    db = step_fraction * a
    bs = np.arange(0.0, b_max_factor * a + db / 2, db)
    sig = np.array([2 * (1 - cos_two_delta(a, b, v, e, m, hbar)[0]) for b in bs])
    metric = np.abs(np.diff(sig, axis=0)).max(axis=1)
    bvals = bs[:-1]
    settled = metric < tol
    # last index where the metric is still above tolerance
    bad = np.where(~settled)[0]
    if bad.size == 0:
        b_star = 0.0
    elif bad[-1] == len(metric) - 1:
        b_star = np.nan
    else:
        b_star = float(bvals[bad[-1] + 1])
    return SaturationResult(b_star, bvals, metric)
