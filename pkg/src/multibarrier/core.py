"""Geometry of N identical barriers in a fixed interval and per-energy wave quantities.

Units default to hbar = 1, m = 1/2, so that k = sqrt(e) and q = sqrt(|e - v|).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from .errors import DomainError, SingularParameterError


class _Infinite:
    """Marker for the continuum limit N -> infinity."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITE"

    def __reduce__(self):
        return (_Infinite, ())


INFINITE = _Infinite()
BarrierCount = Union[int, _Infinite]


class Regime(enum.Enum):
    OVER = "over"    # e > v, oscillatory inside the barriers
    UNDER = "under"  # e < v, evanescent inside the barriers


def _positive(name: str, value: float, allow_zero: bool = False) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value}")
    if value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise DomainError(f"{name} must be {bound}, got {value}")
    return value


@dataclass(frozen=True)
class BarrierSpec:
    """N barriers of total width a and N-1 equal gaps of total width b, height v."""

    n_barriers: BarrierCount
    total_width_a: float
    total_gap_b: float
    height_v: float
    mass_m: float = 0.5
    hbar: float = 1.0

    def __post_init__(self):
        n = self.n_barriers
        if n is not INFINITE:
            if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
                raise DomainError(f"n_barriers must be a positive integer or INFINITE, got {n!r}")
            object.__setattr__(self, "n_barriers", int(n))
        object.__setattr__(self, "total_width_a", _positive("total_width_a", self.total_width_a))
        object.__setattr__(self, "total_gap_b", _positive("total_gap_b", self.total_gap_b, allow_zero=True))
        object.__setattr__(self, "height_v", _positive("height_v", self.height_v))
        object.__setattr__(self, "mass_m", _positive("mass_m", self.mass_m))
        object.__setattr__(self, "hbar", _positive("hbar", self.hbar))

    @property
    def is_finite(self) -> bool:
        return self.n_barriers is not INFINITE

    @property
    def length_L(self) -> float:
        return self.total_width_a + self.total_gap_b

    @property
    def ratio_c(self) -> float:
        return self.total_gap_b / self.total_width_a

    @property
    def barrier_width(self) -> float:
        """Width a/N of one barrier."""
        self._require_finite()
        return self.total_width_a / self.n_barriers

    @property
    def gap_width(self) -> float:
        """Width b/(N-1) of one gap; zero for a single barrier."""
        self._require_finite()
        if self.n_barriers == 1:
            return 0.0
        return self.total_gap_b / (self.n_barriers - 1)

    def with_n(self, n: BarrierCount) -> "BarrierSpec":
        return replace(self, n_barriers=n)

    def _require_finite(self):
        if not self.is_finite:
            raise DomainError("operation needs a finite barrier count")


def spec_from_length_ratio(L: float, c: float, n_barriers: BarrierCount = INFINITE,
                           v: float = 1.0, m: float = 0.5, hbar: float = 1.0) -> BarrierSpec:
    """Split a fixed length L into barriers and gaps with gap/barrier ratio c."""
    L = _positive("L", L)
    c = _positive("c", c, allow_zero=True)
    a = L / (1.0 + c)
    b = L * c / (1.0 + c)
    return BarrierSpec(n_barriers, a, b, v, m, hbar)


@dataclass(frozen=True)
class WaveParams:
    energy_e: float
    k: float
    q: float
    regime: Regime
    xi: float
    eta: float
    f: float
    d: float
    phi: complex
    z: float

    @property
    def phi_sq(self) -> float:
        return self.f * self.f - self.d * self.d


def wave_terms(a, b, v, e, m=0.5, hbar=1.0):
    """Vectorized (k, q, over, xi, eta, f, d, phi_sq) for arrays of energies.

    No validation; callers are responsible for e > 0 and e != v.
    """
    e = np.asarray(e, dtype=float)
    k = np.sqrt(2.0 * m * e) / hbar
    q = np.sqrt(2.0 * m * np.abs(e - v)) / hbar
    xi = q / k + k / q
    eta = q / k - k / q
    over = e > v
    f = np.where(over, k * b + a * q * xi / 2, k * b - a * q * eta / 2)
    d = np.where(over, a * q * eta / 2, a * q * xi / 2)
    return k, q, over, xi, eta, f, d, f * f - d * d


def cos_sinc(phi_sq):
    """cos(phi) and sin(phi)/phi as functions of phi**2.

    Both are even in phi, so no branch choice is needed. Negative real phi**2
    gives cosh and sinh/x. A Taylor series takes over for |phi| < 1e-4.
    """
    p2 = np.asarray(phi_sq)
    if np.iscomplexobj(p2):
        root = np.sqrt(p2)
        with np.errstate(all="ignore"):
            cs = np.cos(root)
            sc = np.where(root == 0, 1.0, np.sin(root) / np.where(root == 0, 1.0, root))
    else:
        root = np.sqrt(np.abs(p2))
        safe = np.where(root == 0, 1.0, root)
        with np.errstate(all="ignore"):
            cs = np.where(p2 >= 0, np.cos(root), np.cosh(root))
            sc = np.where(p2 >= 0, np.sin(root) / safe, np.sinh(root) / safe)
    small = np.abs(p2) < 1e-8
    if np.any(small):
        cs = np.where(small, 1 - p2 / 2 + p2 * p2 / 24, cs)
        sc = np.where(small, 1 - p2 / 6 + p2 * p2 / 120, sc)
    if cs.ndim == 0:
        return cs[()], sc[()]
    return cs, sc


def check_energy(spec: BarrierSpec, e: float) -> float:
    e = float(e)
    if not math.isfinite(e) or e <= 0:
        raise DomainError(f"energy must be finite and > 0, got {e}")
    if e == spec.height_v:
        raise SingularParameterError("e equals the barrier height; q = 0 leaves xi and eta undefined")
    return e


def derive_params(spec: BarrierSpec, e: float) -> WaveParams:
    e = check_energy(spec, e)
    a, b = spec.total_width_a, spec.total_gap_b
    k, q, over, xi, eta, f, d, p2 = (float(t) for t in wave_terms(
        a, b, spec.height_v, e, spec.mass_m, spec.hbar))
    phi = complex(math.sqrt(p2)) if p2 >= 0 else 1j * math.sqrt(-p2)
    regime = Regime.OVER if over else Regime.UNDER
    return WaveParams(e, k, q, regime, xi, eta, f, d, phi, k * (a + b))
