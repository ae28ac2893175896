"""Transfer matrices: per-cell factors, finite products and the continuum limit."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import BarrierSpec, Regime, WaveParams, cos_sinc, derive_params
from .errors import AccuracyWarning, DomainError, TransferOverflowError

_CHUNK = 1000


@dataclass(frozen=True)
class TransferMatrix2:
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.shape != (2, 2):
            raise DomainError(f"transfer matrix must be 2x2, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def det(self) -> complex:
        m = self.entries
        return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])

    @property
    def transmission(self) -> float:
        """|A_out/A_in|**2 with nothing incident from the right."""
        m22 = abs(self.entries[1, 1])
        return float(1.0 / m22 / m22)

    def __matmul__(self, other: "TransferMatrix2") -> "TransferMatrix2":
        return TransferMatrix2(self.entries @ other.entries)

    def apply(self, pair: "AmplitudePair") -> "AmplitudePair":
        out = self.entries @ np.array([pair.A, pair.B])
        return AmplitudePair(complex(out[0]), complex(out[1]))


@dataclass(frozen=True)
class AmplitudePair:
    A: complex  # right-moving
    B: complex  # left-moving


def _phase(x: float) -> np.ndarray:
    """diag(exp(-i x), exp(i x))."""
    return np.diag([np.exp(-1j * x), np.exp(1j * x)])


def middle_matrix(w: WaveParams, n_barriers: int, width_a: float) -> np.ndarray:
    """Propagation through one barrier of width a/N, independent of its position."""
    th = width_a * w.q / n_barriers
    if w.regime is Regime.OVER:
        c, s = np.cos(th), np.sin(th)
        return np.array([[c + 0.5j * w.xi * s, 0.5j * w.eta * s],
                         [-0.5j * w.eta * s, c - 0.5j * w.xi * s]])
    c, s = np.cosh(th), np.sinh(th)
    return np.array([[c - 0.5j * w.eta * s, -0.5j * w.xi * s],
                     [0.5j * w.xi * s, c + 0.5j * w.eta * s]])


def _offsets(spec: BarrierSpec, n: int) -> tuple[float, float]:
    N, a = spec.n_barriers, spec.total_width_a
    gaps = (n - 1) * spec.gap_width
    return gaps + (2 * n - 1) * a / (2 * N), gaps + (2 * n - 3) * a / (2 * N)


def cell_matrix(spec: BarrierSpec, e: float, n: int) -> TransferMatrix2:
    """P(n) = M_n T M'_n for barrier n (1-based), with the diagonal position phases."""
    if not spec.is_finite:
        raise DomainError("cell_matrix needs a finite barrier count")
    if not 1 <= n <= spec.n_barriers:
        raise DomainError(f"barrier index must lie in [1, {spec.n_barriers}], got {n}")
    w = derive_params(spec, e)
    right, left = _offsets(spec, n)
    m = _phase(w.k * right) @ middle_matrix(w, spec.n_barriers, spec.total_width_a) @ _phase(-w.k * left)
    return TransferMatrix2(m)


def gap_matrix(spec: BarrierSpec, e: float) -> np.ndarray:
    """Product M'_n M_(n-1) of neighbouring phase factors; the same for every n."""
    w = derive_params(spec, e)
    return _phase(-w.k * spec.gap_width)


def finite_product(spec: BarrierSpec, e: float) -> TransferMatrix2:
    """P(N) ... P(1), accumulated right to left.

    Written as M_N T (D T)^(N-1) M'_1, where D is the constant gap phase.
    The determinant is checked every 1000 factors.
    """
    if not spec.is_finite:
        raise DomainError("finite_product needs a finite barrier count")
    w = derive_params(spec, e)
    N = spec.n_barriers
    T = middle_matrix(w, N, spec.total_width_a)
    DT = _phase(-w.k * spec.gap_width) @ T
    acc = _phase(w.k * spec.total_width_a / (2 * N))
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, N):
            acc = DT @ acc
            if i % _CHUNK == 0:
                _check_product(acc, i)
        # a single barrier has no gap, so b drops out of the outer phase
        span = spec.length_L if N > 1 else spec.total_width_a
        acc = _phase(w.k * (span - spec.total_width_a / (2 * N))) @ T @ acc
    _check_product(acc, N)
    return TransferMatrix2(acc)


def _check_product(m: np.ndarray, factors: int):
    if not np.all(np.isfinite(m)):
        raise TransferOverflowError(
            f"transfer product overflowed after {factors} factors; "
            "evaluate in log-scaled form or use the closed-form limit")
    # relative to the size of the products that cancel in the determinant
    scale = max(1.0, float(np.abs(m).max()))
    with np.errstate(over="ignore", invalid="ignore"):
        drift = abs(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0] - 1) / scale / scale
    if drift > 1e-10 * factors:
        warnings.warn(f"determinant drift {drift:.2e} after {factors} factors", AccuracyWarning,
                      stacklevel=3)


def _limit_blocks(w: WaveParams, fraction: float = 1.0):
    """cos(t phi), t f sinc(t phi), t d sinc(t phi) for the generator scaled by t."""
    cs, sc = cos_sinc(fraction * fraction * w.phi_sq)
    return cs, fraction * w.f * sc, fraction * w.d * sc


def _generator_exp(w: WaveParams, fraction: float) -> np.ndarray:
    cs, fs, ds = _limit_blocks(w, fraction)
    sgn = 1.0 if w.regime is Regime.OVER else -1.0
    return np.array([[cs + 1j * fs, sgn * 1j * ds],
                     [-sgn * 1j * ds, cs - 1j * fs]])


def limit_matrix(spec: BarrierSpec, e: float) -> TransferMatrix2:
    """Closed form of the transfer matrix as N -> infinity at fixed a, b."""
    if spec.is_finite:
        raise DomainError("limit_matrix needs n_barriers=INFINITE; use spec.with_n(INFINITE)")
    w = derive_params(spec, e)
    with np.errstate(over="ignore", invalid="ignore"):
        m = _phase(w.z) @ _generator_exp(w, 1.0)
    if not np.all(np.isfinite(m)):
        raise TransferOverflowError("closed-form matrix overflowed; transmission is still available "
                                    "from transmission_limit")
    return TransferMatrix2(m)


def transmission_limit(spec: BarrierSpec, e: float) -> float:
    """1 / (1 + d^2 sin^2(phi)/phi^2); robust when sinh overflows (returns 0)."""
    if spec.is_finite:
        raise DomainError("transmission_limit needs n_barriers=INFINITE")
    w = derive_params(spec, e)
    _, sc = cos_sinc(w.phi_sq)
    with np.errstate(over="ignore"):
        return float(1.0 / (1.0 + (w.d * sc) ** 2))


def interior_transfer(spec: BarrierSpec, e: float, fraction: float, branch: int = +1) -> TransferMatrix2:
    """exp(-i k L sigma3) exp(branch * i * fraction * (f sigma3 + i d sigma2)).

    `fraction` stands for x/L and is not range-checked here; fraction=1 with
    branch=+1 gives limit_matrix.
    """
    if branch not in (1, -1):
        raise DomainError("branch must be +1 or -1")
    w = derive_params(spec, e)
    return TransferMatrix2(_phase(w.z) @ _generator_exp(w, branch * float(fraction)))


def interior_amplitudes(spec: BarrierSpec, e: float, x: float, boundary: AmplitudePair,
                        branch: int = +1) -> AmplitudePair:
    """Amplitude pair at interior point x of the continuum system, from the left boundary pair."""
    if spec.is_finite:
        raise DomainError("interior_amplitudes needs n_barriers=INFINITE")
    half = spec.length_L / 2
    if not abs(x) < half:
        raise DomainError(f"|x| must be below (a+b)/2 = {half}, got {x}")
    return interior_transfer(spec, e, x / spec.length_L, branch).apply(boundary)


def finite_interior_transfer(spec: BarrierSpec, e: float, n_cells: int) -> TransferMatrix2:
    """Finite-N counterpart of interior_transfer: exp(-i k L sigma3) (D T)^n."""
    if not spec.is_finite or not 0 <= n_cells <= spec.n_barriers:
        raise DomainError("need a finite spec and 0 <= n_cells <= N")
    w = derive_params(spec, e)
    DT = _phase(-w.k * spec.gap_width) @ middle_matrix(w, spec.n_barriers, spec.total_width_a)
    return TransferMatrix2(_phase(w.z) @ np.linalg.matrix_power(DT, n_cells))
