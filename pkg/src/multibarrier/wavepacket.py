"""Gaussian packet evolution through a finite barrier array on a uniform grid."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.fft import dst, idst, next_fast_len
from scipy.linalg import solve_banded

from .core import BarrierSpec
from .errors import AccuracyError, DomainError, StabilityError, UnderResolvedError

EDGE_TOL = 1e-8
TOTAL_DRIFT = 1e-6


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    dx: float
    points: int

    @classmethod
    def from_spacing(cls, x_min: float, x_max: float, dx: float) -> "Grid1D":
        if not dx > 0 or not x_max > x_min:
            raise DomainError("need dx > 0 and x_max > x_min")
        n = int(round((x_max - x_min) / dx)) + 1
        return cls(x_min, x_min + (n - 1) * dx, dx, n)

    @classmethod
    def fft_friendly(cls, x_min: float, x_max: float, dx: float) -> "Grid1D":
        """Like from_spacing, with x_max pushed out so points + 1 factors into primes up to 11."""
        g = cls.from_spacing(x_min, x_max, dx)
        n = next_fast_len(g.points + 1) - 1
        return cls(x_min, x_min + (n - 1) * dx, dx, n)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.points)


@dataclass(frozen=True)
class PacketParams:
    x0: float
    p0: float
    w0: float
    mass_m: float = 0.5
    hbar: float = 1.0

    def __post_init__(self):
        if not self.w0 > 0:
            raise DomainError("w0 must be > 0")


@dataclass(frozen=True)
class PacketState:
    time: float
    psi: np.ndarray
    grid: Grid1D
    mass_m: float = 0.5
    hbar: float = 1.0

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * self.grid.dx)


def free_packet(params: PacketParams, x: np.ndarray, t: float) -> np.ndarray:
    """Closed-form free Gaussian moving with mean momentum p0, unnormalized.

    w0 is the momentum-space width; at t=0 the position density has standard
    deviation 1/(2 w0).
    """
    m, hb, w0 = params.mass_m, params.hbar, params.w0
    D = 1 + 2j * hb * w0 ** 2 * t / m
    u = x - params.x0
    ex = (-w0 ** 2 * u ** 2 + 1j * params.p0 * u / hb - 1j * params.p0 ** 2 * t / (2 * m * hb)) / D
    return np.sqrt(w0) * np.pi ** 0.25 * np.exp(ex) / np.sqrt(D)


def initial_packet(params: PacketParams, grid: Grid1D, t: float = 0.0) -> PacketState:
    psi = free_packet(params, grid.x, t)
    mag = np.abs(psi)
    if max(mag[0], mag[-1]) > EDGE_TOL * mag.max():
        raise DomainError("packet is truncated by the grid edges; widen the grid")
    psi = psi / np.sqrt(np.sum(mag ** 2) * grid.dx)
    return PacketState(float(t), psi, grid, params.mass_m, params.hbar)


def potential_on_grid(spec: BarrierSpec, grid: Grid1D, region: tuple[float, float]) -> np.ndarray:
    """N barriers of width a/N separated by gaps b/(N-1), starting at region[0].

    A grid point carries v when it lies inside a barrier.
    """
    if not spec.is_finite:
        raise DomainError("potential_on_grid needs a finite barrier count")
    x_left, x_right = map(float, region)
    if not (grid.x_min <= x_left < x_right <= grid.x_max):
        raise DomainError("region must lie inside the grid")
    if spec.length_L > (x_right - x_left) * (1 + 1e-12):
        raise DomainError("barrier array is longer than the region")
    w, g = spec.barrier_width, spec.gap_width
    if w < 2 * grid.dx:
        raise UnderResolvedError(f"barrier width {w:.4g} spans fewer than 2 grid cells (dx={grid.dx:.4g})")
    x = grid.x
    V = np.zeros_like(x)
    for j in range(spec.n_barriers):
        s = x_left + j * (w + g)
        V[(x >= s) & (x < s + w)] = spec.height_v
    return V


def _split_step(psi, V, dx, dt, steps, m, hb, mask):
    """Strang splitting; the kinetic factor is exact in the sine basis of the box."""
    M = len(psi)
    kk = np.pi * np.arange(1, M + 1) / ((M + 1) * dx)
    kin = np.exp(-1j * dt * hb * kk ** 2 / (2 * m))
    half = np.exp(-0.5j * dt * V / hb)
    for _ in range(steps):
        psi = half * psi
        psi = idst(kin * dst(psi, type=1), type=1)
        psi = half * psi
        if mask is not None:
            psi = psi * mask
    return psi


def _crank_nicolson(psi, V, dx, dt, steps, m, hb, mask):
    n = len(psi)
    c = hb * hb / (2 * m * dx * dx)
    diag = (2 * c + V) / hb
    off = -c / hb
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = 0.5j * dt * off
    ab[1] = 1 + 0.5j * dt * diag
    ab[2, :-1] = 0.5j * dt * off
    for _ in range(steps):
        rhs = (1 - 0.5j * dt * diag) * psi
        rhs[:-1] -= 0.5j * dt * off * psi[1:]
        rhs[1:] -= 0.5j * dt * off * psi[:-1]
        psi = solve_banded((1, 1), ab, rhs)
        if mask is not None:
            psi = psi * mask
    return psi


def _explicit(psi, V, dx, dt, steps, m, hb, mask):
    """Staggered explicit scheme: real and imaginary parts leapfrog half a step apart."""
    c = hb / (2 * m * dx * dx)
    v = V / hb

    def H(f):
        out = (2 * c + v) * f
        out[:-1] -= c * f[1:]
        out[1:] -= c * f[:-1]
        return out

    R, I = psi.real.copy(), psi.imag.copy()
    I = I - 0.5 * dt * H(R)
    for _ in range(steps):
        R = R + dt * H(I)
        I = I - dt * H(R)
        if mask is not None:
            R, I = R * mask, I * mask
    I = I + 0.5 * dt * H(R)
    return R + 1j * I


_STEPPERS = {"split-step": _split_step, "crank-nicolson": _crank_nicolson, "explicit": _explicit}


def absorbing_mask(grid: Grid1D, width: float, strength: float = 0.05) -> np.ndarray:
    x = grid.x
    d = np.minimum(x - grid.x_min, grid.x_max - x)
    s = np.clip(1 - d / width, 0, 1)
    return np.exp(-strength * s ** 2)


def evolve(state: PacketState, potential: np.ndarray, dt: float, steps: int,
           method: str = "split-step", boundary: str = "reflecting",
           absorb_width: float | None = None, check_every: int = 100) -> PacketState:
    """Advance the packet by steps*dt.

    Reflecting walls sit one cell beyond each end of the grid. The default
    stepper is unitary; dt < dx**2 is enforced for every method.
    """
    grid = state.grid
    if method not in _STEPPERS:
        raise DomainError(f"unknown method {method!r}; choose from {sorted(_STEPPERS)}")
    if not dt < grid.dx ** 2:
        raise StabilityError(f"dt={dt:.3g} must be below dx**2={grid.dx ** 2:.3g}")
    if steps < 0 or int(steps) != steps:
        raise DomainError("steps must be a non-negative integer")
    V = np.asarray(potential, dtype=float)
    if V.shape != state.psi.shape:
        raise DomainError("potential does not match the grid")
    mask = None
    if boundary == "absorbing":
        mask = absorbing_mask(grid, absorb_width or 0.1 * (grid.x_max - grid.x_min))
    elif boundary != "reflecting":
        raise DomainError(f"unknown boundary {boundary!r}")
    if method == "explicit":
        hmax = (2 * state.hbar / (state.mass_m * grid.dx ** 2) + float(V.max(initial=0.0))) / state.hbar
        if not dt * hmax < 2:
            raise StabilityError(f"explicit scheme needs dt < {2 / hmax:.3g} on this grid")
    stepper = _STEPPERS[method]
    m, hb = state.mass_m, state.hbar
    psi = state.psi.astype(complex)
    n0 = state.norm
    done = 0
    while done < steps:
        chunk = min(check_every, steps - done)
        psi = stepper(psi, V, grid.dx, dt, chunk, m, hb, mask)
        done += chunk
        if mask is None:
            now = np.sum(np.abs(psi) ** 2) * grid.dx
            if abs(now - n0) > TOTAL_DRIFT * n0:
                raise AccuracyError(f"norm drifted by {abs(now - n0):.2e} after {done} steps")
    return replace(state, time=state.time + steps * dt, psi=psi)


def region_mask(grid: Grid1D, region: tuple[float, float]):
    x = grid.x
    lo, hi = region
    return x < lo, (x >= lo) & (x <= hi), x > hi


@dataclass(frozen=True)
class PacketMetrics:
    time: float
    norm_total: float
    fraction_left: float
    fraction_inside: float
    fraction_right: float
    spatial_variance: float
    gradient_energy: float


def packet_metrics(state: PacketState, region: tuple[float, float]) -> PacketMetrics:
    """Partition of the norm, variance of the density inside the region, and
    sum |d psi/dx|^2 dx over the whole grid as a complexity measure."""
    g = state.grid
    rho = np.abs(state.psi) ** 2
    left, inside, right = region_mask(g, region)
    fl, fi, fr = (float(np.sum(rho[s]) * g.dx) for s in (left, inside, right))
    w = rho[inside]
    xs = g.x[inside]
    if w.sum() > 0:
        mean = np.sum(xs * w) / np.sum(w)
        var = float(np.sum((xs - mean) ** 2 * w) / np.sum(w))
    else:
        var = 0.0
    grad = float(np.sum(np.abs(np.diff(state.psi) / g.dx) ** 2) * g.dx)
    return PacketMetrics(state.time, fl + fi + fr, fl, fi, fr, var, grad)


def evolve_with_metrics(state: PacketState, potential: np.ndarray, dt: float, steps: int,
                        region: tuple[float, float], every: int = 1, **kw):
    """Evolve while recording packet_metrics every `every` steps (and at t=0)."""
    if every < 1:
        raise DomainError("every must be >= 1")
    rows = [packet_metrics(state, region)]
    done = 0
    while done < steps:
        n = min(every, steps - done)
        state = evolve(state, potential, dt, n, **kw)
        done += n
        rows.append(packet_metrics(state, region))
    return state, rows
