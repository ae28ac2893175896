"""Complex-energy poles of the cross sections, located through real polar decompositions.

Poles are zeros of 1 + d^2 sin^2(phi)/phi^2 at complex energy e = e1 + i e2.
With b eliminated in favour of (a, c, L) and K = a + ac + cL, P = a v (1 + c):

    w  = K/(1+c)^2 (e K - P)              (phi^2)
    W2 = 4 e K (e K - P) / P^2

and the pole condition reads sin(sqrt(w))^2 = -W2. Units are fixed to hbar = 1,
m = 1/2 (k = sqrt(e)).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDirectionError, DomainError


class PoleCase(enum.Enum):
    OVER = "over"            # |e| > v
    UNDER_NEG = "under_neg"  # |e| < v and |e| K > P
    UNDER_POS = "under_pos"  # |e| < v and |e| K < P


@dataclass(frozen=True)
class ResonanceParams:
    a: float
    c: float
    L: float
    v: float

    def __post_init__(self):
        for name in ("a", "L", "v"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise DomainError(f"{name} must be finite and > 0")
        if not (math.isfinite(self.c) and self.c >= 0):
            raise DomainError("c must be finite and >= 0")

    @classmethod
    def from_length_ratio(cls, L: float, c: float, v: float) -> "ResonanceParams":
        return cls(L / (1 + c), c, L, v)

    @property
    def K(self) -> float:
        return self.a + self.a * self.c + self.c * self.L

    @property
    def P(self) -> float:
        return self.a * self.v * (1 + self.c)


@dataclass(frozen=True)
class ComplexEnergy:
    e1: float
    e2: float

    @property
    def value(self) -> complex:
        return complex(self.e1, self.e2)

    def classify(self, v: float) -> str:
        return "OVER" if abs(self.value) > v else "UNDER"


@dataclass(frozen=True)
class PolarComponents:
    r1: float
    cos_phi1: float
    sin_phi1: float
    r2: float
    cos_phi2: float
    sin_phi2: float
    branch_k: int = 0


def _polar_arrays(p: ResonanceParams, e1, e2, variant: str = "OVER"):
    """Vectorized magnitudes and direction cosines; NaN directions where a normalizer vanishes."""
    K, P = p.K, p.P
    e1 = np.asarray(e1, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    x1, y1 = e1 * K - P, e2 * K
    h1 = np.hypot(x1, y1)
    x2 = e2 * P - 2 * e1 * e2 * K
    y2 = K * (e1 * e1 - e2 * e2) - e1 * P
    h2 = np.hypot(x2, y2)
    with np.errstate(invalid="ignore", divide="ignore"):
        r1 = K / (1 + p.c) ** 2 * h1
        r2 = 4 * K / (p.a * p.v * (1 + p.c)) ** 2 * h2
        c1, s1 = x1 / h1, y1 / h1
        c2, s2 = x2 / h2, y2 / h2
    if variant == "UNDER":
        # sign/swap map to the evanescent-case angles
        c1, s1 = -c1, -s1
        c2, s2 = -s2, c2
    elif variant != "OVER":
        raise DomainError(f"variant must be OVER or UNDER, got {variant!r}")
    return r1, c1, s1, r2, c2, s2, h1, h2


def polar_components(a: float, c: float, L: float, v: float, e1: float, e2: float,
                     variant: str = "OVER", branch_k: int = 0) -> PolarComponents:
    """r and direction cosines of phi^2 (index 1) and of i W2 (index 2).

    variant='UNDER' returns the accented values r1, -cos, -sin for index 1 and
    r2, -sin(phi2), cos(phi2) for index 2.
    """
    if branch_k not in (0, 1):
        raise DomainError("branch_k must be 0 or 1")
    p = ResonanceParams(a, c, L, v)
    r1, c1, s1, r2, c2, s2, h1, h2 = _polar_arrays(p, e1, e2, variant)
    if h1 == 0 or h2 == 0:
        raise DegenerateDirectionError(f"polar normalizer vanishes at e = {e1} + {e2}i")
    return PolarComponents(float(r1), float(c1), float(s1), float(r2), float(c2), float(s2), branch_k)


def de_moivre_sqrt(r: float, cos_phi: float, sin_phi: float, k: int) -> complex:
    """k-th square root of r (cos phi + i sin phi), k in {0, 1}."""
    ang = (math.atan2(sin_phi, cos_phi) + 2 * math.pi * k) / 2
    return math.sqrt(r) * complex(math.cos(ang), math.sin(ang))


def _residual_arrays(p: ResonanceParams, e1, e2, k: int, sign: int, case: PoleCase):
    """(res1, res2, scale) for arrays of energies; non-finite where a normalizer vanishes."""
    if case is PoleCase.UNDER_POS:
        r1, c1, s1, r2, c2, s2, _, _ = _polar_arrays(p, e1, e2, "UNDER")
    else:
        r1, c1, s1, r2, _, _, _, _ = _polar_arrays(p, e1, e2, "OVER")
        # the right side is a square root of -W2, whose direction is the
        # accented phi2 (a quarter turn from that of i W2)
        _, _, _, _, c2, s2, _, _ = _polar_arrays(p, e1, e2, "UNDER")
    psi1 = (np.arctan2(s1, c1) + 2 * np.pi * k) / 2
    psi2 = (np.arctan2(s2, c2) + 2 * np.pi * k) / 2
    sr1, sr2 = np.sqrt(r1), np.sqrt(r2)
    x, y = sr1 * np.cos(psi1), sr1 * np.sin(psi1)
    with np.errstate(over="ignore", invalid="ignore"):
        if case is PoleCase.UNDER_POS:
            # i sinh(x + i y) = -cosh(x) sin(y) + i sinh(x) cos(y)
            res1 = -np.cosh(x) * np.sin(y) + sign * sr2 * np.cos(psi2)
            res2 = np.sinh(x) * np.cos(y) + sign * sr2 * np.sin(psi2)
            scale = np.maximum(1.0, np.maximum(np.cosh(x), sr2))
        else:
            res1 = np.sin(x) * np.cosh(y) - sign * sr2 * np.cos(psi2)
            res2 = np.cos(x) * np.sinh(y) - sign * sr2 * np.sin(psi2)
            scale = np.maximum(1.0, np.maximum(np.cosh(y), sr2))
    return res1, res2, scale


def pole_residual(params: ResonanceParams, e: ComplexEnergy, branch_k: int = 0, sign: int = +1,
                  case: PoleCase = PoleCase.OVER) -> tuple[float, float]:
    """Left minus right side of the two real equations whose common zeros are poles."""
    if branch_k not in (0, 1) or sign not in (1, -1):
        raise DomainError("branch_k must be 0/1 and sign +1/-1")
    case = PoleCase(case)
    r1, c1, s1, r2, c2, s2, h1, h2 = _polar_arrays(params, e.e1, e.e2)
    if h1 == 0 or h2 == 0:
        raise DegenerateDirectionError(f"polar normalizer vanishes at e = {e.value}")
    res1, res2, _ = _residual_arrays(params, e.e1, e.e2, branch_k, sign, case)
    return float(res1), float(res2)


def resonance_function(params: ResonanceParams, e: complex) -> complex:
    """1 + d^2 sin^2(phi)/phi^2 at complex e, with lengths written through (a, c, L)."""
    e = complex(e)
    K, P = params.K, params.P
    w = K / (1 + params.c) ** 2 * (e * K - P)
    root = np.sqrt(w)
    sinc = np.sin(root) / root if abs(root) > 1e-8 else 1 - w / 6
    return complex(1 + (params.a * params.v) ** 2 / (4 * e) * sinc * sinc)


def case_mask(params: ResonanceParams, e1, e2, case: PoleCase):
    mod = np.hypot(e1, e2)
    if case is PoleCase.OVER:
        return mod > params.v
    inside = mod < params.v
    if case is PoleCase.UNDER_NEG:
        return inside & (mod * params.K > params.P)
    return inside & (mod * params.K < params.P)


@dataclass(frozen=True)
class Pole:
    energy: ComplexEnergy
    branch_k: int
    sign: int
    case: PoleCase
    residual_norm: float   # relative to the scale of the two sides
    classification: str    # OVER when |e| > v, else UNDER


@dataclass
class PoleSearchResult:
    poles: list
    seeds: int = 0
    converged: int = 0
    singular: int = 0
    diverged: int = 0
    rejected: int = 0
    excluded_seeds: int = 0


def _newton(params, case, k, sign, z0, tol=1e-10, max_iter=100, max_halvings=20):
    """Damped Newton on (res1, res2) for a batch of seeds z0 of shape (n, 2)."""
    with np.errstate(all="ignore"):
        return _newton_batch(params, case, k, sign, z0, tol, max_iter, max_halvings)


def _newton_batch(params, case, k, sign, z0, tol, max_iter, max_halvings):
    z = np.array(z0, dtype=float)

    def F(zz):
        r1, r2, sc = _residual_arrays(params, zz[:, 0], zz[:, 1], k, sign, case)
        return np.stack([r1, r2], axis=1), sc

    f, sc = F(z)
    norm = np.linalg.norm(f, axis=1) / sc
    active = np.isfinite(norm)
    status = np.where(active, 0, 3)       # 0 running, 1 converged, 2 singular, 3 diverged
    status[active & (norm < tol)] = 1
    for _ in range(max_iter):
        run = status == 0
        if not np.any(run):
            break
        zr, fr = z[run], f[run]
        h = 1e-7 * np.maximum(1.0, np.abs(zr))
        J = np.empty((len(zr), 2, 2))
        for j in range(2):
            dz = np.zeros_like(zr)
            dz[:, j] = h[:, j]
            fp, _ = F(zr + dz)
            fm, _ = F(zr - dz)
            J[:, :, j] = (fp - fm) / (2 * h[:, j:j + 1])
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        jscale = np.abs(J).reshape(len(zr), -1).max(axis=1) ** 2
        bad = ~np.isfinite(det) | (np.abs(det) <= 1e-14 * jscale)
        safe = np.where(bad, 1.0, det)
        step = np.stack([(J[:, 1, 1] * fr[:, 0] - J[:, 0, 1] * fr[:, 1]) / safe,
                         (-J[:, 1, 0] * fr[:, 0] + J[:, 0, 0] * fr[:, 1]) / safe], axis=1)
        idx = np.where(run)[0]
        status[idx[bad]] = 2
        keep = ~bad
        idx, zr, step = idx[keep], zr[keep], step[keep]
        old = norm[idx]
        lam = np.ones(len(idx))
        znew = zr - step
        fnew, scnew = F(znew)
        nnew = np.linalg.norm(fnew, axis=1) / scnew
        for _ in range(max_halvings):
            worse = ~(nnew < old)
            if not np.any(worse):
                break
            lam[worse] *= 0.5
            znew[worse] = zr[worse] - lam[worse, None] * step[worse]
            fw, scw = F(znew[worse])
            fnew[worse] = fw
            nnew[worse] = np.linalg.norm(fw, axis=1) / scw
        stalled = ~(nnew < old)
        z[idx] = np.where(stalled[:, None], z[idx], znew)
        f[idx] = np.where(stalled[:, None], f[idx], fnew)
        norm[idx] = np.where(stalled, norm[idx], nnew)
        status[idx[stalled & ~(old < tol)]] = 3
        status[idx[norm[idx] < tol]] = 1
        status[idx[~np.isfinite(norm[idx])]] = 3
    return z, norm, status


def _degenerate_distance(params, e1, e2):
    """Relative distance from the lines where the polar normalizers vanish."""
    *_, h1, h2 = _polar_arrays(params, e1, e2)
    ref = params.K * np.hypot(e1, e2) + params.P
    return np.minimum(h1 / ref, h2 / (ref * (1 + np.hypot(e1, e2))))


def find_poles(params: ResonanceParams, rectangle: tuple[float, float, float, float],
               grid: tuple[int, int] = (20, 20), case: PoleCase | str = PoleCase.OVER,
               tol: float = 1e-10, report_tol: float = 1e-8) -> PoleSearchResult:
    """Seed a damped Newton iteration on a grid over (e1_min, e1_max, e2_min, e2_max).

    Every (branch k, sign) pair is searched. Converged points inside the
    rectangle and the case's validity region are deduplicated.
    """
    case = PoleCase(case)
    e1lo, e1hi, e2lo, e2hi = map(float, rectangle)
    if not all(map(math.isfinite, (e1lo, e1hi, e2lo, e2hi))) or e1lo >= e1hi or e2lo >= e2hi:
        raise DomainError("search rectangle must be finite with min < max")
    n1, n2 = grid
    if n1 < 20 or n2 < 20:
        raise DomainError("seed grid must be at least 20 x 20")
    g1, g2 = np.meshgrid(np.linspace(e1lo, e1hi, n1), np.linspace(e2lo, e2hi, n2), indexing="ij")
    seeds = np.stack([g1.ravel(), g2.ravel()], axis=1)
    far = _degenerate_distance(params, seeds[:, 0], seeds[:, 1]) > 1e-8
    out = PoleSearchResult([], excluded_seeds=int((~far).sum()))
    seeds = seeds[far]
    found: list[Pole] = []
    for k in (0, 1):
        for sign in (1, -1):
            out.seeds += len(seeds)
            z, norm, status = _newton(params, case, k, sign, seeds, tol=tol)
            out.singular += int((status == 2).sum())
            out.diverged += int((status == 3).sum() + (status == 0).sum())
            ok = status == 1
            out.converged += int(ok.sum())
            inside = ((z[:, 0] >= e1lo) & (z[:, 0] <= e1hi) & (z[:, 1] >= e2lo) & (z[:, 1] <= e2hi)
                      & case_mask(params, z[:, 0], z[:, 1], case) & (norm < report_tol))
            out.rejected += int((ok & ~inside).sum())
            for (x1, x2), nv in zip(z[ok & inside], norm[ok & inside]):
                cand = complex(x1, x2)
                if any(abs(cand - p.energy.value) <= 1e-6 * max(1.0, abs(cand)) for p in found):
                    continue
                en = ComplexEnergy(float(x1), float(x2))
                found.append(Pole(en, k, sign, case, float(nv), en.classify(params.v)))
    found.sort(key=lambda p: (p.energy.e1, p.energy.e2))
    out.poles = found
    return out


def tan_tanh_roots(x_lo: float = 1.0, x_hi: float = 50.0, samples: int = 200001,
                   pole_margin: float = 1e-3) -> np.ndarray:
    """Zeros of |tan x| - |tanh x| on [x_lo, x_hi], scanned away from the poles of tan."""
    x = np.linspace(x_lo, x_hi, samples)
    g = np.abs(np.tan(x)) - np.abs(np.tanh(x))
    near_pole = np.abs(np.cos(x)) < pole_margin
    i = np.where((np.sign(g[:-1]) != np.sign(g[1:])) & ~near_pole[:-1] & ~near_pole[1:])[0]
    return x[i] - g[i] * (x[i + 1] - x[i]) / (g[i + 1] - g[i])


@dataclass(frozen=True)
class ExclusionVerdict:
    status: str                       # CONFIRMED or VIOLATION
    offending: ComplexEnergy | None
    regions: tuple
    details: dict


def large_energy_exclusion(params: ResonanceParams, case: PoleCase | str = PoleCase.OVER,
                           e_big: float = 1e6, width: float = 2e-3,
                           grid: tuple[int, int] = (20, 20)) -> ExclusionVerdict:
    """Scan for poles at large energy: e2/e1 <= 0.01, and e1 close to e2.

    Each scan covers e1 in [e_big, e_big (1 + width)].
    """
    case = PoleCase(case)
    e1hi = e_big * (1 + width)
    regions = (("e2<<e1", (e_big, e1hi, 0.0, 0.01 * e_big)),
               ("e1~e2", (e_big, e1hi, 0.99 * e_big, 1.01 * e1hi)))
    details = {}
    for name, rect in regions:
        res = find_poles(params, rect, grid, case)
        details[name] = len(res.poles)
        if res.poles:
            return ExclusionVerdict("VIOLATION", res.poles[0].energy, tuple(r for r, _ in regions),
                                    details)
    return ExclusionVerdict("CONFIRMED", None, tuple(r for r, _ in regions), details)
