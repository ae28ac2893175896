"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line."""
import cmath
import time

import numpy as np

from multibarrier import resonance as res
from multibarrier import wavepacket as wp
from multibarrier.core import INFINITE, BarrierSpec, spec_from_length_ratio
from multibarrier.exactsolve import SweepTemplate, solve_amplitudes, transmission_sweep
from multibarrier.scattering import cross_section_curve, peak_positions, phase_shifts, s_matrix
from multibarrier.spectrum import QuantizationProblem, find_levels, spacing_statistics, unfold
from multibarrier.transfer import finite_product, limit_matrix, transmission_limit

RNG_SEED = 20240611


def random_specs(rng, n, regime, n_max=50):
    """Well-conditioned random finite specs in one regime: L in [1,4], c in [0.5,5], v in [5,20]."""
    out = []
    for _ in range(n):
        L, c, v = rng.uniform(1, 4), rng.uniform(0.5, 5), rng.uniform(5, 20)
        N = int(rng.integers(1, n_max + 1))
        e = v * (rng.uniform(1.1, 4) if regime == "over" else rng.uniform(0.8, 0.99))
        out.append((spec_from_length_ratio(L, c, N, v), e))
    return out


def test_criterion_01_single_barrier_reduction(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(RNG_SEED)
    worst = 0.0
    for i in range(100):
        a, v = rng.uniform(0.1, 5), rng.uniform(1, 200)
        e = v * (rng.uniform(1.01, 5) if i % 2 == 0 else rng.uniform(0.05, 0.99))
        k, q = np.sqrt(e), np.sqrt(abs(e - v))
        xi, eta = q / k + k / q, q / k - k / q
        if e > v:
            ref = 1 / (np.cos(a * q) ** 2 + xi ** 2 * np.sin(a * q) ** 2 / 4)
        else:
            ref = 1 / (np.cosh(a * q) ** 2 + eta ** 2 * np.sinh(a * q) ** 2 / 4)
        got = transmission_limit(BarrierSpec(INFINITE, a, 0.0, v), e)
        worst = max(worst, abs(got - ref))
    dt = time.perf_counter() - t0
    criterion(1, worst <= 1e-12 and dt < 1.0, f"max |T - closed form| = {worst:.2e} in {dt:.2f}s")


FIGURE_PRESETS = (
    [(30.0, c, 100.0, 200.0) for c in (1, 2, 5, 10, 35)]
    + [(30.0, c, 200.0, 180.0) for c in (1, 2, 5, 10, 35)]
    + [(70.0, c, 60.0, e) for e in (61, 90, 120) for c in (0.01, 1, 5)]
    + [(70.0, c, 200.0, e) for e in (150, 170, 195) for c in (0.01, 1, 5)]
)


def test_criterion_02_three_method_agreement(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(RNG_SEED + 2)
    worst_small = 0.0
    for regime in ("over", "under"):
        for spec, e in random_specs(rng, 50, regime):
            worst_small = max(worst_small,
                              abs(solve_amplitudes(spec, e).transmission_T - finite_product(spec, e).transmission))
    worst_big, where = 0.0, None
    for L, c, v, e in FIGURE_PRESETS:
        spec = spec_from_length_ratio(L, c, 10_000, v)
        diff = abs(finite_product(spec, e).transmission - transmission_limit(spec.with_n(INFINITE), e))
        if diff > worst_big:
            worst_big, where = diff, (L, c, v, e)
    dt = time.perf_counter() - t0
    ok = worst_small <= 1e-8 and worst_big <= 1e-3 and dt < 30
    criterion(2, ok, f"exact vs product (N<=50) {worst_small:.2e}; product N=1e4 vs limit {worst_big:.2e} "
                     f"at (L, c, v, e)={where}; {dt:.1f}s")


def test_criterion_03_conservation_unitarity(criterion):
    rng = np.random.default_rng(RNG_SEED + 3)
    flux = 0.0
    for spec, e in random_specs(rng, 100, "over") + random_specs(rng, 100, "under"):
        sol = solve_amplitudes(spec, e)
        flux = max(flux, abs(sol.reflection_R + sol.transmission_T - 1))
    unit, lam = 0.0, 0.0
    for spec, e in random_specs(rng, 100, "over") + random_specs(rng, 100, "under"):
        spec = spec.with_n(INFINITE)
        S = s_matrix(limit_matrix(spec, e)).entries
        unit = max(unit, np.abs(S @ S.conj().T - np.eye(2)).max())
        ph = phase_shifts(spec, e)
        lam = max(lam, abs(abs(ph.lambda_plus) - 1), abs(abs(ph.lambda_minus) - 1))
    det_ratio = 0.0
    for spec, e in random_specs(rng, 100, "over") + random_specs(rng, 100, "under"):
        det_ratio = max(det_ratio, abs(finite_product(spec, e).det - 1) / (1e-10 * spec.n_barriers))
    ok = flux <= 1e-10 and unit <= 1e-10 and lam <= 1e-10 and det_ratio <= 1
    criterion(3, ok, f"|R+T-1| {flux:.1e}; |SS^H-I| {unit:.1e}; ||lambda|-1| {lam:.1e}; "
                     f"det drift / (1e-10 N) {det_ratio:.1e}")


def _first_c_above(N, v, e, threshold=0.99):
    cs = np.round(np.arange(1.0, 35.0 + 1e-9, 0.1), 10)
    rows = transmission_sweep(SweepTemplate(N, 30.0, 1.0, v, e), "c", cs)
    T = np.array([r.T for r in rows])
    hit = np.where(T > threshold)[0]
    return (cs[hit[0]] if hit.size else np.inf), T[-1]


def test_criterion_04_fig2_fig4_trend(criterion):
    t0 = time.perf_counter()
    parts, ok = [], True
    for v, e, n_big in ((100.0, 200.0, 40), (200.0, 180.0, 50)):
        c30, t35 = _first_c_above(30, v, e)
        cbig, _ = _first_c_above(n_big, v, e)
        ok &= t35 > 0.9 and cbig < c30
        parts.append(f"v={v:g}: T(35)={t35:.4f}, first c with T>0.99: N=30 {c30:g}, N={n_big} {cbig:g}")
    dt = time.perf_counter() - t0
    criterion(4, ok and dt < 120, "; ".join(parts) + f"; {dt:.1f}s")


def _first_collapse(N, a_max):
    a = np.round(np.arange(0.5, a_max + 1e-9, 0.05), 10)
    rows = transmission_sweep(SweepTemplate(N, 1.5, 0.5, 100.0, 200.0), "a", a)
    T = np.array([r.T for r in rows])
    hit = np.where(T < 0.01)[0]
    return a[hit[0]] if hit.size else np.nan


def test_criterion_05_fig3_drop(criterion):
    a60, a120 = _first_collapse(60, 15.0), _first_collapse(120, 25.0)
    ok = abs(a60 - 9) <= 1 and abs(a120 - 20) <= 2
    criterion(5, ok, f"first T<0.01 at a={a60:g} (N=60, target 9+-1), a={a120:g} (N=120, target 20+-2)")


def test_criterion_06_fig7_period_growth(criterion):
    spec = BarrierSpec(INFINITE, 40.0, 30.0, 70.0)
    es = np.linspace(71.0, 1000.0, 200_001)
    sp, _ = cross_section_curve(spec, es)
    peaks = peak_positions(es, sp)
    gaps = np.diff(peaks)
    bad = np.where(np.diff(gaps) <= 0)[0]
    detail = f"{peaks.size} peaks, {bad.size} non-increasing spacing pair(s)"
    if bad.size:
        i = bad[0]
        detail += f"; first at spacings {gaps[i]:.4f} -> {gaps[i + 1]:.4f} near e={peaks[i + 1]:.2f}"
    criterion(6, bad.size == 0, detail)


def test_criterion_07_fig8_levels(criterion):
    t0 = time.perf_counter()
    problem = QuantizationProblem(spec_from_length_ratio(20.0, 19.0, INFINITE, 120.0), 90.0, 1.0, 600.0)
    levels = find_levels(problem)
    st = spacing_statistics(unfold(levels), bins=20)
    dt = time.perf_counter() - t0
    n = levels.energies.size
    ok = abs(n - 102) <= 10 and st.wigner_distance < st.poisson_distance and dt < 300
    criterion(7, ok, f"{n} levels (target 102+-10); KS Wigner {st.wigner_distance:.3f}, "
                     f"Poisson {st.poisson_distance:.3f}; {dt:.1f}s")


def test_criterion_08_large_energy_exclusion(criterion):
    verdicts = []
    for L, c, v in ((70.0, 1.0, 60.0), (70.0, 0.75, 70.0), (30.0, 5.0, 100.0)):
        verdicts.append(res.large_energy_exclusion(res.ResonanceParams.from_length_ratio(L, c, v)))
    roots = res.tan_tanh_roots(1.0, 50.0)
    bad = [v for v in verdicts if v.status != "CONFIRMED"]
    detail = f"{len(bad)}/3 presets VIOLATION"
    if bad:
        detail += f" (e.g. pole at {bad[0].offending.value:.6g})"
    detail += f"; |tan x| = |tanh x| roots on [1,50]: {roots.size}"
    criterion(8, not bad and roots.size == 0, detail)


def test_criterion_09_under_pos_empty(criterion):
    counts = []
    for L, c, v in ((70.0, 1.0, 200.0), (30.0, 1.0, 200.0), (70.0, 0.01, 200.0)):
        p = res.ResonanceParams.from_length_ratio(L, c, v)
        m = 0.7 * min(p.P / p.K, v)
        out = res.find_poles(p, (-m, m, -m, m), (50, 50), res.PoleCase.UNDER_POS)
        counts.append(len(out.poles))
    criterion(9, sum(counts) == 0, f"converged UNDER_POS poles per preset: {counts}")


def _fig9_run(N):
    dx = 1 / 56
    dt = 0.9 * dx * dx
    grid = wp.Grid1D.fft_friendly(-90.0, 100.0, dx)
    spec = spec_from_length_ratio(20.0, 2.333, N, 2.0)
    V = wp.potential_on_grid(spec, grid, (-10.0, 10.0))
    s = wp.evolve(wp.initial_packet(wp.PacketParams(-10.0, 3.0, 0.5), grid), V, dt, round(5.8 / dt))
    return wp.packet_metrics(s, (-10.0, 10.0))


def test_criterion_10_wave_packet(criterion):
    t0 = time.perf_counter()
    params = wp.PacketParams(-10.0, 3.0, 0.5)
    grid = wp.Grid1D.from_spacing(-60.0, 100.0, 1 / 7)
    s0 = wp.initial_packet(params, grid)
    s = wp.evolve(s0, np.zeros(grid.points), 1 / 50, 290)
    ref = wp.initial_packet(params, grid, t=s.time)
    l2 = float(np.sqrt(np.sum((np.abs(s.psi) ** 2 - np.abs(ref.psi) ** 2) ** 2) * grid.dx))
    drift = abs(s.norm - s0.norm)
    m4, m150 = _fig9_run(4), _fig9_run(150)
    dt = time.perf_counter() - t0
    fig9 = m150.spatial_variance > m4.spatial_variance and m150.gradient_energy > m4.gradient_energy
    ok = l2 < 1e-3 and drift < 1e-10 and fig9 and dt < 120
    criterion(10, ok, f"free L2 {l2:.1e}, drift {drift:.1e}; variance N=150 {m150.spatial_variance:.3f} "
                      f"vs N=4 {m4.spatial_variance:.3f}; gradient energy {m150.gradient_energy:.3f} vs "
                      f"{m4.gradient_energy:.3f}; {dt:.1f}s")


def _direct(p, e, k, sign, case):
    K, P = p.K, p.P
    w = K / (1 + p.c) ** 2 * (e * K - P)
    minus_w2 = -4 * e * K * (e * K - P) / P ** 2
    root = lambda z: cmath.sqrt(z) * (-1) ** k
    rho2 = root(minus_w2)
    if case is res.PoleCase.UNDER_POS:
        lhs, out = 1j * cmath.sinh(root(-w)), 1j * cmath.sinh(root(-w)) + sign * rho2
    else:
        lhs, out = cmath.sin(root(w)), cmath.sin(root(w)) - sign * rho2
    return out, max(1.0, abs(lhs), abs(rho2))


def test_criterion_11_resonance_fidelity(criterion):
    p = res.ResonanceParams.from_length_ratio(70.0, 1.0, 70.0)
    rng = np.random.default_rng(RNG_SEED + 11)
    boxes = {res.PoleCase.OVER: (70, 350, -70, 70), res.PoleCase.UNDER_NEG: (0, 70, -70, 70),
             res.PoleCase.UNDER_POS: (-35, 35, -35, 35)}
    worst, samples = 0.0, 0
    for case, (x0, x1, y0, y1) in boxes.items():
        for k in (0, 1):
            got = 0
            while got < 1000:
                e1, e2 = rng.uniform(x0, x1), rng.uniform(y0, y1)
                if not res.case_mask(p, e1, e2, case):
                    continue
                sign = 1 if got % 2 == 0 else -1
                r1, r2 = res.pole_residual(p, res.ComplexEnergy(e1, e2), k, sign, case)
                direct, scale = _direct(p, complex(e1, e2), k, sign, case)
                worst = max(worst, abs(complex(r1, r2) - direct) / scale)
                got += 1
                samples += 1
    criterion(11, worst <= 1e-10, f"max relative mismatch {worst:.2e} over {samples} energies "
                                  f"(3 cases x 2 branches x 1000)")
