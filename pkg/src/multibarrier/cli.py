"""Command-line front end: named experiments, figure presets and sweeps."""
from __future__ import annotations

import argparse
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import exactsolve, io, presets, resonance, scattering, spectrum, transfer, wavepacket
from .core import INFINITE, BarrierSpec
from .errors import DomainError, MultiBarrierError, NumericalError

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_NUMERICAL = 0, 2, 3, 4
COMMANDS = ("transmission", "sweep", "cross-section", "spectrum", "poles", "wavepacket", "reproduce")
_GEOMETRY = ("L", "a", "b", "c")


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    command: str
    params: dict
    output_path: str = "-"
    format: str = "csv"
    preset: str | None = None
    provenance: dict = field(default_factory=dict)


# ---------------------------------------------------------------- parsing

def _count(text: str):
    t = str(text).strip().lower()
    if t in ("inf", "infinite", "infinity"):
        return INFINITE
    try:
        n = int(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"N must be a positive integer or 'inf', got {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError(f"N must be >= 1, got {n}")
    return n


def _counts(text: str):
    return [_count(p) for p in str(text).split(",") if p.strip()]


def _pair(text: str):
    try:
        lo, hi = (float(p) for p in str(text).split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}")
    return lo, hi


def _add_geometry(p, c_default=None):
    p.add_argument("--L", type=float, help="total length a + b")
    p.add_argument("--a", type=float, help="total barrier width")
    p.add_argument("--b", type=float, help="total gap width")
    p.add_argument("--c", type=float, default=c_default, help="ratio b/a")
    p.add_argument("--v", type=float, required=True, help="barrier height")


def _add_units(p):
    p.add_argument("--m", type=float, default=0.5, help="particle mass (default 1/2)")
    p.add_argument("--hbar", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; command-line flags override it")
    common.add_argument("-o", "--output", default="-", help="output file, '-' for stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    ap = argparse.ArgumentParser(prog="multibarrier",
                                 description="N identical barriers in a fixed interval: transmission, "
                                             "cross sections, box spectra, resonance poles, packets.")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("transmission", parents=[common], help="T at one point or over an (e, c) grid")
    _add_geometry(p)
    _add_units(p)
    p.add_argument("--N", type=_count, default=INFINITE, help="barrier count or 'inf'")
    p.add_argument("--e", type=float, help="energy (single point)")
    p.add_argument("--e-min", type=float)
    p.add_argument("--e-max", type=float)
    p.add_argument("--e-points", type=int, default=50)
    p.add_argument("--c-min", type=float)
    p.add_argument("--c-max", type=float)
    p.add_argument("--c-points", type=int, default=50)
    p.add_argument("--method", choices=("auto", "exact", "product", "limit"), default="auto")

    p = sub.add_parser("sweep", parents=[common], help="T and R along one axis")
    _add_geometry(p)
    _add_units(p)
    p.add_argument("--axis", choices=exactsolve.SWEEP_AXES, required=True)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--N", type=_counts, default=[INFINITE], help="comma list of barrier counts")
    p.add_argument("--e", type=float, help="energy (unless sweeping e)")

    p = sub.add_parser("cross-section", parents=[common], help="sigma_+- against e, or a b-scan")
    _add_geometry(p)
    _add_units(p)
    p.add_argument("--e-min", type=float, required=True)
    p.add_argument("--e-max", type=float, required=True)
    p.add_argument("--points", type=int, default=2001)
    p.add_argument("--b-scan", action="store_true", help="saturation metric of sigma_+ against b at fixed a")
    p.add_argument("--step-fraction", type=float, default=0.1)
    p.add_argument("--b-max-factor", type=float, default=20.0)
    p.add_argument("--tol", type=float, default=1e-3)

    p = sub.add_parser("spectrum", parents=[common], help="levels in a periodic box")
    _add_geometry(p)
    _add_units(p)
    p.add_argument("--C", type=float, required=True, help="box half-width")
    p.add_argument("--e-min", type=float, required=True)
    p.add_argument("--e-max", type=float, required=True)
    p.add_argument("--regime", choices=("both", "over", "under"), default="both")
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--points-per-period", type=int, default=40)
    p.add_argument("--degree", type=int, default=5, help="unfolding polynomial degree")

    p = sub.add_parser("poles", parents=[common], help="complex-energy resonance poles")
    _add_geometry(p)
    p.add_argument("--case", choices=[c.value for c in resonance.PoleCase],
                   default=resonance.PoleCase.OVER.value)
    p.add_argument("--e1", type=_pair, required=True, help="real-part range lo,hi")
    p.add_argument("--e2", type=_pair, required=True, help="imaginary-part range lo,hi")
    p.add_argument("--grid", type=int, default=20, help="seeds per axis (>= 20)")
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("wavepacket", parents=[common], help="Gaussian packet through a finite array")
    _add_geometry(p)
    _add_units(p)
    p.add_argument("--N", type=_counts, required=True, help="comma list of finite barrier counts")
    p.add_argument("--x0", type=float, default=-10.0)
    p.add_argument("--p0", type=float, default=3.0)
    p.add_argument("--w0", type=float, default=0.5)
    p.add_argument("--t", type=float, required=True, help="final time")
    p.add_argument("--dx", type=float, required=True)
    p.add_argument("--dt", type=float, help="time step (default dt-factor * dx**2)")
    p.add_argument("--dt-factor", type=float, default=0.9)
    p.add_argument("--x-min", type=float, required=True)
    p.add_argument("--x-max", type=float, required=True)
    p.add_argument("--region", type=_pair, default=(-10.0, 10.0), help="barrier region lo,hi")
    p.add_argument("--method", choices=sorted(wavepacket._STEPPERS), default="split-step")
    p.add_argument("--boundary", choices=("reflecting", "absorbing"), default="reflecting")
    p.add_argument("--metrics-every", type=int, default=0, help="record metrics every n steps (0: end only)")

    p = sub.add_parser("reproduce", parents=[common], help="run a named figure preset")
    p.add_argument("preset", choices=sorted(presets.PRESETS), metavar="PRESET",
                   help=", ".join(presets.PRESETS))
    return ap


def _subparser(ap: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in ap._subparsers._group_actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise UsageError(command)


def _options_of(sp: argparse.ArgumentParser) -> dict:
    """Map config-file keys (dest names, also with dashes) to their flag."""
    out = {}
    for act in sp._actions:
        if not act.option_strings or act.dest in ("help", "config"):
            continue
        flag = max(act.option_strings, key=len)
        out[act.dest] = (flag, act)
        out[flag.lstrip("-")] = (flag, act)
    return out


def _file_argv(sp, values: dict, origin: str) -> list[str]:
    opts = _options_of(sp)
    argv = []
    for key, value in values.items():
        if key not in opts:
            raise UsageError(f"{origin}: unknown key {key!r}")
        flag, act = opts[key]
        if isinstance(act, argparse._StoreTrueAction):
            if str(value).lower() in ("1", "true", "yes", "on"):
                argv.append(flag)
            elif str(value).lower() not in ("0", "false", "no", "off"):
                raise UsageError(f"{origin}: {key} expects true/false, got {value!r}")
        else:
            argv.append(f"{flag}={value}")
    return argv


def parse_config(argv: list[str] | None = None) -> tuple[ExperimentConfig, argparse.Namespace]:
    """Resolve argv (plus an optional --config file) into a validated config."""
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    file_values: dict = {}
    if "--config" in argv:
        i = argv.index("--config")
        if i + 1 >= len(argv):
            raise UsageError("--config needs a file name")
        path = argv[i + 1]
        try:
            file_values = io.parse_key_values(Path(path).read_text(), path)
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc.strerror}")
        except ValueError as exc:
            raise UsageError(str(exc))
        del argv[i:i + 2]
        # keys written into output headers that carry no option of their own
        for key in [k for k in file_values if k == "preset" or k.startswith("source.")]:
            del file_values[key]
        file_command = file_values.pop("command", None)
        if file_command and not any(a in COMMANDS for a in argv):
            argv.insert(0, file_command)
    command = next((a for a in argv if a in COMMANDS), None)
    if command is None:
        ns = ap.parse_args(argv)  # prints usage and exits 2
    if file_values:
        sp = _subparser(ap, command)
        pos = argv.index(command) + 1
        argv[pos:pos] = _file_argv(sp, file_values, "config")
    ns = ap.parse_args(argv)
    if ns.command == "reproduce":
        return _expand_preset(ap, ns)
    cfg = ExperimentConfig(ns.command, _params(ns), ns.output, ns.format)
    return cfg, ns


def _params(ns: argparse.Namespace) -> dict:
    skip = {"command", "output", "format", "config"}
    out = {}
    for k, v in vars(ns).items():
        if k in skip or v is None:
            continue
        if isinstance(v, list):
            v = ",".join(str(x) for x in v)
        elif isinstance(v, tuple):
            v = ",".join(repr(float(x)) for x in v)
        elif v is INFINITE:
            v = "inf"
        out[k] = v
    return out


def _expand_preset(ap, ns) -> tuple[ExperimentConfig, argparse.Namespace]:
    pre = presets.get_preset(ns.preset)
    target = "transmission" if pre.command == "grid" else pre.command
    argv = [target] + _file_argv(_subparser(ap, target), pre.params, f"preset {pre.name}")
    argv += ["-o", ns.output, "--format", ns.format]
    inner = ap.parse_args(argv)
    cfg = ExperimentConfig(target, _params(inner), ns.output, ns.format, pre.name,
                           {k: pre.provenance(k) for k in pre.params})
    return cfg, inner


# ---------------------------------------------------------------- commands

def _geometry(ns, need_L_for_c: bool = True) -> tuple[float, float]:
    """Resolve (a, b) from any two of L, a, b, c."""
    L, a, b, c = (getattr(ns, k, None) for k in _GEOMETRY)
    given = [k for k, v in zip(_GEOMETRY, (L, a, b, c)) if v is not None]
    if a is not None and b is not None:
        return a, b
    if a is not None and c is not None:
        return a, c * a
    if L is not None and c is not None:
        return L / (1 + c), L * c / (1 + c)
    if L is not None and a is not None:
        return a, L - a
    if L is not None and b is not None:
        return L - b, b
    raise UsageError(f"geometry needs two of L, a, b, c; got {given or 'none'}")


def _spec(ns, n=INFINITE) -> BarrierSpec:
    a, b = _geometry(ns)
    return BarrierSpec(n, a, b, ns.v, getattr(ns, "m", 0.5), getattr(ns, "hbar", 1.0))


def _transmission_value(spec: BarrierSpec, e: float, method: str) -> float:
    if method == "auto":
        method = "limit" if not spec.is_finite else "exact"
    if method == "limit":
        return transfer.transmission_limit(spec.with_n(INFINITE), e)
    if method == "product":
        return transfer.finite_product(spec, e).transmission
    return exactsolve.solve_amplitudes(spec, e).transmission_T


def cmd_transmission(ns):
    grid_mode = ns.e is None
    if grid_mode:
        if None in (ns.e_min, ns.e_max):
            raise UsageError("give --e, or --e-min and --e-max for a grid")
        es = np.linspace(ns.e_min, ns.e_max, ns.e_points)
    else:
        es = np.array([ns.e])
    if ns.c_min is not None or ns.c_max is not None:
        if None in (ns.c_min, ns.c_max) or ns.L is None:
            raise UsageError("a c-grid needs --L, --c-min and --c-max")
        cs = np.linspace(ns.c_min, ns.c_max, ns.c_points)
    else:
        cs = None
    if ns.method in ("exact", "product") and not isinstance(ns.N, int):
        raise UsageError(f"--method {ns.method} needs a finite --N")
    rows = []
    flagged = 0
    for e in es:
        for c in (cs if cs is not None else [None]):
            if c is not None:
                ns.c = float(c)
            spec = _spec(ns, ns.N)
            try:
                T = _transmission_value(spec, float(e), ns.method)
            except DomainError:
                if not grid_mode:
                    raise
                T, flagged = math.nan, flagged + 1
            rows.append((float(e), float(spec.ratio_c), float(T)))
    return [("", io.Table("transmission", ("e", "c", "T"), rows))], flagged


def cmd_sweep(ns):
    grid = np.linspace(ns.start, ns.stop, ns.points)
    if ns.axis == "N":
        grid = np.unique(np.round(grid).astype(int)).astype(float)
    if ns.axis != "e" and ns.e is None:
        raise UsageError("--e is required unless sweeping e")
    if ns.axis == "c":
        if ns.L is None:
            raise UsageError("sweeping c needs --L")
        L, c = ns.L, 1.0
    elif ns.axis == "a":
        if ns.c is None:
            raise UsageError("sweeping a needs --c (b = c a)")
        L, c = 1 + ns.c, ns.c
    else:
        a, b = _geometry(ns)
        L, c = a + b, b / a
    tables, flagged = [], 0
    for n in ns.N:
        tpl = exactsolve.SweepTemplate(n, L, c, ns.v, ns.e if ns.e is not None else 1.0, ns.m, ns.hbar)
        rows = exactsolve.transmission_sweep(tpl, ns.axis, grid)
        flagged += sum(1 for r in rows if r.flag and r.flag != "b_unused")
        t = io.Table(f"N={n}", ("axis", "value", "T", "R", "flag"),
                     [(r.axis, r.value, r.T, r.R, r.flag) for r in rows])
        tables.append((f"N{n}" if len(ns.N) > 1 else "", t))
    return tables, flagged


def cmd_cross_section(ns):
    a, b = _geometry(ns)
    es = np.linspace(ns.e_min, ns.e_max, ns.points)
    es = es[es != ns.v]
    if ns.b_scan:
        res = scattering.cross_section_b_saturation(a, ns.v, es, step_fraction=ns.step_fraction,
                                                    b_max_factor=ns.b_max_factor, tol=ns.tol,
                                                    m=ns.m, hbar=ns.hbar)
        if math.isnan(res.b_star):
            print(f"warning: sigma_+ did not settle below {ns.tol} up to b = {res.b_values[-1]:.4g}",
                  file=sys.stderr)
        else:
            print(f"b* = {res.b_star:.6g}", file=sys.stderr)
        rows = list(zip(res.b_values.tolist(), res.metric.tolist()))
        return [("", io.Table("b-scan", ("b", "saturation_metric"), rows))], 0
    spec = BarrierSpec(INFINITE, a, b, ns.v, ns.m, ns.hbar)
    sp, sm = scattering.cross_section_curve(spec, es)
    rows = list(zip(es.tolist(), np.asarray(sp, float).tolist(), np.asarray(sm, float).tolist()))
    return [("", io.Table("cross-section", ("e", "sigma_plus", "sigma_minus"), rows))], 0


def cmd_spectrum(ns):
    problem = spectrum.QuantizationProblem(_spec(ns), ns.C, ns.e_min, ns.e_max, ns.regime,
                                           ns.points_per_period)
    levels = spectrum.find_levels(problem)
    print(f"{levels.energies.size} levels in [{ns.e_min}, {ns.e_max}]", file=sys.stderr)
    tables = []
    try:
        unf = spectrum.unfold(levels, ns.degree)
        st = spectrum.spacing_statistics(unf, ns.bins)
        rows = list(zip(range(unf.energies.size), unf.energies.tolist(), unf.unfolded.tolist()))
        print(f"KS distance: wigner {st.wigner_distance:.4f}, poisson {st.poisson_distance:.4f}",
              file=sys.stderr)
        hist = list(zip(st.bin_edges[:-1].tolist(), st.bin_edges[1:].tolist(), st.density.tolist()))
        tables.append(("hist", io.Table("histogram", ("bin_left", "bin_right", "density"), hist)))
    except spectrum.InsufficientDataError as exc:
        print(f"warning: {exc}; no unfolding", file=sys.stderr)
        rows = [(i, e, math.nan) for i, e in enumerate(levels.energies.tolist())]
    return [("", io.Table("levels", ("index", "energy", "unfolded"), rows))] + tables, 0


def cmd_poles(ns):
    a, b = _geometry(ns)
    params = resonance.ResonanceParams(a, b / a, a + b, ns.v)
    res = resonance.find_poles(params, (*ns.e1, *ns.e2), (ns.grid, ns.grid), ns.case, tol=ns.tol)
    print(f"{len(res.poles)} poles from {res.seeds} seeds "
          f"(diverged {res.diverged}, singular {res.singular}, excluded {res.excluded_seeds})",
          file=sys.stderr)
    rows = [(p.energy.e1, p.energy.e2, p.branch_k, p.sign, p.case.value, p.residual_norm) for p in res.poles]
    return [("", io.Table("poles", ("e1", "e2", "k", "sign", "case", "residual_norm"), rows))], 0


_METRIC_COLUMNS = ("time", "norm_total", "fraction_left", "fraction_inside", "fraction_right",
                   "spatial_variance", "gradient_energy")


def cmd_wavepacket(ns):
    a, b = _geometry(ns)
    dt = ns.dt if ns.dt is not None else ns.dt_factor * ns.dx ** 2
    steps = int(round(ns.t / dt))
    grid = wavepacket.Grid1D.fft_friendly(ns.x_min, ns.x_max, ns.dx)
    packet = wavepacket.PacketParams(ns.x0, ns.p0, ns.w0, ns.m, ns.hbar)
    every = ns.metrics_every if ns.metrics_every > 0 else max(steps, 1)
    tables = []
    for n in ns.N:
        if not isinstance(n, int):
            raise UsageError("wavepacket needs finite barrier counts")
        spec = BarrierSpec(n, a, b, ns.v, ns.m, ns.hbar)
        V = wavepacket.potential_on_grid(spec, grid, ns.region)
        state, metrics = wavepacket.evolve_with_metrics(
            wavepacket.initial_packet(packet, grid), V, dt, steps, ns.region, every,
            method=ns.method, boundary=ns.boundary)
        tag = f"N{n}" if len(ns.N) > 1 else ""
        psi = state.psi
        snap = list(zip(grid.x.tolist(), psi.real.tolist(), psi.imag.tolist(), (np.abs(psi) ** 2).tolist()))
        tables.append((tag, io.Table(f"snapshot N={n}", ("x", "re_psi", "im_psi", "abs2"), snap)))
        mrows = [tuple(getattr(m, c) for c in _METRIC_COLUMNS) for m in metrics]
        tables.append(((tag + "_" if tag else "") + "metrics", io.Table(f"metrics N={n}", _METRIC_COLUMNS, mrows)))
    return tables, 0


HANDLERS = {"transmission": cmd_transmission, "sweep": cmd_sweep, "cross-section": cmd_cross_section,
            "spectrum": cmd_spectrum, "poles": cmd_poles, "wavepacket": cmd_wavepacket}


# ---------------------------------------------------------------- output

def _header(cfg: ExperimentConfig) -> dict:
    h = {"command": cfg.command, **cfg.params}
    if cfg.preset:
        h["preset"] = cfg.preset
        h.update({f"source.{k}": v for k, v in cfg.provenance.items()})
    return h


def _target(path: str, suffix: str, fmt: str) -> Path:
    p = Path(path)
    if not suffix:
        return p
    return p.with_name(f"{p.stem}_{suffix}{p.suffix or '.' + fmt}")


def write_outputs(cfg: ExperimentConfig, tables, stamp: str | None = None) -> list[str]:
    header = _header(cfg)
    render = io.render_json if cfg.format == "json" else io.render_csv
    stamp = stamp or io.timestamp()
    written = []
    for suffix, table in tables:
        text = render(table, header, stamp)
        if cfg.output_path == "-":
            if len(tables) > 1:
                sys.stdout.write(f"# table={table.name}\n")
            sys.stdout.write(text)
        else:
            dest = _target(cfg.output_path, suffix, cfg.format)
            dest.write_text(text)
            written.append(str(dest))
    return written


def run(cfg: ExperimentConfig, ns: argparse.Namespace) -> int:
    tables, flagged = HANDLERS[cfg.command](ns)
    for path in write_outputs(cfg, tables):
        print(f"wrote {path}", file=sys.stderr)
    if flagged:
        print(f"warning: {flagged} point(s) failed and were written as flagged NaN rows", file=sys.stderr)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    try:
        cfg, ns = parse_config(argv)
    except UsageError as exc:
        print(f"multibarrier: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyError as exc:
        print(f"multibarrier: error: {exc.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return run(cfg, ns)
    except UsageError as exc:
        print(f"multibarrier: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"multibarrier: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalError as exc:
        print(f"multibarrier: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except MultiBarrierError as exc:
        print(f"multibarrier: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
