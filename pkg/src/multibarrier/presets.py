"""Named parameter sets for the reproduce command.

Each value is tagged "published" when it is a stated figure parameter, or
"chosen" when it is a grid or resolution setting picked here.
"""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Preset:
    name: str
    command: str
    params: dict
    source: dict = field(default_factory=dict)
    note: str = ""

    def provenance(self, key: str) -> str:
        return self.source.get(key, "chosen")


def _p(name, command, note="", **values):
    params, source = {}, {}
    for k, (v, s) in values.items():
        params[k] = v
        source[k] = s
    return Preset(name, command, params, source, note)


PUB, CH = "published", "chosen"

PRESETS = {
    "fig2": _p("fig2", "sweep", "T against c at fixed total length, e > v",
               axis=("c", CH), start=(1.0, PUB), stop=(35.0, PUB), points=(341, CH),
               N=("30,40", PUB), L=(30.0, PUB), v=(100.0, PUB), e=(200.0, PUB)),
    "fig3": _p("fig3", "sweep", "T against a with b = a/2",
               axis=("a", CH), start=(0.5, CH), stop=(50.0, CH), points=(991, CH),
               N=("60,120", PUB), c=(0.5, PUB), v=(100.0, PUB), e=(200.0, PUB)),
    "fig4": _p("fig4", "sweep", "T against c at fixed total length, e < v",
               axis=("c", CH), start=(1.0, PUB), stop=(35.0, PUB), points=(341, CH),
               N=("30,50", PUB), L=(30.0, PUB), v=(200.0, PUB), e=(180.0, PUB)),
    "fig5": _p("fig5", "sweep", "T against N with a = 8, b = a/2",
               axis=("N", CH), start=(1, CH), stop=(100, CH), points=(100, CH),
               N=("1", CH), a=(8.0, PUB), c=(0.5, PUB), v=(202.0, PUB), e=(200.0, PUB)),
    "fig6": _p("fig6", "grid", "continuum T over (e, c), e > v",
               e_min=(61.0, PUB), e_max=(120.0, PUB), e_points=(60, CH),
               c_min=(0.01, PUB), c_max=(5.0, PUB), c_points=(50, CH),
               L=(70.0, PUB), v=(60.0, PUB)),
    "fig7": _p("fig7", "cross-section", "sigma_+ and sigma_- against e",
               e_min=(71.0, PUB), e_max=(1000.0, PUB), points=(20001, CH),
               L=(70.0, PUB), a=(40.0, PUB), v=(70.0, PUB)),
    "fig8": _p("fig8", "spectrum", "levels in a periodic box and their spacing histogram",
               v=(120.0, PUB), C=(90.0, PUB), L=(20.0, PUB), c=(19.0, PUB),
               e_min=(1.0, PUB), e_max=(600.0, PUB), bins=(20, CH)),
    "fig9": _p("fig9", "wavepacket", "packet density at t = 5.8 for N = 4 and N = 150",
               N=("4,150", PUB), L=(20.0, PUB), c=(2.333, PUB), v=(2.0, PUB),
               x0=(-10.0, PUB), p0=(3.0, PUB), w0=(0.5, PUB), t=(5.8, PUB),
               region=("-10,10", PUB), dx=(1 / 56, CH), dt_factor=(0.9, CH),
               x_min=(-90.0, CH), x_max=(100.0, CH)),
    "fig10": _p("fig10", "grid", "continuum T over (e, c), e < v",
                e_min=(150.0, PUB), e_max=(195.0, CH), e_points=(46, CH),
                c_min=(0.01, PUB), c_max=(5.0, PUB), c_points=(50, CH),
                L=(70.0, PUB), v=(200.0, PUB)),
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None
