import json

import pytest

from multibarrier import cli, io


def run(argv, capsys=None):
    code = cli.main(argv)
    out = capsys.readouterr() if capsys else None
    return code, out


def test_preset_expansion():
    cfg, ns = cli.parse_config(["reproduce", "fig2"])
    assert cfg.command == "sweep" and cfg.preset == "fig2"
    assert ns.axis == "c" and [int(n) for n in ns.N] == [30, 40]
    assert cfg.provenance["L"] == "published" and cfg.provenance["points"] == "chosen"
    cfg, ns = cli.parse_config(["reproduce", "fig8"])
    assert cfg.command == "spectrum" and ns.C == 90.0 and ns.c == 19.0


def test_grid_presets_map_to_transmission():
    cfg, ns = cli.parse_config(["reproduce", "fig10"])
    assert cfg.command == "transmission"
    assert (ns.e_min, ns.e_max) == (150.0, 195.0) and ns.e is None


def test_config_file_and_override(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("# a sweep\ncommand = sweep\naxis = c\nfrom = 1\nto = 5\npoints = 5\n"
                 "N = 30\nL = 30\nv = 100\ne = 200\n")
    cfg, ns = cli.parse_config(["--config", str(f)])
    assert cfg.command == "sweep" and ns.points == 5
    cfg, ns = cli.parse_config(["sweep", "--config", str(f), "--points=7"])
    assert ns.points == 7


@pytest.mark.parametrize("text", ["command = sweep\nbogus = 1\n", "command = sweep\nL 30\n",
                                  "command = sweep\naxis = c\nfrom = one\nto = 5\nL = 30\nv = 1\n"])
def test_bad_config_is_usage_error(tmp_path, capsys, text):
    f = tmp_path / "bad.cfg"
    f.write_text(text)
    code, _ = run(["--config", str(f)], capsys)
    assert code == cli.EXIT_USAGE


def test_unknown_preset_and_missing_geometry(capsys):
    assert run(["reproduce", "fig99"], capsys)[0] == cli.EXIT_USAGE
    assert run(["transmission", "--v=100", "--e=200"], capsys)[0] == cli.EXIT_USAGE


def test_domain_error_exit(capsys):
    code, out = run(["transmission", "--N=3", "--a=1", "--b=1", "--v=100", "--e=100"], capsys)
    assert code == cli.EXIT_DOMAIN and "domain error" in out.err


def test_single_transmission_to_stdout(capsys):
    code, out = run(["transmission", "--N=1", "--a=0.3141592653589793", "--b=0",
                     "--v=100", "--e=200"], capsys)
    assert code == 0
    lines = [l for l in out.out.splitlines() if not l.startswith("#")]
    row = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert float(row["T"]) == pytest.approx(1.0, abs=1e-10)


def test_header_round_trip(tmp_path, capsys):
    out = tmp_path / "s.csv"
    argv = ["sweep", "--axis=c", "--from=1", "--to=5", "--points=5", "--N=30", "--L=30",
            "--v=100", "--e=200", "-o", str(out)]
    assert run(argv, capsys)[0] == 0
    header = io.read_config_header(out)
    assert header["command"] == "sweep" and header["axis"] == "c"
    cfg_file = tmp_path / "again.cfg"
    cfg_file.write_text("\n".join(f"{k}={v}" for k, v in header.items()) + "\n")
    out2 = tmp_path / "s2.csv"
    assert run(["--config", str(cfg_file), "-o", str(out2)], capsys)[0] == 0
    strip = lambda p: [l for l in p.read_text().splitlines() if not l.startswith("# generated=")]
    assert strip(out) == strip(out2)


def test_preset_header_round_trip(tmp_path, capsys):
    out = tmp_path / "f6.csv"
    assert run(["reproduce", "fig6", "-o", str(out)], capsys)[0] == 0
    header = io.read_config_header(out)
    assert header["preset"] == "fig6" and header["source.L"] == "published"
    cfg_file = tmp_path / "f6.cfg"
    cfg_file.write_text("\n".join(f"{k}={v}" for k, v in header.items()) + "\n")
    cfg, ns = cli.parse_config(["--config", str(cfg_file)])
    assert cfg.command == "transmission" and ns.v == 60.0
    body = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert body[0] == "e,c,T" and len(body) == 1 + 60 * 50


def test_output_reproducible(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert run(["cross-section", "--L=70", "--a=40", "--v=70", "--e-min=71", "--e-max=200",
                    "--points=50", "-o", str(p)], capsys)[0] == 0
    strip = lambda p: [l for l in p.read_text().splitlines() if not l.startswith("# generated=")]
    assert strip(paths[0]) == strip(paths[1])


def test_multi_n_writes_suffixed_files(tmp_path, capsys):
    out = tmp_path / "f.csv"
    assert run(["sweep", "--axis=c", "--from=1", "--to=2", "--points=3", "--N=3,4", "--L=30",
                "--v=100", "--e=200", "-o", str(out)], capsys)[0] == 0
    assert (tmp_path / "f_N3.csv").exists() and (tmp_path / "f_N4.csv").exists()


def test_json_output(capsys):
    code, out = run(["poles", "--L=70", "--c=1", "--v=70", "--e1=70,75", "--e2=-1,1",
                     "--format", "json"], capsys)
    assert code == 0
    rec = json.loads(out.out)
    assert rec["config"]["command"] == "poles" and "generated" in rec
    assert len(rec["rows"]) > 0 and set(rec["columns"]) <= set(rec["rows"][0])
