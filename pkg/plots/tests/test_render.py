import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

import render


def _png(path):
    assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    return Image.open(path)


def test_density_from_component_report(data, tmp_path):
    out = tmp_path / "density.png"
    rc = render.main(["--kind", "density", "--in",
                      str(data / "example1_components.json"), "--out", str(out)])
    assert rc == 0
    assert _png(out).size == (960, 720)
    # the report carries two disjoint windows, one per surviving density
    d = json.loads((data / "example1_components.json").read_text())
    (lo, hi), n = d["partition"]["domain"], d["partition"]["n"]
    h = (hi - lo) / n
    spans = sorted((lo + c["cells"][0] * h, lo + (c["cells"][1] + 1) * h)
                   for c in d["components"])
    assert len(spans) == 2
    assert 0.9 <= spans[0][0] and spans[0][1] <= 4.1
    assert 5.4 <= spans[1][0] and spans[1][1] <= 9.6
    assert spans[0][1] < spans[1][0]


def test_spectrum_of_mixing_map_sits_in_the_gap(data, tmp_path):
    src = data / "doubling_spectrum.json"
    out = tmp_path / "spec.png"
    assert render.main(["--kind", "spectrum", "--in", str(src),
                        "--out", str(out)]) == 0
    assert _png(out).size == (780, 780)
    w = np.asarray(json.loads(src.read_text())["eigenvalues"], dtype=float)
    mods = np.hypot(w[:, 0], w[:, 1])
    assert mods[0] == pytest.approx(1.0, abs=1e-9)
    assert (mods[1:] <= 0.5).all()  # everything non-unit inside radius 0.5


def test_spectrum_of_metastable_map_marks_xi(data, tmp_path):
    # the metastability block of an example report uses the same schema
    src = data / "example2_metastability.json"
    out = tmp_path / "spec2.png"
    assert render.main(["--kind", "spectrum", "--in", str(src),
                        "--out", str(out)]) == 0
    d = json.loads(src.read_text())
    assert d["xi"] is not None and 0.9 < d["xi"] < 1.0
    # sign cells of the second eigenvector split into the two windows
    assert d["positive_cells"] and d["negative_cells"]


def test_map_graph_plain_and_wrapped(data, tmp_path):
    for name in ("example1.json", "doubling.json"):
        out = tmp_path / f"{name}.png"
        assert render.main(["--kind", "map-graph", "--in", str(data / name),
                            "--out", str(out)]) == 0
        assert _png(out).size == (780, 780)


def test_scatter_accumulates_on_the_right(data, tmp_path):
    src = data / "orbits.csv"
    out = tmp_path / "orbits.png"
    assert render.main(["--kind", "scatter", "--in", str(src),
                        "--out", str(out)]) == 0
    assert _png(out).size == (780, 780)
    rows = np.genfromtxt(src, delimiter=",", names=True)
    assert (rows["x"] > 0.55).mean() >= 0.99


def test_output_is_byte_stable(data, tmp_path):
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    for out in (a, b):
        assert render.main(["--kind", "density", "--in",
                            str(data / "example1_components.json"),
                            "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_schema_mismatch_exits_2(data, tmp_path, capsys):
    out = str(tmp_path / "x.png")
    # CSV where JSON is expected, JSON lacking the kind's keys, wrong columns
    cases = [
        ("density", data / "orbits.csv"),
        ("spectrum", data / "example1.json"),
        ("scatter", data / "example1_components_density_0.csv"),
        ("map-graph", data / "doubling_spectrum.json"),
        ("density", data / "no_such_file.json"),
    ]
    for kind, src in cases:
        rc = render.main(["--kind", kind, "--in", str(src), "--out", out])
        assert rc == 2, (kind, src.name)
        assert "error:" in capsys.readouterr().err
    assert not Path(out).exists()


def test_unknown_kind_is_usage_error():
    with pytest.raises(SystemExit) as err:
        render.main(["--kind", "pie", "--in", "x", "--out", "y"])
    assert err.value.code == 2


def test_renderer_never_touches_the_analysis_package():
    src = (Path(render.__file__)).read_text()
    assert "pseudorbit" not in src.replace("pseudorbit-plots", "")
    assert not any(m == "pseudorbit" or m.startswith("pseudorbit.")
                   for m in sys.modules)


def test_command_line_invocation(data, tmp_path):
    out = tmp_path / "cli.png"
    proc = subprocess.run(
        [sys.executable, str(Path(render.__file__)), "--kind", "scatter",
         "--in", str(data / "orbits.csv"), "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
