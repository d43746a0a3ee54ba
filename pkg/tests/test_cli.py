import json
import math
import subprocess
import sys

import pytest

from floquet_lrr import cli, models
from floquet_lrr.lattice import PeriodicLatticeOperator
from floquet_lrr.report import NonFiniteValueError, dumps


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, op in (("lap2", models.laplacian(2)), ("lap3", models.laplacian(3)),
                     ("gapped", models.laplacian(2, 1.0)), ("graphene", models.graphene()),
                     ("drift", models.drift_laplacian(0.5)),
                     ("complex", PeriodicLatticeOperator.from_tuples(1, 1, [(0, 0, (1,), 1j)]))):
        p = tmp_path / f"{name}.json"
        p.write_text(op.to_json())
        paths[name] = str(p)
    cont = tmp_path / "cont.json"
    cont.write_text(json.dumps({"plus": [{"point": {"x": [0, 0, 0]}, "alphas": [[0, 0, 0]]}], "minus": []}))
    paths["cont"] = str(cont)
    lat = tmp_path / "lat.json"
    lat.write_text(json.dumps({"plus": [{"point": {"g": [0, 0], "c": 0}, "alphas": [[0, 0]]}], "minus": []}))
    paths["lat"] = str(lat)
    return paths


def _run(args, out):
    return cli.run(args + ["--out", str(out)])


def test_bands_and_spectrum(files, tmp_path):
    assert _run(["bands", "--op", files["lap2"], "--grid", "9", "--fiber"], tmp_path) == 0
    lines = (tmp_path / "bands.csv").read_text().splitlines()
    assert len(lines) == 82
    assert (tmp_path / "fiber.csv").exists()
    assert _run(["spectrum", "--op", files["lap2"]], tmp_path) == 0
    spec = json.loads((tmp_path / "spectrum.json").read_text())
    assert spec["intervals"] == [[0.0, 8.0]]


def test_fermi_and_liouville(files, tmp_path):
    assert _run(["fermi", "--op", files["graphene"]], tmp_path) == 0
    pts = json.loads((tmp_path / "fermi.json").read_text())
    assert [p["m"] for p in pts] == [2, 2]
    assert _run(["liouville-dim", "--op", files["lap3"], "--p", "inf", "--N", "2"], tmp_path) == 0
    assert json.loads((tmp_path / "liouville.json").read_text())["dim_VpN"]["value"] == 9
    assert _run(["liouville-dim", "--op", files["lap3"], "--p", "2", "--N", "3"], tmp_path) == 0
    assert json.loads((tmp_path / "liouville.json").read_text())["dim_VpN"]["value"] == 4
    # pN = d exactly: trivial class
    assert _run(["liouville-dim", "--op", files["lap3"], "--p", "2", "--N", "1.5"], tmp_path) == 0
    assert json.loads((tmp_path / "liouville.json").read_text())["dim_VpN"]["value"] == 0


def test_lrr_applicable_and_inapplicable(files, tmp_path):
    assert _run(["lrr", "--op", files["lap3"], "--p", "inf", "--N", "0"], tmp_path) == 0
    rep = json.loads((tmp_path / "lrr-report.json").read_text())
    assert rep["status"] == "ok" and rep["lower_bound"] == 1
    assert _run(["lrr", "--op", files["lap2"], "--p", "inf", "--N", "0"], tmp_path) == 2


def test_divisor_degree(files, tmp_path):
    assert _run(["divisor-degree", "--divisor", files["cont"], "--symbol", "neg-laplacian"], tmp_path) == 0
    assert json.loads((tmp_path / "degree.json").read_text())["degree"] == 1
    assert _run(["divisor-degree", "--divisor", files["lat"], "--op", files["lap2"]], tmp_path) == 0
    assert _run(["divisor-degree", "--divisor", files["lat"]], tmp_path) == 64


def test_empty_fermi(files, tmp_path):
    assert _run(["empty-fermi", "--op", files["gapped"], "--divisor", files["lat"], "--radii", "8,10,12"],
                tmp_path) == 0
    rep = json.loads((tmp_path / "empty-fermi.json").read_text())
    assert rep["dim_L"] == 1 and rep["truncated_estimate"]["dims"] == [1, 1, 1]
    assert _run(["empty-fermi", "--op", files["lap2"]], tmp_path) == 2


def test_oracles(files, tmp_path):
    assert _run(["oracle-vinf", "--op", files["graphene"], "--N", "1"], tmp_path) == 0
    rep = json.loads((tmp_path / "oracle-vinf.json").read_text())
    assert rep["oracle"] == rep["formula"]["value"] == 8 and rep["agree"]
    assert _run(["oracle-continuum", "--divisor", files["cont"], "--decaying"], tmp_path) == 0
    assert json.loads((tmp_path / "oracle-continuum.json").read_text())["dim"] == 1
    assert _run(["oracle-dedekind", "--ks", "0;3.141592653589793"], tmp_path) == 0
    assert json.loads((tmp_path / "dedekind.json").read_text())["shifts"] == [[0], [1]]


def test_green_and_principal(files, tmp_path):
    assert _run(["green", "--op", files["gapped"], "--radius", "20"], tmp_path) == 0
    assert json.loads((tmp_path / "green.json").read_text())["decay_rate"] > 0
    assert _run(["principal-eigenvalue", "--op", files["drift"]], tmp_path) == 0
    rep = json.loads((tmp_path / "principal.json").read_text())
    assert rep["xi0"][0] == pytest.approx(0.5 * math.log(0.5), abs=1e-7)
    assert _run(["principal-eigenvalue", "--op", files["complex"]], tmp_path) == 2
    assert json.loads((tmp_path / "principal.json").read_text())["failed_hypotheses"] == ["perron-class"]


def test_exit_codes_for_bad_input(files, tmp_path):
    assert _run(["spectrum", "--op", str(tmp_path / "missing.json")], tmp_path) == 64
    assert _run(["lrr", "--op", files["lap2"], "--p", "0.5"], tmp_path) == 64
    assert _run(["lrr", "--op", files["lap2"], "--N", "nan"], tmp_path) == 64
    assert _run(["no-such-command"], tmp_path) == 64
    assert _run(["oracle-dedekind", "--ks", "0,1;2"], tmp_path) == 64
    assert _run(["oracle-vinf", "--op", files["lap2"], "--N", "1.5"], tmp_path) == 64
    assert _run(["empty-fermi", "--op", files["gapped"], "--radii", "8,x"], tmp_path) == 64


def test_instability_exit_code(files, tmp_path):
    # level 4 lies inside the band: the zero set is a curve
    assert _run(["fermi", "--op", files["lap2"], "--level", "4"], tmp_path) == 3


def test_outputs_byte_identical(files, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert _run(["lrr", "--op", files["lap3"]], out) == 0
        assert _run(["bands", "--op", files["graphene"], "--grid", "7"], out) == 0
    for name in ("lrr-report.json", "bands.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_nan_refused(tmp_path, monkeypatch):
    with pytest.raises(NonFiniteValueError):
        dumps({"x": float("nan")})
    with pytest.raises(NonFiniteValueError):
        dumps([1.0, math.inf])

    def bad(args):
        from floquet_lrr.report import emit_report
        emit_report({"value": float("nan")}, tmp_path / "bad.json")
        return 0

    monkeypatch.setattr(cli, "cmd_spectrum", bad)
    parser = cli.build_parser()
    monkeypatch.setattr(cli, "build_parser", lambda: _with_func(parser, "spectrum", bad))
    assert cli.run(["spectrum", "--op", "x", "--out", str(tmp_path)]) == 1
    assert not (tmp_path / "bad.json").exists()


def _with_func(parser, name, fn):
    for action in parser._subparsers._group_actions:
        action.choices[name].set_defaults(func=fn)
    return parser


def test_float_formatting():
    assert dumps({"b": 1.0, "a": 0.1}) == '{\n  "a": 0.10000000000000001,\n  "b": 1.0\n}\n'


def test_module_entry_point(files, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "floquet_lrr", "spectrum", "--op", files["lap2"],
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("spectrum:")
