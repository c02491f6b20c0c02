import json
import subprocess
import sys

import numpy as np
import pytest

from modelset import io
from modelset.cli import main
from modelset.errors import ConfigError
from modelset.patch import Box

from conftest import ZSQRT2_JSON


@pytest.fixture
def scheme_file(tmp_path):
    def make(window=None, **extra):
        raw = dict(ZSQRT2_JSON, **extra)
        if window is not None:
            raw["window"] = window
        p = tmp_path / f"scheme{len(list(tmp_path.iterdir()))}.json"
        p.write_text(json.dumps(raw))
        return str(p)

    return make


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_generate_example(tmp_path, scheme_file, capsys):
    out = tmp_path / "p.csv"
    code, _, _ = run(capsys, "generate", "--scheme", scheme_file(), "--region", "0,6", "--out", str(out))
    assert code == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "x1" and len(rows) == 5
    assert [float(r) for r in rows[1:]] == pytest.approx([0, 1 + 2**0.5, 2 + 2**0.5, 3 + 2 * 2**0.5])
    man = json.loads((tmp_path / "p.csv.manifest.json").read_text())
    assert man["count"] == 4 and man["region"] == [0.0, 6.0] and len(man["scheme_sha256"]) == 64


def test_generate_is_byte_identical(tmp_path, scheme_file, capsys):
    s = scheme_file()
    for name in ("a", "b"):
        assert run(capsys, "generate", "--scheme", s, "--region", "-50,50", "--out", str(tmp_path / f"{name}.csv"))[0] == 0
    for suffix in (".csv", ".csv.manifest.json"):
        assert (tmp_path / f"a{suffix}").read_bytes() == (tmp_path / f"b{suffix}").read_bytes()


def test_csv_roundtrip(fib):
    p = fib.patch(Box([-20], [20]))
    back = io.patch_from_csv(io.patch_to_csv(p), p.region)
    assert np.array_equal(back.points, p.points)


def test_generate_empty_window(scheme_file, capsys):
    code, out, _ = run(capsys, "generate", "--scheme", scheme_file({"kind": "box", "half_widths": [0.0]}), "--region", "0,6")
    assert code == 0 and out.splitlines() == ["x1"]


def test_config_errors(tmp_path, scheme_file, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "generate", "--scheme", str(bad), "--region", "0,6")
    assert code == 2 and json.loads(err)["error"] == "ConfigError"
    assert run(capsys, "generate", "--scheme", str(tmp_path / "missing.json"), "--region", "0,6")[0] == 2
    assert run(capsys, "generate", "--scheme", scheme_file(), "--region", "0,a")[0] == 2
    assert run(capsys, "generate", "--region", "0,6")[0] == 2


def test_budget_exit_code(scheme_file, capsys):
    code, _, err = run(capsys, "generate", "--scheme", scheme_file(), "--region", "-1e6,1e6", "--budget", "1000")
    assert code == 3 and json.loads(err)["exit_code"] == 3


def test_verify_examples(scheme_file, capsys):
    s = scheme_file()
    code, out, _ = run(capsys, "verify", "flc", "--scheme", s, "--region", "-100,100")
    assert code == 0 and json.loads(out)["verdict"] == "FLC_Evidence"
    code, out, _ = run(capsys, "verify", "regularity", "--scheme", scheme_file({"kind": "box", "half_widths": [1.0]}))
    assert code == 0 and json.loads(out)["verdict"] == "BoundaryHit"
    code, out, _ = run(capsys, "verify", "delone", "--scheme", s, "--region", "-50,50")
    assert json.loads(out)["verdict"] == "Delone"
    empty = scheme_file({"kind": "box", "half_widths": [0.0]})
    assert run(capsys, "verify", "delone", "--scheme", empty, "--region", "0,6")[0] == 2


def test_autocorr_modes(scheme_file, capsys):
    s = scheme_file()
    code, out, _ = run(capsys, "autocorr", "theoretical", "--scheme", s, "--cutoff", "0")
    atoms = json.loads(out)["atoms"]
    assert code == 0 and len(atoms) == 1 and atoms[0]["weight"] == pytest.approx(1.6 / (2 * 2**0.5))
    code, out, _ = run(capsys, "autocorr", "empirical", "--scheme", s, "--t-grid", "100", "--function", "tent:0:0.4")
    assert code == 0 and len(out.splitlines()) == 2 and out.startswith("t,count,volume,sigma")
    code, out, _ = run(capsys, "autocorr", "compare", "--scheme", s, "--T", "2000", "--atoms", "3")
    assert code == 0 and json.loads(out)["verdict"] == "pass"
    assert run(capsys, "autocorr", "empirical", "--scheme", s, "--t-grid", "5:1:1", "--function", "tent:0:0.4")[0] == 2


def test_nonuniform_cli(capsys):
    code, out, _ = run(capsys, "nonuniform", "--primes", "3,5")
    assert code == 0 and json.loads(out)["covolume_sum"] == "15/8"
    assert json.loads(run(capsys, "nonuniform", "--primes", "")[1])["covolume_sum"] == "1"
    assert run(capsys, "nonuniform", "--primes", "3,3")[0] == 2


def test_hull_cli(scheme_file, capsys):
    s = scheme_file()
    code, out, _ = run(capsys, "hull", "entourage", "--scheme", s, "--region", "-5,5", "--eps", "0.5", "--shift", "0", "--oracle")
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "Yes" and rep["oracle_agrees"] is True
    code, out, _ = run(capsys, "hull", "basic", "--scheme", s, "--region", "2.3,2.5")
    assert json.loads(out)["verdict"] is True


def test_scheme_loading():
    assert io.scheme_from_dict({"type": "sl2-zsqrt2", "window": {"frobenius_radius": 1.3}}).model.rho == io.scheme_from_dict(
        {"type": "sl2-zsqrt2", "window": {"rho": 1.3}}
    ).model.rho
    with pytest.raises(ConfigError):
        io.scheme_from_dict({"type": "torus"})
    with pytest.raises(ConfigError):
        io.scheme_from_dict({"type": "euclidean", "d": 1})
    assert io.parse_t_grid("1:3:1").tolist() == [1, 2, 3]


def test_console_script(scheme_file):
    r = subprocess.run([sys.executable, "-m", "modelset", "nonuniform", "--primes", "3"], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["orbit_count"] == 2
