import io
import math
import subprocess
import sys

import numpy as np
import pytest

from peakcap import cli


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out=out)
    return code, out.getvalue()


def field(text, name):
    for line in text.splitlines():
        parts = line.split()
        if parts and parts[0] == name:
            return float(parts[1])
    raise KeyError(name)


def test_capacity_gm():
    code, out = run("capacity", "--model", "gm-discrete", "--rho", "0.9", "--P", "1")
    assert code == 0
    assert field(out, "C_p") == pytest.approx(0.638215207555, abs=1e-12)
    assert field(out, "U_p") == pytest.approx(4.76315789474, abs=1e-10)
    assert field(out, "coherent") == 1.0


def test_capacity_block():
    code, out = run("capacity", "--model", "block", "--T", "1", "--P", "1")
    assert code == 0 and field(out, "C_p") == pytest.approx(1 - math.log(2), abs=1e-12)


def test_capacity_clarke_reports_both_forms():
    code, out = run("capacity", "--model", "clarke", "--P", "1")
    assert code == 0
    assert field(out, "C_p") == pytest.approx(2 / math.pi * math.log(2), abs=1e-11)
    assert field(out, "published") == pytest.approx(0.122351, abs=1e-6)
    assert math.isinf(field(out, "U_p"))


def test_capacity_infinite_peak():
    code, out = run("capacity", "--model", "white", "--P", "inf")
    assert code == 0 and field(out, "C_p") == 1.0


def test_bounds():
    code, out = run("bounds", "--rho", "0.9", "--p-avg", "1", "--beta", "1")
    assert code == 0
    assert field(out, "energy_bound") == pytest.approx(0.638215, abs=1e-6)
    assert field(out, "fourthegy_bound") == pytest.approx(4.763158, abs=1e-6)


@pytest.mark.parametrize("argv", [
    ("capacity", "--rho", "1", "--P", "1"),
    ("capacity", "--P", "-2"),
    ("capacity", "--model", "nope", "--P", "1"),
    ("capacity", "--model", "tabulated", "--P", "1"),
    ("capacity", "--model", "block", "--T", "2.5", "--P", "1"),
    ("bounds", "--p-avg", "1", "--beta", "0.5"),
    ("sweep", "--min", "1", "--max", "2", "--count", "1"),
    ("sweep", "--param", "rho", "--model", "clarke", "--min", "0", "--max", "0.5"),
    ("sweep", "--min", "0", "--max", "2"),
    ("verify", "subsets", "--n", "25"),
    (),
])
def test_invalid_flags_exit_2(argv, capsys):
    code, _ = run(*argv)
    assert code == 2


def test_numerical_failure_exit_3(tmp_path, monkeypatch):
    from peakcap import capacity as cap
    from peakcap._quad import QuadratureError

    def boom(*a, **k):
        raise QuadratureError("forced", 0.0, 1.0)

    monkeypatch.setattr(cap, "cap_per_unit_energy", boom)
    code, _ = run("capacity", "--P", "1")
    assert code == 3


def test_tabulated_file(tmp_path):
    w = np.linspace(-math.pi, math.pi, 401)
    rho = 0.5
    d = (1 - rho**2) / (1 - 2 * rho * np.cos(w) + rho**2)
    p = tmp_path / "gm.csv"
    p.write_text("omega,S\n" + "\n".join(f"{a:.17g},{b:.17g}" for a, b in zip(w, d)), encoding="utf-8")
    code, out = run("capacity", "--model", "tabulated", "--table", str(p), "--renormalize", "--P", "1")
    assert code == 0
    from peakcap.capacity import gauss_markov_cp_closed

    assert field(out, "C_p") == pytest.approx(gauss_markov_cp_closed(rho, 1).c_p, abs=1e-4)


def _rows(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    return header, np.array([[float(x) for x in l.split(",")] for l in lines[1:]])


def test_sweep_P_shape():
    code, out = run("sweep", "--min", "1e-2", "--max", "1e2", "--count", "25")
    assert code == 0
    assert out.startswith("# peakcap")
    header, rows = _rows(out)
    assert header == ["P", "C_p", "U_p", "I", "coherent"]
    P, cp, up, _, coh = rows.T
    assert np.all(np.diff(cp) >= 0)
    assert np.all(cp <= np.minimum(up, coh) + 1e-12)
    assert cp[0] / up[0] > 0.9  # close to U_p at small P
    assert cp[-1] > 0.96  # approaching coherent at large P


def test_sweep_p_avg_two_betas():
    code, out = run("sweep", "--param", "p_avg", "--min", "1e-3", "--max", "10", "--count", "6",
                    "--beta", "1", "--beta", "5")
    assert code == 0
    header, rows = _rows(out)
    assert header == ["p_avg", "coherent_b1", "energy_b1", "fourthegy_b1", "coherent_b5", "energy_b5", "fourthegy_b5"]
    assert np.all(rows[:, 2] <= rows[:, 1]) and np.all(rows[:, 5] <= rows[:, 4])


def test_sweep_rho_and_T():
    code, out = run("sweep", "--param", "rho", "--min", "0", "--max", "0.99", "--count", "5", "--scale", "linear")
    assert code == 0 and np.all(np.diff(_rows(out)[1][:, 1]) > 0)
    code, out = run("sweep", "--param", "T", "--model", "block", "--time-domain", "continuous",
                    "--min", "0.5", "--max", "100", "--count", "5")
    assert code == 0 and np.all(np.diff(_rows(out)[1][:, 1]) > 0)


def test_sweep_deterministic_and_parallel_order(tmp_path):
    a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
    args = ["sweep", "--model", "clarke", "--min", "0.1", "--max", "50", "--count", "12"]
    assert run(*args, "--out", str(a))[0] == 0
    assert run(*args, "--out", str(b))[0] == 0
    assert run(*args, "--workers", "3", "--out", str(c))[0] == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_sweep_unwritable_path(tmp_path):
    code, _ = run("sweep", "--min", "1", "--max", "2", "--count", "2", "--out", str(tmp_path / "no" / "x.csv"))
    assert code == 2


def test_verify_suites():
    for suite, extra in (("szego", ["--n", "1024"]), ("subsets", ["--n", "10"]),
                         ("coherent", ["--trials", "20"]), ("sampling", ["--K", "8"])):
        code, out = run("verify", suite, *extra)
        lines = out.strip().splitlines()
        assert code == 0, out
        assert lines[0].split("\t") == ["name", "observed", "tolerance", "result"]
        assert all(l.endswith("PASS") for l in lines[1:])


def test_verify_failure_exit_1():
    # with a very small matrix the Szegő gap exceeds its tolerance
    code, out = run("verify", "szego", "--n", "2")
    assert code == 1 and "FAIL" in out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "peakcap", "capacity", "--model", "white", "--P", "1"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "0.30685281944" in r.stdout
