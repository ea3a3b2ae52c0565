import hashlib
import io
import json
import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from momentforge import cli

# frozen at the first build (numpy 2.2 generators); both kernel paths must reproduce them
GOLDEN = {
    ("--space", "bounded:0,1", "--n", "3", "--count", "2000", "--seed", "1"):
        "98a0a204b465f018cdef2e325031cef50e00d09493b65e875b351597757d0c8b",
    ("--space", "halfline", "--n", "4", "--gamma", "0,1,0,2", "--count", "1500", "--seed", "2"):
        "9452225b1c62e6c2ec089db5463e7a7737c099b6c7b346fd2559aa4536bc1826",
    ("--space", "realline", "--n", "3", "--count", "3000", "--seed", "3"):
        "f21b56e35e65c5abb672e213e6da118f91d4852b326d1ae75934ed3bf487c7be",
}


def run(args, stdin=None, monkeypatch=None):
    """Run the CLI in-process; returns (exit code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    old = sys.stdin, sys.stdout, sys.stderr
    sys.stdin = io.StringIO(stdin or "")
    sys.stdout, sys.stderr = out, err
    try:
        try:
            code = cli.main(list(args))
        except SystemExit as exc:
            code = exc.code
    finally:
        sys.stdin, sys.stdout, sys.stderr = old
    return code, out.getvalue(), err.getvalue()


def read_rows(text):
    lines = text.strip().splitlines()
    return lines[0].split(","), [[cli.parse_token(t) for t in ln.split(",")] for ln in lines[1:]]


def sha(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


# -- convert --------------------------------------------------------------------------

def test_convert_catalan_to_z(tmp_path):
    f = tmp_path / "m.csv"
    f.write_text("1,2,5\n")
    code, out, _ = run(["convert", "--from", "moments", "--to", "z", "--support", "halfline",
                        "--input", str(f)])
    assert code == 0
    assert out == "z1,z2,z3\n1,1,1\n"


def test_convert_canonical_to_moments_float():
    code, out, _ = run(["convert", "--from", "canonical", "--to", "moments",
                        "--support", "bounded:0,1", "--input", "-"], stdin="0.5,0.5\n")
    assert code == 0
    header, rows = read_rows(out)
    assert header == ["m1", "m2"] and rows == [[0.5, 0.375]]


def test_convert_exact_fractions_and_recurrence():
    code, out, _ = run(["convert", "--from", "moments", "--to", "recurrence", "--support",
                        "realline", "--input", "-"], stdin="m1,m2,m3\n0,1,0\n1/2,1,3/4\n")
    assert code == 0
    header, rows = read_rows(out)
    assert header == ["b1", "a1", "b2"]
    assert rows[0] == [0, 1, 0]
    assert all(isinstance(v, (int, Fraction)) for v in rows[1])
    code, out2, _ = run(["convert", "--from", "recurrence", "--to", "moments", "--support",
                         "realline", "--input", "-"], stdin=out)
    assert read_rows(out2)[1] == [[0, 1, 0], [Fraction(1, 2), 1, Fraction(3, 4)]]


def test_convert_output_file(tmp_path):
    out = tmp_path / "p.csv"
    code, _, _ = run(["convert", "--from", "moments", "--to", "canonical", "--support",
                      "bounded:0,4", "--input", "-", "--output", str(out)], stdin="1 2\n")
    assert code == 0
    assert out.read_text() == "p1,p2\n1/4,1/3\n"


def test_convert_exit_codes(tmp_path):
    assert run(["convert", "--from", "moments", "--to", "z", "--support", "halfline",
                "--input", "-"], stdin="")[0] == 3
    assert run(["convert", "--from", "moments", "--to", "z", "--support", "halfline",
                "--input", "-"], stdin="# only a comment\n")[0] == 3
    assert run(["convert", "--from", "moments", "--to", "z", "--support", "halfline",
                "--input", "-"], stdin="1,abc\n")[0] == 3
    assert run(["convert", "--from", "moments", "--to", "z", "--support", "halfline",
                "--input", str(tmp_path / "missing.csv")])[0] == 3
    assert run(["convert", "--from", "moments", "--to", "z", "--support", "nowhere",
                "--input", "-"], stdin="1\n")[0] == 3
    assert run(["convert", "--from", "z", "--to", "moments", "--support", "realline",
                "--input", "-"], stdin="1\n")[0] == 3


def test_convert_non_interior_reports_coordinate():
    code, _, err = run(["convert", "--from", "moments", "--to", "z", "--support", "halfline",
                        "--input", "-"], stdin="1,0.5,3\n")
    assert code == 2
    assert "coordinate 2" in err
    code, _, err = run(["convert", "--from", "moments", "--to", "canonical", "--support",
                        "bounded:0,1", "--input", "-"], stdin="0.5,0.25,0.1\n")
    assert code == 2 and "coordinate 2" in err


def test_bad_flags_exit_3():
    assert run(["convert", "--bogus"])[0] == 3
    assert run(["sample", "--space", "halfline", "--n", "0", "--count", "3"])[0] == 3
    assert run(["clt", "--preset", "nope"])[0] == 3
    assert run(["ensemble", "--kind", "jacobi", "--n", "2", "--beta", "x", "--moments", "1",
                "--count", "1"])[0] == 3
    assert run([])[0] == 3
    assert run(["sample", "--space", "halfline", "--n", "2", "--count", "3",
                "--seed", "-4"])[0] == 3


# -- serialization ------------------------------------------------------------------------

def test_csv_round_trip_is_lossless():
    rng = np.random.default_rng(0)
    values = np.concatenate([rng.normal(size=500) * 10.0 ** rng.integers(-300, 300, 500),
                             [np.pi, 1 / 3, 5e-324, 1.7976931348623157e308, -0.0]])
    buf = io.StringIO()
    cli.write_csv(buf, ["x"], [[v] for v in values])
    _, rows = read_rows(buf.getvalue())
    back = np.array([r[0] for r in rows], dtype=float)
    assert np.array_equal(back, values)


def test_parse_helpers():
    assert cli.parse_token("3") == 3 and cli.parse_token("-2/6") == Fraction(-1, 3)
    assert cli.parse_token("1e-3") == 1e-3 and cli.parse_token(".5") == 0.5
    with pytest.raises(cli.ParseError):
        cli.parse_token("1/2/3")
    assert cli.parse_vectors("a b\n1 2\n# c\n3,4\n") == [[1, 2], [3, 4]]
    assert cli.format_value(Fraction(4, 2)) == "2"


# -- sample ----------------------------------------------------------------------------

@pytest.mark.parametrize("flags", list(GOLDEN), ids=["bounded", "halfline", "realline"])
def test_sample_golden_checksums(flags, tmp_path):
    out = tmp_path / "s.csv"
    assert run(["sample", *flags, "--output", str(out)])[0] == 0
    assert sha(out) == GOLDEN[flags]


def test_sample_golden_without_numba(tmp_path):
    flags = list(GOLDEN)[2]
    out = tmp_path / "s.csv"
    env = dict(os.environ, MOMENTFORGE_DISABLE_NUMBA="1")
    subprocess.run([sys.executable, "-m", "momentforge", "sample", *flags, "--output", str(out)],
                   check=True, env=env)
    assert sha(out) == GOLDEN[flags]


def test_sample_header_and_uniform_mean():
    code, out, _ = run(["sample", "--space", "bounded:0,1", "--n", "1", "--count", "20000",
                        "--seed", "5"])
    header, rows = read_rows(out)
    assert code == 0 and header == ["m1"]
    x = np.array(rows, dtype=float)[:, 0]
    assert abs(x.mean() - 0.5) < 0.01


def test_sample_clt_rates_and_lists():
    code, out, _ = run(["sample", "--space", "halfline", "--n", "3", "--delta", "n",
                        "--count", "10", "--seed", "1"])
    assert code == 0 and len(read_rows(out)[1]) == 10
    code, out2, _ = run(["sample", "--space", "halfline", "--n", "3", "--delta", "3,3,3",
                         "--count", "10", "--seed", "1"])
    assert out == out2
    code, _, err = run(["sample", "--space", "halfline", "--n", "3", "--gamma", "-5",
                        "--count", "1"])
    assert code == 2 and "shape" in err
    assert run(["sample", "--space", "halfline", "--n", "3", "--gamma", "1,2",
                "--count", "1"])[0] == 2


def test_seed_environment_and_default(monkeypatch):
    args = ["sample", "--space", "halfline", "--n", "2", "--count", "5"]
    monkeypatch.delenv("MOMENTFORGE_SEED", raising=False)
    default = run(args)[1]
    assert default == run(args + ["--seed", str(cli.DEFAULT_SEED)])[1]
    monkeypatch.setenv("MOMENTFORGE_SEED", "99")
    env = run(args)[1]
    assert env == run(args + ["--seed", "99"])[1] and env != default
    assert run(args + ["--seed", "7"])[1] == run(args + ["--seed", "7"])[1]
    monkeypatch.setenv("MOMENTFORGE_SEED", "abc")
    assert run(args)[0] == 3


def test_fresh_seed_is_reported():
    code, out, err = run(["sample", "--space", "halfline", "--n", "2", "--count", "3",
                          "--fresh-seed"])
    seed = int(err.split("seed:")[1])
    assert out == run(["sample", "--space", "halfline", "--n", "2", "--count", "3",
                       "--seed", str(seed)])[1]


# -- ensemble ----------------------------------------------------------------------------

def test_ensemble_jacobi_beta4_uniform():
    code, out, _ = run(["ensemble", "--kind", "jacobi", "--n", "1", "--beta", "4",
                        "--moments", "2", "--count", "5000", "--seed", "3"])
    header, rows = read_rows(out)
    x = np.array(rows, dtype=float)
    assert code == 0 and header == ["m1", "m2"]
    assert stats.kstest(x[:, 0], "uniform").pvalue > 1e-3
    assert np.allclose(x[:, 1], x[:, 0] ** 2)


def test_ensemble_hermite_n1_normal():
    code, out, _ = run(["ensemble", "--kind", "hermite", "--n", "1", "--beta", "2",
                        "--moments", "1", "--count", "5000", "--seed", "4"])
    x = np.array(read_rows(out)[1], dtype=float)[:, 0]
    assert stats.kstest(x, "norm").pvalue > 1e-3


def test_ensemble_laguerre_rescaled_mean():
    code, out, _ = run(["ensemble", "--kind", "laguerre", "--n", "500", "--beta", "2",
                        "--rescaled", "--moments", "1", "--count", "200", "--seed", "5"])
    x = np.array(read_rows(out)[1], dtype=float)[:, 0]
    assert abs(x.mean() - 1) < 0.05


def test_ensemble_atoms_output():
    code, out, _ = run(["ensemble", "--kind", "laguerre", "--n", "3", "--beta", "1", "--a", "0.5",
                        "--moments", "2", "--count", "4", "--atoms"])
    header, rows = read_rows(out)
    assert header == ["m1", "m2", "lambda1", "lambda2", "lambda3", "w1", "w2", "w3"]
    r = np.array(rows, dtype=float)
    assert np.allclose((r[:, 5:] * r[:, 2:5]).sum(axis=1), r[:, 0])
    assert np.allclose(r[:, 5:].sum(axis=1), 1)


def test_ensemble_domain_errors():
    assert run(["ensemble", "--kind", "hermite", "--n", "3", "--beta", "2", "--hermite-shape",
                "shifted", "--moments", "2", "--count", "3"])[0] == 2
    assert run(["ensemble", "--kind", "jacobi", "--n", "3", "--beta", "-1", "--moments", "2",
                "--count", "3"])[0] == 2


# -- clt -----------------------------------------------------------------------------

def test_clt_report_schema_and_verdict(tmp_path):
    rep = tmp_path / "r.json"
    code, _, _ = run(["clt", "--preset", "halfline", "--n", "300", "--k", "2", "--samples",
                      "4000", "--report", str(rep)])
    r = json.loads(rep.read_text())
    assert {"preset", "k", "n", "samples", "seed", "ks", "cov", "max_cov_dev", "pass"} <= set(r)
    assert r["preset"] == "halfline" and r["k"] == 2 and r["samples"] == 4000
    assert all(set(x) == {"coord", "stat", "p"} for x in r["ks"])
    assert code == (0 if r["pass"] else 1)


def test_clt_wrong_centering_flips_verdict():
    base = ["clt", "--preset", "bounded", "--n", "500", "--k", "2", "--samples", "5000"]
    code, out, _ = run(base)
    assert code == 0 and json.loads(out)["pass"] is True
    code, out, _ = run(base + ["--wrong-centering"])
    r = json.loads(out)
    assert code == 1 and r["pass"] is False and r["centering"] == "marchenko_pastur"


def test_entry_point_subprocess(tmp_path):
    res = subprocess.run([sys.executable, "-m", "momentforge", "convert", "--from", "moments",
                          "--to", "z", "--support", "halfline", "--input", "-"],
                         input="1,2,5\n", capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.splitlines()[1] == "1,1,1"
    res = subprocess.run([sys.executable, "-m", "momentforge", "convert", "--from", "moments",
                          "--to", "z", "--support", "halfline", "--input", "-"],
                         input="", capture_output=True, text=True)
    assert res.returncode == 3
