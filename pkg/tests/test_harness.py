import math
import os
import xml.dom.minidom

import numpy as np
import pytest

from longmem.harness import cli, csvio, figures, svg


def run(tmp_path, *argv):
    return cli.main([*argv, "--out-dir", str(tmp_path)])


def only(tmp_path, suffix=".csv"):
    files = sorted(p for p in os.listdir(tmp_path) if p.endswith(suffix))
    assert len(files) == 1, files
    return os.path.join(tmp_path, files[0])


def test_simulate_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(a, "simulate", "--model", "arfima0d0", "--d", "0.4", "--n", "1000", "--seed", "7") == 0
    assert run(b, "simulate", "--model", "arfima0d0", "--d", "0.4", "--n", "1000", "--seed", "7") == 0
    pa, pb = only(a), only(b)
    with open(pa, "rb") as fa, open(pb, "rb") as fb:
        data = fa.read()
        assert data == fb.read()
    assert b"\r" not in data
    comments, cols, rows = csvio.read(pa)
    assert len(rows) == 1000 and cols == ["t", "x"]
    assert comments[0].startswith("longmem ") and "seed: 7" in comments


def test_simulate_invalid_d(tmp_path, capsys):
    assert run(tmp_path, "simulate", "--d", "0.6") == cli.EXIT_INVALID
    assert "|d| < 1/2" in capsys.readouterr().err


def test_simulate_horror_variance(tmp_path):
    assert run(tmp_path, "simulate", "--model", "horror", "--n", "1000", "--reps", "100", "--seed", "1") == 0
    _, cols, rows = csvio.read(only(tmp_path))
    X = np.array(rows, dtype=float)[:, 1:].T
    assert X.shape == (100, 1000)
    # per-path second moment (known zero mean) has expectation gamma(0) = 1
    v = np.mean(X ** 2, axis=1)
    assert abs(v.mean() - 1.0) <= 3 * v.std(ddof=1) / math.sqrt(len(v))


def test_figure_bundles(tmp_path):
    for name in figures.FIGURES:
        d = tmp_path / name
        assert run(d, "figure", name, "--svg", "--seed", "2") == 0
        _, cols, rows = csvio.read(only(d))
        assert len(rows) == 491
        svg_path = only(d, ".svg")
        doc = xml.dom.minidom.parse(svg_path)
        lines = doc.getElementsByTagName("polyline")
        if name == "horror":
            assert "ci_low" not in cols and len(lines) == 1
        else:
            assert "ci_low" in cols and len(lines) == 3


def test_figure_bundle_object():
    b = figures.make_figure("medium", n=400, seed=1, m_min=10, m_max=200, step=5)
    assert b.csv_text.count("\n") == len(b.scan) + 1 + 3  # rows + header + provenance
    assert b.metadata["model"].startswith("arfima_noise")
    assert "tau2=1" in b.metadata["model"]


def test_figure_invalid_range(tmp_path):
    assert run(tmp_path, "figure", "good", "--m-max", "600") == cli.EXIT_INVALID


def test_rate_table_power_slope(tmp_path):
    assert run(tmp_path, "rate-table", "--envelope", "power", "--c", "1", "--beta", "1",
               "--ns", "1e3,1e4,1e5,1e6") == 0
    _, cols, rows = csvio.read(only(tmp_path))
    n = np.array([float(r[0]) for r in rows])
    rate = np.array([float(r[cols.index("rate")]) for r in rows])
    assert abs(np.polyfit(np.log(n), np.log(rate), 1)[0] + 1 / 3) <= 0.01


def test_rate_table_log_inverse_and_empty(tmp_path):
    assert run(tmp_path / "a", "rate-table", "--envelope", "log_inverse", "--rho", "1",
               "--ns", "1e6") == 0
    _, cols, rows = csvio.read(only(tmp_path / "a"))
    rate = float(rows[0][cols.index("rate")])
    # finite-n value: rate * log(n) is still about 1.48 at n = 1e6
    assert 1.0 < rate * math.log(1e6) < 1.6
    assert run(tmp_path / "b", "rate-table", "--envelope", "power") == 0
    comments, cols, rows = csvio.read(only(tmp_path / "b"))
    assert rows == [] and cols == cli.RATE_COLUMNS and comments


def test_rate_table_no_root_row(tmp_path):
    assert run(tmp_path, "rate-table", "--envelope", "power", "--c", "1e-3", "--ns", "10,1e9") == 0
    _, cols, rows = csvio.read(only(tmp_path))
    assert rows[0][cols.index("error")] and not rows[1][cols.index("error")]


def test_lowerbound_rows(tmp_path):
    assert run(tmp_path / "deg", "lowerbound", "--degenerate", "--n", "64", "--reps", "20") == 0
    _, cols, rows = csvio.read(only(tmp_path / "deg"))
    assert float(rows[0][cols.index("risk_floor")]) == 0.0
    assert run(tmp_path / "sw", "lowerbound", "--ell-sweep", "--n", "256", "--reps", "200") == 0
    _, cols, rows = csvio.read(only(tmp_path / "sw"))
    var = [float(r[cols.index("var_lambda")]) for r in rows]
    assert len(rows) == 5 and np.all(np.diff(var) > 0)


def test_lowerbound_defaults(tmp_path):
    assert run(tmp_path, "lowerbound") == 0
    comments, cols, rows = csvio.read(only(tmp_path))
    assert "n=1024" in comments[1] and "reps=500" in comments[1]
    assert float(rows[0][cols.index("p_accept")]) >= 0.5


def test_lowerbound_dump(tmp_path):
    assert run(tmp_path, "lowerbound", "--n", "64", "--reps", "10", "--dump-lambdas") == 0
    assert any(p.endswith("_lambdas.csv") for p in os.listdir(tmp_path))


def test_numerical_failure_exit_code(tmp_path, capsys):
    code = run(tmp_path, "lowerbound", "--envelope", "power", "--c", "1e-4", "--n", "64")
    assert code == cli.EXIT_NUMERICAL
    assert "numerical failure" in capsys.readouterr().err


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sample config\nmodel = horror\nn = 50\nseed = 4\n")
    assert run(tmp_path / "a", "simulate", "--config", str(cfg)) == 0
    assert os.path.basename(only(tmp_path / "a")) == "simulate_horror_n50_seed4.csv"
    assert run(tmp_path / "b", "simulate", "--config", str(cfg), "--n", "20") == 0
    assert os.path.basename(only(tmp_path / "b")) == "simulate_horror_n20_seed4.csv"
    cfg.write_text("bogus = 1\n")
    assert run(tmp_path / "c", "simulate", "--config", str(cfg)) == cli.EXIT_INVALID


def test_svg_writer_wellformed():
    text = svg.line_chart([1, 2, 3], [("a&b", [0.1, 0.2, 0.15], False), ("c", [0, 0, 0], True)],
                          title="t<1>", xlabel="m", ylabel="d")
    doc = xml.dom.minidom.parseString(text)
    assert len(doc.getElementsByTagName("polyline")) == 2
    assert svg.line_chart([1, 2], [("x", [1.0, 1.0], False)]) == svg.line_chart([1, 2], [("x", [1.0, 1.0], False)])


def test_csv_dialect():
    text = csvio.render(["a", "b"], [[1, 0.1], [2, None]], ["hello"])
    assert text == "# hello\na,b\n1,0.1\n2,\n"


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
    assert "longmem" in capsys.readouterr().out
