import json
import subprocess
import sys

import numpy as np
import pytest

from helpers import ABSORB3, HALF, TRACE3, TWO, A, kernel, toy_economy
from markov_ergodic import InvalidInputError, MarkovKernel, StateSpace, decompose
from markov_ergodic import io
from markov_ergodic.cli import main


def write(path, obj):
    path.write_text(io.dumps(obj))
    return str(path)


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path):
    return {
        "absorb3": write(tmp_path / "absorb3.json", io.kernel_to_dict(kernel(ABSORB3))),
        "two": write(tmp_path / "two.json", io.kernel_to_dict(kernel(TWO))),
        "half": write(tmp_path / "half.json", io.kernel_to_dict(kernel(HALF))),
        "trace3": write(tmp_path / "trace3.json", io.kernel_to_dict(kernel(TRACE3))),
        "ident": write(tmp_path / "ident.json", io.kernel_to_dict(MarkovKernel.identity(StateSpace.of_size(2)))),
        "toy": write(tmp_path / "toy.json", io.model_to_dict(toy_economy())),
    }


class TestFormats:
    def test_float_round_trip(self, rng):
        vals = rng.random(200) * 10.0 ** rng.integers(-300, 300, 200)
        back = io.loads(io.dumps({"v": vals.tolist()}))["v"]
        assert back == vals.tolist()

    def test_kernel_round_trip(self, rng):
        P = rng.dirichlet(np.ones(6), 6)
        k = kernel(P, labels=[f"x{i}" for i in range(6)])
        again = io.kernel_from_dict(io.loads(io.dumps(io.kernel_to_dict(k))))
        assert again == k

    def test_model_round_trip(self):
        m = toy_economy()
        again = io.model_from_dict(io.loads(io.dumps(io.model_to_dict(m))))
        assert again.law == m.law
        np.testing.assert_array_equal(again.q.rows, m.q.rows)

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            io.loads('{"states": ["a"], "rows": [[NaN]]}')
        with pytest.raises(InvalidInputError):
            io.loads('{"x": Infinity}')
        # infinite values (unreachable hitting times) are exported as null
        assert io.dumps({"h": float("inf")}) == '{\n  "h": null\n}\n'

    def test_rejects_malformed(self):
        with pytest.raises(InvalidInputError):
            io.kernel_from_dict({"states": ["a", "b"], "rows": [[1.0]]})
        with pytest.raises(InvalidInputError):
            io.kernel_from_dict({"rows": [[1.0]]})
        with pytest.raises(InvalidInputError):
            io.loads("{not json")

    def test_measure_reordered_to_kernel_order(self, two):
        mu = io.measure_from_dict({"states": ["s1", "s0"], "weights": [0.25, 0.75]}, two.space)
        np.testing.assert_array_equal(mu.weights, [0.75, 0.25])

    def test_decomposition_export(self, absorb3):
        d = io.loads(io.dumps(io.decomposition_to_dict(decompose(absorb3))))
        assert d["classes"] == [["s0"], ["s1"]]
        assert d["transient"] == ["s2"]
        assert d["eigenfunctions"][0] == [1.0, 0.0, 0.5]

    def test_atomic_write_leaves_no_temp(self, tmp_path):
        target = tmp_path / "sub" / "out.json"
        io.write_atomic(target, "{}\n")
        io.write_atomic(target, "[]\n")
        assert target.read_text() == "[]\n"
        assert [p.name for p in target.parent.iterdir()] == ["out.json"]

    def test_csv_precision(self):
        text = io.csv_text(["a", "b"], [(1, 0.1), (2, 1 / 3)])
        assert text == "a,b\n1,0.10000000000000001\n2,0.33333333333333331\n"


class TestCommands:
    def test_decompose(self, files, capsys):
        code, out, _ = run(["decompose", files["absorb3"]], capsys)
        d = json.loads(out)
        assert code == 0
        assert d["classes"] == [["s0"], ["s1"]] and d["transient"] == ["s2"]
        assert d["eigenfunctions"][0] == [1.0, 0.0, 0.5]
        assert np.abs(np.sum(d["limit_kernel"], axis=1) - 1).max() <= 1e-12

    def test_spectrum(self, files, capsys):
        code, out, _ = run(["spectrum", files["two"]], capsys)
        d = json.loads(out)
        assert code == 0
        assert d["eigenvalues"] == [[1.0, 0.0]]
        assert d["decay_rate"] == pytest.approx(0.3, abs=1e-14)

    def test_limit(self, files, capsys):
        code, out, _ = run(["limit", files["absorb3"], "--initial", "s2"], capsys)
        d = json.loads(out)
        assert code == 0
        assert d["weights"] == pytest.approx([0.5, 0.5, 0.0], abs=1e-15)
        assert d["coefficients"] == pytest.approx([0.5, 0.5], abs=1e-15)
        assert d["cesaro_distance"] <= 1e-3

    def test_check_theorem2(self, files, capsys):
        code, out, _ = run(["check", "theorem2", files["toy"]], capsys)
        w = json.loads(out)["witnesses"]
        assert code == 0
        assert (w["e_star"], w["x_star"], w["n"], w["eps"]) == ("e0", A, 1, 0.5)

    def test_check_theorem2_verdict(self, files, capsys):
        code, out, _ = run(["check", "theorem2", files["toy"], "--verdict"], capsys)
        d = json.loads(out)
        assert code == 0 and d["ergodic"]
        assert d["invariant_measure"]["weights"] == pytest.approx([0.5, 0, 1 / 6, 1 / 3], abs=1e-12)

    def test_check_doeblin(self, files, capsys):
        assert run(["check", "doeblin", files["ident"]], capsys)[0] == 3
        code, out, _ = run(["check", "doeblin", files["two"]], capsys)
        assert code == 0 and json.loads(out)["witnesses"]["eps"] == pytest.approx(0.7)

    def test_check_harris_and_qscc(self, files, capsys):
        code, out, _ = run(["check", "harris", files["trace3"], "--K", "s0,s1", "--k-max", "2"], capsys)
        assert code == 0 and json.loads(out)["witnesses"]["k"] == 2
        code, out, _ = run(["check", "harris", files["ident"], "--K", "s0"], capsys)
        assert code == 3 and json.loads(out)["witnesses"]["hitting_times"]["s1"] is None
        code, out, _ = run(["check", "qscc", files["two"], "--x-star", "s1", "--eps", "0.3"], capsys)
        assert code == 0 and json.loads(out)["witnesses"]["norm_gap"] == pytest.approx(0.7)

    def test_check_ui(self, tmp_path, capsys):
        f = write(tmp_path / "ui.json", {"density": [[1.0] * 10], "cell_weights": [0.1] * 10})
        code, out, _ = run(["check", "ui", f, "--eps-grid", "0.25"], capsys)
        assert code == 0 and json.loads(out)["witnesses"]["sigma"]["0.25"] == pytest.approx(0.25)

    def test_induce_and_trace(self, files, capsys):
        code, out, _ = run(["induce", files["toy"]], capsys)
        d = json.loads(out)
        assert code == 0 and d["states"] == ["e0|d0", "e0|d1", "e1|d0", "e1|d1"]
        code, out, _ = run(["trace", files["trace3"], "--K", "s0,s1"], capsys)
        np.testing.assert_allclose(json.loads(out)["rows"], [[0.5, 0.5], [1.0, 0.0]], atol=1e-15)

    def test_simulate_and_profile(self, files, tmp_path, capsys):
        dump = tmp_path / "paths.txt"
        code, out, _ = run(["simulate", files["half"], "--x0", "s0", "--indicator", "s0",
                            "--n", "1000", "--seeds", "1,2", "--dump-path", dump], capsys)
        lines = out.splitlines()
        assert code == 0 and lines[0] == "seed,n,estimate,stderr" and len(lines) == 3
        assert len(dump.read_text().splitlines()) == 2
        code, out, _ = run(["profile", files["two"], "--x0", "s0", "--indicator", "s0", "--grid", "10,100"], capsys)
        assert code == 0 and out.splitlines()[0] == "n,deviation,n_deviation"

    def test_error_codes(self, files, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"states": ["a", "b"], "rows": [[0.5, 0.4], [0.5, 0.5]]}')
        assert run(["decompose", bad], capsys)[0] == 2
        assert run(["decompose", tmp_path / "missing.json"], capsys)[0] == 2
        assert run(["trace", files["absorb3"], "--K", "s0,s2"], capsys)[0] == 2
        assert run(["profile", files["absorb3"], "--x0", "s2", "--indicator", "s0"], capsys)[0] == 2
        assert run(["check", "harris", files["two"]], capsys)[0] == 2
        near = write(tmp_path / "near.json", {"states": ["a", "b"], "rows": [[1 - 1e-9, 1e-9], [0.0, 1.0]]})
        assert run(["spectrum", near], capsys)[0] == 4
        with pytest.raises(SystemExit):
            main(["decompose", files["two"], "--bogus"])

    def test_outdir_env(self, files, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("MARKOV_ERGODIC_OUTDIR", str(tmp_path / "out"))
        assert run(["decompose", files["two"], "-o", "d.json"], capsys)[0] == 0
        assert json.loads((tmp_path / "out" / "d.json").read_text())["classes"] == [["s0", "s1"]]

    def test_emitted_kernels_stochastic(self, files, capsys):
        for argv in (["induce", files["toy"]], ["trace", files["trace3"], "--K", "s1"]):
            rows = np.array(json.loads(run(argv, capsys)[1])["rows"])
            assert np.abs(rows.sum(axis=1) - 1).max() <= 1e-12


def test_repeated_processes_byte_identical(files, tmp_path):
    def cli(*args):
        return subprocess.run([sys.executable, "-m", "markov_ergodic", *map(str, args)],
                              capture_output=True, check=True).stdout
    for argv in (["simulate", files["two"], "--x0", "s0", "--indicator", "s0", "--n", "5000", "--seeds", "0,7"],
                 ["decompose", files["absorb3"]]):
        assert cli(*argv) == cli(*argv)
