import json

import numpy as np
import pytest

from ctcsim.cli import main

SMALLEST = """\
system A 2
system CTC 2
input pure A : 1 0
gate swap A CTC
"""


def write_circuit(tmp_path, text=SMALLEST, name="circuit.ctc"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestRun:
    def test_smallest_circuit(self, tmp_path, capsys):
        code = main(["run", write_circuit(tmp_path)])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["format_version"] == 1
        # swap semantics: the fixed point equals the input of A, |0><0|
        fp = report["fixed_point"]
        assert fp["multiplicity"] == 1
        entries = np.array(fp["matrix"]["entries"])
        assert np.allclose(entries, [[1, 0], [0, 0], [0, 0], [0, 0]], atol=1e-10)

    def test_parse_error_exit_code_and_diagnostics(self, tmp_path, capsys):
        bad = "system A 2\nsystem CTC 2\ninput pure A : 1 0q\ngate swap A CTC\n"
        code = main(["run", write_circuit(tmp_path, bad)])
        captured = capsys.readouterr()
        assert code == 1
        assert "line 3" in captured.err
        assert "column" in captured.err

    def test_missing_file_is_io_error(self, capsys):
        assert main(["run", "/nonexistent/x.ctc"]) == 3

    def test_out_flag_writes_file_and_quiet_stdout(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = main(["run", write_circuit(tmp_path), "--out", str(out)])
        assert code == 0
        assert capsys.readouterr().out == ""
        assert json.loads(out.read_text())["format_version"] == 1

    def test_trace_out_marginal(self, tmp_path, capsys):
        code = main(["run", write_circuit(tmp_path), "--trace-out", "A"])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert "A" in report["marginals"]
        assert report["marginals"]["A"]["rows"] == 2

    def test_csv_format_flattens_scalars(self, tmp_path, capsys):
        code = main(["run", write_circuit(tmp_path), "--format", "csv"])
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith("key,value")
        assert "fixed_point.multiplicity,1" in out


class TestDemo:
    def test_clone_pure_passes(self, capsys):
        code = main(["demo", "clone-pure", "--alphabet", "preset:zero-plus",
                     "--index", "1"])
        captured = capsys.readouterr()
        assert code == 0
        assert "PASS demo clone-pure" in captured.out
        report = json.loads(captured.out.rsplit("PASS", 1)[0])
        assert report["joint_fidelity"] >= 1 - 1e-9

    def test_clone_mixed_passes(self, capsys):
        code = main(["demo", "clone-mixed", "--probs", "0.25,0.75"])
        captured = capsys.readouterr()
        assert code == 0
        assert "PASS demo clone-mixed" in captured.out

    def test_clone_mixed_rejects_bad_probs(self, capsys):
        assert main(["demo", "clone-mixed", "--probs", "0.5,0.6"]) == 1
        assert main(["demo", "clone-mixed", "--probs=-0.5,1.5"]) == 1

    def test_nosignal_passes(self, capsys):
        code = main(["demo", "nosignal"])
        captured = capsys.readouterr()
        assert code == 0
        assert "PASS demo nosignal" in captured.out
        report = json.loads(captured.out.rsplit("PASS", 1)[0])
        assert report["deviation"] <= 1e-9

    def test_alphabet_from_file(self, tmp_path, capsys):
        from ctcsim import dsl
        cols = np.array([[1, 1 / np.sqrt(2)], [0, 1 / np.sqrt(2)]], dtype=complex)
        path = tmp_path / "alpha.mat"
        path.write_text(dsl.format_matrix_file([cols]))
        code = main(["demo", "clone-pure", "--alphabet", f"@{path}", "--index", "1"])
        assert code == 0
        assert "PASS" in capsys.readouterr().out


class TestSweep:
    def test_fidelity_props(self, capsys):
        code = main(["sweep", "fidelity-props", "--trials", "20", "--seed", "7"])
        captured = capsys.readouterr()
        assert code == 0
        report = json.loads(captured.out)
        assert report["summary"]["monotonicity"] >= -1e-9

    def test_fixed_points(self, capsys):
        code = main(["sweep", "fixed-points", "--trials", "20", "--dim", "2",
                     "--seed", "3"])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["summary"]["residual"] <= 1e-10

    def test_no_cloning_baseline(self, capsys):
        code = main(["sweep", "no-cloning-baseline", "--trials", "20",
                     "--seed", "5"])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["summary"]["min_infidelity"] > 1e-6

    def test_seeded_reports_are_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        argv = ["sweep", "fidelity-props", "--trials", "10", "--seed", "42"]
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


def test_default_tol_env_override(monkeypatch, tmp_path, capsys):
    monkeypatch.setenv("CTCSIM_DEFAULT_TOL", "1e-9")
    code = main(["run", write_circuit(tmp_path)])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["solver_options"]["tol_residual"] == 1e-9
