import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose

from coep.cli import EXIT_NEGATIVE, EXIT_OK, EXIT_USAGE, build_parser, main, parse_dims, parse_eps_grid
from coep.matrix_io import decode_matrix, dumps_matrix

NILPOTENT = '{"rows": 2, "cols": 2, "entries": [[0, 0], [1, 0], [0, 0], [0, 0]]}'


@pytest.fixture
def nilpotent_file(write_json):
    return write_json("e.json", NILPOTENT)


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestMp:
    def test_nilpotent(self, capsys, nilpotent_file):
        code, out, _ = run(capsys, ["mp", nilpotent_file])
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["certificate"]["valid"] is True
        assert_allclose(decode_matrix(payload["inverse"]), [[0, 0], [1, 0]], atol=1e-15)
        assert payload["uniqueness_distance"] <= 1e-12

    def test_identity(self, capsys, write_json):
        path = write_json("i.json", dumps_matrix(np.eye(3)))
        code, out, _ = run(capsys, ["mp", path])
        assert code == EXIT_OK
        assert_allclose(decode_matrix(json.loads(out)["inverse"]), np.eye(3), atol=1e-15)

    def test_wrong_candidate(self, capsys, nilpotent_file, write_json):
        candidate = write_json("c.json", NILPOTENT)
        code, out, _ = run(capsys, ["mp", nilpotent_file, "--candidate", candidate])
        assert code == EXIT_NEGATIVE
        assert json.loads(out)["certificate"]["valid"] is False

    def test_l1_search(self, capsys, nilpotent_file):
        code, out, _ = run(capsys, ["mp", nilpotent_file, "--norm", "l1"])
        assert code == EXIT_OK
        assert json.loads(out)["found"] is True

    def test_l1_search_without_result(self, capsys, write_json):
        path = write_json("half.json", dumps_matrix(np.full((2, 2), 0.5)))
        code, out, _ = run(capsys, ["mp", path, "--norm", "l1"])
        assert code == EXIT_NEGATIVE
        assert json.loads(out)["found"] is False

    def test_malformed_json(self, capsys, write_json):
        path = write_json("bad.json", '{"rows": 2, "cols": 2, "entries": [')
        code, _, err = run(capsys, ["mp", path])
        assert code == EXIT_USAGE
        assert "Malformed JSON" in err

    def test_table_output(self, capsys, nilpotent_file):
        code, out, _ = run(capsys, ["mp", nilpotent_file, "--table"])
        assert code == EXIT_OK
        assert "valid" in out.splitlines()[0]


class TestClassify:
    def test_nilpotent(self, capsys, nilpotent_file):
        code, out, _ = run(capsys, ["classify", nilpotent_file])
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["co_ep"] is True and payload["hermitian_co_ep"] is True
        assert_allclose(decode_matrix(payload["h"]), np.diag([1, 0]), atol=1e-12)

    def test_oblique(self, capsys, write_json):
        a = np.array([[1, 1], [0, 0]]) / np.sqrt(2)
        code, out, _ = run(capsys, ["classify", write_json("uv.json", dumps_matrix(a))])
        payload = json.loads(out)
        assert code == EXIT_OK
        assert payload["co_ep"] is True and payload["hermitian_co_ep"] is False

    def test_out_file(self, capsys, nilpotent_file, tmp_path):
        out_file = tmp_path / "classes.csv"
        code, _, _ = run(capsys, ["classify", nilpotent_file, "--out", str(out_file)])
        assert code == EXIT_OK
        frame = pd.read_csv(out_file)
        assert bool(frame.loc[0, "co_ep"])

    def test_xlsx_out_file(self, capsys, nilpotent_file, tmp_path):
        pytest.importorskip("openpyxl")
        out_file = tmp_path / "classes.xlsx"
        assert run(capsys, ["classify", nilpotent_file, "--out", str(out_file)])[0] == EXIT_OK
        assert out_file.exists()

    def test_unknown_extension(self, capsys, nilpotent_file, tmp_path):
        code, _, _ = run(capsys, ["classify", nilpotent_file, "--out", str(tmp_path / "x.txt")])
        assert code == EXIT_USAGE


class TestAudit:
    ARGS = ["audit", "coep", "--seed", "3", "--count", "12", "--dims", "2..4", "--no-progress"]

    def test_runs_are_byte_identical(self, capsys):
        first = run(capsys, self.ARGS)
        second = run(capsys, self.ARGS)
        assert first[0] == second[0] == EXIT_OK
        assert first[1] == second[1]

    def test_replay_single_instance(self, capsys):
        code, out, _ = run(capsys, self.ARGS + ["--index", "5"])
        payload = json.loads(out)
        assert code == EXIT_OK
        assert payload["count"] == 1
        assert payload["outcomes"][0]["index"] == 5
        assert "instance" in payload["outcomes"][0]

    def test_fixed_coefficients(self, capsys):
        code, _, _ = run(capsys, self.ARGS + ["--lam", "2", "--mu", "-3j"])
        assert code == EXIT_OK

    @pytest.mark.parametrize("text, value", [("-3j", -3j), ("-1+2j", -1 + 2j), ("-0.5", -0.5), ("-1e-3j", -1e-3j)])
    def test_negative_complex_coefficient(self, text, value):
        args = build_parser().parse_args(["audit", "coep", "--lam", "2", "--mu", text])
        assert args.lam == 2 and args.mu == value

    def test_coefficients_on_plain_suite(self, capsys):
        argv = ["audit", "dimension-split", "--count", "2", "--lam", "1", "--no-progress"]
        assert run(capsys, argv)[0] == EXIT_USAGE

    def test_non_euclidean_norm(self, capsys):
        argv = ["audit", "coep", "--count", "2", "--norm", "l1", "--no-progress"]
        assert run(capsys, argv)[0] == EXIT_USAGE

    @pytest.mark.parametrize("dims", ["0..3", "3..2", "2..17", "x"])
    def test_bad_dims(self, capsys, dims):
        with pytest.raises(SystemExit) as excinfo:
            main(["audit", "coep", "--dims", dims])
        assert excinfo.value.code == EXIT_USAGE


class TestPerturb:
    def test_default_grid(self, capsys, nilpotent_file):
        code, out, _ = run(capsys, ["perturb", nilpotent_file, "--seed", "1"])
        payload = json.loads(out)
        assert code == EXIT_OK
        assert payload["all_hold"] is True
        assert [row["eps"] for row in payload["rows"]] == [0.1, 0.2, 0.4, 0.49]
        assert all(row["realized_error"] <= row["error_bound"] for row in payload["rows"])

    def test_verbose_rows_carry_matrices(self, capsys, nilpotent_file):
        code, out, _ = run(capsys, ["perturb", nilpotent_file, "--eps", "0.3", "--verbose"])
        assert code == EXIT_OK
        assert json.loads(out)["rows"][0]["b_dag"]["rows"] == 2

    def test_zero_matrix(self, capsys, write_json):
        path = write_json("zero.json", dumps_matrix(np.zeros((2, 2))))
        assert run(capsys, ["perturb", path])[0] == EXIT_NEGATIVE

    def test_eps_out_of_range(self, capsys, nilpotent_file):
        assert run(capsys, ["perturb", nilpotent_file, "--eps", "1.5"])[0] == EXIT_USAGE


class TestGen:
    def test_prints_matrix_file(self, capsys):
        code, out, _ = run(capsys, ["gen", "hermitian-coep", "--dim", "4", "--seed", "2"])
        assert code == EXIT_OK
        a = decode_matrix(json.loads(out))
        assert np.linalg.norm(a @ a, 2) <= 1e-12

    def test_writes_file(self, capsys, tmp_path):
        path = tmp_path / "ep.json"
        code, _, _ = run(capsys, ["gen", "ep", "--dim", "3", "--rank", "2", "--out", str(path)])
        assert code == EXIT_OK
        assert decode_matrix(json.loads(path.read_text())).shape == (3, 3)

    def test_odd_dimension_for_coep(self, capsys):
        assert run(capsys, ["gen", "coep", "--dim", "3"])[0] == EXIT_USAGE

    def test_rank_for_fixed_class(self, capsys):
        assert run(capsys, ["gen", "identity", "--dim", "3", "--rank", "1"])[0] == EXIT_USAGE


def test_argument_types():
    assert parse_dims("2..6") == (2, 6)
    assert parse_dims("5") == (5, 5)
    assert parse_eps_grid("0.1, 0.2") == [0.1, 0.2]


def test_missing_command():
    with pytest.raises(SystemExit) as excinfo:
        main([])
    assert excinfo.value.code == EXIT_USAGE


def test_readme_documents_report_keys(capsys, nilpotent_file):
    readme = (Path(__file__).resolve().parents[1] / "README.md").read_text(encoding="utf-8")
    _, classified, _ = run(capsys, ["classify", nilpotent_file])
    _, swept, _ = run(capsys, ["perturb", nilpotent_file, "--eps", "0.2", "--verbose"])
    _, audited, _ = run(capsys, TestAudit.ARGS + ["--index", "0"])
    keys = set(json.loads(classified)) | set(json.loads(classified)["margins"])
    keys |= set(json.loads(swept)) | set(json.loads(swept)["rows"][0])
    keys |= set(json.loads(audited)) | set(json.loads(audited)["outcomes"][0])
    assert not {key for key in keys if f"`{key}`" not in readme}
