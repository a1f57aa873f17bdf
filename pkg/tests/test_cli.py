import json
import numpy as np
import pytest
from calderon.utils.main_utils import EXIT_FAIL, EXIT_OK, EXIT_USAGE, load_object, main
from calderon.utils.errors import DomainError

INDICATOR = {"breakpoints": [1.0], "values": [1.0]}
ONES = {"n": 2, "re": [[1.0, 1.0], [1.0, 1.0]]}


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def hermitian_files(write_json, hermitian_pair):
    A, B = hermitian_pair
    return (
        write_json("a.json", {"re": A.real.tolist(), "im": A.imag.tolist()}),
        write_json("b.json", {"re": B.real.tolist(), "im": B.imag.tolist()}),
    )


def test_load_object_dispatch():
    assert load_object(INDICATOR).breakpoints.tolist() == [1.0]
    assert load_object({"entries": [1.0, 2.0], "offset": 3}).offset == 3
    assert load_object(ONES).n == 2
    assert load_object({"lefts": [-1.0], "rights": [1.0], "values": [2.0]}).values.tolist() == [2.0]
    with pytest.raises(DomainError):
        load_object({"matrix": []})
    with pytest.raises(DomainError):
        load_object([1, 2])


def test_rearrange(capsys, write_json):
    path = write_json("x.json", {"breakpoints": [1.0, 2.0, 3.0], "values": [1.0, -3.0, 2.0]})
    code, out, _ = run(capsys, ["rearrange", "--in", path])
    assert code == EXIT_OK
    assert json.loads(out) == {"breakpoints": [1.0, 2.0, 3.0], "values": [3.0, 2.0, 1.0]}


def test_norm_json_and_csv(capsys, write_json):
    path = write_json("x.json", INDICATOR)
    code, out, _ = run(capsys, ["norm", "--in", path, "--space", "m1inf"])
    assert code == EXIT_OK
    assert json.loads(out)["norm"] == pytest.approx(1.0 / np.log(2.0))
    code, out, _ = run(capsys, ["norm", "--in", path, "--space", "weak-l1", "--csv"])
    assert out.splitlines() == ["space,norm", "weak-l1,1"]


def test_norm_rejects_mismatched_realization(capsys, write_json):
    path = write_json("x.json", INDICATOR)
    code, _, err = run(capsys, ["norm", "--in", path, "--space", "lp:1/d"])
    assert code == EXIT_USAGE
    assert "calderon norm: error" in err


def test_apply_operators(capsys, write_json):
    path = write_json("x.json", INDICATOR)
    code, out, _ = run(capsys, ["apply", "--op", "S", "--in", path, "--at", "1", "2"])
    assert code == EXIT_OK
    np.testing.assert_allclose(json.loads(out)["values"], [1.0, 0.5])

    delta = write_json("d.json", {"entries": [1.0], "offset": 0})
    code, out, _ = run(capsys, ["apply", "--op", "Sd", "--in", delta, "--length", "4"])
    assert code == EXIT_OK
    np.testing.assert_allclose(json.loads(out)["result"]["entries"], [1.0, 1 / 2, 1 / 3, 1 / 4])

    code, out, _ = run(capsys, ["apply", "--op", "Hd", "--in", delta, "--window", "1", "2"])
    result = json.loads(out)["result"]
    assert abs(complex(result["entries"][0], result["entries_imag"][0])) == pytest.approx(2.0 / np.pi)


def test_apply_usage_errors(capsys, write_json):
    path = write_json("x.json", INDICATOR)
    assert run(capsys, ["apply", "--op", "H", "--in", path])[0] == EXIT_USAGE
    assert run(capsys, ["apply", "--op", "H", "--in", path, "--at", "1"])[0] == EXIT_USAGE
    assert run(capsys, ["apply", "--op", "Sd", "--in", path])[0] == EXIT_USAGE
    assert run(capsys, ["apply", "--op", "X", "--in", path])[0] == EXIT_USAGE


def test_truncate_and_svd(capsys, write_json):
    path = write_json("v.json", ONES)
    code, out, _ = run(capsys, ["truncate", "--in", path, "--space", "weak-l1"])
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["matrix"]["re"] == [[0.0, -1.0], [1.0, 0.0]]
    assert payload["ratio"] == pytest.approx(1.0)
    code, out, _ = run(capsys, ["svd", "--in", path, "--backend", "lapack"])
    payload = json.loads(out)
    np.testing.assert_allclose(payload["singular_values"], [2.0, 0.0], atol=1e-12)
    assert payload["residual"] < 1e-12


def test_doi_commutator(capsys, hermitian_files):
    a, b = hermitian_files
    code, out, _ = run(capsys, ["doi", "--in", a, "--f", "abs", "--commutator", b])
    assert code == EXIT_OK
    assert json.loads(out)["bound_holds"] is True
    code, out, _ = run(capsys, ["doi", "--in", a, "--f", "sin", "--v", b])
    assert code == EXIT_OK
    assert json.loads(out)["function"] == "sin"
    assert run(capsys, ["doi", "--in", a, "--f", "abs", "--v", b, "--commutator", b])[0] == EXIT_USAGE
    assert run(capsys, ["doi", "--in", a, "--f", "cos", "--v", b])[0] == EXIT_USAGE


def test_fnorm_commands(capsys, write_json):
    path = write_json("x.json", INDICATOR)
    code, out, _ = run(capsys, ["fnorm", "--in", path])
    assert code == EXIT_OK
    assert json.loads(out)["value"] == pytest.approx(1.0, rel=1e-8)
    code, out, _ = run(capsys, ["fnorm", "--in", path, "--construct"])
    assert code == EXIT_OK
    assert json.loads(out)["feasible"] is True
    seq = write_json("a.json", {"entries": (1.0 / np.arange(1, 101)).tolist()})
    code, out, _ = run(capsys, ["fnorm", "--in", seq, "--membership", "l1"])
    assert code == EXIT_OK
    assert json.loads(out)["member"] is True
    assert run(capsys, ["fnorm", "--in", path, "--construct", "--membership", "L1"])[0] == EXIT_USAGE


def test_verify_compare_mode_is_byte_identical(capsys, tmp_path):
    argv = ["verify", "p-norm-bracket", "--compare-mode", "--override", "BRACKET_LARGE_N", "1000"]
    outputs = []
    for name in ("first.json", "second.json"):
        path = tmp_path / name
        assert main(argv + ["--out", str(path)]) == EXIT_OK
        outputs.append(path.read_bytes())
    capsys.readouterr()
    assert outputs[0] == outputs[1]
    payload = json.loads(outputs[0])
    assert payload["passed"] is True
    assert "metadata" not in payload["experiments"][0]


def test_verify_writes_trials_csv(capsys, tmp_path):
    path = tmp_path / "report.json"
    argv = ["verify", "thm-2.8", "--trials", "2", "--override", "WEAK_TYPE_SIZES", "[4]", "--out", str(path)]
    assert main(argv) == EXIT_OK
    capsys.readouterr()
    assert (tmp_path / "report_trials.csv").read_text().splitlines()[0].startswith("theorem_id,size,trial,ratio")
    assert "metadata" in json.loads(path.read_text())["experiments"][0]


def test_verify_failure_exit_code(capsys):
    argv = ["verify", "thm-2.8", "--trials", "2", "--override", "WEAK_TYPE_SIZES", "[4]", "WEAK_TYPE_BOUND", "0.0"]
    code, out, _ = run(capsys, argv)
    assert code == EXIT_FAIL
    assert json.loads(out)["passed"] is False


def test_verify_config_file(capsys, tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("# small run\nWEAK_TYPE_SIZES=[4]\nWEAK_TYPE_TRIALS=2\n")
    code, out, _ = run(capsys, ["verify", "weak-type-truncation", "--config", str(config)])
    assert code == EXIT_OK
    assert json.loads(out)["experiments"][0]["trials"] == 2


def test_verify_usage_errors(capsys):
    assert run(capsys, ["verify", "thm-9.9"])[0] == EXIT_USAGE
    assert run(capsys, ["verify", "crss", "--override", "NOT_A_KEY", "1"])[0] == EXIT_USAGE
    assert run(capsys, ["verify", "crss", "--override", "SEED"])[0] == EXIT_USAGE
    assert run(capsys, ["verify", "crss", "--trials", "0"])[0] == EXIT_USAGE
    assert run(capsys, ["frobnicate"])[0] == EXIT_USAGE
    assert run(capsys, ["--help"])[0] == EXIT_OK


@pytest.mark.parametrize("extra, expected", [([], 0), (["--seed", "7"], 7)])
def test_verify_payload_records_effective_seed(capsys, caplog, extra, expected):
    caplog.set_level("INFO")
    code, out, _ = run(capsys, ["verify", "calderon-doubling", "--trials", "2", "--override", "PROBE_PER_DECADE", "4"] + extra)
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["seed"] == expected
    assert payload["experiments"][0]["seed"] == expected
    source = "from --seed" if extra else "config default SEED"
    assert f"seed {expected} ({source})" in caplog.text
    assert "calderon-doubling" in caplog.text


def test_verify_out_file_records_seed(capsys, tmp_path):
    path = tmp_path / "report.json"
    argv = ["verify", "p-norm-bracket", "--seed", "3", "--override", "BRACKET_LARGE_N", "1000", "--out", str(path)]
    assert main(argv) == EXIT_OK
    capsys.readouterr()
    payload = json.loads(path.read_text())
    assert payload["seed"] == 3
    assert path.read_text().endswith("}\n")
