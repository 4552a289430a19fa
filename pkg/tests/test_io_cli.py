import json

import numpy as np
import pytest

from qcombs import (
    LabeledOperator,
    OperatorFile,
    OperatorFileError,
    ResultRecord,
    Wire,
    max_entangled,
)
from qcombs.cli import main

W2 = (Wire("a", 2), Wire("b", 3))


def sample_file(seed=0, metadata=None):
    rng = np.random.default_rng(seed)
    mat = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    return OperatorFile(W2, mat, dict(metadata or {"task": "demo", "n": 1}))


# ---------------------------------------------------------------------------
# Operator files


def test_roundtrip_is_bit_identical():
    f = sample_file(metadata={"task": "t", "flag": True, "x": 1 / 3, "note": None})
    text = f.dumps()
    g = OperatorFile.loads(text)
    assert g.dumps() == text
    assert g.wires == f.wires
    assert np.array_equal(g.matrix, f.matrix)
    assert g.metadata == f.metadata


def test_awkward_floats_survive_exactly():
    vals = [1 / 3, 0.1, -1e-300, 2**-52, 123456789.123456789]
    mat = np.diag(np.array(vals, dtype=np.complex128) * (1 + 1j))
    wires = (Wire("w", 5),)
    g = OperatorFile.loads(OperatorFile(wires, mat).dumps())
    assert np.array_equal(g.matrix, mat)


def test_to_operator_matches_source():
    rng = np.random.default_rng(3)
    op = LabeledOperator(W2, rng.standard_normal((6, 6)) + 0j)
    back = OperatorFile.from_operator(op, {"k": 1}).to_operator()
    assert back.wires == op.wires
    assert np.array_equal(back.matrix, op.matrix)


def test_constructor_validation():
    with pytest.raises(OperatorFileError):
        OperatorFile(W2, np.eye(5))
    bad = np.eye(6, dtype=complex)
    bad[0, 0] = np.nan
    with pytest.raises(OperatorFileError):
        OperatorFile(W2, bad)


def test_metadata_rejects_non_scalars():
    f = sample_file(metadata={"bad": [1, 2]})
    with pytest.raises(OperatorFileError):
        f.dumps()


def test_metadata_scalar_types_are_preserved():
    meta = {"b": True, "i": 7, "f": 0.25, "s": "x", "n": None}
    g = OperatorFile.loads(sample_file(metadata=meta).dumps())
    assert g.metadata == meta
    assert isinstance(g.metadata["b"], bool)
    assert isinstance(g.metadata["i"], int)
    assert isinstance(g.metadata["f"], float)


@pytest.mark.parametrize(
    "mangle",
    [
        lambda d: "{ truncated",
        lambda d: json.dumps([1, 2]),
        lambda d: _drop_key(d, "entries"),
        lambda d: _set_key(d, "format_version", 99),
        lambda d: _set_key(d, "wires", []),
        lambda d: _set_key(d, "wires", [{"label": 3, "dim": 2}]),
        lambda d: _set_key(d, "entries", [[0.0, 0.0]] * 7),
        lambda d: _set_entry(d, 0, [0.0, "x"]),
        lambda d: _set_key(d, "metadata", [1]),
    ],
)
def test_loads_rejects_malformed_documents(mangle):
    doc = json.loads(sample_file().dumps())
    with pytest.raises(OperatorFileError):
        OperatorFile.loads(mangle(doc))


def _drop_key(doc, key):
    doc.pop(key)
    return json.dumps(doc)


def _set_key(doc, key, value):
    doc[key] = value
    return json.dumps(doc)


def _set_entry(doc, i, value):
    doc["entries"][i] = value
    return json.dumps(doc)


def test_save_refuses_overwrite(tmp_path):
    f = sample_file()
    target = tmp_path / "op.json"
    f.save(target)
    with pytest.raises(FileExistsError):
        f.save(target)
    f.save(target, force=True)
    assert OperatorFile.load(target).dumps() == f.dumps()


def test_load_missing_file(tmp_path):
    with pytest.raises(OperatorFileError):
        OperatorFile.load(tmp_path / "absent.json")


# ---------------------------------------------------------------------------
# Result records


def make_record(**kw):
    base = dict(
        task="clone",
        parameters={"n": 1, "m": 2, "dim": 2},
        value=0.4665,
        reference_value=0.46650635094610965,
        reference_source="paper-closed-form",
        feas_residual=1e-12,
        gap_bound=1e-7,
        iterations=487,
        wall_time=0.41,
        backend="projection-splitting",
        converged=True,
    )
    base.update(kw)
    return ResultRecord(**base)


def test_record_roundtrip_is_canonical():
    rec = make_record()
    text = rec.to_json()
    again = ResultRecord.from_json(text)
    assert again.to_json() == text
    assert json.loads(text)["reference_source"] == "paper-closed-form"


def test_record_tag_validation():
    with pytest.raises(ValueError):
        make_record(reference_source="guess")
    with pytest.raises(ValueError):
        make_record(reference_source="none")  # reference_value still set
    with pytest.raises(ValueError):
        make_record(reference_value=None)  # tag still claims a source
    rec = make_record(reference_value=None, reference_source="none")
    assert ResultRecord.from_json(rec.to_json()).reference_value is None


# ---------------------------------------------------------------------------
# Command line


def test_clone_writes_verified_file(tmp_path, capsys):
    out = tmp_path / "clone.json"
    code = main(
        ["clone", "--n", "1", "--m", "2", "--out", str(out), "--tol", "1e-7"]
    )
    captured = capsys.readouterr()
    assert code == 0
    assert "value" in captured.out
    assert "re-verified" in captured.out
    f = OperatorFile.load(out)
    assert f.metadata["task"] == "clone"
    assert f.metadata["converged"] is True
    assert f.metadata["value"] == pytest.approx((2 + np.sqrt(3)) / 8, abs=1e-4)


def test_clone_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["clone", "--n", "1", "--m", "2", "--out", str(a)]) == 0
    assert main(["clone", "--n", "1", "--m", "2", "--out", str(b)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_clone_never_overwrites_without_force(tmp_path, capsys):
    out = tmp_path / "c.json"
    assert main(["clone", "--n", "1", "--m", "1", "--out", str(out)]) == 0
    before = out.read_bytes()
    assert main(["clone", "--n", "1", "--m", "2", "--out", str(out)]) == 2
    assert out.read_bytes() == before
    assert (
        main(
            ["clone", "--n", "1", "--m", "2", "--out", str(out), "--force"]
        )
        == 0
    )
    capsys.readouterr()
    assert out.read_bytes() != before


def test_learn_json_record(capsys):
    code = main(["learn", "--uses", "1", "--json"])
    out = capsys.readouterr().out
    assert code == 0
    rec = ResultRecord.from_json(out)
    assert rec.task == "learn"
    assert rec.converged
    assert rec.reference_value == pytest.approx(0.5)
    assert rec.reference_source == "paper-closed-form"
    assert rec.value == pytest.approx(0.5, abs=1e-4)
    assert rec.backend == "projection-splitting"


def test_invalid_parameters_exit_2(capsys):
    assert main(["clone", "--n", "0", "--m", "2"]) == 2
    assert main(["clone", "--n", "1", "--m", "2", "--dim", "1"]) == 2
    assert main(["learn", "--uses", "0"]) == 2
    assert main(["random-comb", "--dims", "2,2,2"]) == 2  # odd count
    capsys.readouterr()


def test_exhausted_budget_exits_3(capsys):
    code = main(["clone", "--n", "1", "--m", "2", "--max-iters", "5"])
    out = capsys.readouterr().out
    assert code == 3
    assert "NOT converged" in out


def test_random_comb_verify_chain(tmp_path, capsys):
    out = tmp_path / "comb.json"
    assert (
        main(
            [
                "random-comb",
                "--dims",
                "2,2,3,2",
                "--memory",
                "3",
                "--seed",
                "11",
                "--out",
                str(out),
            ]
        )
        == 0
    )
    assert main(["verify", str(out), "--teeth", "0:1,2:3"]) == 0
    report = capsys.readouterr().out
    assert "ok" in report
    assert "FAIL" not in report


def test_random_comb_requires_out(capsys):
    assert main(["random-comb", "--dims", "2,2"]) == 2
    capsys.readouterr()


def test_verify_rejects_scaled_comb(tmp_path, capsys):
    out = tmp_path / "comb.json"
    main(["random-comb", "--dims", "2,2", "--seed", "4", "--out", str(out)])
    f = OperatorFile.load(out)
    OperatorFile(f.wires, f.matrix * 0.5, f.metadata).save(out, force=True)
    code = main(["verify", str(out), "--teeth", "0:1"])
    captured = capsys.readouterr()
    assert code == 1
    assert "FAIL" in captured.out


def test_verify_flags_backwards_signaling(tmp_path, capsys):
    # maximally entangled pairs wired output->input: information runs
    # against the declared causal order, so verification must fail
    v1 = max_entangled((Wire("1", 2), Wire("2", 2)))
    v2 = max_entangled((Wire("3", 2), Wire("0", 2)))
    op = v1.outer().tensor(v2.outer())
    path = tmp_path / "acausal.json"
    OperatorFile.from_operator(op.permuted(("0", "1", "2", "3"))).save(path)
    assert main(["verify", str(path), "--teeth", "0:1,2:3"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_verify_input_errors(tmp_path, capsys):
    path = tmp_path / "op.json"
    main(["random-comb", "--dims", "2,2", "--seed", "1", "--out", str(path)])
    assert main(["verify", str(path), "--teeth", "0:9"]) == 2
    assert main(["verify", str(path), "--teeth", "garbage"]) == 2
    truncated = tmp_path / "bad.json"
    truncated.write_text(path.read_text()[: 40])
    assert main(["verify", str(truncated), "--teeth", "0:1"]) == 2
    assert main(["verify", str(tmp_path / "missing.json"), "--teeth", "0:1"]) == 2
    capsys.readouterr()


def test_verify_json_record(tmp_path, capsys):
    path = tmp_path / "op.json"
    main(["random-comb", "--dims", "2,2,2,2", "--memory", "2", "--out", str(path)])
    capsys.readouterr()
    assert main(["verify", str(path), "--teeth", "0:1,2:3", "--json"]) == 0
    rec = ResultRecord.from_json(capsys.readouterr().out)
    assert rec.task == "verify"
    assert rec.backend == "verification"
    assert rec.converged
    assert rec.reference_source == "none"
