import json

import numpy as np
import pytest

from edplab import serialize
from edplab.cli import main
from edplab.errmodels import DepolarizationModel, FidelityModel, MeasureRModel
from edplab.locc import (
    make_first_pair,
    make_random_pair,
    make_random_permutation,
    make_simple_random_hash,
    run,
)
from edplab.qcore import DensityMatrix, PureState, bell_state, epr_state
from edplab.sampling import random_density_matrix, random_pure_state
from edplab.serialize import SpecParseError


# ---------------------------------------------------------------------------
# serialization round trips


def test_matrix_round_trip():
    rng = np.random.default_rng(3)
    mat = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    doc = serialize.matrix_to_json(mat)
    np.testing.assert_array_equal(serialize.matrix_from_json(doc), mat)


def test_state_round_trip():
    rng = np.random.default_rng(5)
    pure = random_pure_state(rng, 1, 2)
    back = serialize.state_from_json(serialize.state_to_json(pure))
    assert isinstance(back, PureState)
    np.testing.assert_array_equal(back.amplitudes, pure.amplitudes)
    mixed = random_density_matrix(rng, 1, 1)
    back = serialize.state_from_json(serialize.state_to_json(mixed))
    assert isinstance(back, DensityMatrix)
    np.testing.assert_array_equal(back.matrix, mixed.matrix)


def test_error_model_round_trip():
    for model in (
        MeasureRModel(3, 1),
        DepolarizationModel(2, 0.4),
        FidelityModel(2, 0.25, samples=2, seed=7),
    ):
        doc = serialize.error_model_to_json(model)
        assert serialize.error_model_from_json(doc) == model


def test_error_model_json_schema():
    doc = serialize.error_model_to_json(MeasureRModel(2, 1))
    assert doc == {"model": "measure_r", "n": 2, "r": 1}
    doc = serialize.error_model_to_json(DepolarizationModel(2, 0.3))
    assert doc == {"model": "depolarization", "n": 2, "p": 0.3}
    doc = serialize.error_model_to_json(FidelityModel(2, 0.1))
    assert doc == {"model": "fidelity", "n": 2, "epsilon": 0.1}


@pytest.mark.parametrize(
    "maker",
    [
        lambda: make_first_pair(2),
        lambda: make_random_pair(3),
        lambda: make_random_permutation(3),
        lambda: make_simple_random_hash(3, 2),
    ],
)
def test_protocol_round_trip_preserves_behaviour(maker):
    proto = maker()
    doc = serialize.protocol_to_json(proto)
    text = json.dumps(doc)  # must be valid JSON end to end
    back = serialize.protocol_from_json(json.loads(text))
    state = epr_state(proto.n_pairs)
    a = run(proto, state)
    b = run(back, state)
    assert a.success_probability == pytest.approx(b.success_probability, abs=1e-12)
    np.testing.assert_allclose(a.output.matrix, b.output.matrix, atol=1e-12)
    mixed = DensityMatrix.maximally_mixed(proto.n_pairs, proto.n_pairs)
    a = run(proto, mixed)
    b = run(back, mixed)
    assert a.success_probability == pytest.approx(b.success_probability, abs=1e-12)


def test_protocol_parse_error_names_field():
    doc = serialize.protocol_to_json(make_first_pair(2))
    doc["shared_randomness"] = []
    with pytest.raises(SpecParseError, match="shared_randomness"):
        serialize.protocol_from_json(doc)
    doc = serialize.protocol_to_json(make_simple_random_hash(2, 1))
    doc["rounds"][0]["kraus_by_seed"][0]["branches"] = [[]]
    with pytest.raises(SpecParseError, match=r"rounds\[0\]"):
        serialize.protocol_from_json(doc)


def test_run_result_json():
    result = run(make_random_pair(2), epr_state(2))
    doc = serialize.run_result_to_json(result)
    assert doc["success_probability"] == pytest.approx(1.0)
    assert len(doc["leaves"]) == 2
    back = serialize.matrix_from_json(doc["output"])
    np.testing.assert_allclose(back, bell_state("phi+").to_density().matrix, atol=1e-12)


def test_records_to_csv_sorted_columns():
    text = serialize.records_to_csv([{"b": 1.5, "a": "x"}, {"a": "y", "c": True}])
    lines = text.splitlines()
    assert lines[0] == "a,b,c"
    assert lines[1].startswith("x,1.5")


# ---------------------------------------------------------------------------
# CLI


def read_json(path):
    return json.loads(path.read_text())


def test_cli_lemmas_pass(tmp_path, capsys):
    out = tmp_path / "lemmas.json"
    code = main(["lemmas", "--count", "40", "--seed", "1", "--out", str(out)])
    assert code == 0
    records = read_json(out)
    assert len(records) == 5
    assert all(rec["pass"] for rec in records)


def test_cli_lemmas_documented_tolerance_failure(tmp_path):
    out = tmp_path / "lemmas.json"
    code = main(
        ["lemmas", "--count", "40", "--seed", "1", "--tolerance", "1e-15", "--out", str(out)]
    )
    assert code == 1


def test_cli_lemmas_csv_format(tmp_path):
    out = tmp_path / "lemmas.csv"
    code = main(["lemmas", "--count", "20", "--seed", "2", "--format", "csv", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 6  # header + one row per lemma
    assert lines[0].split(",")[0] == "instances"


def test_cli_unwritable_output_is_io_error(tmp_path):
    code = main(
        ["lemmas", "--count", "10", "--out", str(tmp_path / "missing" / "x.json")]
    )
    assert code == 2


def test_cli_capacity_exceeded_is_parameter_error(monkeypatch, capsys):
    monkeypatch.setenv("EDPLAB_MAX_QUBITS", "3")
    code = main(["bounds", "--model", "measure-r", "--n", "2", "--r", "1", "--restarts", "1"])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_cli_bounds_measure_r(tmp_path):
    out = tmp_path / "bounds.json"
    code = main(
        [
            "bounds",
            "--model",
            "measure-r",
            "--n",
            "2",
            "--r",
            "1",
            "--restarts",
            "2",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    (record,) = read_json(out)
    assert record["bound"] == pytest.approx(0.75)
    assert record["pass"] is True


def test_cli_bounds_fidelity_with_no_comm_probe(tmp_path):
    out = tmp_path / "bounds.json"
    code = main(
        [
            "bounds",
            "--model",
            "fidelity",
            "--n",
            "2",
            "--s",
            "1",
            "--epsilon",
            "0.25",
            "--include-no-comm-probe",
            "--out",
            str(out),
        ]
    )
    # the no-communication floor probe is a known falsification: exit 1
    assert code == 1
    records = read_json(out)
    assert [r["theorem"] for r in records] == [
        "pos-fidelity",
        "neg-fidelity",
        "pos-fidelity-no-comm",
    ]
    assert records[0]["pass"] and records[1]["pass"]
    assert records[2]["falsified"] is True


def test_cli_protocol_make_and_evaluate(tmp_path):
    spec = tmp_path / "first_pair.json"
    assert main(["protocol", "--make", "first-pair", "--n", "2", "--out", str(spec)]) == 0
    out = tmp_path / "eval.json"
    code = main(
        [
            "protocol",
            "--spec",
            str(spec),
            "--model",
            "depolar",
            "--p",
            "0.4",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    (record,) = read_json(out)
    assert record["fidelity"] == pytest.approx(0.7, abs=1e-10)


def test_cli_protocol_parse_error(tmp_path):
    spec = tmp_path / "broken.json"
    spec.write_text('{"n": 2, "shared_randomness": []}')
    code = main(["protocol", "--spec", str(spec), "--model", "depolar", "--p", "0.1"])
    assert code == 2


def test_cli_protocol_model_file(tmp_path):
    spec = tmp_path / "rp.json"
    assert main(["protocol", "--make", "random-pair", "--n", "2", "--out", str(spec)]) == 0
    model = tmp_path / "model.json"
    model.write_text(json.dumps(serialize.error_model_to_json(MeasureRModel(2, 1))))
    out = tmp_path / "eval.json"
    code = main(["protocol", "--spec", str(spec), "--model-file", str(model), "--out", str(out)])
    assert code == 0
    (record,) = read_json(out)
    assert record["fidelity"] == pytest.approx(0.75, abs=1e-12)


def test_cli_protocol_emit_run(tmp_path):
    spec = tmp_path / "srh.json"
    assert main(
        ["protocol", "--make", "simple-random-hash", "--n", "2", "--s", "1", "--out", str(spec)]
    ) == 0
    # default input: the perfect block, which the hash always accepts
    result_path = tmp_path / "run.json"
    assert main(["protocol", "--spec", str(spec), "--emit-run", str(result_path)]) == 0
    doc = read_json(result_path)
    assert doc["success_probability"] == pytest.approx(1.0, abs=1e-12)
    assert doc["bits"] == 1
    # explicit input state: the maximally mixed block accepts at rate 1/2
    state_path = tmp_path / "state.json"
    state_path.write_text(
        json.dumps(serialize.state_to_json(DensityMatrix.maximally_mixed(2, 2)))
    )
    assert main(
        ["protocol", "--spec", str(spec), "--input", str(state_path),
         "--emit-run", str(result_path)]
    ) == 0
    doc = read_json(result_path)
    assert doc["success_probability"] == pytest.approx(0.5, abs=1e-12)
    cond = serialize.matrix_from_json(doc["conditional_output"])
    np.testing.assert_allclose(cond, np.eye(4) / 4, atol=1e-10)


def test_cli_seed_validation():
    assert main(["lemmas", "--count", "5", "--seed", "-3"]) == 2


def test_cli_bounds_depolarization(tmp_path):
    out = tmp_path / "bounds.json"
    code = main(
        ["bounds", "--model", "depolarization", "--n", "1", "--p", "0.5",
         "--restarts", "2", "--out", str(out)]
    )
    assert code == 0
    (record,) = read_json(out)
    assert record["bound"] == pytest.approx(0.75)
    assert record["pass"] is True


def test_cli_sweep_depolarization(tmp_path):
    out = tmp_path / "sweep.json"
    code = main(
        ["sweep", "--model", "depolarization", "--n", "1..2", "--p", "0.2,0.6",
         "--out", str(out)]
    )
    assert code == 0
    records = read_json(out)
    assert len(records) == 4
    for rec in records:
        assert rec["achieved"] == pytest.approx(1 - 0.75 * rec["param_p"], abs=1e-10)


def test_cli_sweep_fidelity_rows(tmp_path):
    out = tmp_path / "sweep.json"
    code = main(
        [
            "sweep",
            "--model",
            "fidelity",
            "--n",
            "3",
            "--s",
            "1..2",
            "--epsilon",
            "0.25",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    records = read_json(out)
    assert len(records) == 2
    for rec, s in zip(records, (1, 2)):
        assert rec["param_s"] == s
        assert rec["achieved"] >= 1 - 2.0**-s / 0.75 - 1e-9


def test_cli_sweep_reports_invalid_cells(tmp_path):
    out = tmp_path / "sweep.json"
    code = main(
        [
            "sweep",
            "--model",
            "fidelity",
            "--n",
            "3",
            "--s",
            "1..3",
            "--epsilon",
            "0.25",
            "--out",
            str(out),
        ]
    )
    # the s = n cell cannot be built: reported as a failing row
    assert code == 1
    records = read_json(out)
    assert len(records) == 3
    assert "error" in records[2]


def test_cli_sweep_measure_r_grid(tmp_path):
    out = tmp_path / "grid.csv"
    code = main(
        [
            "sweep",
            "--model",
            "measure-r",
            "--n",
            "1..3",
            "--r",
            "all",
            "--format",
            "csv",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + sum(n + 1 for n in (1, 2, 3))


def test_cli_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("count = 25\nseed = 9\nformat = json\n# comment\n")
    out = tmp_path / "a.json"
    assert main(["lemmas", "--config", str(cfg), "--out", str(out)]) == 0
    records = read_json(out)
    assert records[0]["instances"] == 25
    out2 = tmp_path / "b.json"
    assert main(["lemmas", "--config", str(cfg), "--count", "30", "--out", str(out2)]) == 0
    assert read_json(out2)[0]["instances"] == 30


def test_cli_determinism_byte_identical(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for path in (a, b):
        code = main(
            ["sweep", "--model", "measure-r", "--n", "1..2", "--r", "all",
             "--seed", "4", "--out", str(path)]
        )
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    d = tmp_path / "d.csv"
    for path in (c, d):
        assert main(["lemmas", "--count", "30", "--seed", "8", "--format", "csv",
                     "--out", str(path)]) == 0
    assert c.read_bytes() == d.read_bytes()


def test_cli_sweep_worker_pool_order_independent(tmp_path):
    serial = tmp_path / "serial.json"
    pooled = tmp_path / "pooled.json"
    base = ["sweep", "--model", "measure-r", "--n", "1..3", "--r", "all", "--seed", "3"]
    assert main(base + ["--out", str(serial)]) == 0
    assert main(base + ["--workers", "2", "--out", str(pooled)]) == 0
    assert serial.read_bytes() == pooled.read_bytes()
