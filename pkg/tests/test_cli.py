import json
import subprocess
import sys

import pytest

from caldist import io as cio
from caldist.cli import main
from caldist.core import Instance
from caldist.generators import gen_bghn, gen_one_sided_lb


@pytest.fixture
def write_instance(tmp_path):
    def write(inst, name="inst.json"):
        path = tmp_path / name
        path.write_text(cio.dumps(cio.instance_to_dict(inst)))
        return str(path)

    return write


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_generate_then_compute(tmp_path, capsys):
    path = tmp_path / "bghn.json"
    assert main(["generate", "bghn", "--eps", "0.01", "-o", str(path)]) == 0
    assert json.loads(path.read_text())["metadata"]["family"] == "bghn"
    code, out, _ = run(["compute", "--solver", "typesparse", "-i", str(path)], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["value"] == pytest.approx(0.01, abs=1e-9)
    assert {"value", "error_budget", "solver", "witness", "wall_time_ms"} <= set(doc)


def test_ptas_on_calibrated(write_instance, capsys):
    code, out, _ = run(["compute", "--solver", "ptas", "--eps", "0.5", "-i", write_instance(gen_one_sided_lb(5))], capsys)
    assert code == 0 and json.loads(out)["value"] <= 0.5


def test_oracle_on_uniform_reduction(tmp_path, capsys):
    path = tmp_path / "u.json"
    main(["generate", "uniform-bssp", "--a", "1", "1", "-o", str(path)])
    meta = json.loads(path.read_text())["metadata"]
    assert meta["threshold"] == pytest.approx(1 / 36)
    code, out, _ = run(["oracle", "-i", str(path)], capsys)
    assert json.loads(out)["value"] == pytest.approx(1 / 36, abs=1e-9)


@pytest.mark.parametrize("solver", ["typesparse", "ptas", "pipeline", "oracle"])
def test_result_revalidates(solver, write_instance, capsys):
    inst = Instance.from_arrays([0.1, 0.2, 0.3, 0.4], [0.2, 0.9, 0.2, 0.9], [0.3, 0.5, 0.6, 0.7])
    argv = ["oracle"] if solver == "oracle" else ["compute", "--solver", solver, "--eps", "0.3"]
    _, out, _ = run(argv + ["-i", write_instance(inst)], capsys)
    doc = json.loads(out)
    cost = doc["details"]["witness_cost"]
    if solver == "ptas":
        # the proxy value over-charges, so the witness can only be cheaper
        assert cost <= doc["value"] + doc["error_budget"] + 1e-9
    else:
        assert abs(cost - doc["value"]) <= doc["error_budget"] + 1e-9


def test_malformed_json_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"elements": [\n  {"id": "a",, }]}')
    code, _, err = run(["oracle", "-i", str(bad)], capsys)
    assert code == 2 and "line 2" in err and "column" in err


def test_invalid_field_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"elements": [{"id": "a", "mass": 1.0, "mu": 2.0, "f": 0.5}]}))
    code, _, err = run(["oracle", "-i", str(bad)], capsys)
    assert code == 2 and "mu" in err


def test_state_space_refusal_exit_3(write_instance, capsys):
    code, _, err = run(["compute", "--solver", "typesparse", "--max-states", "4", "-i", write_instance(gen_bghn(0.01))], capsys)
    assert code == 3 and "max_states" in err


def test_oracle_refusal_exit_3(write_instance, capsys):
    code, _, err = run(["oracle", "-i", write_instance(gen_one_sided_lb(14))], capsys)
    assert code == 3 and "max_n" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["estimate", "--m", "10"],
        ["experiment", "one-sided", "--k", "3"],
    ],
)
def test_seed_required(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_mixed_generation_needs_seed(capsys):
    code, _, err = run(["generate", "distinguish", "--mode", "mixed", "--k", "2"], capsys)
    assert code == 2 and "--seed" in err


def test_estimate(write_instance, capsys):
    code, out, _ = run(["estimate", "-i", write_instance(gen_one_sided_lb(4)), "--m", "64", "--seed", "7"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["value"] == pytest.approx(0.05468749999999998, abs=1e-15)


def test_experiment_outputs(tmp_path, capsys):
    summary = tmp_path / "s.json"
    code, out, _ = run(["experiment", "one-sided", "--k", "3", "--trials", "5", "--seed", "1", "--summary", str(summary)], capsys)
    assert code == 0
    assert out.splitlines()[0].startswith("trial_index,seed,m,value")
    assert len(out.splitlines()) == 6
    assert json.loads(summary.read_text())["params"]["m"] == 27


def test_sparsify_discretize(write_instance, capsys):
    code, out, _ = run(["sparsify", "discretize", "--eps", "0.5", "-i", write_instance(gen_bghn(0.01))], capsys)
    meta = json.loads(out)["metadata"]
    assert code == 0 and meta["M"] <= 32 and meta["tv"] <= 0.5


def test_verify(tmp_path, write_instance, capsys):
    pred = tmp_path / "g.json"
    pred.write_text(json.dumps({"values": {"x0-": 0.5, "x1-": 0.5, "x0+": 0.5, "x1+": 0.5}}))
    code, out, _ = run(["verify", "-i", write_instance(gen_bghn(0.01)), "--predictor", str(pred)], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["calibrated"] and doc["distance_to_f"] == pytest.approx(0.01)


def test_byte_identical_runs(write_instance):
    path = write_instance(gen_bghn(0.01))
    argv = [sys.executable, "-m", "caldist", "compute", "--solver", "ptas", "--eps", "0.34", "--no-timing", "-i", path]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and b"wall_time_ms" not in a
