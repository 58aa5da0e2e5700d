import json

import numpy as np
import pytest

from polyschwarz.cli import dumps, emit_report, main, parse_vector
from polyschwarz.errors import MapFormatError
from polyschwarz.mapio import dump_map, load_map, map_from_dict, map_to_dict
from polyschwarz.maps import catalog, eval_map


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def id2(tmp_path):
    p = tmp_path / "id2.json"
    p.write_text('{"n": 2, "expr": {"kind": "identity"}}')
    return str(p)


@pytest.fixture
def pert(tmp_path):
    f = catalog(2)["random_perturbation"]
    p = tmp_path / "pert.json"
    dump_map(f, p)
    return str(p)


def test_parse_vector():
    assert np.allclose(parse_vector("0.1,0.2-0.3i, 1e-3+2i"), [0.1, 0.2 - 0.3j, 1e-3 + 2j])


def test_tensor_identity(capsys, id2):
    code, out, _ = run(capsys, "tensor", "--map", id2, "--z", "0.1,0.2")
    assert code == 0
    doc = json.loads(out)
    assert np.allclose(np.array(doc["result"]["S"]), 0)
    assert doc["version"] and doc["seed"] == 0 and doc["command"][0] == "tensor"


def test_riccati_threshold_and_blowup(capsys):
    code, out, _ = run(capsys, "riccati", "--c", "0.163934", "--x-end", "0.999")
    doc = json.loads(out)["result"]
    assert code == 0 and "completed_to" in doc["status"] and doc["envelope_ok"]
    code, out, _ = run(capsys, "riccati", "--c", "0.2")
    doc = json.loads(out)["result"]
    assert code == 0 and doc["status"]["blowup_at"] < 1
    lo, hi = doc["status"]["bracket"]
    assert hi - lo < 1e-6


def test_usage_errors(capsys, id2, tmp_path):
    assert run(capsys, "tensor", "--map", id2)[0] == 2
    assert run(capsys, "tensor", "--map", id2, "--z", "0,0", "--bogus")[0] == 2
    assert run(capsys, "tensor", "--map", id2, "--z", "0,zz")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2, "expr": {"kind": "moebius", "matrix": [[1, 0]]}}')
    code, _, err = run(capsys, "tensor", "--map", str(bad), "--z", "0,0")
    assert code == 2 and "$.expr.matrix" in err and err.count("\n") == 1
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    assert run(capsys, "tensor", "--map", str(broken), "--z", "0,0")[0] == 2


def test_csv_only_for_curves(capsys, id2):
    assert run(capsys, "tensor", "--map", id2, "--z", "0,0", "--format", "csv")[0] == 2
    code, out, _ = run(capsys, "compare", "--a", "0.2", "--b", "1", "--format", "csv")
    assert code == 0 and out.splitlines()[0].startswith("t,")


def test_normalize_round_trip(capsys, pert, tmp_path):
    out_map = tmp_path / "norm.json"
    code, _, _ = run(capsys, "normalize", "--map", pert, "--map-out", str(out_map))
    assert code == 0
    from polyschwarz.maps import normalize

    g = load_map(out_map)
    ref = normalize(load_map(pert))
    z = 0.8 * np.random.default_rng(0).uniform(-1, 1, (20, 2))
    assert np.max(np.abs(eval_map(g, z) - eval_map(ref, z))) < 1e-12


def test_catalog_round_trip():
    z = 0.8 * np.random.default_rng(1).uniform(-1, 1, (20, 2))
    for name, f in catalog(2).items():
        g = map_from_dict(json.loads(json.dumps(map_to_dict(f))))
        assert np.max(np.abs(eval_map(g, z) - eval_map(f, z))) < 1e-12, name


def test_map_format_errors():
    with pytest.raises(MapFormatError) as e:
        map_from_dict({"n": 2, "expr": {"kind": "nope"}})
    assert e.value.location == "$.expr.kind"
    with pytest.raises(MapFormatError):
        map_from_dict({"n": 1, "expr": {"kind": "identity"}})
    with pytest.raises(MapFormatError):
        map_from_dict({"n": 2, "expr": {"kind": "automorphism", "a": [[2, 0], [0, 0]]}})


def test_report_schema_invariants(capsys, pert):
    code, out, _ = run(capsys, "supnorm", "--map", pert, "--radius", "0.5", "--grid", "4")
    assert code == 0 and json.loads(out)["result"]["lower_bound_only"] is True
    code, out, _ = run(capsys, "verify")
    doc = json.loads(out)["result"]
    assert code == 0 and doc["status"] == "pass" and doc["violations"] == []


def test_verify_failure_exit(capsys, tmp_path):
    from polyschwarz.maps import Automorphism

    cfg = {"cases": [{"suite": "tensor_bounds", "map": map_to_dict(Automorphism([0.3, 0.0])), "alpha_scale": 0.5}]}
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    code, out, _ = run(capsys, "verify", "--config", str(p))
    assert code == 1 and json.loads(out)["result"]["status"] == "fail"


def test_deterministic_output(capsys, pert):
    a = run(capsys, "opnorm", "--map", pert, "--z", "0.3,0.1i", "--seed", "5")[1]
    b = run(capsys, "opnorm", "--map", pert, "--z", "0.3,0.1i", "--seed", "5")[1]
    assert a == b


def test_seventeen_digits():
    assert dumps(0.1) == "0.10000000000000001"
    assert dumps({"b": 1, "a": [1.0, 2.5]}).index('"a"') < dumps({"b": 1, "a": [1.0, 2.5]}).index('"b"')
    assert json.loads(emit_report({"x": complex(1, 2)}))["result"]["x"] == [1.0, 2.0]


def test_other_subcommands(capsys, pert, tmp_path):
    assert run(capsys, "vanish", "--eps", "4", "--delta", "0")[0] == 0
    assert run(capsys, "vanish", "--n", "2", "--alpha", "0.01")[0] == 0
    assert run(capsys, "vanish")[0] == 2
    code, out, _ = run(capsys, "order", "--n", "3")
    assert code == 0 and json.loads(out)["result"]["moebius_order"]["value"] == 4.0
    assert run(capsys, "cover", "--map", pert, "--radius", "0.5")[0] == 0
    assert run(capsys, "transport", "--map", pert, "--zeta", "1,0.5i", "--t-end", "0.5")[0] == 0
    target = tmp_path / "r.json"
    assert run(capsys, "riccati", "--c", "0.1", "--out", str(target))[0] == 0
    assert json.loads(target.read_text())["result"]["envelope_ok"]
