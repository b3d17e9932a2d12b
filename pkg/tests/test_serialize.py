import json
import os

import numpy as np
import pytest

from covcat import linalg as la
from covcat import serialize as ser
from covcat import symmetry as sym
from covcat.catalysis import CatalysisScenario, generate_admissible_scenario

from conftest import random_channel


def test_matrix_round_trip(rng):
    m = la.random_hermitian(3, rng) + 1j * 0.3 * la.random_hermitian(3, rng) @ np.eye(3)
    m = la.random_unitary(3, rng)
    back = ser.matrix_from_json(ser.matrix_to_json(m))
    np.testing.assert_allclose(back, m, atol=0)


def test_matrix_rejects_bad_payloads():
    with pytest.raises(ser.FormatError):
        ser.matrix_from_json({"dim": 2, "data": [[1, 0]] * 3})  # wrong count
    with pytest.raises(ser.FormatError):
        ser.matrix_from_json({"dim": 2, "data": [[1, 0]] * 4, "extra": 1})
    with pytest.raises(ser.FormatError):
        ser.matrix_from_json({"dim": 0, "data": []})
    with pytest.raises(ser.FormatError):
        ser.matrix_from_json({"dim": 1, "data": [[float("nan"), 0.0]]})
    with pytest.raises(ser.FormatError):
        ser.matrix_from_json({"dim": 1, "data": [[float("inf"), 0.0]]})


def test_group_and_rep_round_trip():
    g = sym.FiniteGroup.symmetric(3)
    back = ser.group_from_json(ser.group_to_json(g))
    np.testing.assert_array_equal(back.table, g.table)
    rep = sym.left_regular_representation(g)
    rep_back = ser.rep_from_json(ser.rep_to_json(rep))
    for w1, w2 in zip(rep.images, rep_back.images):
        np.testing.assert_allclose(w1, w2, atol=0)


def test_group_rejects_inconsistent_payload():
    with pytest.raises(ser.FormatError):
        ser.group_from_json({"order": 2, "table": [[0, 1]]})
    with pytest.raises(ser.FormatError):
        ser.group_from_json({"order": 2, "table": [[0, 1], [1, 0]], "bogus": 1})


def test_lie_symmetry_round_trip(rng):
    lie = sym.LieSymmetry({"S": [la.random_hermitian(2, rng)],
                           "C": [la.random_hermitian(3, rng)]})
    back = ser.lie_symmetry_from_json(ser.lie_symmetry_to_json(lie))
    np.testing.assert_allclose(back.generators("S")[0], lie.generators("S")[0], atol=0)


def test_channel_round_trip(rng):
    t = random_channel(3, 2, rng)
    back = ser.channel_from_json(ser.channel_to_json(t))
    np.testing.assert_allclose(back.choi(), t.choi(), atol=1e-12)


def test_scenario_round_trip():
    sc = generate_admissible_scenario(2, 3, 1, seed=8)
    back = CatalysisScenario.from_json(sc.to_json())
    np.testing.assert_allclose(back.unitary, sc.unitary, atol=0)
    np.testing.assert_allclose(back.rho_s, sc.rho_s, atol=0)
    assert back.admissibility_tol == sc.admissibility_tol


def test_scenario_rejects_unknown_keys():
    sc = generate_admissible_scenario(2, 2, 1, seed=0)
    payload = sc.to_json()
    payload["surprise"] = 1
    with pytest.raises(ser.FormatError):
        CatalysisScenario.from_json(payload)


def test_dump_json_is_deterministic():
    payload = {"b": 1.5, "a": [1, 2], "nested": {"y": 0.25, "x": "s"}}
    assert ser.dump_json(payload) == ser.dump_json(json.loads(ser.dump_json(payload)))


def test_atomic_write(tmp_path):
    path = str(tmp_path / "out.json")
    ser.write_json_atomic(path, {"k": 1})
    with open(path) as fh:
        assert json.load(fh) == {"k": 1}
    leftovers = [f for f in os.listdir(tmp_path) if f.endswith(".tmp")]
    assert not leftovers
