import json
import math

import numpy as np
import pytest

import gcnfair


def k3(self_loop=1.0):
    return gcnfair.make_dataset(3, [(0, 1), (1, 2), (0, 2)], np.eye(3), [0, 0, 0], None, self_loop)


def test_dataset_and_degrees():
    d = gcnfair.make_dataset(4, [(1, 0), (0, 1), (2, 3)], np.ones((4, 2)), [0, 0, 1, 1], [0, 1, 0, 1])
    assert d.n == 4
    assert d.edges == [(0, 1), (2, 3)]
    wg = gcnfair.within_group_degrees(d)
    assert wg["degrees"] == [2.0, 2.0, 2.0, 2.0]
    assert wg["group_of"] == [0, 0, 1, 1]


def test_k3_normalized_adjacency():
    p = gcnfair.normalized_adjacency(k3(), "sym")
    assert np.allclose(p, np.full((3, 3), 1.0 / 3.0))
    rw = gcnfair.normalized_adjacency(k3(0.0), "rw")
    assert np.allclose(rw.sum(axis=1), 1.0)


def test_forward_and_scores():
    d = k3()
    m = gcnfair.init_model(3, [4, 2], "sym", 3)
    assert m.layers == 2
    assert m.weights[0].shape == (4, 3)
    h = gcnfair.forward(m, d)
    assert h.shape == (3, 2)
    s = gcnfair.score_pairs(h, [(0, 1), (1, 0)])
    assert s[0] == s[1]
    assert math.isclose(s[0], float(h[0] @ h[1]))


def test_metrics():
    assert gcnfair.roc_auc([0.9, 0.8], [0.2, 0.1]) == 1.0
    assert gcnfair.roc_auc([0.5, 0.5], [0.5]) == 0.5
    assert gcnfair.pcc([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert gcnfair.nrmse([0, 0], [0, 1]) == pytest.approx(math.sqrt(0.5))


def test_bounds_hold_on_a_synthetic_graph():
    d = gcnfair.synth_generate(group_sizes=[15, 15], p_in=0.5, p_out=0.02, seed=1)
    b = gcnfair.propagation_bounds(d, "sym", 2)
    p = gcnfair.normalized_adjacency(d, "sym")
    p2 = p @ p
    wg = gcnfair.within_group_degrees(d)
    deg, grp, vol = np.array(wg["degrees"]), np.array(wg["group_of"]), wg["volumes"]
    for i in range(d.n):
        for j in range(d.n):
            if grp[i] == grp[j]:
                err = abs(p2[i, j] - math.sqrt(deg[i] * deg[j]) / vol[grp[i]])
                assert err <= b["zeta_s"][grp[i]] + 1e-9
            else:
                assert abs(p2[i, j]) <= b["residual_term"] + 1e-9


def test_delta_hat_toy():
    d = gcnfair.make_dataset(
        6, [(0, 3), (2, 3), (1, 3), (1, 4)], np.eye(6), [0, 0, 0, 0, 0, 1], [1, 1, 1, 0, 1, 1], 0.0
    )
    a = gcnfair.delta_hat(d, [1.0, 1.0], [1.0, 1.0], "sym")
    assert a["groups"][0]["delta_hat"] == pytest.approx(0.7726, abs=1e-4)
    assert gcnfair.delta_hat(d, [1.0, 1.0], [1.0, 1.0], "rw")["groups"][0]["delta_hat"] == 0.0


def test_errors_map_to_python():
    with pytest.raises(gcnfair.GcnfairError) as info:
        gcnfair.make_dataset(2, [(0, 5)], np.ones((2, 1)), [0, 0])
    assert isinstance(info.value, ValueError)
    with pytest.raises(ValueError):
        gcnfair.roc_auc([1.0], [])


def test_small_training_run(tmp_path):
    config = {
        "dataset_name": "py-smoke",
        "synth": {"group_sizes": [30, 30], "p_in": 0.2, "p_out": 0.01, "disparity_boost": 2.0, "seed": 3},
        "dims": [8, 4],
        "epochs": 10,
        "seeds": 2,
    }
    r = gcnfair.run_train(json.dumps(config), tmp_path)
    assert len(r["seed_test_auc"]) == 2
    assert 0.0 <= r["test_auc"]["mean"] <= 1.0
    assert (tmp_path / "report.json").exists()
    m = gcnfair.load_checkpoint(tmp_path / "model_seed0.json")
    assert m.filter == "sym"
    assert [w.shape for w in m.weights] == [(8, 16), (4, 8)]
