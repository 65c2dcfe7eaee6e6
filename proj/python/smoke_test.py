"""Smoke test for the Python bindings: every exposed operation gets one call
with a value checked against an independent hand computation."""

import json
import math
import os
import tempfile

import numpy as np

import kolmonet as kn


def test_network_calculus():
    id3 = kn.relu_identity(3)
    assert id3.arch() == [3, 6, 3]
    assert id3.param_count() == 45
    assert id3.depth() == 2
    x = np.array([1.0, -2.0, 0.5])
    assert np.array_equal(id3.realize(x), x)

    combo = kn.weighted_sum([kn.relu_identity(1), kn.relu_identity(1)], [2.0, -0.5])
    assert abs(combo.realize(np.array([3.0]))[0] - 4.5) < 1e-12

    id1 = kn.relu_identity(1)
    double = kn.compose(combo, id1, id1)
    assert abs(double.realize(np.array([3.0]))[0] - 4.5) < 1e-12

    stepped = kn.residual_step(id1, kn.linear_net(np.array([[-0.5]])), id1)
    assert abs(stepped.realize(np.array([4.0]))[0] - 2.0) < 1e-12

    assert kn.sum_coords_net(4).realize(np.array([1.0, 2.0, 3.0, 4.0]))[0] == 10.0
    assert kn.max_coords_net(3).realize(np.array([-1.0, 5.0, 2.0]))[0] == 5.0
    assert kn.zero_net(2).realize(np.array([9.0, -9.0]))[0] == 0.0

    X = np.random.default_rng(0).uniform(-1, 1, size=(3, 7))
    batch = id3.realize_batch(X)
    assert np.array_equal(batch, X)


def test_serialization_roundtrip():
    net = kn.weighted_sum([kn.relu_identity(2), kn.relu_identity(2)], [0.25, 0.5])
    text = net.to_json()
    doc = json.loads(text)
    assert doc["version"] == 1 and doc["activation"] == "relu"
    back = kn.from_json(text)
    assert back.to_json() == text
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "net.json")
        net.save(path)
        loaded = kn.Network.load(path)
        assert loaded.to_json() == text


def test_catalog_and_oracles():
    names = kn.catalog_names()
    assert len(names) == 6 and "heat-max" in names

    prob = kn.make_problem("heat-linear", 2, 1.0)
    assert prob.name == "heat-linear" and prob.dim == 2 and prob.T == 1.0
    prob.validate(seed=42)
    assert abs(prob.reference_value(np.array([0.3, 0.7])) - 1.0) < 1e-12

    report = prob.lp_error(kn.sum_coords_net(2), p=2.0, probes=200, seed=1)
    assert report["lp_error"] < 1e-12
    assert report["probes"] == 200

    quad = kn.make_problem("heat-quadratic", 1, 1.0)
    value, stderr = quad.feynman_kac(np.array([0.5]), samples=2000, seed=4)
    assert abs(value - 2.25) < 3.0 * stderr + 1e-9

    f0 = prob.f0_net
    assert abs(f0.realize(np.array([0.2, 0.3]))[0] - 0.5) < 1e-12


def test_calibrate_and_construct():
    prob = kn.make_problem("heat-linear", 1, 1.0)
    cal = kn.calibrate(prob, eps=0.4, p=2.0, seed=3, budget=40)
    assert cal["M"] >= 4 and 0.0 < cal["delta"] <= 1.0
    assert cal["steps"][-1]["action"] == "accept"

    built = kn.construct(prob, M=cal["M"], delta=cal["delta"], candidates=2,
                         seed=5, eps=0.4, p=2.0)
    assert built["selected_error"] < 0.6
    assert built["network"].input_dim() == 1

    planned = kn.plan(prob, M=cal["M"], delta=cal["delta"])
    assert planned["mc_params"] == built["param_count"]
    assert planned["depth"] == built["depth"]

    # Identical arguments give byte-identical networks.
    again = kn.construct(prob, M=cal["M"], delta=cal["delta"], candidates=2,
                         seed=5, eps=0.4, p=2.0)
    assert again["network"].to_json() == built["network"].to_json()


def test_constants_and_certificate():
    const = kn.paper_constants(d=2.0, eps=0.5, kappa=18.0)
    assert math.isfinite(const["log_M"]) and math.isfinite(const["log_delta"])
    assert const["m_overflows"]
    assert abs(const["log_M"] - 1265.3562547447286) < 1e-9
    assert math.isfinite(const["log_param_bound"])

    cert = kn.param_certificate(100, c=10.0, d=2.0, eps=0.5)
    assert cert["pass"] and cert["log_margin"] > 0.0
    assert not kn.param_certificate(10**9, c=2.0, d=1.0, eps=1.0)["pass"]

    try:
        kn.make_problem("banana", 2, 1.0)
    except RuntimeError:
        pass
    else:
        raise AssertionError("unknown problem name must raise")


def main():
    tests = [
        test_network_calculus,
        test_serialization_roundtrip,
        test_catalog_and_oracles,
        test_calibrate_and_construct,
        test_constants_and_certificate,
    ]
    for test in tests:
        test()
        print(f"ok {test.__name__}")
    print(f"{len(tests)} smoke tests passed")


if __name__ == "__main__":
    main()
