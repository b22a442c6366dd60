import json

import numpy as np
import pytest

import blockmix

TWO_CLIQUES = "".join(
    f"{i}\t{j}\t1\n" for block in (range(0, 5), range(5, 10)) for i in block for j in block if i < j
) + "0\t5\t1\n"


def planted_model(n_blocks=2, p_in=0.3, p_out=0.02):
    canonical = []
    for k in range(n_blocks):
        for l in range(k, n_blocks):
            p = p_in if k == l else p_out
            canonical.append({"k": k, "l": l, "p": [1 - p, p]})
    return {
        "schema": "blockmix.model/1",
        "kind": "tabular",
        "K": n_blocks,
        "alphabet": {"values": [0, 1], "zero": 0, "directed": False},
        "pi": canonical,
        "gamma": [1 / n_blocks] * n_blocks,
    }


def test_network_from_text():
    net = blockmix.Network.from_text(TWO_CLIQUES, alphabet="binary", directed=False)
    assert net.n == 10
    assert not net.directed
    assert net.nonbaseline_count == 21
    assert (0, 5, 1, 1) in net.edges()
    again = blockmix.Network.from_text(net.to_text(), alphabet="binary")
    assert again.edges() == net.edges()


def test_parse_error_is_value_error():
    with pytest.raises(ValueError, match="line 1"):
        blockmix.Network.from_text("0\t1\t7\n", alphabet="binary")


def test_fit_separates_two_cliques():
    net = blockmix.Network.from_text(TWO_CLIQUES, alphabet="binary", directed=False)
    start = np.full((10, 2), 0.4)
    start[:5, 0] = start[5:, 1] = 0.6
    res = blockmix.fit(net, 2, alpha=start)
    z = res["hard_assignment"]
    assert len(set(z[:5])) == 1 and len(set(z[5:])) == 1 and z[0] != z[5]
    assert res["alpha"].shape == (10, 2)
    np.testing.assert_allclose(res["alpha"].sum(axis=1), 1.0, atol=1e-12)
    trace = [res["lb_initial"]] + res["lb_trace"]
    assert all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))
    assert res["document"]["schema"] == "blockmix.fit/1"
    lb = blockmix.lower_bound(net, res["alpha"], res["document"]["model"])
    assert lb == pytest.approx(res["lb"], rel=1e-12)


def test_random_restarts_are_reproducible():
    net = blockmix.Network.from_text(TWO_CLIQUES, alphabet="binary", directed=False)
    a = blockmix.fit(net, 2, restarts=3, seed=3, jobs=1)
    b = blockmix.fit(net, 2, restarts=3, seed=3, jobs=2)
    assert a["lb"] == b["lb"] and len(a["restart_lbs"]) == 3
    np.testing.assert_array_equal(a["alpha"], b["alpha"])


def test_simulate_is_deterministic():
    model = planted_model()
    net1, z1 = blockmix.simulate(model, 200, seed=4, relabel=True)
    net2, z2 = blockmix.simulate(json.dumps(model), 200, seed=4, relabel=True)
    assert net1.n == 200 and len(z1) == 200
    assert net1.edges() == net2.edges() and z1 == z2


def test_bootstrap_round_trip():
    net, _ = blockmix.simulate(planted_model(), 80, seed=5)
    res = blockmix.fit(net, 2, restarts=2, seed=1, max_sweeps=200)
    boot1 = blockmix.bootstrap(res["document"], B=4, seed=2, max_sweeps=100)
    boot2 = blockmix.bootstrap(res["document"], B=4, seed=2, max_sweeps=100, jobs=2)
    assert boot1 == boot2
    assert boot1["schema"] == "blockmix.bootstrap/1"


def test_excess_trust_needs_signed_directed():
    net = blockmix.Network.from_text(TWO_CLIQUES, alphabet="binary", directed=False)
    with pytest.raises(ValueError):
        blockmix.fit(net, 2, model="excess-trust")


def test_documents_match_schemas():
    jsonschema = pytest.importorskip("jsonschema")
    from pathlib import Path

    schema_dir = Path(__file__).resolve().parents[2] / "schema"
    referencing = pytest.importorskip("referencing")
    schemas = {p.name: json.loads(p.read_text()) for p in schema_dir.glob("*.schema.json")}
    registry = referencing.Registry().with_resources(
        (name, referencing.Resource.from_contents(s)) for name, s in schemas.items()
    )

    def check(doc, name):
        jsonschema.Draft202012Validator(schemas[name], registry=registry).validate(doc)

    net, _ = blockmix.simulate(planted_model(), 60, seed=6)
    res = blockmix.fit(net, 2, max_sweeps=50, seed=2)
    check(planted_model(), "model.schema.json")
    check(res["document"], "fit.schema.json")
    check(blockmix.bootstrap(res["document"], B=2, max_sweeps=50), "bootstrap.schema.json")
