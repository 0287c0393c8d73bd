"""Quick end-to-end check of the v2vgeo Python module.

Build and install first:  pip install --no-build-isolation ./crates/py
"""

import math

import v2vgeo


def main():
    assert abs(v2vgeo.knife_edge_loss(0.0) - 6.03) < 0.01
    assert v2vgeo.knife_edge_loss(-1.0) == 0.0
    assert v2vgeo.fresnel_radius(100.0, 50.0, 0.0508) > 0.0
    assert abs(v2vgeo.reflection_coefficient(math.pi / 2, 1.0)) < 1e-12

    scene = v2vgeo.Scene.highway(seed=3, road_length=2000.0)
    again = v2vgeo.Scene.from_json(scene.to_json())
    assert again.vehicle_ids() == scene.vehicle_ids()
    print(scene)

    model = v2vgeo.ChannelModel(tx_dbm=20.0, seed=1)
    reports = model.evaluate(scene)
    assert reports, "no links in range"
    assert all((a.tx, a.rx) < (b.tx, b.rx) for a, b in zip(reports, reports[1:]))
    classes = {r.link_class for r in reports}
    print(f"{len(reports)} links, classes {sorted(classes)}")

    r = reports[0]
    pair = model.evaluate_pair(scene, r.tx, r.rx)
    assert pair.faded_dbm == r.faded_dbm

    bins = model.packet_success_rate(scene, 6.0)
    assert all(0 <= rx <= tx for _, _, tx, rx in bins)

    p = v2vgeo.p_los_system(scene, 250.0)
    assert p is None or 0.0 <= p <= 1.0

    x = v2vgeo.x_max_solve(1.5, 0.08, 3.0, 0.3)
    assert 0.0 < x
    assert 0.0 <= v2vgeo.p_tall_within(0.1, 0.05, x) <= 1.0

    scenes = [v2vgeo.Scene.highway(seed=s, road_length=3000.0, density=5.0) for s in range(2)]
    rows = v2vgeo.compare_relays(scenes, model, techniques=["tvr"], n_pairs=20)
    assert rows[0]["best_route_pct"] == 100.0

    try:
        v2vgeo.Scene.from_json("{ not json")
    except ValueError:
        pass
    else:
        raise AssertionError("bad JSON accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()
