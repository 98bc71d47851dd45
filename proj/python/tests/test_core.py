import math

import numpy as np
import pytest

import tdbem


def test_weights_and_basis():
    assert tdbem.weights(2) == pytest.approx([0.5, -1.5, 1.5, -0.5])
    # partition of unity away from the start
    dt = 0.1
    t = 1.234
    total = sum(tdbem.eval_basis(2, dt, beta, t) for beta in range(20))
    assert total == pytest.approx(1.0)


def test_recurrence_table():
    k = 7
    assert tdbem.recurrence_coeff(4, 0, k) == 2 + 12 * k * k
    assert tdbem.recurrence_coeff(5, 3, k) == -20


def test_icosphere_geometry():
    mesh = tdbem.icosphere(4)
    assert len(mesh) == 320
    assert mesh.vertices.shape[1] == 3
    assert mesh.triangles.shape == (320, 3)
    assert mesh.total_area == pytest.approx(math.pi, rel=2e-2)
    assert mesh.volume > 0


def test_far_observer_single_layer():
    tri = np.array([[0.0, 0.0, 0.0], [0.3, 0.02, 0.0], [0.08, 0.25, 0.0]])
    area = 0.5 * np.linalg.norm(np.cross(tri[1] - tri[0], tri[2] - tri[0]))
    xi = tri.mean(axis=0) + np.array([0.0, 0.0, 200.0])
    got = tdbem.single_layer_coeff(xi, tri, 260, 1, 1.0)
    assert got == pytest.approx(area * 60.0 / 200.0 / (4 * math.pi), rel=1e-5)


def test_config_round_trip():
    cfg = tdbem.RunConfig()
    cfg.set("dt", "0.05")
    cfg.set("algo", "fast")
    again = tdbem.RunConfig.from_text(cfg.to_text())
    assert again == cfg
    assert "leaf_capacity" in tdbem.RunConfig.keys()
    with pytest.raises(ValueError):
        cfg.set("nonsense", "1")


def test_small_run_matches_reference_shape(tmp_path):
    cfg = tdbem.RunConfig.from_text(
        f"mesh = sphere:80\ndt = 0.1\nnt = 30\narc_samples = 5\nout = {tmp_path}\n"
    )
    out = tdbem.run(cfg, write_outputs=True)
    assert out["status"] == "stable"
    assert out["values"].shape == (30, 5)
    assert out["reference"].shape == (30, 5)
    assert 0 < out["rel_error"] < 1
    assert (tmp_path / "profiles.csv").read_text().startswith("t,point_id,value,reference")


def test_reference_front_point_doubles_pressure():
    ref = tdbem.sphere_reference("neumann", [[0.0, 0.0, 0.0]], 0.01, 4)
    inc = 0.5 * (1 - math.cos(2 * math.pi * 0.01 / 0.5))
    assert ref[1, 0] == pytest.approx(2 * inc, rel=0.05)
    with pytest.raises(ValueError):
        tdbem.sphere_reference("robin", [[0.0, 0.0, 0.0]], 0.01, 4)
