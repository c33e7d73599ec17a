import math

import numpy as np
import pytest

import hybridvr as hv


def test_builtins_load():
    names = hv.builtin_problem_names()
    assert set(names) == {"labyrinth2d", "box_scatter", "infinite_medium", "absorber_slab"}
    lab = hv.builtin_problem("labyrinth2d")
    assert (lab.nx, lab.ny, lab.groups) == (100, 60, 4)
    assert lab.locate(-75.0, 0.0) >= 0
    with pytest.raises(ValueError):
        hv.builtin_problem("nowhere")


def test_deck_round_trip(tmp_path):
    model = hv.builtin_problem("box_scatter")
    path = tmp_path / "box.json"
    hv.write_deck(model, str(path))
    assert hv.load_deck(str(path)) == model
    assert hv.parse_deck(model.to_json()) == model
    with pytest.raises(hv.ParseError):
        hv.parse_deck("{not json")


def test_quadrature_weights():
    q = hv.build_quadrature(1, 1)
    assert q.size == 8
    assert math.isclose(q.weights.sum(), 4.0 * math.pi, rel_tol=1e-14)
    assert np.allclose(np.linalg.norm(q.directions, axis=1), 1.0)


def test_infinite_medium_flux():
    model = hv.builtin_problem("infinite_medium")
    r = hv.solve(model, hv.build_quadrature(2, 2))
    assert r.report.converged
    assert np.allclose(r.scalar, 2.0, rtol=1e-10)
    assert r.angular.shape == (1, 100, 32)


def test_adjoint_duality():
    model = hv.builtin_problem("box_scatter")
    q = hv.build_quadrature(2, 2)
    fwd = hv.solve(model, q, "forward", tol=1e-10)
    adj = hv.solve(model, q, "adjoint", tol=1e-10)
    r_fwd = hv.response(fwd.scalar, model.response_density(), model)
    r_adj = hv.response(adj.scalar, model.source_density(), model)
    assert abs(r_fwd - r_adj) <= 1e-5 * max(abs(r_fwd), abs(r_adj))


def test_no_adjoint_source():
    model = hv.builtin_problem("box_scatter")
    zero = np.zeros((model.cells, model.groups))
    with pytest.raises(hv.SolverError, match="no adjoint source"):
        hv.solve(model, hv.build_quadrature(1, 1), "adjoint", adjoint_source=zero)


def test_vr_map_and_files(tmp_path):
    model = hv.builtin_problem("box_scatter")
    vr = hv.make_vr(model, hv.build_quadrature(2, 2), method="cadis-omega")
    m = vr.map
    assert m.method == "cadis_omega"
    assert math.isclose((m.q_hat * model.cell_volume).sum(), 1.0, rel_tol=1e-12)
    windowed = m.w_surv > 0
    assert np.allclose(m.w_high[windowed] / m.w_low[windowed], 5.0)
    prefix = str(tmp_path / "vr")
    hv.write_importance_map(m, prefix)
    assert hv.read_importance_map(prefix) == m


def test_monte_carlo_reproducible():
    model = hv.builtin_problem("infinite_medium")
    a = hv.run_histories(model, histories=5000, seed=3)
    b = hv.run_histories(model, histories=5000, seed=3, workers=4)
    assert a.mean == b.mean and a.total_rel_err == b.total_rel_err
    assert abs(a.total_mean - 2.0) <= 4.0 * a.total_mean * a.total_rel_err
    assert a.to_csv(False).startswith("group,mean,rel_err\n")


def test_biased_monte_carlo_unbiased():
    model = hv.builtin_problem("absorber_slab")
    vr = hv.make_vr(model, hv.build_quadrature(2, 2))
    analog = hv.run_histories(model, histories=40000, seed=5)
    biased = hv.run_histories(model, vr.map, histories=40000, seed=5)
    assert analog.total_mean > 0.0 and biased.total_mean > 0.0
    sigma = math.hypot(analog.total_mean * analog.total_rel_err,
                       biased.total_mean * biased.total_rel_err)
    assert abs(analog.total_mean - biased.total_mean) <= 3.0 * sigma


def test_fom():
    assert math.isclose(hv.fom(2.0, 0.1), 50.0)
    with pytest.raises(ValueError):
        hv.fom(0.0, 0.1)


def test_compare_rows():
    model = hv.builtin_problem("box_scatter")
    report = hv.run_compare(model, hv.build_quadrature(1, 1), histories=2000)
    assert [r.method for r in report.rows] == ["analog", "cadis", "cadis_omega"]
    assert report.row("analog").t_det == 0.0
    assert "cadis_omega" in report.table()
