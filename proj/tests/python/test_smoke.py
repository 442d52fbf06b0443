import numpy as np
import pytest

import pocp


def small_problem(**kw):
    args = dict(lambda_=0.1, c=1.0, y0=pocp.DataFunction.cos_product(1.0),
                y_omega=pocp.DataFunction.cos_product(2.0))
    args.update(kw)
    return pocp.discretize(pocp.interval_mesh(8), 10, **args)


def test_mesh_and_problem_shapes():
    mesh = pocp.interval_mesh(4)
    assert mesh.coords.shape == (1, 5)
    dp = small_problem()
    assert (dp.nx, dp.steps) == (9, 10)
    assert np.allclose(dp.taus, 0.1)
    assert dp.mass.shape == (9, 9)
    mass = dp.mass.toarray()
    assert np.allclose(mass, mass.T)


def test_reduced_and_all_at_once_agree():
    dp = small_problem()
    red = pocp.solve_reduced(dp)
    assert red.report.converged
    assert red.u.shape == (9, 10)
    aao = pocp.solve_all_at_once(dp, tol=1e-10)
    assert aao.report.converged
    diff = red.u - aao.u
    assert np.sqrt(dp.inner_DM(diff, diff)) <= 1e-6 * np.sqrt(dp.inner_DM(red.u, red.u))
    assert red.residuals["gradient"] <= 1e-8


def test_gradient_matches_finite_differences():
    dp = small_problem()
    rng = np.random.default_rng(3)
    u = rng.standard_normal((9, 10))
    v = rng.standard_normal((9, 10))
    eps = 1e-5
    fd = (dp.objective(u + eps * v) - dp.objective(u - eps * v)) / (2 * eps)
    assert fd == pytest.approx(dp.inner_DM(dp.gradient(u), v), rel=1e-6)


def test_spectra():
    dp = pocp.discretize(pocp.interval_mesh(4), 4, lambda_=1.0, c=1.0, y_omega=0.0)
    eig = np.asarray(pocp.reduced_spectrum(dp))
    assert eig.min() >= 1.0 - 1e-10
    assert eig.max() <= 1.0 + pocp.gamma_bound(1.0, 1.0) + 1e-10
    assert pocp.max_eig_reduced(dp) == pytest.approx(eig.max(), rel=1e-10)
    for variant in ("sym", "disc"):
        s = np.asarray(pocp.saddle_spectrum(dp, variant))
        assert np.sum(np.abs(s - 1) < 1e-8) == 40
        assert np.sum(np.abs(s + 1) < 1e-8) == 15


def test_config_and_experiment():
    cfg = {"problem": {"lambda": 1, "c": 1}, "discretization": {"n_elems": 4, "N": 4},
           "sweep": {"parameter": "N", "values": [4, 8]}}
    resolved = pocp.parse_config(cfg)
    assert resolved["solver"]["method"] == "reduced"
    recs = pocp.run_experiment(cfg)
    assert [r["sweep_value"] for r in recs] == [4, 8]
    assert all(r["status"] == "ok" for r in recs)
    assert all(c["passed"] for c in pocp.verify(cfg))
    assert "N-minres-sweep" in pocp.presets()


def test_errors_are_raised():
    with pytest.raises(pocp.Error, match="lambda"):
        pocp.parse_config({"problem": {"lamda": 1}, "discretization": {}})
    with pytest.raises(pocp.Error):
        pocp.discretize(pocp.interval_mesh(4), 4, lambda_=-1.0, y_omega=0.0)
