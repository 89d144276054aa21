import numpy as np
import pytest

import pmclstd


def test_soft_threshold_and_identity():
    x = np.array([-2.0, -0.5, 0.0, 0.5, 2.0])
    np.testing.assert_allclose(pmclstd.soft_threshold(x, 1.0), [-1.0, 0.0, 0.0, 0.0, 1.0])
    mc = pmclstd.mc_penalty(x, 1.0)
    assert mc == pytest.approx(np.abs(x).sum() - pmclstd.moreau_env_l1(x, 1.0), abs=1e-12)


def test_pmc_penalty_limits():
    rng = np.random.default_rng(0)
    x = rng.normal(size=6)
    assert pmclstd.pmc_penalty(x, 0.7, np.eye(6)) == pytest.approx(pmclstd.mc_penalty(x, 0.7), abs=1e-12)
    assert pmclstd.pmc_penalty(x, 0.7, np.zeros((6, 0))) == pytest.approx(np.abs(x).sum(), abs=1e-12)


def test_solver_matches_closed_form_at_zero_mu():
    rng = np.random.default_rng(1)
    phi = rng.normal(size=(60, 8))
    phi_next = rng.normal(size=(60, 8))
    g = rng.normal(size=60)
    op = pmclstd.assemble_operator(pmclstd.LstdData(phi, phi_next, g, 0.9))
    assert op.dim == 8 and op.rank == 8
    report = pmclstd.pmc_lstd_solve(op, 0.0, tau=1.0, q=0, tol=1e-12)
    assert report["converged"]
    closed = pmclstd.lstd_closed_form(op)
    np.testing.assert_allclose(report["solution"], closed, rtol=1e-6, atol=1e-9)
    np.testing.assert_allclose(op.a_tilde @ closed, op.b_tilde, atol=1e-8)


def test_l1_mode_is_sparse_lasso():
    rng = np.random.default_rng(2)
    phi = rng.normal(size=(80, 10))
    g = phi[:, :2] @ np.array([3.0, -2.0]) + 0.01 * rng.normal(size=80)
    op = pmclstd.assemble_operator(pmclstd.LstdData(phi, np.zeros_like(phi), g, 0.9))
    w = pmclstd.pmc_lstd_solve(op, 20.0, q=0, tol=1e-12)["solution"]
    grad = op.a_tilde @ w - op.b_tilde
    active = w != 0
    np.testing.assert_allclose(grad[active], -20.0 * np.sign(w[active]), atol=1e-7)
    assert np.all(np.abs(grad[~active]) <= 20.0 + 1e-7)


def test_chain_optimal_policy():
    q, v, policy = pmclstd.exact_optimal(pmclstd.ChainMdp())
    assert policy == ["left"] * 10 + ["right"] * 10
    np.testing.assert_allclose(v, v[::-1], atol=1e-10)
    assert q.shape == (20, 2)


def test_chain_pipeline_runs():
    model = pmclstd.ChainMdp()
    _, v_star, policy = pmclstd.exact_optimal(model)
    data = pmclstd.chain_lstd_data(model, 10, 20, 400, 7, policy)
    assert data.phi.shape == (400, 2 * (1 + 10 + 20))
    op = pmclstd.assemble_operator(data)
    report = pmclstd.pmc_lstd_solve(op, 1.0, tol=1e-6, max_iters=20000)
    assert np.all(np.isfinite(report["solution"]))


def test_sweep_from_config_text():
    csv = pmclstd.run_sweep(
        "sweep=noise_count\nvalues=0\nm=200\ntrials=1\nmethods=lstd\nseed=3\n"
    )
    lines = csv.strip().splitlines()
    assert lines[0].startswith("sweep_value,method,trial,nmse")
    assert len(lines) == 2 and lines[1].startswith("0,lstd,0,")
