"""Acceptance checks: one test per release criterion, run at the default
configuration.  Each test prints a single summary line; `pytest -v` shows
one pass/fail line per criterion."""

import time

import numpy as np
import pytest

from chabident.cli import main
from chabident.config import (
    RunConfig,
    make_load_path,
    make_noise,
    make_pce_config,
    make_prior_spec,
    material_truth,
)
from chabident.gmkf import kalman_gain, noise_coefficients, update_coefficients
from chabident.integrate import PiecewiseLinearStress, integrate_stress_driven
from chabident.loading import build_case1, export_principal_trajectory, run_experiment
from chabident.pce import (
    PceVector,
    basis_matrix,
    factorial_norm,
    gauss_hermite_rule,
    lognormal_pce,
    multi_index_set,
    pce_cov,
    pce_mean,
)

CFG = RunConfig()
TRUTH = material_truth(CFG)


@pytest.fixture(scope="session")
def default_identifications():
    """identify() on both default load cases, with wall-clock timings."""
    from chabident.gmkf import identify

    cfg = RunConfig()
    runs = {}
    for case in (1, 2):
        t0 = time.perf_counter()
        result = identify(
            make_prior_spec(cfg),
            make_load_path(cfg, case=case),
            make_noise(cfg),
            material_truth(cfg),
            pce_config=make_pce_config(cfg),
            dt=cfg.integrator.dt,
            n_obs=cfg.observation.n_obs,
            edge_length=cfg.observation.edge_length,
            local_tol=cfg.integrator.local_tol,
        )
        runs[case] = (result, time.perf_counter() - t0)
    return runs


def test_01_elastic_constitutive_limit():
    # uniaxial stress below yield: no viscoplastic flow and eps11 = s11/E
    t0 = time.perf_counter()
    peak = 1.5e8
    values = np.zeros((2, 6))
    values[1, 0] = peak
    path = PiecewiseLinearStress([0.0, 10.0], values)
    traj = integrate_stress_driven(TRUTH, path, 0.01)
    assert np.all(traj.eps_vp == 0.0)
    assert np.all(traj.p == 0.0)
    young = 9.0 * TRUTH.kappa * TRUTH.g / (3.0 * TRUTH.kappa + TRUTH.g)
    assert young == pytest.approx(2.0e9, rel=5e-3)
    sigma11 = traj.sigma[:, 0]
    expected = sigma11 / young
    scale = np.max(np.abs(expected))
    assert np.max(np.abs(traj.eps[:, 0] - expected)) <= 1e-10 * scale
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    print(f"criterion 1 PASS: E={young:.4g} Pa, max rel dev <= 1e-10, {elapsed:.2f}s")


def test_02_integrator_convergence_order():
    t0 = time.perf_counter()
    # strongly plastic cycle; huge local_tol keeps steps fixed so the
    # comparison isolates the scheme order
    path = build_case1(3.0e8, 1.5e8, 10.0, 1).stress_path()
    sols = [
        integrate_stress_driven(TRUTH, path, dt, local_tol=1e9)
        for dt in (0.01, 0.005, 0.0025)
    ]

    def errors(a, b):
        idx = np.searchsorted(b.times, a.times)
        assert np.allclose(b.times[idx], a.times, rtol=0, atol=1e-9)
        err_p = np.abs(a.p - b.p[idx]).max() / max(b.p.max(), 1e-300)
        err_e = np.abs(a.eps - b.eps[idx]).max() / np.abs(b.eps).max()
        return err_p, err_e

    err_p_1, err_e_1 = errors(sols[0], sols[1])
    assert err_p_1 <= 1e-4
    assert err_e_1 <= 1e-4
    err_p_2, _ = errors(sols[1], sols[2])
    ratio = err_p_1 / err_p_2
    # classic fourth order: halving dt divides the error by 16 (+-20%)
    assert 0.8 * 16.0 <= ratio <= 1.2 * 16.0
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    print(
        f"criterion 2 PASS: rel err p={err_p_1:.2e} eps={err_e_1:.2e}, "
        f"order ratio {ratio:.1f}, {elapsed:.1f}s"
    )


def test_03_pce_orthogonality():
    t0 = time.perf_counter()
    m, degree = 5, 3
    index_set = multi_index_set(m, degree)
    rule = gauss_hermite_rule(m, level=4)
    psi = basis_matrix(index_set, rule.nodes)
    gram = psi.T @ (psi * rule.weights[:, None])
    norms = np.array([factorial_norm(alpha) for alpha in index_set])
    scale = np.sqrt(np.outer(norms, norms))
    dev = np.max(np.abs(gram - np.diag(norms)) / scale)
    assert dev <= 1e-10
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    print(
        f"criterion 3 PASS: {len(index_set)} basis functions, "
        f"scaled Gram deviation {dev:.2e}, {elapsed:.1f}s"
    )


def test_04_lognormal_prior_moments():
    t0 = time.perf_counter()
    mean, cov, degree = 1.0, 0.15, 4
    pce = lognormal_pce(mean, cov, germ_index=0, degree=degree, germs=1)
    got_mean = float(pce_mean(pce)[0])
    got_std = float(np.sqrt(pce_cov(pce, pce)[0, 0]))
    assert abs(got_mean - mean) <= 0.005 * mean
    assert abs(got_std - cov * mean) <= 0.005 * cov * mean
    rng = np.random.default_rng(2024)
    sigma_g = np.sqrt(np.log1p(cov**2))
    mu_g = np.log(mean) - 0.5 * sigma_g**2
    samples = rng.lognormal(mu_g, sigma_g, size=1_000_000)
    assert abs(got_mean - samples.mean()) <= 0.005 * samples.mean()
    assert abs(got_std - samples.std()) <= 0.005 * samples.std()
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    print(
        f"criterion 4 PASS: mean {got_mean:.6f}, std {got_std:.6f} "
        f"(MC {samples.mean():.6f}, {samples.std():.6f}), {elapsed:.1f}s"
    )


def test_05_linear_gaussian_oracle():
    t0 = time.perf_counter()
    # scalar: q ~ N(m, s^2), u = q + e, e ~ N(0, r^2)
    m, s, r, z = 2.0, 0.5, 0.25, 2.6
    index_set = multi_index_set(1, 1)
    q = PceVector(germs=1, degree=1, index_set=index_set, coeffs=np.array([[m, s]]))
    u = PceVector(germs=1, degree=1, index_set=index_set, coeffs=np.array([[m, s]]))
    gain = kalman_gain(pce_cov(q, u), pce_cov(u, u), np.array([[r**2]]))
    post = update_coefficients(q, u, gain, np.array([z]))
    noise = noise_coefficients(gain, np.array([r**2]))
    mean_exact = m + s**2 / (s**2 + r**2) * (z - m)
    var_exact = s**2 * r**2 / (s**2 + r**2)
    post_var = float(pce_cov(post, post)[0, 0]) + float((noise @ noise.T)[0, 0])
    assert abs(float(pce_mean(post)[0]) - mean_exact) <= 1e-10 * abs(mean_exact)
    assert abs(post_var - var_exact) <= 1e-10 * var_exact

    # three parameters, affine map u = H q + e with dense H
    rng = np.random.default_rng(7)
    mu = np.array([1.0, -2.0, 0.5])
    a_mat = rng.normal(size=(3, 3))
    cov_q = a_mat @ a_mat.T + 3.0 * np.eye(3)
    h_mat = rng.normal(size=(4, 3))
    r_diag = np.array([0.2, 0.3, 0.25, 0.4]) ** 2
    z_hat = rng.normal(size=4)

    index_set3 = multi_index_set(3, 1)
    chol = np.linalg.cholesky(cov_q)
    q3 = PceVector(
        germs=3, degree=1, index_set=index_set3, coeffs=np.column_stack([mu, chol])
    )
    u3 = PceVector(
        germs=3, degree=1, index_set=index_set3, coeffs=h_mat @ q3.coeffs
    )
    gain3 = kalman_gain(pce_cov(q3, u3), pce_cov(u3, u3), np.diag(r_diag))
    post3 = update_coefficients(q3, u3, gain3, z_hat)
    noise3 = noise_coefficients(gain3, r_diag)

    s_mat = h_mat @ cov_q @ h_mat.T + np.diag(r_diag)
    k_exact = cov_q @ h_mat.T @ np.linalg.inv(s_mat)
    mean_exact3 = mu + k_exact @ (z_hat - h_mat @ mu)
    cov_exact3 = cov_q - k_exact @ s_mat @ k_exact.T
    post_cov3 = pce_cov(post3, post3) + noise3 @ noise3.T
    assert np.allclose(pce_mean(post3), mean_exact3, rtol=1e-10, atol=1e-12)
    assert np.allclose(post_cov3, cov_exact3, rtol=1e-10, atol=1e-12)
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    print(f"criterion 5 PASS: scalar and 3-parameter posteriors analytic, {elapsed:.2f}s")


def test_06_variance_reduction(default_identifications):
    for case in (1, 2):
        result, elapsed = default_identifications[case]
        assert np.all(result.post_std < result.prior_std), f"case {case}"
        assert result.diagnostics["n_nodes"] == 243
        assert elapsed < 300.0, f"case {case} took {elapsed:.0f}s"
    result2, _ = default_identifications[2]
    rel = {
        name: result2.post_std[i] / result2.post_mean[i]
        for i, name in enumerate(result2.param_names)
    }
    for name in ("kappa", "g", "sigma_y"):
        assert rel[name] <= 0.01, f"{name}: {rel[name]:.4%}"
    t1 = default_identifications[1][1]
    t2 = default_identifications[2][1]
    print(
        "criterion 6 PASS: all stds reduced; case-2 rel stds "
        f"kappa {rel['kappa']:.3%}, g {rel['g']:.3%}, sigma_y {rel['sigma_y']:.3%}; "
        f"runtimes {t1:.0f}s/{t2:.0f}s"
    )


def test_07_load_path_effect(default_identifications):
    res1, t1 = default_identifications[1]
    res2, t2 = default_identifications[2]
    idx = {name: i for i, name in enumerate(res1.param_names)}
    ratios = {}
    for name in ("b_r", "b_chi"):
        i = idx[name]
        assert res2.post_std[i] <= 0.5 * res1.post_std[i], (
            f"{name}: case2 std {res2.post_std[i]:.3g} vs case1 {res1.post_std[i]:.3g}"
        )
        ratios[name] = res1.post_std[i] / res2.post_std[i]
        err = abs(res2.post_mean[i] - 50.0) / 50.0
        assert err <= 0.05, f"{name}: case-2 mean {res2.post_mean[i]:.3f}"
    assert t1 + t2 < 600.0
    print(
        f"criterion 7 PASS: std ratios b_r {ratios['b_r']:.2f}, "
        f"b_chi {ratios['b_chi']:.2f}; case-2 means "
        f"{res2.post_mean[idx['b_r']]:.2f}/{res2.post_mean[idx['b_chi']]:.2f}; "
        f"total {t1 + t2:.0f}s"
    )


def test_08_plastic_activation(tmp_path):
    transitions = {}
    for case in (1, 2):
        path = make_load_path(CFG, case=case)
        _, traj = run_experiment(
            TRUTH, path, CFG.integrator.dt, CFG.observation.n_obs, CFG.observation.edge_length
        )
        _, _, transitions[case] = export_principal_trajectory(
            traj, TRUTH, tmp_path / f"principal{case}.csv"
        )
    assert transitions[2] >= transitions[1]
    print(
        f"criterion 8 PASS: outside-yield transitions case1 {transitions[1]}, "
        f"case2 {transitions[2]}"
    )


def test_09_determinism(tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert main(["identify", "--case", "1", "--out", str(out_a)]) == 0
    assert main(["identify", "--case", "1", "--out", str(out_b)]) == 0
    names = sorted(p.name for p in out_a.iterdir())
    assert names == sorted(p.name for p in out_b.iterdir())
    for name in names:
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name
    print(f"criterion 9 PASS: {len(names)} files bitwise identical across reruns")
