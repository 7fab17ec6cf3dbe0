"""Gauss-Markov-Kalman update of polynomial-chaos parameter coefficients.

The uncertain parameter vector q = [kappa, G, b_R, b_chi, sigma_y] carries
independent lognormal priors, one germ each.  The prior PCE is pushed
through the virtual experiment at tensor-quadrature nodes, covariances are
assembled from coefficients, and the linear update

    q_a = q_f + K (z_hat - u_f),   K = C_qu (C_u + C_eps)^(-1)

acts column-wise on the coefficients.  Measurement noise enters the
posterior as an extra block of degree-1 coefficients on per-channel noise
germs (-K diag(std)); with that block the coefficient covariance equals
C_f - K (C_u + C_eps) K^T exactly, matching the analytic Kalman posterior.
"""

from __future__ import annotations

import json
import os
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .loading import outside_stats, outside_yield_flags, run_experiment, synthesize_measurement
from .material import MaterialParams
from .pce import (
    IndexMismatch,
    PceVector,
    basis_matrix,
    factorial_norm,
    gauss_hermite_rule,
    kde_density,
    lognormal_pce,
    make_pce,
    pce_cov,
    pce_evaluate_batch,
    pce_mean,
)

PARAM_NAMES = ("kappa", "g", "b_r", "b_chi", "sigma_y")


class ForwardFailure(Exception):
    """The forward model failed at a quadrature node."""


class NonPositiveParameter(Exception):
    """A quadrature node mapped a parameter to a non-positive value."""


class NotSPD(Exception):
    """The innovation covariance C_u + C_eps is not positive definite."""


@dataclass(frozen=True)
class PriorSpec:
    """Lognormal marginals for the five uncertain parameters, fixed rest.

    means/covs follow the order of PARAM_NAMES; n, k, h_r, h_chi stay at
    their true values during identification.
    """

    means: np.ndarray
    covs: np.ndarray
    n: float
    k: float
    h_r: float
    h_chi: float

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        covs = np.asarray(self.covs, dtype=float)
        if means.shape != (5,) or covs.shape != (5,):
            raise ValueError("need exactly 5 prior means and 5 prior covs")
        if np.any(means <= 0.0):
            raise ValueError("prior means must be positive")
        if np.any(covs < 0.0):
            raise ValueError("prior covs must be non-negative")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covs", covs)

    @classmethod
    def from_truth(cls, truth, mean_factor=1.2, cov=0.15):
        """mean_factor and cov may be scalars or one value per parameter
        (PARAM_NAMES order)."""
        factors = np.asarray(mean_factor, dtype=float)
        if factors.ndim == 0:
            factors = np.full(5, float(factors))
        means = factors * np.array(
            [truth.kappa, truth.g, truth.b_r, truth.b_chi, truth.sigma_y]
        )
        covs = np.asarray(cov, dtype=float)
        if covs.ndim == 0:
            covs = np.full(5, float(covs))
        return cls(
            means=means,
            covs=covs,
            n=truth.n,
            k=truth.k,
            h_r=truth.h_r,
            h_chi=truth.h_chi,
        )

    def material_params(self, q):
        """Assemble full material constants from an uncertain-parameter vector."""
        return MaterialParams(
            kappa=float(q[0]),
            g=float(q[1]),
            sigma_y=float(q[4]),
            n=self.n,
            k=self.k,
            b_r=float(q[2]),
            h_r=self.h_r,
            b_chi=float(q[3]),
            h_chi=self.h_chi,
        )


@dataclass(frozen=True)
class PceConfig:
    """Knobs of the chaos expansion, quadrature and posterior sampling."""

    degree: int = 2
    level: int = 3
    node_cap: float = 1e6
    kde_samples: int = 100000
    sample_seed: int = 43


def build_prior(spec, degree):
    """Joint prior PCE, one lognormal marginal per germ (m = 5)."""
    rows = [
        lognormal_pce(spec.means[i], spec.covs[i], i, degree, germs=5)
        for i in range(5)
    ]
    return make_pce(5, degree, np.vstack([r.coeffs for r in rows]))


def propagate_forward(prior, forward, rule):
    """Project forward-model outputs at quadrature nodes onto the basis.

    u^(alpha) = (1/alpha!) sum_j w_j forward(q(xi_j)) psi_alpha(xi_j).
    Noise is not added here; it enters the gain through C_eps only.
    """
    q_nodes = pce_evaluate_batch(prior, rule.nodes)
    if np.any(q_nodes <= 0.0):
        raise NonPositiveParameter(
            "a quadrature node produced a non-positive parameter; "
            "the truncated prior is expected to stay positive"
        )
    outputs = []
    n_z = None
    for j in range(rule.nodes.shape[0]):
        try:
            u = np.asarray(forward(q_nodes[j]), dtype=float)
        except Exception as exc:
            raise ForwardFailure(f"forward model failed at node {j}: {exc}") from exc
        if n_z is None:
            n_z = u.size
        elif u.size != n_z:
            raise ForwardFailure(
                f"forward output length changed at node {j}: {u.size} != {n_z}"
            )
        outputs.append(u)
    u_mat = np.vstack(outputs)
    psi = basis_matrix(prior.index_set, rule.nodes)
    coeffs = (psi * rule.weights[:, None]).T @ u_mat
    norms = np.array([factorial_norm(alpha) for alpha in prior.index_set])
    coeffs /= norms[:, None]
    return make_pce(prior.germs, prior.degree, coeffs.T)


def kalman_gain(c_qu, c_u, c_eps):
    """K = C_qu (C_u + C_eps)^(-1) via Cholesky, never an explicit inverse."""
    c_qu = np.atleast_2d(np.asarray(c_qu, dtype=float))
    s = np.asarray(c_u, dtype=float) + np.asarray(c_eps, dtype=float)
    s = 0.5 * (s + s.T)
    try:
        factor = cho_factor(s, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotSPD(f"innovation covariance is not positive definite: {exc}") from exc
    return cho_solve(factor, c_qu.T).T


def update_coefficients(q_f, u_f, k_gain, z_hat):
    """Column-wise linear update: mean column gets K(z_hat - u^(0)),
    higher columns get -K u^(alpha)."""
    if q_f.germs != u_f.germs or q_f.index_set != u_f.index_set:
        raise IndexMismatch("prior and forecast must share germs and index set")
    k_gain = np.atleast_2d(np.asarray(k_gain, dtype=float))
    z_hat = np.asarray(z_hat, dtype=float)
    coeffs = q_f.coeffs - k_gain @ u_f.coeffs
    coeffs[:, 0] = q_f.coeffs[:, 0] + k_gain @ (z_hat - u_f.coeffs[:, 0])
    return make_pce(q_f.germs, q_f.degree, coeffs)


def noise_coefficients(k_gain, c_eps_diag):
    """Degree-1 posterior coefficients on the measurement-noise germs."""
    return -np.atleast_2d(k_gain) * np.sqrt(np.asarray(c_eps_diag, dtype=float))[None, :]


def posterior_cov(posterior, noise_block):
    """Coefficient covariance including the noise-germ block."""
    return pce_cov(posterior, posterior) + noise_block @ noise_block.T


def _sqrt_spd(c):
    """Transposed matrix square root: x @ _sqrt_spd(C) has covariance C."""
    try:
        return np.linalg.cholesky(c).T
    except np.linalg.LinAlgError:
        w, u = np.linalg.eigh(c)
        return (u * np.sqrt(np.clip(w, 0.0, None))).T


@dataclass(frozen=True)
class IdentificationResult:
    """Prior and posterior chaos coefficients with summary statistics."""

    param_names: tuple
    truth: np.ndarray
    prior: PceVector
    posterior: PceVector
    noise_block: np.ndarray
    gain: np.ndarray
    prior_mean: np.ndarray
    prior_std: np.ndarray
    post_mean: np.ndarray
    post_std: np.ndarray
    z_hat: np.ndarray
    c_eps_diag: np.ndarray
    observations: "object"
    prior_samples: np.ndarray
    posterior_samples: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def identify(
    prior_spec,
    load_case,
    noise,
    truth,
    pce_config=PceConfig(),
    dt=0.01,
    n_obs=60,
    edge_length=1.0,
    local_tol=1e-8,
):
    """Full single-shot identification from one virtual experiment.

    Builds the lognormal prior PCE, synthesizes the noisy measurement from
    the truth run, propagates the prior through the experiment at tensor
    Gauss-Hermite nodes, applies the Kalman update to the coefficients and
    samples prior/posterior realizations for density estimates.
    """
    prior = build_prior(prior_spec, pce_config.degree)

    obs, traj = run_experiment(truth, load_case, dt, n_obs, edge_length, local_tol)
    z_hat, c_eps_diag = synthesize_measurement(obs, noise)
    fraction, count, transitions = outside_stats(outside_yield_flags(traj, truth))

    rule = gauss_hermite_rule(5, pce_config.level, cap=pce_config.node_cap)

    def forward(q):
        params = prior_spec.material_params(q)
        node_obs, _ = run_experiment(params, load_case, dt, n_obs, edge_length, local_tol)
        return node_obs.stacked

    u_f = propagate_forward(prior, forward, rule)

    c_qu = pce_cov(prior, u_f)
    c_u = pce_cov(u_f, u_f)
    c_f = pce_cov(prior, prior)
    gain = kalman_gain(c_qu, c_u, np.diag(c_eps_diag))
    posterior = update_coefficients(prior, u_f, gain, z_hat)
    noise_block = noise_coefficients(gain, c_eps_diag)
    c_a = posterior_cov(posterior, noise_block)

    rng = np.random.default_rng(pce_config.sample_seed)
    xi = rng.standard_normal((pce_config.kde_samples, 5))
    eta = rng.standard_normal((pce_config.kde_samples, 5))
    prior_samples = pce_evaluate_batch(prior, xi)
    # The noise germs enter the posterior linearly, so their sampled
    # contribution is Gaussian with covariance noise_block noise_block^T;
    # draw it through the 5x5 square root instead of n_z germs per sample.
    posterior_samples = pce_evaluate_batch(posterior, xi) + eta @ _sqrt_spd(
        noise_block @ noise_block.T
    )
    if np.any(posterior_samples <= 0.0):
        bad = [
            PARAM_NAMES[i]
            for i in range(5)
            if np.any(posterior_samples[:, i] <= 0.0)
        ]
        warnings.warn(
            f"posterior samples non-positive for: {', '.join(bad)}", stacklevel=2
        )

    return IdentificationResult(
        param_names=PARAM_NAMES,
        truth=np.array([truth.kappa, truth.g, truth.b_r, truth.b_chi, truth.sigma_y]),
        prior=prior,
        posterior=posterior,
        noise_block=noise_block,
        gain=gain,
        prior_mean=pce_mean(prior),
        prior_std=np.sqrt(np.diag(c_f)),
        post_mean=pce_mean(posterior),
        post_std=np.sqrt(np.diag(c_a)),
        z_hat=z_hat,
        c_eps_diag=c_eps_diag,
        observations=obs,
        prior_samples=prior_samples,
        posterior_samples=posterior_samples,
        diagnostics={
            "case": load_case.label,
            "degree": pce_config.degree,
            "level": pce_config.level,
            "n_nodes": int(rule.nodes.shape[0]),
            "n_obs": int(n_obs),
            "dt": dt,
            "edge_length": edge_length,
            "noise_seed": noise.seed,
            "relative_std": noise.relative_std,
            "absolute_floor": noise.absolute_floor,
            "sample_seed": pce_config.sample_seed,
            "kde_samples": pce_config.kde_samples,
            "outside_fraction": fraction,
            "outside_count": count,
            "outside_transitions": transitions,
        },
    )


def export_density_csvs(result, out_dir):
    """Per-parameter density CSVs on a 512-point grid (prior mean +- 5 std).

    Returns {parameter name: file path}.
    """
    paths = {}
    for i, name in enumerate(result.param_names):
        lo = result.prior_mean[i] - 5.0 * result.prior_std[i]
        hi = result.prior_mean[i] + 5.0 * result.prior_std[i]
        grid = np.linspace(lo, hi, 512)
        prior_d = kde_density(result.prior_samples[:, i], grid)
        post_d = kde_density(result.posterior_samples[:, i], grid)
        path = os.path.join(out_dir, f"density_{name}.csv")
        with open(path, "w") as fh:
            fh.write("value,prior_density,post_density\n")
            for v, a, b in zip(grid, prior_d, post_d):
                fh.write(f"{float(v)!r},{float(a)!r},{float(b)!r}\n")
        paths[name] = path
    return paths


def write_result_json(path, result, config_echo=None, file_refs=None):
    """Persist the identification summary as a JSON document."""
    doc = {
        "parameters": {
            name: {
                "true": float(result.truth[i]),
                "prior_mean": float(result.prior_mean[i]),
                "prior_std": float(result.prior_std[i]),
                "post_mean": float(result.post_mean[i]),
                "post_std": float(result.post_std[i]),
            }
            for i, name in enumerate(result.param_names)
        },
        "gain": result.gain.tolist(),
        "diagnostics": result.diagnostics,
        "config": config_echo or {},
        "files": file_refs or {},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_result_json(path):
    with open(path) as fh:
        return json.load(fh)
