"""Multivariate Hermite polynomial chaos on standard Gaussian germs.

Basis functions are products of probabilists' Hermite polynomials He_n,
orthogonal under the standard normal measure with squared norm alpha!
(product of exponent factorials).  Multi-indices are ordered graded
lexicographically so coefficient files are deterministic and index sets
of lower degree are prefixes of higher-degree ones.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite_e import hermegauss


class CapExceeded(Exception):
    """Tensor quadrature would exceed the configured node budget."""


class IndexMismatch(Exception):
    """Two PCE vectors do not share germ count and index set."""


class DegenerateSample(Exception):
    """Kernel density requested for a sample with zero spread."""


def multi_index_set(m, p):
    """All multi-indices over m germs with total degree <= p, graded-lex."""
    if m < 1:
        raise ValueError(f"need at least one germ, got {m!r}")
    if p < 0:
        raise ValueError(f"degree must be non-negative, got {p!r}")
    found = [
        alpha
        for alpha in itertools.product(range(p + 1), repeat=m)
        if sum(alpha) <= p
    ]
    found.sort(key=lambda alpha: (sum(alpha), [-a for a in alpha]))
    return tuple(found)


def factorial_norm(alpha):
    """alpha! = product of exponent factorials; the squared basis norm."""
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return float(out)


def _he_table(x, pmax):
    """He_0..He_pmax at each entry of x, via the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    table = np.empty(x.shape + (pmax + 1,))
    table[..., 0] = 1.0
    if pmax >= 1:
        table[..., 1] = x
    for n in range(1, pmax):
        table[..., n + 1] = x * table[..., n] - n * table[..., n - 1]
    return table


def hermite_eval(alpha, xi):
    """Product of He_{alpha_d}(xi_d) over dimensions."""
    xi = np.asarray(xi, dtype=float).ravel()
    if len(alpha) != xi.size:
        raise ValueError(f"index has {len(alpha)} entries but point has {xi.size}")
    out = 1.0
    for a, x in zip(alpha, xi):
        table = _he_table(np.array([x]), a)
        out *= table[0, a]
    return float(out)


@dataclass(frozen=True)
class PceVector:
    """Vector-valued PCE: one coefficient column per multi-index."""

    germs: int
    degree: int
    index_set: tuple
    coeffs: np.ndarray

    def __post_init__(self):
        expected = multi_index_set(self.germs, self.degree)
        if self.index_set != expected:
            raise ValueError("index set must be the full graded-lex set for (germs, degree)")
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.ndim != 2 or coeffs.shape[1] != len(self.index_set):
            raise ValueError(
                f"coefficients shape {coeffs.shape} does not match {len(self.index_set)} indices"
            )
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def dim(self):
        return self.coeffs.shape[0]


def make_pce(germs, degree, coeffs):
    return PceVector(
        germs=germs,
        degree=degree,
        index_set=multi_index_set(germs, degree),
        coeffs=coeffs,
    )


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor Gauss-Hermite nodes/weights for the standard normal measure."""

    nodes: np.ndarray
    weights: np.ndarray


def gauss_hermite_rule(m, level, cap=1e6):
    """Full tensor product of the 1-D probabilists' Gauss-Hermite rule.

    A level-q rule integrates polynomials of per-dimension degree
    <= 2q - 1 exactly.  Raises CapExceeded when level**m > cap.
    """
    if level < 1:
        raise ValueError(f"level must be >= 1, got {level!r}")
    if float(level) ** m > cap:
        raise CapExceeded(f"{level}^{m} nodes exceed the cap of {cap:g}")
    x1, w1 = hermegauss(level)
    w1 = w1 / math.sqrt(2.0 * math.pi)
    grids = np.meshgrid(*([x1] * m), indexing="ij")
    nodes = np.column_stack([g.ravel() for g in grids])
    wgrids = np.meshgrid(*([w1] * m), indexing="ij")
    weights = np.ones(level**m)
    for g in wgrids:
        weights = weights * g.ravel()
    return QuadratureRule(nodes=nodes, weights=weights)


def basis_matrix(index_set, xi):
    """Matrix of psi_alpha(xi_j): rows over points, columns over indices."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    m = xi.shape[1]
    idx = np.asarray(index_set, dtype=int)
    if idx.shape[1] != m:
        raise ValueError(f"indices have {idx.shape[1]} germs but points have {m}")
    pmax = int(idx.max()) if idx.size else 0
    out = np.ones((xi.shape[0], idx.shape[0]))
    for d in range(m):
        table = _he_table(xi[:, d], pmax)
        out *= table[:, idx[:, d]]
    return out


def lognormal_pce(mean, cov, germ_index, degree, germs):
    """Degree-truncated PCE of a lognormal variable on a single germ.

    The variable is exp(mu_g + sigma_g * xi) with sigma_g = sqrt(ln(1+cov^2))
    and mu_g = ln(mean) - sigma_g^2/2; its He_j coefficient on the chosen
    germ is mean * sigma_g^j / j!.
    """
    if mean <= 0.0:
        raise ValueError(f"mean must be positive, got {mean!r}")
    if cov < 0.0:
        raise ValueError(f"cov must be non-negative, got {cov!r}")
    if not 0 <= germ_index < germs:
        raise ValueError(f"germ_index {germ_index} outside 0..{germs - 1}")
    sigma_g = math.sqrt(math.log1p(cov * cov))
    index_set = multi_index_set(germs, degree)
    coeffs = np.zeros((1, len(index_set)))
    for i, alpha in enumerate(index_set):
        j = alpha[germ_index]
        if sum(alpha) == j:
            coeffs[0, i] = mean * sigma_g**j / math.factorial(j)
    return PceVector(germs=germs, degree=degree, index_set=index_set, coeffs=coeffs)


def pce_mean(v):
    """Expectation: the zero-index coefficient column."""
    return v.coeffs[:, 0].copy()


def pce_cov(a, b):
    """Cross-covariance from coefficients: sum over alpha>0 of alpha! a b^T."""
    if a.germs != b.germs or a.index_set != b.index_set:
        raise IndexMismatch("PCE vectors must share germs and index set")
    norms = np.array([factorial_norm(alpha) for alpha in a.index_set[1:]])
    return (a.coeffs[:, 1:] * norms) @ b.coeffs[:, 1:].T


def pce_evaluate(v, xi):
    """Realization of the PCE at one germ point."""
    return pce_evaluate_batch(v, np.asarray(xi, dtype=float)[None, :])[0]


def pce_evaluate_batch(v, xi):
    """Realizations at many germ points; rows of xi are points."""
    return basis_matrix(v.index_set, xi) @ v.coeffs.T


def kde_density(samples, grid):
    """Gaussian kernel density with the Silverman bandwidth 1.06 std n^(-1/5)."""
    samples = np.asarray(samples, dtype=float).ravel()
    grid = np.asarray(grid, dtype=float).ravel()
    n = samples.size
    if n < 100:
        raise ValueError(f"need at least 100 samples, got {n}")
    std = float(np.std(samples, ddof=1))
    if std == 0.0:
        raise DegenerateSample("sample standard deviation is zero")
    h = 1.06 * std * n ** (-1.0 / 5.0)
    out = np.empty(grid.size)
    norm = 1.0 / (n * h * math.sqrt(2.0 * math.pi))
    block = max(1, int(2e7) // n)
    for lo in range(0, grid.size, block):
        hi = min(lo + block, grid.size)
        z = (grid[lo:hi, None] - samples[None, :]) / h
        out[lo:hi] = norm * np.exp(-0.5 * z * z).sum(axis=1)
    return out


def save_pce(v, path):
    """CSV with alpha columns then coefficient columns, graded-lex rows."""
    header = [f"alpha_{d + 1}" for d in range(v.germs)] + [
        f"coef_{i + 1}" for i in range(v.dim)
    ]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for i, alpha in enumerate(v.index_set):
            cells = [str(a) for a in alpha] + [repr(float(c)) for c in v.coeffs[:, i]]
            fh.write(",".join(cells) + "\n")


def load_pce(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        m = sum(1 for name in header if name.startswith("alpha_"))
        dim = sum(1 for name in header if name.startswith("coef_"))
        if m + dim != len(header) or m < 1 or dim < 1:
            raise ValueError(f"unexpected PCE header in {path}")
        alphas = []
        coeffs = []
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cells = line.split(",")
            alphas.append(tuple(int(c) for c in cells[:m]))
            coeffs.append([float(c) for c in cells[m:]])
    degree = max(sum(alpha) for alpha in alphas)
    expected = multi_index_set(m, degree)
    if tuple(alphas) != expected:
        raise ValueError(
            f"index rows in {path} are not the full graded-lex set for degree {degree}"
        )
    return PceVector(
        germs=m,
        degree=degree,
        index_set=expected,
        coeffs=np.array(coeffs).T,
    )
