"""Chaboche constitutive model for a stress-driven material point.

Combined isotropic/kinematic hardening viscoplasticity: a scalar drag
stress R grows toward its asymptote h_r, a deviatoric back-stress chi
saturates toward an equivalent-stress magnitude h_chi, and the plastic
multiplier rate follows a Norton-type over-stress power law.  Rates are
expressed per second with an implicit unit reference time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tensors
from .tensors import DegenerateDirection, deviator, equivalent_stress, flow_direction


@dataclass(frozen=True)
class MaterialParams:
    """The nine material constants.

    kappa, g are bulk and shear modulus [Pa]; sigma_y the yield stress [Pa];
    n, k the flow-rule exponent [-] and drag stress [Pa]; b_r, h_r the
    isotropic hardening speed [-] and asymptote [Pa]; b_chi, h_chi the
    kinematic counterparts.
    """

    kappa: float
    g: float
    sigma_y: float
    n: float
    k: float
    b_r: float
    h_r: float
    b_chi: float
    h_chi: float

    def __post_init__(self):
        for name in ("kappa", "g", "sigma_y", "k"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.n < 1.0:
            raise ValueError(f"n must be >= 1, got {self.n!r}")
        for name in ("b_r", "h_r", "b_chi", "h_chi"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)!r}")

    @property
    def young_modulus(self):
        """Uniaxial elastic modulus 9*kappa*g / (3*kappa + g)."""
        return 9.0 * self.kappa * self.g / (3.0 * self.kappa + self.g)


@dataclass(frozen=True)
class InternalState:
    """Viscoplastic strain, isotropic hardening, back-stress, accumulated plastic strain."""

    eps_vp: np.ndarray = field(default_factory=tensors.zero)
    r: float = 0.0
    chi: np.ndarray = field(default_factory=tensors.zero)
    p: float = 0.0


@dataclass(frozen=True)
class RateBundle:
    """Time derivatives of the internal state; all zero at non-positive over-stress."""

    d_eps_vp: np.ndarray
    d_r: float
    d_chi: np.ndarray
    d_p: float


def overstress(sigma_eq, r, sigma_y):
    """Excess of equivalent stress beyond the current yield radius (may be negative)."""
    return sigma_eq - sigma_y - r


def plastic_multiplier_rate(sigma_ex, k, n):
    """Norton over-stress law <sigma_ex / k>^n, per second."""
    if sigma_ex <= 0.0:
        return 0.0
    return (sigma_ex / k) ** n


def hooke_apply(params, eps_e):
    """Isotropic Hooke's law: sigma = kappa tr(eps_e) I + 2 g dev(eps_e)."""
    return params.kappa * tensors.trace(eps_e) * tensors.IDENTITY + 2.0 * params.g * deviator(eps_e)


def hooke_inverse(params, sigma):
    """Elastic strain for a given stress (exact inverse of hooke_apply)."""
    return (tensors.trace(sigma) / (9.0 * params.kappa)) * tensors.IDENTITY + deviator(sigma) / (
        2.0 * params.g
    )


def _rates(sig, y, par):
    """Scalar-kernel form of the state rates, used by the time integrator.

    ``sig`` is a 6-tuple of stress components, ``y`` the 14-tuple state
    (eps_vp[6], r, chi[6], p) and ``par`` the tuple
    (sigma_y, n, k, b_r, h_r, b_chi, h_chi).  Returns the 14-tuple of rates.
    """
    s11, s22, s33, s12, s13, s23 = sig
    r = y[6]
    c11, c22, c33, c12, c13, c23 = y[7], y[8], y[9], y[10], y[11], y[12]
    sigma_y, n, k, b_r, h_r, b_chi, h_chi = par

    e11 = s11 - c11
    e22 = s22 - c22
    e33 = s33 - c33
    m = (e11 + e22 + e33) / 3.0
    d11 = e11 - m
    d22 = e22 - m
    d33 = e33 - m
    d12 = s12 - c12
    d13 = s13 - c13
    d23 = s23 - c23

    seq = (
        1.5 * (d11 * d11 + d22 * d22 + d33 * d33 + 2.0 * (d12 * d12 + d13 * d13 + d23 * d23))
    ) ** 0.5
    sex = seq - sigma_y - r
    if sex <= 0.0:
        return _ZERO14

    dp = (sex / k) ** n
    # direction = 1.5 d / seq; seq > sigma_y > 0 whenever sex > 0
    cd = 1.5 * dp / seq
    ck = b_chi * dp
    cs = h_chi / seq
    return (
        cd * d11,
        cd * d22,
        cd * d33,
        cd * d12,
        cd * d13,
        cd * d23,
        b_r * (h_r - r) * dp,
        ck * (cs * d11 - c11),
        ck * (cs * d22 - c22),
        ck * (cs * d33 - c33),
        ck * (cs * d12 - c12),
        ck * (cs * d13 - c13),
        ck * (cs * d23 - c23),
        dp,
    )


_ZERO14 = (0.0,) * 14


def _param_tuple(params):
    return (
        params.sigma_y,
        params.n,
        params.k,
        params.b_r,
        params.h_r,
        params.b_chi,
        params.h_chi,
    )


def state_rates(params, sigma, state):
    """Evolution rates of the internal state under the given stress.

    All rates vanish when the over-stress is non-positive; the flow
    direction is never evaluated in that case.
    """
    y = (*state.eps_vp, state.r, *state.chi, state.p)
    out = _rates(tuple(sigma), y, _param_tuple(params))
    return RateBundle(
        d_eps_vp=np.array(out[0:6]),
        d_r=out[6],
        d_chi=np.array(out[7:13]),
        d_p=out[13],
    )
