"""Symmetric second-order tensor algebra in 6-component storage.

Tensors are stored as numpy arrays of shape (6,) with component order
[t11, t22, t33, t12, t13, t23].  Off-diagonal entries are the tensor
components themselves (not engineering-doubled), so the double
contraction carries weights (1, 1, 1, 2, 2, 2).
"""

from __future__ import annotations

import numpy as np

#: weights of the double contraction in 6-component storage
DDOT_WEIGHTS = np.array([1.0, 1.0, 1.0, 2.0, 2.0, 2.0])

#: second-order identity
IDENTITY = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])


class DegenerateDirection(Exception):
    """Flow direction is undefined: the relative stress sits on the hydrostatic axis."""


def sym(t11=0.0, t22=0.0, t33=0.0, t12=0.0, t13=0.0, t23=0.0):
    """Build a symmetric tensor from its six unique components."""
    return np.array([t11, t22, t33, t12, t13, t23], dtype=float)


def zero():
    return np.zeros(6)


def trace(t):
    return t[0] + t[1] + t[2]


def ddot(a, b):
    """Double contraction a : b, counting off-diagonal pairs twice."""
    return float(np.dot(DDOT_WEIGHTS * a, b))


def norm(t):
    """Frobenius norm induced by ddot."""
    return np.sqrt(max(ddot(t, t), 0.0))


def deviator(t):
    """Trace-free part of a tensor."""
    out = t.astype(float).copy()
    m = trace(t) / 3.0
    out[0] -= m
    out[1] -= m
    out[2] -= m
    return out


def equivalent_stress(sigma, chi):
    """Von Mises equivalent stress of the relative stress sigma - chi."""
    d = deviator(sigma - chi)
    return np.sqrt(max(1.5 * ddot(d, d), 0.0))


def flow_direction(sigma, chi, tol=0.0):
    """Normalized direction of viscoplastic flow, (3/2) dev(sigma - chi) / sigma_eq.

    Raises DegenerateDirection when the equivalent stress does not exceed
    ``tol``; callers that evaluate the direction only at positive
    over-stress pass a tolerance scaled to the yield stress.
    """
    d = deviator(sigma - chi)
    s_eq = np.sqrt(max(1.5 * ddot(d, d), 0.0))
    if s_eq <= tol or s_eq == 0.0:
        raise DegenerateDirection(
            f"equivalent stress {s_eq:.3e} at or below tolerance {tol:.3e}"
        )
    return 1.5 * d / s_eq


def to_matrix(t):
    """Expand 6-component storage to the full 3x3 symmetric matrix."""
    return np.array(
        [
            [t[0], t[3], t[4]],
            [t[3], t[1], t[5]],
            [t[4], t[5], t[2]],
        ]
    )


def principal_stresses(t):
    """Eigenvalues of the tensor, sorted descending."""
    return np.linalg.eigvalsh(to_matrix(t))[::-1]
