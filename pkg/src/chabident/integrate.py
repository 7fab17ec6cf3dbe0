"""Stress-driven time integration of the viscoplastic internal state.

The applied stress is piecewise linear in time.  Between its knots the
state advances with classical RK4 under step-doubling error control: each
step is taken once at full size and twice at half size, the Richardson
difference /15 estimates the local error of the half-step result, and the
step size adapts as 0.9 * err^(-1/5) clipped to [0.2, 2.0].

Elastic/plastic regime changes are located exactly rather than stepped
over, because the flow rule has a derivative kink at zero over-stress that
would otherwise degrade RK4 to second order.  While elastic the state is
frozen, so the yield-onset time solves a plain quadratic in closed form;
the return to elastic is bracketed by the sign of the over-stress and
polished with a root finder on the step propagator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .material import InternalState, _param_tuple, _rates

_COMPONENTS = ("11", "22", "33", "12", "13", "23")

TRAJECTORY_COLUMNS = (
    ["time_s"]
    + [f"sig{c}" for c in _COMPONENTS]
    + [f"eps{c}" for c in _COMPONENTS]
    + [f"epsvp{c}" for c in _COMPONENTS]
    + ["R_Pa"]
    + [f"chi{c}" for c in _COMPONENTS]
    + ["p"]
)


class StepRejected(Exception):
    """Step-size control shrank below the minimum allowed substep."""


class PiecewiseLinearStress:
    """Applied stress history, linear between knots.

    ``times`` must start at 0 and increase strictly; ``values`` is the
    matching (n, 6) array of symmetric stress tensors.
    """

    def __init__(self, times, values):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise ValueError("need at least two knots")
        if values.shape != (times.size, 6):
            raise ValueError(f"values shape {values.shape} does not match {times.size} knots")
        if times[0] != 0.0:
            raise ValueError(f"history must start at t=0, got {times[0]!r}")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("knot times must increase strictly")
        self.times = times
        self.values = values

    @property
    def t_end(self):
        return float(self.times[-1])

    def value(self, t):
        """Stress tensor at time t, clamped to the definition range."""
        t = np.asarray(t, dtype=float)
        out = np.empty(t.shape + (6,))
        for j in range(6):
            out[..., j] = np.interp(t, self.times, self.values[:, j])
        return out


@dataclass
class Trajectory:
    """Time-sampled response: stress, strains, hardening state, transitions."""

    times: np.ndarray
    sigma: np.ndarray
    eps: np.ndarray
    eps_vp: np.ndarray
    r: np.ndarray
    chi: np.ndarray
    p: np.ndarray
    transitions: int
    transition_times: np.ndarray

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write(",".join(TRAJECTORY_COLUMNS) + "\n")
            for i in range(self.times.size):
                row = (
                    [self.times[i]]
                    + list(self.sigma[i])
                    + list(self.eps[i])
                    + list(self.eps_vp[i])
                    + [self.r[i]]
                    + list(self.chi[i])
                    + [self.p[i]]
                )
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
            fh.write(f"# transitions={self.transitions}\n")
            fh.write(
                "# transition_times="
                + ";".join(repr(float(t)) for t in self.transition_times)
                + "\n"
            )

    @classmethod
    def from_csv(cls, path):
        transitions = 0
        transition_times = []
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            if header != TRAJECTORY_COLUMNS:
                raise ValueError(f"unexpected trajectory columns in {path}")
            rows = []
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    if line.startswith("# transitions="):
                        transitions = int(line.split("=", 1)[1])
                    elif line.startswith("# transition_times="):
                        tail = line.split("=", 1)[1]
                        if tail:
                            transition_times = [float(v) for v in tail.split(";")]
                    continue
                rows.append([float(v) for v in line.split(",")])
        data = np.array(rows)
        return cls(
            times=data[:, 0],
            sigma=data[:, 1:7],
            eps=data[:, 7:13],
            eps_vp=data[:, 13:19],
            r=data[:, 19],
            chi=data[:, 20:26],
            p=data[:, 26],
            transitions=transitions,
            transition_times=np.array(transition_times),
        )


def _merge_times(stress_path, dt, extra_times):
    """Store grid at spacing ~dt, merged with knots and requested times."""
    t_end = stress_path.t_end
    n = int(round(t_end / dt))
    if n < 1:
        raise ValueError(f"dt={dt!r} exceeds the load duration {t_end!r}")
    grid = np.linspace(0.0, t_end, n + 1)
    extra = np.asarray(extra_times, dtype=float)
    if extra.size and (extra.min() < 0.0 or extra.max() > t_end * (1.0 + 1e-12)):
        raise ValueError("requested times fall outside the load duration")
    merged = np.sort(np.concatenate([grid, stress_path.times, extra]))
    keep = np.concatenate([[True], np.diff(merged) > 1e-9 * t_end])
    return merged[keep]


def _overstress_at(sig, y, sigma_y):
    e11 = sig[0] - y[7]
    e22 = sig[1] - y[8]
    e33 = sig[2] - y[9]
    m = (e11 + e22 + e33) / 3.0
    d11 = e11 - m
    d22 = e22 - m
    d33 = e33 - m
    d12 = sig[3] - y[10]
    d13 = sig[4] - y[11]
    d23 = sig[5] - y[12]
    seq2 = 1.5 * (
        d11 * d11 + d22 * d22 + d33 * d33 + 2.0 * (d12 * d12 + d13 * d13 + d23 * d23)
    )
    return math.sqrt(seq2) - sigma_y - y[6]


def _rk4(sa, sm, se, y, h, par):
    k1 = _rates(sa, y, par)
    h2 = 0.5 * h
    y1 = tuple(y[i] + h2 * k1[i] for i in range(14))
    k2 = _rates(sm, y1, par)
    y2 = tuple(y[i] + h2 * k2[i] for i in range(14))
    k3 = _rates(sm, y2, par)
    y3 = tuple(y[i] + h * k3[i] for i in range(14))
    k4 = _rates(se, y3, par)
    h6 = h / 6.0
    return tuple(y[i] + h6 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]) for i in range(14))


def _onset_time(sig, slope_dev, a_coef, y, sigma_y):
    """Time until the frozen elastic state reaches the yield surface.

    Solves |dev(sigma + s*slope - chi)|_eq^2 = (sigma_y + R)^2 for the
    upward crossing; returns math.inf when the segment never crosses.
    """
    e11 = sig[0] - y[7]
    e22 = sig[1] - y[8]
    e33 = sig[2] - y[9]
    m = (e11 + e22 + e33) / 3.0
    d11 = e11 - m
    d22 = e22 - m
    d33 = e33 - m
    d12 = sig[3] - y[10]
    d13 = sig[4] - y[11]
    d23 = sig[5] - y[12]
    yld = sigma_y + y[6]
    c = (
        1.5
        * (d11 * d11 + d22 * d22 + d33 * d33 + 2.0 * (d12 * d12 + d13 * d13 + d23 * d23))
        - yld * yld
    )
    b = 3.0 * (
        d11 * slope_dev[0]
        + d22 * slope_dev[1]
        + d33 * slope_dev[2]
        + 2.0 * (d12 * slope_dev[3] + d13 * slope_dev[4] + d23 * slope_dev[5])
    )
    # Already on the surface and heading outward: yield immediately.
    if c > -yld * yld * 1e-12 and b > 0.0:
        return 0.0
    if a_coef <= 0.0:
        # Deviatorically constant stress: the gap never closes.
        return math.inf
    disc = b * b - 4.0 * a_coef * c
    if disc < 0.0:
        return math.inf
    sq = math.sqrt(disc)
    if b > 0.0:
        s = -2.0 * c / (b + sq)
    else:
        s = (sq - b) / (2.0 * a_coef)
    return s if s > 0.0 else math.inf


def integrate_stress_driven(
    params,
    stress_path,
    dt,
    local_tol=1e-8,
    extra_times=(),
    min_substep_factor=1e-6,
):
    """Integrate the internal state from rest under the given stress history.

    Returns a Trajectory sampled on the union of the uniform store grid
    (spacing ~dt), the stress knots and ``extra_times``.  Raises
    StepRejected if error control pushes a substep below
    dt * min_substep_factor.
    """
    par = _param_tuple(params)
    sigma_y = params.sigma_y
    strain_ref = sigma_y / (2.0 * params.g)
    refs = (strain_ref,) * 6 + (sigma_y,) * 7 + (1.0,)

    t_store = _merge_times(stress_path, dt, extra_times)
    n_rows = t_store.size
    sig_rows = stress_path.value(t_store)
    sig_list = [tuple(row) for row in sig_rows.tolist()]
    slope_list = []
    for i in range(n_rows - 1):
        w = t_store[i + 1] - t_store[i]
        slope_list.append(
            tuple((sig_rows[i + 1, j] - sig_rows[i, j]) / w for j in range(6))
        )

    state_rows = np.empty((n_rows, 14))
    y = (0.0,) * 14
    state_rows[0] = y
    plastic = _overstress_at(sig_list[0], y, sigma_y) > 0.0
    transitions = []
    h_min = dt * min_substep_factor
    h_sug = dt

    for i in range(n_rows - 1):
        t0 = t_store[i]
        t1 = t_store[i + 1]
        seg = t1 - t0
        sig0 = sig_list[i]
        slope = slope_list[i]
        sm_full = (slope[0] + slope[1] + slope[2]) / 3.0
        slope_dev = (
            slope[0] - sm_full,
            slope[1] - sm_full,
            slope[2] - sm_full,
            slope[3],
            slope[4],
            slope[5],
        )
        a_coef = 1.5 * (
            slope_dev[0] ** 2
            + slope_dev[1] ** 2
            + slope_dev[2] ** 2
            + 2.0 * (slope_dev[3] ** 2 + slope_dev[4] ** 2 + slope_dev[5] ** 2)
        )

        def sig_at(tau):
            return (
                sig0[0] + tau * slope[0],
                sig0[1] + tau * slope[1],
                sig0[2] + tau * slope[2],
                sig0[3] + tau * slope[3],
                sig0[4] + tau * slope[4],
                sig0[5] + tau * slope[5],
            )

        tau = 0.0
        while tau < seg:
            if not plastic:
                s_hit = _onset_time(sig_at(tau), slope_dev, a_coef, y, sigma_y)
                if s_hit > seg - tau:
                    tau = seg
                else:
                    tau += s_hit
                    plastic = True
                    transitions.append(t0 + tau)
                continue

            h = min(h_sug, seg - tau)
            while True:
                sa = sig_at(tau)
                sm = sig_at(tau + 0.5 * h)
                se = sig_at(tau + h)
                y_full = _rk4(sa, sm, se, y, h, par)
                y_h1 = _rk4(sa, sig_at(tau + 0.25 * h), sm, y, 0.5 * h, par)
                y_new = _rk4(sm, sig_at(tau + 0.75 * h), se, y_h1, 0.5 * h, par)
                err = 0.0
                for j in range(14):
                    e = abs(y_new[j] - y_full[j]) / (15.0 * local_tol * (refs[j] + abs(y[j])))
                    if e > err:
                        err = e
                if err <= 1.0:
                    break
                h *= min(max(0.9 * err ** -0.2, 0.2), 2.0)
                if h < h_min:
                    raise StepRejected(
                        f"substep {h!r} below minimum {h_min!r} at t={t0 + tau!r}"
                    )

            if _overstress_at(se, y_new, sigma_y) < 0.0 < _overstress_at(sa, y, sigma_y):
                # Left the plastic regime inside this step: polish the
                # crossing with the same two-half-step propagator.
                tau_at = tau

                def g(s):
                    mid = sig_at(tau_at + 0.5 * s)
                    y_a = _rk4(
                        sig_at(tau_at), sig_at(tau_at + 0.25 * s), mid, y, 0.5 * s, par
                    )
                    y_b = _rk4(
                        mid, sig_at(tau_at + 0.75 * s), sig_at(tau_at + s), y_a, 0.5 * s, par
                    )
                    return _overstress_at(sig_at(tau_at + s), y_b, sigma_y)

                s_exit = brentq(g, 0.0, h, xtol=max(h * 1e-12, 5e-324))
                mid = sig_at(tau + 0.5 * s_exit)
                y_a = _rk4(sig_at(tau), sig_at(tau + 0.25 * s_exit), mid, y, 0.5 * s_exit, par)
                y = _rk4(
                    mid, sig_at(tau + 0.75 * s_exit), sig_at(tau + s_exit), y_a, 0.5 * s_exit, par
                )
                tau += s_exit
                plastic = False
                transitions.append(t0 + tau)
            else:
                y = y_new
                tau += h
                h_sug = h * min(max(0.9 * err ** -0.2 if err > 0.0 else 2.0, 0.2), 2.0)

        state_rows[i + 1] = y

    eps_vp = state_rows[:, 0:6]
    r = state_rows[:, 6]
    chi = state_rows[:, 7:13]
    p = state_rows[:, 13]
    tr = sig_rows[:, 0] + sig_rows[:, 1] + sig_rows[:, 2]
    eps_e = sig_rows.copy()
    eps_e[:, 0:3] -= (tr / 3.0)[:, None]
    eps_e /= 2.0 * params.g
    eps_e[:, 0:3] += (tr / (9.0 * params.kappa))[:, None]
    return Trajectory(
        times=t_store,
        sigma=sig_rows,
        eps=eps_e + eps_vp,
        eps_vp=eps_vp,
        r=r,
        chi=chi,
        p=p,
        transitions=len(transitions),
        transition_times=np.array(transitions),
    )


def final_state(trajectory):
    """InternalState at the last stored time."""
    return InternalState(
        eps_vp=trajectory.eps_vp[-1].copy(),
        r=float(trajectory.r[-1]),
        chi=trajectory.chi[-1].copy(),
        p=float(trajectory.p[-1]),
    )


__all__ = [
    "PiecewiseLinearStress",
    "Trajectory",
    "StepRejected",
    "TRAJECTORY_COLUMNS",
    "integrate_stress_driven",
    "final_state",
]
