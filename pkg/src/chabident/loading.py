"""Cyclic load paths, virtual experiments and noisy measurement synthesis.

The specimen is idealized as a homogeneous material point: the applied
tractions map directly onto stress components (sigma33 = normal,
sigma13 = in-plane), and face displacements are strain times edge length.
Two load programs are provided: a constant-amplitude triangular wave and
the same wave under a linear ramp envelope that reaches the nominal
amplitude in the last cycle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .integrate import PiecewiseLinearStress, integrate_stress_driven
from .tensors import equivalent_stress

LOAD_COLUMNS = ["time_s", "f_normal_Pa", "f_inplane_Pa"]
OBS_COLUMNS = ["time_s", "u_normal_m", "u_inplane_m"]
MEASUREMENT_COLUMNS = OBS_COLUMNS + ["z_normal_m", "z_inplane_m"]
PRINCIPAL_COLUMNS = ["time_s", "s1_Pa", "s2_Pa", "s3_Pa", "cylinder_radius_Pa", "outside_yield"]


@dataclass(frozen=True)
class LoadPath:
    """Piecewise-linear traction history with a case label."""

    times: np.ndarray
    f_normal: np.ndarray
    f_inplane: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "f_normal", np.asarray(self.f_normal, dtype=float))
        object.__setattr__(self, "f_inplane", np.asarray(self.f_inplane, dtype=float))
        if self.times.ndim != 1 or self.times.size < 2:
            raise ValueError("need at least two knots")
        if self.times[0] != 0.0 or np.any(np.diff(self.times) <= 0.0):
            raise ValueError("knot times must increase strictly from 0")
        if self.f_normal.shape != self.times.shape or self.f_inplane.shape != self.times.shape:
            raise ValueError("component arrays must match the knot times")

    @property
    def segments(self):
        return list(zip(self.times, self.f_normal, self.f_inplane))

    @property
    def t_end(self):
        return float(self.times[-1])

    def value(self, t):
        """(f_normal, f_inplane) linearly interpolated at t."""
        return (
            np.interp(t, self.times, self.f_normal),
            np.interp(t, self.times, self.f_inplane),
        )

    def stress_path(self):
        values = np.zeros((self.times.size, 6))
        values[:, 2] = self.f_normal
        values[:, 4] = self.f_inplane
        return PiecewiseLinearStress(self.times, values)

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write(f"# label={self.label}\n")
            fh.write(",".join(LOAD_COLUMNS) + "\n")
            for t, fn, ft in zip(self.times, self.f_normal, self.f_inplane):
                fh.write(f"{float(t)!r},{float(fn)!r},{float(ft)!r}\n")

    @classmethod
    def from_csv(cls, path):
        label = ""
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    if line.startswith("# label="):
                        label = line.split("=", 1)[1]
                    continue
                if line.split(",")[0] == LOAD_COLUMNS[0]:
                    continue
                rows.append([float(v) for v in line.split(",")])
        data = np.array(rows)
        return cls(times=data[:, 0], f_normal=data[:, 1], f_inplane=data[:, 2], label=label)


def _validate_wave(amplitude_n, amplitude_t, period, n_cycles):
    if amplitude_n < 0.0 or amplitude_t < 0.0:
        raise ValueError("amplitudes must be non-negative")
    if period <= 0.0:
        raise ValueError(f"period must be positive, got {period!r}")
    if n_cycles < 1 or int(n_cycles) != n_cycles:
        raise ValueError(f"n_cycles must be a positive integer, got {n_cycles!r}")


def build_case1(amplitude_n, amplitude_t, period, n_cycles):
    """Triangular wave of constant amplitude: 0 -> +A -> -A -> 0 each cycle."""
    _validate_wave(amplitude_n, amplitude_t, period, n_cycles)
    n_cycles = int(n_cycles)
    times = [0.0]
    shape = [0.0]
    for c in range(n_cycles):
        t0 = c * period
        times += [t0 + 0.25 * period, t0 + 0.75 * period, t0 + period]
        shape += [1.0, -1.0, 0.0]
    shape = np.array(shape)
    return LoadPath(
        times=np.array(times),
        f_normal=amplitude_n * shape,
        f_inplane=amplitude_t * shape,
        label="case1",
    )


def build_case2(amplitude_n, amplitude_t, period, n_cycles, knots_per_quarter=25):
    """Case-1 wave scaled by the ramp t/(n_cycles*period).

    The ramp makes each segment quadratic in t, so the path is sampled on
    a sub-knot grid (aligned with the quarter-period kinks) and stored as
    its piecewise-linear interpolant.
    """
    _validate_wave(amplitude_n, amplitude_t, period, n_cycles)
    if knots_per_quarter < 1:
        raise ValueError("knots_per_quarter must be >= 1")
    n_cycles = int(n_cycles)
    base = build_case1(amplitude_n, amplitude_t, period, n_cycles)
    t_end = n_cycles * period
    times = np.linspace(0.0, t_end, 4 * knots_per_quarter * n_cycles + 1)
    envelope = times / t_end
    fn, ft = base.value(times)
    return LoadPath(
        times=times,
        f_normal=envelope * fn,
        f_inplane=envelope * ft,
        label="case2",
    )


def traction_to_stress(f_normal, f_inplane):
    """Homogeneous stress for tractions on the face with normal axis 3."""
    out = np.zeros(6)
    out[2] = f_normal
    out[4] = f_inplane
    return out


@dataclass(frozen=True)
class ObservationSet:
    """Clean displacement samples of the front face in two directions."""

    times: np.ndarray
    u_normal: np.ndarray
    u_inplane: np.ndarray

    @property
    def stacked(self):
        """Interleaved vector [u_n(t1), u_t(t1), u_n(t2), ...]."""
        return np.column_stack([self.u_normal, self.u_inplane]).ravel()

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write(",".join(OBS_COLUMNS) + "\n")
            for t, un, ut in zip(self.times, self.u_normal, self.u_inplane):
                fh.write(f"{float(t)!r},{float(un)!r},{float(ut)!r}\n")

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, comments="#", ndmin=2)
        return cls(times=data[:, 0], u_normal=data[:, 1], u_inplane=data[:, 2])


@dataclass(frozen=True)
class NoiseModel:
    """Additive Gaussian noise, std = relative_std * channel RMS + absolute_floor."""

    relative_std: float
    absolute_floor: float
    seed: int

    def channel_stds(self, obs):
        rms_n = float(np.sqrt(np.mean(obs.u_normal**2)))
        rms_t = float(np.sqrt(np.mean(obs.u_inplane**2)))
        std_n = self.relative_std * rms_n + self.absolute_floor
        std_t = self.relative_std * rms_t + self.absolute_floor
        if std_n <= 0.0 or std_t <= 0.0:
            raise ValueError("noise std must be positive; raise relative_std or absolute_floor")
        return std_n, std_t

    def covariance_diag(self, obs):
        """Diagonal of C_eps in the interleaved measurement ordering."""
        std_n, std_t = self.channel_stds(obs)
        diag = np.empty(2 * obs.times.size)
        diag[0::2] = std_n**2
        diag[1::2] = std_t**2
        return diag


def run_experiment(params, path, dt, n_obs, edge_length, local_tol=1e-8):
    """Integrate the point under the load path and sample displacements.

    Observation times are j*t_end/n_obs for j = 1..n_obs; they are merged
    into the store grid so the samples are exact trajectory states.
    Returns (ObservationSet, Trajectory).
    """
    if n_obs < 1:
        raise ValueError(f"n_obs must be >= 1, got {n_obs!r}")
    if edge_length <= 0.0:
        raise ValueError(f"edge_length must be positive, got {edge_length!r}")
    t_end = path.t_end
    obs_times = np.arange(1, n_obs + 1) * (t_end / n_obs)
    traj = integrate_stress_driven(
        params, path.stress_path(), dt, local_tol=local_tol, extra_times=obs_times
    )
    idx = np.searchsorted(traj.times, obs_times)
    idx = np.clip(idx, 0, traj.times.size - 1)
    left = np.maximum(idx - 1, 0)
    idx = np.where(
        np.abs(traj.times[left] - obs_times) < np.abs(traj.times[idx] - obs_times), left, idx
    )
    if not np.allclose(traj.times[idx], obs_times, rtol=0.0, atol=1e-9 * t_end):
        raise AssertionError("observation times missing from the store grid")
    obs = ObservationSet(
        times=obs_times,
        u_normal=traj.eps[idx, 2] * edge_length,
        u_inplane=2.0 * traj.eps[idx, 4] * edge_length,
    )
    return obs, traj


def synthesize_measurement(obs, noise):
    """Noisy measurement vector and its diagonal covariance.

    Returns (z_hat, c_eps_diag) in the interleaved channel ordering; the
    draw is reproducible from noise.seed.
    """
    if obs.times.size < 1:
        raise ValueError("observation set is empty")
    diag = noise.covariance_diag(obs)
    rng = np.random.default_rng(noise.seed)
    z_hat = obs.stacked + rng.standard_normal(diag.size) * np.sqrt(diag)
    return z_hat, diag


def measurement_to_csv(path, obs, z_hat, noise):
    z_n = z_hat[0::2]
    z_t = z_hat[1::2]
    with open(path, "w") as fh:
        fh.write(f"# seed={noise.seed} relative_std={noise.relative_std!r}\n")
        fh.write(",".join(MEASUREMENT_COLUMNS) + "\n")
        for i, t in enumerate(obs.times):
            row = [t, obs.u_normal[i], obs.u_inplane[i], z_n[i], z_t[i]]
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def measurement_from_csv(path):
    """Returns (ObservationSet, z_hat interleaved, seed, relative_std)."""
    seed = None
    relative_std = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    if tok.startswith("seed="):
                        seed = int(tok.split("=", 1)[1])
                    elif tok.startswith("relative_std="):
                        relative_std = float(tok.split("=", 1)[1])
                continue
            if line.split(",")[0] == MEASUREMENT_COLUMNS[0]:
                continue
            rows.append([float(v) for v in line.split(",")])
    data = np.array(rows)
    obs = ObservationSet(times=data[:, 0], u_normal=data[:, 1], u_inplane=data[:, 2])
    z_hat = np.column_stack([data[:, 3], data[:, 4]]).ravel()
    return obs, z_hat, seed, relative_std


def outside_yield_flags(traj, params):
    """Per-row flag: 1 where the over-stress is positive, else 0."""
    n = traj.times.size
    outside = np.empty(n, dtype=int)
    for i in range(n):
        seq = equivalent_stress(traj.sigma[i], traj.chi[i])
        outside[i] = 1 if seq - params.sigma_y - traj.r[i] > 0.0 else 0
    return outside


def outside_stats(flags):
    """(fraction, count, 0->1 transition count) of an outside-yield flag array."""
    count = int(flags.sum())
    fraction = count / flags.size
    transitions = int(np.sum((flags[1:] == 1) & (flags[:-1] == 0)))
    return fraction, count, transitions


def export_principal_trajectory(traj, params, path):
    """Principal stresses vs. the yield cylinder, one row per stored step.

    Writes s1 >= s2 >= s3, the cylinder radius sqrt(2/3)*(sigma_y + R),
    and outside_yield = 1 where the over-stress is positive.  The footer
    reports the outside fraction, the outside row count and the number of
    0 -> 1 transitions of the flag.  Returns (fraction, count, transitions).
    """
    n = traj.times.size
    mats = np.zeros((n, 3, 3))
    s = traj.sigma
    mats[:, 0, 0] = s[:, 0]
    mats[:, 1, 1] = s[:, 1]
    mats[:, 2, 2] = s[:, 2]
    mats[:, 0, 1] = mats[:, 1, 0] = s[:, 3]
    mats[:, 0, 2] = mats[:, 2, 0] = s[:, 4]
    mats[:, 1, 2] = mats[:, 2, 1] = s[:, 5]
    eig = np.linalg.eigvalsh(mats)[:, ::-1]
    radius = np.sqrt(2.0 / 3.0) * (params.sigma_y + traj.r)
    outside = outside_yield_flags(traj, params)
    fraction, count, transitions = outside_stats(outside)
    with open(path, "w") as fh:
        fh.write(",".join(PRINCIPAL_COLUMNS) + "\n")
        for i in range(n):
            fh.write(
                f"{float(traj.times[i])!r},{float(eig[i, 0])!r},{float(eig[i, 1])!r},"
                f"{float(eig[i, 2])!r},{float(radius[i])!r},{outside[i]}\n"
            )
        fh.write(
            f"# outside_fraction={fraction!r} outside_count={count} transitions={transitions}\n"
        )
    return fraction, count, transitions
