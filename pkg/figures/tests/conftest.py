import json

import numpy as np
import pytest

PARAMS = {
    "kappa": 1.66e9,
    "g": 7.69e8,
    "b_r": 50.0,
    "b_chi": 50.0,
    "sigma_y": 1.7e8,
}


def write_load_path(path, label, scale=1.0):
    times = np.linspace(0.0, 4.0, 17)
    wave = np.sin(np.pi * times / 2.0)
    with open(path, "w") as fh:
        fh.write(f"# label={label}\n")
        fh.write("time_s,f_normal_Pa,f_inplane_Pa\n")
        for t, w in zip(times, wave):
            fh.write(f"{float(t)!r},{float(scale * 2.0e8 * w)!r},{float(scale * 1.0e8 * w)!r}\n")


def write_hysteresis(path):
    times = np.linspace(0.0, 4.0, 33)
    f = 2.0e8 * np.sin(np.pi * times / 2.0)
    u = 1.0e-4 * np.sin(np.pi * times / 2.0 - 0.3)
    with open(path, "w") as fh:
        fh.write("time_s,f_normal_Pa,f_inplane_Pa,u_normal_m,u_inplane_m\n")
        for i in range(times.size):
            fh.write(f"{float(times[i])!r},{float(f[i])!r},{float(0.5 * f[i])!r},"
                f"{float(u[i])!r},{float(0.4 * u[i])!r}\n")


def write_principal(path, fraction, radius=1.5e8):
    n = 40
    times = np.linspace(0.0, 4.0, n)
    s1 = 2.0e8 * np.abs(np.sin(np.pi * times / 2.0))
    s2 = 0.3 * s1
    s3 = np.zeros(n)
    n_out = int(round(fraction * n))
    outside = np.zeros(n, dtype=int)
    outside[:n_out] = 1
    count = int(outside.sum())
    transitions = int(np.sum((outside[1:] == 1) & (outside[:-1] == 0)) + (outside[0] == 1))
    with open(path, "w") as fh:
        fh.write("time_s,s1_Pa,s2_Pa,s3_Pa,cylinder_radius_Pa,outside_yield\n")
        for i in range(n):
            fh.write(f"{float(times[i])!r},{float(s1[i])!r},{float(s2[i])!r},"
                f"{float(s3[i])!r},{float(radius)!r},{outside[i]}\n")
        fh.write(
            f"# outside_fraction={count / n!r} outside_count={count} "
            f"transitions={transitions}\n"
        )
    return count / n


def write_density(path, mean, prior_std, post_std):
    grid = np.linspace(mean - 4.0 * prior_std, mean + 4.0 * prior_std, 101)

    def pdf(x, s):
        return np.exp(-0.5 * ((x - mean) / s) ** 2) / (s * np.sqrt(2.0 * np.pi))

    with open(path, "w") as fh:
        fh.write("value,prior_density,post_density\n")
        for x in grid:
            fh.write(f"{float(x)!r},{float(pdf(x, prior_std))!r},{float(pdf(x, post_std))!r}\n")


def write_identify_dir(case_dir, case_label):
    case_dir.mkdir(parents=True, exist_ok=True)
    densities = {}
    parameters = {}
    for name, true in PARAMS.items():
        prior_std = 0.15 * true
        post_std = 0.02 * true
        fname = f"density_{name}.csv"
        write_density(case_dir / fname, true, prior_std, post_std)
        densities[name] = fname
        parameters[name] = {
            "true": true,
            "prior_mean": 1.2 * true,
            "prior_std": prior_std,
            "post_mean": 1.01 * true,
            "post_std": post_std,
        }
    doc = {
        "parameters": parameters,
        "diagnostics": {"case": case_label},
        "files": {"densities": densities},
    }
    (case_dir / "result.json").write_text(json.dumps(doc, indent=2))


def write_simulate_dir(sim_dir, label, fraction, scale=1.0):
    sim_dir.mkdir(parents=True, exist_ok=True)
    write_load_path(sim_dir / "load_path.csv", label, scale=scale)
    write_hysteresis(sim_dir / "hysteresis.csv")
    write_principal(sim_dir / "principal.csv", fraction)


@pytest.fixture
def run_dir(tmp_path):
    """Both cases, simulate + identify outputs; case 2 has the larger
    outside-yield fraction."""
    root = tmp_path / "runs"
    write_simulate_dir(root / "case1_simulate", "case1", fraction=0.10)
    write_simulate_dir(root / "case2_simulate", "case2", fraction=0.30, scale=1.5)
    write_identify_dir(root / "case1", "case1")
    write_identify_dir(root / "case2", "case2")
    return root
