"""Figure builders: parsed run data in, matplotlib Figure out.

Each function renders one figure kind and returns the Figure so callers
decide where to save.  The yield surface is drawn as the von Mises
cylinder about the hydrostatic axis at the final-state radius
sqrt(2/3)*(sigma_y + R(t_end)), read from the principal CSV's last row.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import PARAM_LABELS  # noqa: E402


def plot_load_path(load):
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(load.times, load.f_normal, label="normal traction", lw=1.2)
    ax.plot(load.times, load.f_inplane, label="in-plane traction", lw=1.2)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("traction [Pa]")
    ax.set_title(f"applied load path ({load.label})" if load.label else "applied load path")
    ax.axhline(0.0, color="0.7", lw=0.6)
    ax.legend()
    fig.tight_layout()
    return fig


def plot_hysteresis(hyst, label=""):
    fig, (ax_n, ax_t) = plt.subplots(1, 2, figsize=(10, 4))
    ax_n.plot(hyst.u_normal, hyst.f_normal, lw=0.8)
    ax_n.set_xlabel("normal displacement [m]")
    ax_n.set_ylabel("normal traction [Pa]")
    ax_t.plot(hyst.u_inplane, hyst.f_inplane, lw=0.8, color="tab:orange")
    ax_t.set_xlabel("in-plane displacement [m]")
    ax_t.set_ylabel("in-plane traction [Pa]")
    title = "traction-displacement hysteresis"
    fig.suptitle(f"{title} ({label})" if label else title)
    fig.tight_layout()
    return fig


def plot_density(density, name, true_value, case_label=""):
    label, unit = PARAM_LABELS[name]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(density.values, density.prior_density, label="prior", lw=1.4)
    ax.plot(density.values, density.post_density, label="posterior", lw=1.4)
    ax.axvline(true_value, color="k", ls="--", lw=1.0, label="true value")
    ax.set_xlabel(f"{label} [{unit}]")
    ax.set_ylabel(f"density [1/{unit}]" if unit != "-" else "density [-]")
    title = f"identified PDF of {label}"
    ax.set_title(f"{title} ({case_label})" if case_label else title)
    ax.legend()
    fig.tight_layout()
    return fig


def plot_yield_cylinder(principal, label=""):
    """Principal-stress trajectory against the von Mises cylinder.

    The cylinder axis is the hydrostatic direction (1,1,1)/sqrt(3); its
    radius is the final-row cylinder_radius_Pa value.  Points outside the
    yield surface are drawn in a different color, and the title reports
    the outside fraction from the file footer.
    """
    pts = np.column_stack([principal.s1, principal.s2, principal.s3])
    fig = plt.figure(figsize=(7, 6))
    ax = fig.add_subplot(projection="3d")

    inside = principal.outside == 0
    ax.plot(pts[:, 0], pts[:, 1], pts[:, 2], color="0.6", lw=0.5, zorder=1)
    ax.scatter(*pts[inside].T, s=4, color="tab:blue", label="inside yield", zorder=2)
    if np.any(~inside):
        ax.scatter(*pts[~inside].T, s=4, color="tab:red", label="outside yield", zorder=3)

    radius = float(principal.radius[-1])
    axis = np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0)
    e1 = np.array([1.0, -1.0, 0.0]) / np.sqrt(2.0)
    e2 = np.array([1.0, 1.0, -2.0]) / np.sqrt(6.0)
    proj = pts @ axis
    span = np.linspace(proj.min() - 0.2 * radius, proj.max() + 0.2 * radius, 2)
    theta = np.linspace(0.0, 2.0 * np.pi, 60)
    tt, hh = np.meshgrid(theta, span)
    surf = (
        hh[..., None] * axis
        + radius * np.cos(tt)[..., None] * e1
        + radius * np.sin(tt)[..., None] * e2
    )
    ax.plot_surface(
        surf[..., 0], surf[..., 1], surf[..., 2], alpha=0.15, color="green", linewidth=0
    )

    ax.set_xlabel("s1 [Pa]")
    ax.set_ylabel("s2 [Pa]")
    ax.set_zlabel("s3 [Pa]")
    prefix = f"{label}: " if label else ""
    ax.set_title(
        f"{prefix}principal stresses vs. yield cylinder\n"
        f"outside fraction {principal.fraction:.4f} (radius at t_end)"
    )
    ax.legend(loc="upper left")
    fig.tight_layout()
    return fig
