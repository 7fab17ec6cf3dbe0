"""render_all: batch-render every figure a finished run directory supports.

Expected layout under <run_dir> (all parts optional, at least one needed):

    case1/, case2/                   identification outputs
        result.json, density_<param>.csv
    case1_simulate/, case2_simulate/ forward-simulation outputs
        load_path.csv, hysteresis.csv, principal.csv

All inputs are read and validated first; images are only written once
every input has parsed, so a bad run directory leaves no partial output.
Exit codes: 0 success, 1 missing or malformed inputs.
"""

from __future__ import annotations

import argparse
import os
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .io import (  # noqa: E402
    PARAM_ORDER,
    SchemaError,
    read_density,
    read_hysteresis,
    read_load_path,
    read_principal,
    read_result,
)
from .plots import (  # noqa: E402
    plot_density,
    plot_hysteresis,
    plot_load_path,
    plot_yield_cylinder,
)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="render_all",
        description="Render load-path, hysteresis, density and yield-cylinder figures "
        "from a finished run directory.",
    )
    parser.add_argument("run_dir", help="directory holding case*/ and case*_simulate/ outputs")
    parser.add_argument("--out", required=True, help="directory for the rendered images")
    parser.add_argument(
        "--format", choices=("png", "svg"), default="png", help="image format (default png)"
    )
    return parser


def collect_jobs(run_dir):
    """Parse every recognized input below run_dir.

    Returns a list of (figure_name, builder) pairs, where builder is a
    zero-argument callable producing a Figure.  Raises SchemaError if the
    directory offers nothing to render or any present input is invalid.
    """
    if not os.path.isdir(run_dir):
        raise SchemaError(f"run directory {run_dir!r} does not exist")
    jobs = []

    for case in (1, 2):
        sim_dir = os.path.join(run_dir, f"case{case}_simulate")
        if not os.path.isdir(sim_dir):
            continue
        load = read_load_path(os.path.join(sim_dir, "load_path.csv"))
        hyst = read_hysteresis(os.path.join(sim_dir, "hysteresis.csv"))
        principal = read_principal(os.path.join(sim_dir, "principal.csv"))
        label = load.label or f"case{case}"
        jobs.append((f"load_path_case{case}", lambda load=load: plot_load_path(load)))
        jobs.append(
            (
                f"hysteresis_case{case}",
                lambda hyst=hyst, label=label: plot_hysteresis(hyst, label=label),
            )
        )
        jobs.append(
            (
                f"cylinder_case{case}",
                lambda principal=principal, label=label: plot_yield_cylinder(
                    principal, label=label
                ),
            )
        )

    id_dirs = {}
    for case in (1, 2):
        id_dir = os.path.join(run_dir, f"case{case}")
        if os.path.isdir(id_dir):
            id_dirs[case] = id_dir
    if id_dirs:
        # densities from the richest available run: case 2 if present
        case = 2 if 2 in id_dirs else 1
        id_dir = id_dirs[case]
        doc = read_result(os.path.join(id_dir, "result.json"))
        case_label = doc["diagnostics"]["case"]
        for name in PARAM_ORDER:
            fname = doc["files"]["densities"][name]
            density = read_density(os.path.join(id_dir, fname))
            true_value = doc["parameters"][name]["true"]
            jobs.append(
                (
                    f"density_{name}",
                    lambda density=density, name=name, true_value=true_value, case_label=case_label: plot_density(
                        density, name, true_value, case_label=case_label
                    ),
                )
            )

    if not jobs:
        raise SchemaError(
            f"nothing to render under {run_dir!r}: expected case1/, case2/, "
            "case1_simulate/ or case2_simulate/"
        )
    return jobs


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        jobs = collect_jobs(args.run_dir)
    except SchemaError as exc:
        print(f"render_all: {exc}", file=sys.stderr)
        return 1
    os.makedirs(args.out, exist_ok=True)
    for name, builder in jobs:
        fig = builder()
        target = os.path.join(args.out, f"{name}.{args.format}")
        fig.savefig(target, dpi=150)
        plt.close(fig)
        print(f"wrote {target}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
