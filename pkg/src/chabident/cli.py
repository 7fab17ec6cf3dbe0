"""Command-line entry point: simulate, identify, report.

Exit codes: 0 success, 2 configuration problem, 3 forward-model failure,
4 linear-algebra failure.  All outputs are computed before anything is
written, so a failing run leaves no partial files behind.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from .config import (
    ConfigError,
    RunConfig,
    load_config,
    make_load_path,
    make_noise,
    make_pce_config,
    make_prior_spec,
    material_truth,
    render_config,
    validate_config,
)
from .gmkf import (
    ForwardFailure,
    NonPositiveParameter,
    NotSPD,
    export_density_csvs,
    identify,
    load_result_json,
    write_result_json,
)
from .integrate import StepRejected, integrate_stress_driven
from .loading import export_principal_trajectory, measurement_to_csv
from .pce import save_pce
from .tensors import DegenerateDirection

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FORWARD = 3
EXIT_LINALG = 4

PARAM_ORDER = ("kappa", "g", "b_r", "b_chi", "sigma_y")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="chabident",
        description="Viscoplastic virtual experiments and Bayesian parameter identification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file (defaults reproduce the reference run)")
        p.add_argument("--case", type=int, choices=(1, 2), help="load case override")
        p.add_argument("--out", help="output directory (default: <output_dir>/<name>)")
        p.add_argument("--seed", type=int, help="noise seed; sampling seed becomes seed+1")
        p.add_argument(
            "--threads",
            type=int,
            default=1,
            help="upper bound on worker threads (evaluation is sequential and deterministic)",
        )
        p.add_argument("--degree", type=int, help="PCE total degree override")
        p.add_argument("--level", type=int, help="quadrature level override")

    p_sim = sub.add_parser("simulate", help="run one load case and export trajectory CSVs")
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_id = sub.add_parser("identify", help="virtual experiment plus Kalman update")
    common(p_id)
    p_id.set_defaults(func=cmd_identify)

    p_rep = sub.add_parser("report", help="merge identification runs into one table")
    p_rep.add_argument("run_dirs", nargs="+", help="directories containing result.json")
    p_rep.add_argument("--out", help="output directory (default: current directory)")
    p_rep.set_defaults(func=cmd_report)

    return parser


def effective_config(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.case is not None:
        cfg = replace(cfg, load=replace(cfg.load, case=args.case))
    if args.degree is not None:
        cfg = replace(cfg, pce=replace(cfg.pce, degree=args.degree))
    if args.level is not None:
        cfg = replace(cfg, pce=replace(cfg.pce, level=args.level))
    if args.seed is not None:
        cfg = replace(cfg, noise=replace(cfg.noise, seed=args.seed))
        cfg = replace(cfg, pce=replace(cfg.pce, sample_seed=args.seed + 1))
    if getattr(args, "threads", 1) is not None and args.threads < 1:
        raise ConfigError(f"--threads must be >= 1, got {args.threads}")
    validate_config(cfg)
    return cfg


def _write_config_echo(cfg, out_dir):
    with open(os.path.join(out_dir, "config_echo.json"), "w") as fh:
        json.dump(render_config(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_simulate(args):
    cfg = effective_config(args)
    case = cfg.load.case
    out_dir = args.out or os.path.join(cfg.output_dir, f"case{case}_simulate")

    truth = material_truth(cfg)
    path = make_load_path(cfg)
    traj = integrate_stress_driven(
        truth,
        path.stress_path(),
        cfg.integrator.dt,
        local_tol=cfg.integrator.local_tol,
        min_substep_factor=cfg.integrator.min_substep_factor,
    )
    length = cfg.observation.edge_length
    f_norm = np.interp(traj.times, path.times, path.f_normal)
    f_inpl = np.interp(traj.times, path.times, path.f_inplane)
    u_norm = traj.eps[:, 2] * length
    u_inpl = 2.0 * traj.eps[:, 4] * length

    os.makedirs(out_dir, exist_ok=True)
    _write_config_echo(cfg, out_dir)
    path.to_csv(os.path.join(out_dir, "load_path.csv"))
    traj.to_csv(os.path.join(out_dir, "trajectory.csv"))
    with open(os.path.join(out_dir, "hysteresis.csv"), "w") as fh:
        fh.write("time_s,f_normal_Pa,f_inplane_Pa,u_normal_m,u_inplane_m\n")
        for row in zip(traj.times, f_norm, f_inpl, u_norm, u_inpl):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    export_principal_trajectory(traj, truth, os.path.join(out_dir, "principal.csv"))
    print(f"simulate {path.label}: {traj.times.size} rows -> {out_dir}")
    return EXIT_OK


def cmd_identify(args):
    cfg = effective_config(args)
    case = cfg.load.case
    out_dir = args.out or os.path.join(cfg.output_dir, f"case{case}")

    result = identify(
        make_prior_spec(cfg),
        make_load_path(cfg),
        make_noise(cfg),
        material_truth(cfg),
        pce_config=make_pce_config(cfg),
        dt=cfg.integrator.dt,
        n_obs=cfg.observation.n_obs,
        edge_length=cfg.observation.edge_length,
        local_tol=cfg.integrator.local_tol,
    )

    os.makedirs(out_dir, exist_ok=True)
    _write_config_echo(cfg, out_dir)
    density_paths = export_density_csvs(result, out_dir)
    save_pce(result.prior, os.path.join(out_dir, "prior_pce.csv"))
    save_pce(result.posterior, os.path.join(out_dir, "posterior_pce.csv"))
    measurement_to_csv(
        os.path.join(out_dir, "measurement.csv"),
        result.observations,
        result.z_hat,
        make_noise(cfg),
    )
    file_refs = {
        "config_echo": "config_echo.json",
        "measurement": "measurement.csv",
        "prior_pce": "prior_pce.csv",
        "posterior_pce": "posterior_pce.csv",
        "densities": {k: os.path.basename(v) for k, v in density_paths.items()},
    }
    write_result_json(
        os.path.join(out_dir, "result.json"),
        result,
        config_echo=render_config(cfg),
        file_refs=file_refs,
    )

    print(f"identify {result.diagnostics['case']} "
          f"(n_obs={result.diagnostics['n_obs']}, nodes={result.diagnostics['n_nodes']}):")
    header = f"{'parameter':10s} {'true':>12s} {'prior_mean':>12s} {'prior_std':>12s} {'post_mean':>12s} {'post_std':>12s}"
    print(header)
    for i, name in enumerate(result.param_names):
        print(
            f"{name:10s} {result.truth[i]:12.5g} {result.prior_mean[i]:12.5g} "
            f"{result.prior_std[i]:12.5g} {result.post_mean[i]:12.5g} {result.post_std[i]:12.5g}"
        )
    print(f"outputs -> {out_dir}")
    return EXIT_OK


def _case_key(doc, path):
    case = doc.get("diagnostics", {}).get("case")
    if case not in ("case1", "case2"):
        raise ConfigError(f"{path}: missing or unrecognized case label {case!r}")
    return case


def cmd_report(args):
    docs = {}
    for run_dir in args.run_dirs:
        path = os.path.join(run_dir, "result.json")
        if not os.path.isfile(path):
            raise ConfigError(f"no result.json in {run_dir!r}")
        try:
            doc = load_result_json(path)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read {path!r}: {exc}") from exc
        case = _case_key(doc, path)
        if case in docs:
            raise ConfigError(f"duplicate runs for {case}")
        docs[case] = doc

    params = {case: doc.get("parameters", {}) for case, doc in docs.items()}
    for doc_params in params.values():
        missing = [n for n in PARAM_ORDER if n not in doc_params]
        if missing:
            raise ConfigError(f"result is missing parameters: {', '.join(missing)}")
    if len(docs) == 2:
        for name in PARAM_ORDER:
            t1 = params["case1"][name]["true"]
            t2 = params["case2"][name]["true"]
            if t1 != t2:
                raise ConfigError(
                    f"truth mismatch for parameter {name!r}: case1 has {t1!r}, case2 has {t2!r}"
                )

    rows = []
    for name in PARAM_ORDER:
        any_doc = next(iter(params.values()))
        row = {"parameter": name, "true": repr(any_doc[name]["true"])}
        for case in ("case1", "case2"):
            if case in params:
                row[f"mean_{case}"] = repr(params[case][name]["post_mean"])
                row[f"std_{case}"] = repr(params[case][name]["post_std"])
            else:
                row[f"mean_{case}"] = ""
                row[f"std_{case}"] = ""
        rows.append(row)

    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    columns = ["parameter", "true", "mean_case1", "std_case1", "mean_case2", "std_case2"]
    csv_path = os.path.join(out_dir, "report.csv")
    with open(csv_path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(row[c] for c in columns) + "\n")
    md_path = os.path.join(out_dir, "report.md")
    with open(md_path, "w") as fh:
        fh.write("| " + " | ".join(columns) + " |\n")
        fh.write("|" + "---|" * len(columns) + "\n")
        for row in rows:
            fh.write("| " + " | ".join(row[c] for c in columns) + " |\n")
    print(f"report: {len(rows)} rows, cases: {', '.join(sorted(docs))} -> {csv_path}")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StepRejected, DegenerateDirection, ForwardFailure, NonPositiveParameter) as exc:
        print(f"forward-model error: {exc}", file=sys.stderr)
        return EXIT_FORWARD
    except NotSPD as exc:
        print(f"linear-algebra error: {exc}", file=sys.stderr)
        return EXIT_LINALG


if __name__ == "__main__":
    raise SystemExit(main())
