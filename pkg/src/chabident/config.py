"""Run configuration: JSON-serializable knobs with documented defaults.

An empty config file reproduces the reference run; every field can be
overridden individually.  parse(render(config)) round-trips exactly.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .gmkf import PceConfig, PriorSpec
from .loading import NoiseModel, build_case1, build_case2
from .material import MaterialParams


class ConfigError(Exception):
    """Invalid or unparseable run configuration."""


@dataclass(frozen=True)
class MaterialSection:
    kappa: float = 1.66e9
    g: float = 7.69e8
    sigma_y: float = 1.7e8
    n: float = 1.0
    k: float = 1.5e8
    b_r: float = 50.0
    h_r: float = 0.5e8
    b_chi: float = 50.0
    h_chi: float = 0.5e8


@dataclass(frozen=True)
class LoadSection:
    case: int = 1
    amplitude_n: float = 1.35e8
    amplitude_t: float = 0.675e8
    period: float = 10.0
    n_cycles: int = 10
    case2_amplitude_scale: float = 1.59
    case2_n_cycles: int = 28
    knots_per_quarter: int = 25


@dataclass(frozen=True)
class IntegratorSection:
    dt: float = 0.01
    local_tol: float = 1e-8
    min_substep_factor: float = 1e-6


@dataclass(frozen=True)
class ObservationSection:
    n_obs: int = 480
    edge_length: float = 1.0


@dataclass(frozen=True)
class PriorSection:
    mean_factor_kappa: float = 1.05
    mean_factor_g: float = 1.05
    mean_factor_b_r: float = 1.2
    mean_factor_b_chi: float = 1.2
    mean_factor_sigma_y: float = 0.85
    cov_kappa: float = 0.05
    cov_g: float = 0.05
    cov_b_r: float = 0.15
    cov_b_chi: float = 0.15
    cov_sigma_y: float = 0.10


@dataclass(frozen=True)
class NoiseSection:
    relative_std: float = 0.01
    absolute_floor: float = 1e-12
    seed: int = 42


@dataclass(frozen=True)
class PceSection:
    degree: int = 2
    level: int = 3
    node_cap: float = 1e6
    kde_samples: int = 100000
    sample_seed: int = 43


@dataclass(frozen=True)
class RunConfig:
    material: MaterialSection = field(default_factory=MaterialSection)
    load: LoadSection = field(default_factory=LoadSection)
    integrator: IntegratorSection = field(default_factory=IntegratorSection)
    observation: ObservationSection = field(default_factory=ObservationSection)
    prior: PriorSection = field(default_factory=PriorSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    pce: PceSection = field(default_factory=PceSection)
    output_dir: str = "runs"


_SECTIONS = {
    "material": MaterialSection,
    "load": LoadSection,
    "integrator": IntegratorSection,
    "observation": ObservationSection,
    "prior": PriorSection,
    "noise": NoiseSection,
    "pce": PceSection,
}


def parse_config(doc):
    """RunConfig from a (possibly partial) dict; unknown keys are errors."""
    if not isinstance(doc, dict):
        raise ConfigError(f"config root must be an object, got {type(doc).__name__}")
    kwargs = {}
    for key, value in doc.items():
        if key == "output_dir":
            if not isinstance(value, str):
                raise ConfigError("output_dir must be a string")
            kwargs[key] = value
            continue
        cls = _SECTIONS.get(key)
        if cls is None:
            raise ConfigError(f"unknown config section {key!r}")
        if not isinstance(value, dict):
            raise ConfigError(f"section {key!r} must be an object")
        fields = {f.name: f for f in dataclasses.fields(cls)}
        sect = {}
        for name, raw in value.items():
            if name not in fields:
                raise ConfigError(f"unknown field {key}.{name}")
            want = fields[name].type
            if want == "int":
                if not isinstance(raw, int) or isinstance(raw, bool):
                    raise ConfigError(f"{key}.{name} must be an integer, got {raw!r}")
                sect[name] = raw
            elif want == "float":
                if not isinstance(raw, (int, float)) or isinstance(raw, bool):
                    raise ConfigError(f"{key}.{name} must be a number, got {raw!r}")
                sect[name] = float(raw)
            else:
                sect[name] = raw
        try:
            kwargs[key] = cls(**sect)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid section {key!r}: {exc}") from exc
    cfg = RunConfig(**kwargs)
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    ld = cfg.load
    if ld.case not in (1, 2):
        raise ConfigError(f"load.case must be 1 or 2, got {ld.case!r}")
    if ld.amplitude_n < 0 or ld.amplitude_t < 0:
        raise ConfigError("load amplitudes must be non-negative")
    if ld.period <= 0:
        raise ConfigError("load.period must be positive")
    if ld.n_cycles < 1 or ld.case2_n_cycles < 1:
        raise ConfigError("cycle counts must be >= 1")
    if ld.case2_amplitude_scale <= 0:
        raise ConfigError("load.case2_amplitude_scale must be positive")
    if ld.knots_per_quarter < 1:
        raise ConfigError("load.knots_per_quarter must be >= 1")
    it = cfg.integrator
    if it.dt <= 0 or it.local_tol <= 0 or it.min_substep_factor <= 0:
        raise ConfigError("integrator knobs must be positive")
    if ld.period / it.dt < 100:
        raise ConfigError(
            f"integrator.dt={it.dt!r} too coarse: need >= 100 steps per cycle of {ld.period!r} s"
        )
    ob = cfg.observation
    if ob.n_obs < 1:
        raise ConfigError("observation.n_obs must be >= 1")
    if ob.edge_length <= 0:
        raise ConfigError("observation.edge_length must be positive")
    pr = cfg.prior
    for fname in (
        "mean_factor_kappa",
        "mean_factor_g",
        "mean_factor_b_r",
        "mean_factor_b_chi",
        "mean_factor_sigma_y",
    ):
        if getattr(pr, fname) <= 0:
            raise ConfigError(f"prior.{fname} must be positive")
    for fname in ("cov_kappa", "cov_g", "cov_b_r", "cov_b_chi", "cov_sigma_y"):
        if getattr(pr, fname) < 0:
            raise ConfigError(f"prior.{fname} must be non-negative")
    nz = cfg.noise
    if nz.relative_std < 0 or nz.absolute_floor < 0:
        raise ConfigError("noise magnitudes must be non-negative")
    pc = cfg.pce
    if pc.degree < 0 or pc.level < 1 or pc.node_cap < 1:
        raise ConfigError("pce.degree must be >= 0, pce.level >= 1, pce.node_cap >= 1")
    if pc.kde_samples < 100:
        raise ConfigError("pce.kde_samples must be >= 100")
    try:
        material_truth(cfg)
    except ValueError as exc:
        raise ConfigError(f"invalid material section: {exc}") from exc


def load_config(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: line {exc.lineno}: {exc.msg}") from exc
    return parse_config(doc)


def render_config(cfg):
    """Full dict of effective values, including defaults."""
    return dataclasses.asdict(cfg)


def save_config(cfg, path):
    with open(path, "w") as fh:
        json.dump(render_config(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")


def material_truth(cfg):
    m = cfg.material
    return MaterialParams(
        kappa=m.kappa,
        g=m.g,
        sigma_y=m.sigma_y,
        n=m.n,
        k=m.k,
        b_r=m.b_r,
        h_r=m.h_r,
        b_chi=m.b_chi,
        h_chi=m.h_chi,
    )


def make_load_path(cfg, case=None):
    """Load path for the selected case (or an explicit case number)."""
    ld = cfg.load
    case = ld.case if case is None else case
    if case == 1:
        return build_case1(ld.amplitude_n, ld.amplitude_t, ld.period, ld.n_cycles)
    if case == 2:
        return build_case2(
            ld.amplitude_n * ld.case2_amplitude_scale,
            ld.amplitude_t * ld.case2_amplitude_scale,
            ld.period,
            ld.case2_n_cycles,
            knots_per_quarter=ld.knots_per_quarter,
        )
    raise ConfigError(f"load.case must be 1 or 2, got {case!r}")


def make_prior_spec(cfg):
    pr = cfg.prior
    factors = [
        pr.mean_factor_kappa,
        pr.mean_factor_g,
        pr.mean_factor_b_r,
        pr.mean_factor_b_chi,
        pr.mean_factor_sigma_y,
    ]
    covs = [pr.cov_kappa, pr.cov_g, pr.cov_b_r, pr.cov_b_chi, pr.cov_sigma_y]
    return PriorSpec.from_truth(material_truth(cfg), mean_factor=factors, cov=covs)


def make_noise(cfg):
    n = cfg.noise
    return NoiseModel(relative_std=n.relative_std, absolute_floor=n.absolute_floor, seed=n.seed)


def make_pce_config(cfg):
    p = cfg.pce
    return PceConfig(
        degree=p.degree,
        level=p.level,
        node_cap=p.node_cap,
        kde_samples=p.kde_samples,
        sample_seed=p.sample_seed,
    )
