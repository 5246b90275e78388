"""Experiment configuration: flat key = value files with section headers
(INI syntax), a typed container, and pre-flight validation."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError
from .fields import (
    FIELD_CATALOG,
    BoundedDomain,
    PotentialSpec,
    ScalarField,
    WaveContext,
    catalog_field,
    factorize_potential,
)
from .oned import Interval1D

KA_REFUSE = 0.5
KH_MAX_3D = 0.5
KH_MAX_1D = 0.2

# constructor argument names that hold point-valued parameters
_VECTOR_PARAMS = {"center"}


@dataclass
class ExperimentConfig:
    dimension: int
    domain: Optional[BoundedDomain]
    interval: Optional[Interval1D]
    potential_name: str
    potential_params: dict
    strategy: str
    level: float
    n_max: float
    k: float
    alpha: np.ndarray
    a_sequence: list
    cell_factor: float
    mode: str
    tol: float
    dense_cap: int
    maxiter: int
    restart: int
    h_effective: float
    probe_points_per_axis: int
    probe_scale: float
    probe_exclusion: float
    ff_n_theta: int
    ff_n_phi: int
    output_dir: str

    def potential(self) -> ScalarField:
        return catalog_field(self.potential_name, **self.potential_params)

    def spec(self) -> PotentialSpec:
        region = self.domain if self.dimension == 3 else self.interval.domain()
        return factorize_potential(self.potential(), region, self.strategy, self.level, n_max=self.n_max)

    def wave(self) -> WaveContext:
        return WaveContext(k=self.k, alpha=self.alpha)


def _floats(s):
    return [float(tok) for tok in s.split()]


def parse_config(path) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    try:
        return _build(cp)
    except (configparser.Error, KeyError, ValueError) as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc


def _build(cp) -> ExperimentConfig:
    dimension = cp.getint("experiment", "dimension", fallback=3)

    domain = None
    interval = None
    if dimension == 3:
        kind = cp.get("domain", "kind", fallback="box")
        if kind == "box":
            domain = BoundedDomain.box(_floats(cp.get("domain", "lo", fallback="0 0 0")), _floats(cp.get("domain", "hi", fallback="1 1 1")))
        elif kind == "ball":
            domain = BoundedDomain.ball(_floats(cp.get("domain", "center")), cp.getfloat("domain", "radius"))
        else:
            raise ConfigError(f"unknown domain kind '{kind}'")
    elif dimension == 1:
        interval = Interval1D(cp.getfloat("interval", "c", fallback=0.0), cp.getfloat("interval", "d", fallback=1.0))
    else:
        raise ConfigError(f"dimension must be 1 or 3, got {dimension}")

    name = cp.get("potential", "name")
    if name not in FIELD_CATALOG:
        raise ConfigError(f"unknown potential '{name}'; catalog: {sorted(FIELD_CATALOG)}")
    params = {}
    for key, raw in cp.items("potential"):
        if key == "name":
            continue
        params[key] = _floats(raw) if key in _VECTOR_PARAMS else float(raw)

    alpha_default = "0 0 1" if dimension == 3 else "1"
    a_seq = _floats(cp.get("placement", "a_sequence"))

    return ExperimentConfig(
        dimension=dimension,
        domain=domain,
        interval=interval,
        potential_name=name,
        potential_params=params,
        strategy=cp.get("factorization", "strategy", fallback="constant-density"),
        level=cp.getfloat("factorization", "level"),
        n_max=cp.getfloat("factorization", "n_max", fallback=0.5),
        k=cp.getfloat("wave", "k", fallback=1.0),
        alpha=np.array(_floats(cp.get("wave", "alpha", fallback=alpha_default))),
        a_sequence=a_seq,
        cell_factor=cp.getfloat("placement", "cell_factor", fallback=1.6),
        mode=cp.get("solver", "mode", fallback="iterative"),
        tol=cp.getfloat("solver", "tol", fallback=1e-8),
        dense_cap=cp.getint("solver", "dense_cap", fallback=8000),
        maxiter=cp.getint("solver", "maxiter", fallback=500),
        restart=cp.getint("solver", "restart", fallback=50),
        h_effective=cp.getfloat("effective", "h", fallback=1.0 / 32.0 if dimension == 3 else 1e-3),
        probe_points_per_axis=cp.getint("probe", "points_per_axis", fallback=9),
        probe_scale=cp.getfloat("probe", "scale", fallback=1.2),
        probe_exclusion=cp.getfloat("probe", "exclusion", fallback=2.0),
        ff_n_theta=cp.getint("farfield", "n_theta", fallback=16),
        ff_n_phi=cp.getint("farfield", "n_phi", fallback=24),
        output_dir=cp.get("output", "dir", fallback="out"),
    )


def validate_config(cfg: ExperimentConfig) -> list:
    """All violations at once, each with a remediation hint. Empty = valid."""
    diags = []
    if cfg.a_sequence != sorted(cfg.a_sequence, reverse=True) or len(set(cfg.a_sequence)) != len(cfg.a_sequence):
        diags.append("a_sequence must be strictly decreasing")
    for a in cfg.a_sequence:
        ka = cfg.k * a
        if ka > KA_REFUSE:
            diags.append(
                f"ka = {ka:.3g} at a = {a} violates the small-scatterer regime ka << 1 "
                f"(refusal threshold {KA_REFUSE}); reduce a or k"
            )
    if cfg.mode not in ("dense", "iterative"):
        diags.append(f"solver mode '{cfg.mode}' not one of dense|iterative")
    kh_max = KH_MAX_3D if cfg.dimension == 3 else KH_MAX_1D
    if cfg.k * cfg.h_effective > kh_max:
        diags.append(
            f"kh = {cfg.k * cfg.h_effective:.3g} > {kh_max}: effective grid does not "
            f"resolve the wavelength; reduce h"
        )
    try:
        spec = cfg.spec()
        region = cfg.domain if cfg.dimension == 3 else cfg.interval.domain()
        spec.check(region)
    except Exception as exc:
        diags.append(f"potential factorization invalid: {exc}")
    if abs(np.linalg.norm(cfg.alpha) - 1.0) > 1e-14:
        diags.append("incident direction alpha must be a unit vector")
    if cfg.alpha.size != cfg.dimension:
        diags.append(f"alpha has {cfg.alpha.size} components for dimension {cfg.dimension}")
    return diags
