"""Run configuration: flat key-value text files with one section per experiment.

Files are standard INI as read by configparser.  Every experiment has
built-in defaults (the published problem parameters); a config file
overrides individual keys in the section named after the experiment:

    [example1d]
    variant = discontinuous
    n_el = 62
    eps_fractions = 0.2, 0.5, 0.9
    seed = 7

Keys and types (defaults in parentheses):
    variant           str    1D case: isotropic | discontinuous (isotropic)
    n_el              int    1D element count (62, i.e. h ~ 1/20 on [0, pi])
    h                 float  2D grid spacing (1/30)
    T                 float  horizon (0.01 in 1D, 0.05 in 2D)
    alpha             float  control weight (1e-4)
    diffusion_jump    float  coefficient jump a of 1 + a*chi_[gamma, pi] (-0.8)
    interface         float  jump location gamma (2.2)
    beta_lo, beta_hi  float  active window of beta as fractions of T (1/3, 2/3)
    w_indicator       2 floats   1D target-trajectory indicator interval
    ystar_indicator   2 floats   1D final-target indicator interval
    eps_fractions     floats  constraint levels as fractions of Phi(0)
    phi_curve_points  int    number of log-spaced mu samples
    mu_min, mu_max    float  Phi-curve sampling range (1e-7, 1e12)
    nu_list           floats sensitivity magnitudes (1e-2, 1e-3, 1e-4)
    fit_tol           float  rational-fit tolerance of the solve path (1e-12)
    channels          strs   sensitivity channels (all six)
    n_el_oracle       int    oracle-check 1D element count (65, i.e. n = 64)
    seed              int    random seed (0)
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields

import numpy as np

PI = np.pi

EXPERIMENTS = ("example1d", "example2d", "phi-curve", "convergence",
               "sensitivity", "oracle-check")


@dataclass
class RunConfig:
    experiment: str
    variant: str = "isotropic"
    n_el: int = 62
    h: float = 1.0 / 30.0
    T: float = 0.01
    alpha: float = 1e-4
    diffusion_jump: float = -0.8
    interface: float = 2.2
    beta_lo: float = 1.0 / 3.0
    beta_hi: float = 2.0 / 3.0
    w_indicator: tuple = (PI / 5.0, 2.0 * PI / 5.0)
    ystar_indicator: tuple = (3.0 * PI / 5.0, 4.0 * PI / 5.0)
    eps_fractions: tuple = (0.2, 0.5, 0.9)
    phi_curve_points: int = 350
    mu_min: float = 1e-7
    mu_max: float = 1e12
    nu_list: tuple = (1e-2, 1e-3, 1e-4)
    fit_tol: float = 1e-12
    channels: tuple = ("alpha", "beta", "w", "ystar", "f", "operator")
    n_el_oracle: int = 65
    seed: int = 0
    threads: int = 1
    out_dir: str = "out"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        for frac in self.eps_fractions:
            if not 0 < frac <= 1:
                raise ValueError("eps fractions must lie in (0, 1]")
        if not 0 <= self.beta_lo < self.beta_hi <= 1:
            raise ValueError("beta window fractions must satisfy 0 <= lo < hi <= 1")


_DEFAULT_OVERRIDES = {
    "example1d": {"phi_curve_points": 41},
    "example2d": {"T": 0.05, "eps_fractions": (0.1, 0.5, 0.9)},
    "phi-curve": {"phi_curve_points": 350},
}

_TUPLE_FLOAT_KEYS = {"w_indicator", "ystar_indicator", "eps_fractions", "nu_list"}
_TUPLE_STR_KEYS = {"channels"}
_INT_KEYS = {"n_el", "phi_curve_points", "seed", "threads", "n_el_oracle"}
_STR_KEYS = {"variant", "out_dir"}


def load_config(experiment, path=None, **overrides):
    """Built-in defaults for the experiment, overridden by the config file
    section of the same name, then by keyword overrides (CLI flags)."""
    values = dict(_DEFAULT_OVERRIDES.get(experiment, {}))
    if path is not None:
        parser = configparser.ConfigParser()
        with open(path) as fh:
            parser.read_file(fh)
        if parser.has_section(experiment):
            for key, raw in parser.items(experiment):
                values[key] = _parse(key, raw)
    for key, val in overrides.items():
        if val is not None:
            values[key] = val
    known = {f.name for f in fields(RunConfig)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return RunConfig(experiment=experiment, **values)


def _parse(key, raw):
    raw = raw.strip()
    if key in _STR_KEYS:
        return raw
    if key in _INT_KEYS:
        return int(raw)
    if key in _TUPLE_FLOAT_KEYS:
        return tuple(float(tok) for tok in raw.replace(",", " ").split())
    if key in _TUPLE_STR_KEYS:
        return tuple(tok for tok in raw.replace(",", " ").split())
    return float(raw)


def echo_config(cfg):
    """Deterministic key = value listing for the metadata sidecar."""
    lines = []
    for f in fields(RunConfig):
        lines.append(f"{f.name} = {getattr(cfg, f.name)!r}")
    return "\n".join(lines) + "\n"
