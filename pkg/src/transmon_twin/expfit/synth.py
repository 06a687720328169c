"""Synthetic traces with known parameters.

``scenario(kind, qubit)`` builds the default sweep for each experiment from
the measured Table 2 values of the chosen qubit.  Noise is set by a
signal-to-noise ratio: sigma = (feature size)/snr, where the feature size is
the dip depth a Q_l/|Q_c| for resonator traces and ``depth`` or ``amp`` for
the others.  Complex traces get independent Gaussian noise of that sigma on
each quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..circuit import transmon_f01_batch
from ..data import load_table2
from .models import (
    chevron_td_model,
    echo_model,
    flux_map_model,
    ramsey_model,
    s21_notch_model,
    t1_model,
    two_tone_model,
)
from .traces import ExperimentTrace

__all__ = ["MODELS", "Scenario", "scenario", "synthesize", "notch_params"]

MODELS = {
    "notch": s21_notch_model,
    "two_tone": two_tone_model,
    "flux_map": flux_map_model,
    "chevron": chevron_td_model,
    "t1": t1_model,
    "ramsey": ramsey_model,
    "echo": echo_model,
}


@dataclass(frozen=True)
class Scenario:
    kind: str
    params: dict
    axes: tuple
    sigma: float


def notch_params(f_r, Q_i, Q_c, *, phi=0.0, a=1.0, theta=0.0, tau=0.0) -> dict:
    """Model parameters giving internal and coupling Q for a mismatch angle phi."""
    Q_l = 1 / (1 / Q_i + math.cos(phi) / Q_c)
    return dict(f_r=f_r, Q_l=Q_l, Q_c=Q_c, phi=phi, a=a, theta=theta, tau=tau)


def _feature(kind: str, p: dict) -> float:
    if kind == "notch":
        return p["a"] * p["Q_l"] / p["Q_c"]
    if kind == "flux_map":
        return p["depth"]
    return abs(p.get("amp", 1.0))


def _ej_for(f01: float, E_C: float) -> float:
    return brentq(lambda ej: transmon_f01_batch(ej, E_C)[0] - f01, 2 * E_C, 2000 * E_C, xtol=1e-6)


def scenario(kind: str, qubit: str = "QB-0", snr: float = 20.0) -> Scenario:
    """Default synthetic experiment anchored on one qubit's measured values."""
    m = {k: v[0] for k, v in load_table2()[qubit]["measured"].items()}
    if kind == "notch":
        p = notch_params(m["f_r"], m["Q_i"], m["Q_c"], phi=0.05, a=0.8, theta=0.3, tau=20e-9)
        kappa = p["f_r"] / p["Q_l"]
        axes = (np.linspace(p["f_r"] - 6 * kappa, p["f_r"] + 6 * kappa, 401),)
    elif kind == "two_tone":
        p = dict(f01=m["f_q"], alpha=m["alpha"], gamma=2e6, P1=-30.0, P2=-15.0, P3=-5.0, amp=1.0, offset=0.0)
        axes = (np.linspace(-40, 0, 21), m["f_q"] + np.arange(-266e6, 84e6 + 1, 1e6))
    elif kind == "flux_map":
        E_C = -m["alpha"] / 1.057  # alpha ~ -1.057 E_C at E_J/E_C ~ 250
        p = dict(E_J_max=_ej_for(7.65e9, E_C), E_C=E_C, g=m["g"], f_r=m["f_r"], V_per_phi0=1.0, V0=0.1,
                 kappa=m["f_r"] * (1 / m["Q_i"] + 1 / m["Q_c"]), depth=0.5, baseline=1.0)
        axes = (np.linspace(-0.15, 0.35, 101), np.arange(-100e6, 100e6 + 1, 0.5e6) + m["f_r"])
    elif kind == "chevron":
        T_d = 1 / (0.5 / m["T1"] + 0.5 / m["T2"])
        p = dict(Omega=4e6, f01=m["f_q"], T_d=T_d, amp=1.0, offset=0.0)
        axes = (np.linspace(0, 2e-6, 101), m["f_q"] + np.linspace(-20e6, 20e6, 41))
    elif kind == "t1":
        p = dict(T1=m["T1"], amp=1.0, offset=0.0)
        axes = (np.linspace(0, 5 * m["T1"], 201),)
    elif kind == "ramsey":
        p = dict(T2s=m["T2_star"], delta=10e6, phase=0.2, amp=0.5, offset=0.5)
        axes = (np.linspace(0, 5 * m["T2_star"], 201),)
    elif kind == "echo":
        p = dict(T2=m["T2"], amp=0.5, offset=0.5)
        axes = (np.linspace(0, 5 * m["T2"], 201),)
    else:
        raise ValueError(f"unknown experiment kind {kind!r}")
    return Scenario(kind, p, axes, _feature(kind, p) / snr)


def synthesize(kind: str, params: dict, axes, sigma: float, seed, meta: dict | None = None) -> ExperimentTrace:
    """Model response plus seeded Gaussian noise."""
    x = axes[0] if len(axes) == 1 else tuple(axes)
    clean = MODELS[kind](x, **params)
    rng = np.random.default_rng(seed)
    if np.iscomplexobj(clean):
        noise = sigma * (rng.standard_normal(clean.shape) + 1j * rng.standard_normal(clean.shape))
    else:
        noise = sigma * rng.standard_normal(clean.shape)
    return ExperimentTrace(kind, tuple(axes), clean + noise, np.full(clean.shape, sigma), dict(meta or {}))
