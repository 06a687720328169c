"""Dielectric (TLS) and Purcell loss budget for a transmon.

Surface participations of the qubit mode are built with the hybrid rule

    p_i = sum_r F_r f_{r,i}  (+ 3D values for the unpartitioned remainder)

where F_r is the 3D electric-energy fraction stored in partition region r
and f_{r,i} the interface fraction of the matching cross-section.  The
dielectric quality factor follows from 1/Q_TLS = sum_i p_i tan(delta_i), and
the Purcell rate through the readout resonator is (g/Delta)^2 kappa.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .data import fixture_path
from .xsect import KINDS, InterfaceEPR

__all__ = [
    "DEFAULT_TAN_DELTA",
    "InfiniteQualityError",
    "SurfaceEPR",
    "PartitionRegion",
    "LossChannel",
    "ReadoutResonator",
    "PurcellDecay",
    "LossBudget",
    "combine_hybrid",
    "load_table1",
    "channels",
    "q_tls",
    "t1_tls",
    "purcell_t1",
    "t1_budget",
    "read_energy_report",
]

# Calibrated so that the Table-1-like hybrid and 3D-only participations give
# Q_TLS of about 7.8e5 and 2.6e6.  Configuration, not measured loss tangents.
DEFAULT_TAN_DELTA = {"MA": 6.0e-3, "MS": 6.0e-3, "SA": 2.9e-3}


class InfiniteQualityError(ValueError):
    """Raised when every loss channel vanishes and Q would be infinite."""


@dataclass(frozen=True)
class SurfaceEPR:
    """Qubit-level surface participation per interface kind."""

    MA: float
    MS: float
    SA: float

    def __post_init__(self):
        for k in KINDS:
            if not getattr(self, k) >= 0:
                raise ValueError(f"participation {k} must be non-negative")

    def __getitem__(self, kind: str) -> float:
        return getattr(self, kind)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class PartitionRegion:
    name: str
    F: float
    xsect: InterfaceEPR

    def __post_init__(self):
        if not 0 <= self.F <= 1:
            raise ValueError(f"region {self.name!r}: F = {self.F} outside [0, 1]")


def combine_hybrid(
    regions: Sequence[PartitionRegion],
    unpartitioned_3d: SurfaceEPR | InterfaceEPR | None = None,
) -> SurfaceEPR:
    """Surface participations from partition regions and a 3D remainder.

    Raises
    ------
    ValueError
        If the region energy fractions add up to more than one.
    """
    total_F = math.fsum(r.F for r in regions)
    if total_F > 1 + 1e-12:
        raise ValueError(f"region energy fractions sum to {total_F:.6g} > 1")
    p = {}
    for k in KINDS:
        p[k] = math.fsum(r.F * r.xsect[k] for r in regions)
        if unpartitioned_3d is not None:
            p[k] += unpartitioned_3d[k]
    return SurfaceEPR(**p)


def load_table1(path: str | Path | None = None) -> dict[str, SurfaceEPR]:
    """Surface participation columns keyed by simulation strategy."""
    path = Path(path) if path is not None else fixture_path("table1_surface_epr.csv")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    head = [c.strip() for c in rows[0]]
    if head != ["strategy", *KINDS]:
        raise ValueError(f"{path}: unexpected header {head}")
    return {r[0].strip(): SurfaceEPR(*(float(v) for v in r[1:4])) for r in rows[1:]}


@dataclass(frozen=True)
class LossChannel:
    kind: str
    p: float
    tan_delta: float

    def __post_init__(self):
        if self.p < 0 or self.tan_delta < 0:
            raise ValueError(f"channel {self.kind!r}: p and tan_delta must be >= 0")

    @property
    def rate(self) -> float:
        return self.p * self.tan_delta


def channels(p: SurfaceEPR, tan_delta: Mapping[str, float] = DEFAULT_TAN_DELTA) -> list[LossChannel]:
    return [LossChannel(k, p[k], tan_delta[k]) for k in KINDS]


def q_tls(chans: Iterable[LossChannel]) -> float:
    """Dielectric quality factor, 1/Q = sum p_i tan(delta_i).

    Raises
    ------
    InfiniteQualityError
        If every product p_i tan(delta_i) is zero.
    """
    chans = list(chans)
    if not chans:
        raise ValueError("need at least one loss channel")
    inv = math.fsum(c.rate for c in chans)
    if inv == 0:
        raise InfiniteQualityError("all loss channels vanish; Q_TLS is infinite")
    return 1 / inv


def t1_tls(Q_TLS: float, f_q: float) -> float:
    """T1 = Q / omega_q, in seconds."""
    if not (Q_TLS > 0 and f_q > 0):
        raise ValueError("Q_TLS and f_q must be positive")
    return Q_TLS / (2 * math.pi * f_q)


@dataclass(frozen=True)
class ReadoutResonator:
    f_r: float
    Q_i: float
    Q_c: float

    @property
    def Q_r(self) -> float:
        return 1 / (1 / self.Q_i + 1 / self.Q_c)

    @property
    def kappa(self) -> float:
        """Linewidth f_r / Q_r in Hz (not angular)."""
        return self.f_r / self.Q_r


@dataclass(frozen=True)
class PurcellDecay:
    t1: float
    rate: float
    dispersive: bool

    @property
    def finite(self) -> bool:
        return math.isfinite(self.t1)


def purcell_t1(g: float, delta: float, kappa: float) -> PurcellDecay:
    """Purcell decay through a resonator.

    ``g``, ``delta`` and ``kappa`` are ordinary frequencies (Hz); the rate is
    Gamma = (g/Delta)^2 2 pi kappa.  ``dispersive`` is False when
    |Delta| <= 10 g, where the expression is only indicative.  g = 0 gives an
    infinite T1 with ``finite`` False.
    """
    if kappa <= 0 or delta == 0:
        raise ValueError("kappa must be positive and delta nonzero")
    rate = (g / delta) ** 2 * 2 * math.pi * kappa
    t1 = math.inf if rate == 0 else 1 / rate
    return PurcellDecay(t1, rate, abs(delta) > 10 * abs(g))


@dataclass(frozen=True)
class LossBudget:
    Q_TLS: float
    T1_TLS: float
    kappa: float | None
    Q_r: float | None
    Q_i: float | None
    Q_c: float | None
    T1_Purcell: float | None
    T1_total: float
    rates: dict
    purcell_dispersive: bool | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    def table(self) -> str:
        us = 1e6
        lines = [
            f"{'Q_TLS':<12}{self.Q_TLS:>14.4g}",
            f"{'T1_TLS':<12}{self.T1_TLS * us:>11.2f} us",
        ]
        if self.T1_Purcell is not None:
            lines += [
                f"{'Q_i':<12}{self.Q_i:>14.4g}",
                f"{'Q_c':<12}{self.Q_c:>14.4g}",
                f"{'Q_r':<12}{self.Q_r:>14.4g}",
                f"{'kappa':<12}{self.kappa / 1e6:>10.3f} MHz",
                f"{'T1_Purcell':<12}{self.T1_Purcell * us:>11.2f} us",
            ]
        lines.append(f"{'T1_total':<12}{self.T1_total * us:>11.2f} us")
        return "\n".join(lines)


def t1_budget(
    f_q: float,
    Q_TLS: float,
    *,
    g: float | None = None,
    delta: float | None = None,
    resonator: ReadoutResonator | None = None,
) -> LossBudget:
    """Rate-additive T1 budget of dielectric loss and, optionally, Purcell decay.

    Purcell decay is included when ``g``, ``delta`` and ``resonator`` are all
    given.  ``rates`` holds each channel in 1/s and sums to 1/T1_total.
    """
    T_tls = t1_tls(Q_TLS, f_q)
    rates = {"TLS": 1 / T_tls}
    kappa = Q_r = Q_i = Q_c = T_p = disp = None
    if resonator is not None and g is not None and delta is not None:
        pd = purcell_t1(g, delta, resonator.kappa)
        rates["Purcell"] = pd.rate
        kappa, Q_r, Q_i, Q_c = resonator.kappa, resonator.Q_r, resonator.Q_i, resonator.Q_c
        T_p, disp = pd.t1, pd.dispersive
    elif any(v is not None for v in (g, delta, resonator)):
        raise ValueError("Purcell decay needs g, delta and resonator together")
    total = math.fsum(rates.values())
    return LossBudget(Q_TLS, T_tls, kappa, Q_r, Q_i, Q_c, T_p, 1 / total, rates, disp)


def read_energy_report(path: str | Path) -> dict[str, float]:
    """3D energy report: region name to electric-energy fraction.

    Accepts a JSON object ``{"regions": {name: F}}`` (or a bare mapping) or a
    CSV with header ``region,F``.
    """
    path = Path(path)
    if path.suffix == ".json":
        d = json.loads(path.read_text())
        d = d.get("regions", d)
        return {str(k): float(v) for k, v in d.items()}
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if [c.strip() for c in rows[0]] != ["region", "F"]:
        raise ValueError(f"{path}: expected header 'region,F'")
    return {r[0].strip(): float(r[1]) for r in rows[1:]}
