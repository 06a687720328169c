"""Energy-participation quantization of weakly nonlinear modes.

For a single Josephson element with energy E_J shared by linear modes of
frequencies f_m and junction participations p_m, the cross-Kerr matrix is

    chi_mn = f_m f_n p_m p_n / (4 E_J)      (Hz, with E_J in Hz)

Anharmonicities are alpha_m = chi_mm / 2.  Magnitudes are stored
non-negative; the transmon sign convention (alpha < 0) is applied on the
``alpha`` property.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
from scipy.linalg import eigh

from .circuit import (
    CapacitanceMatrix,
    JosephsonElement,
    jc_eigenfrequencies,
    lj_from_ej,
    lom_analysis,
    transmon_asymptotic,
)

__all__ = [
    "Mode",
    "ModeSystem",
    "KerrMatrix",
    "kerr_matrix",
    "dressed_frequencies",
    "linear_modes",
    "EprLomRow",
    "EprLomReport",
    "epr_vs_lom_report",
    "read_mode_csv",
    "write_mode_csv",
]


@dataclass(frozen=True)
class Mode:
    label: str
    f_lin: float
    p: float


@dataclass(frozen=True)
class ModeSystem:
    modes: tuple[Mode, ...]
    E_J: float

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise ValueError("need at least one mode")
        if not self.E_J > 0:
            raise ValueError("E_J must be positive")
        for m in self.modes:
            if not 0 <= m.p <= 1:
                raise ValueError(f"participation of {m.label!r} outside [0, 1]: {m.p}")
            if not m.f_lin > 0:
                raise ValueError(f"mode {m.label!r} needs a positive frequency")
        if sum(m.p for m in self.modes) > 1 + 1e-6:
            raise ValueError("participations of a single junction sum above 1")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(m.label for m in self.modes)

    @property
    def f_lin(self) -> np.ndarray:
        return np.array([m.f_lin for m in self.modes])

    @property
    def p(self) -> np.ndarray:
        return np.array([m.p for m in self.modes])


@dataclass(frozen=True)
class KerrMatrix:
    labels: tuple[str, ...]
    chi: np.ndarray
    f_dressed: np.ndarray

    @property
    def alpha(self) -> np.ndarray:
        """Anharmonicities with the transmon sign (negative)."""
        return -np.diag(self.chi) / 2

    def cross_kerr(self, a: str, b: str) -> float:
        return float(self.chi[self.labels.index(a), self.labels.index(b)])


def kerr_matrix(ms: ModeSystem) -> KerrMatrix:
    fp = ms.f_lin * ms.p
    chi = np.outer(fp, fp) / (4 * ms.E_J)
    # outer() is symmetric up to rounding; enforce it exactly as stored
    chi = 0.5 * (chi + chi.T)
    km = KerrMatrix(ms.labels, chi, np.empty(0))
    return KerrMatrix(ms.labels, chi, dressed_frequencies(ms, km))


def dressed_frequencies(ms: ModeSystem, km: KerrMatrix) -> np.ndarray:
    """First-order corrected mode frequencies.

    f~_m = f_lin,m - alpha_m - 1/2 sum_{n != m} chi_mn, with the magnitude
    alpha_m = chi_mm / 2.  Equivalent to subtracting half of each row sum.
    """
    return ms.f_lin - 0.5 * km.chi.sum(axis=1)


def linear_modes(
    C: np.ndarray,
    inv_L: np.ndarray,
    junction_node: int,
    labels: Sequence[str],
    E_J: float,
) -> ModeSystem:
    """Normal modes of a linear LC network and their junction participations.

    Solves ``K v = w^2 C v`` with ``K = diag(inv_L)``.  The participation of
    mode m is the share of its inductive energy stored in the junction
    inductance at ``junction_node``.  Modes are returned in the order of
    ``labels``, matched to the node on which each eigenvector is largest.
    """
    C = np.asarray(C, dtype=float)
    K = np.diag(np.asarray(inv_L, dtype=float))
    w2, V = eigh(K, C)
    f = np.sqrt(w2) / (2 * np.pi)
    e_ind = (V**2) * np.diag(K)[:, None]
    p = e_ind[junction_node] / e_ind.sum(axis=0)
    # mode k is labelled by the node carrying most of its inductive energy
    owner = np.argmax(e_ind / e_ind.sum(axis=0), axis=0)
    if len(set(owner)) != len(owner):
        owner = np.arange(len(f))
    order = np.argsort(owner)
    modes = [Mode(labels[owner[k]], float(f[k]), float(np.clip(p[k], 0, 1))) for k in order]
    return ModeSystem(tuple(modes), E_J)


@dataclass(frozen=True)
class EprLomRow:
    flux: float
    f_lom: float
    f_epr: float

    @property
    def rel_diff(self) -> float:
        return abs(self.f_epr - self.f_lom) / self.f_lom


@dataclass(frozen=True)
class EprLomReport:
    rows: tuple[EprLomRow, ...]

    @property
    def max_rel_diff(self) -> float:
        return max(r.rel_diff for r in self.rows)

    def as_table(self) -> np.ndarray:
        return np.array([(r.flux, r.f_lom, r.f_epr) for r in self.rows])


def epr_vs_lom_report(
    fluxes: Sequence[float],
    C: CapacitanceMatrix,
    junction: JosephsonElement,
    f_r: float,
    *,
    transmon: Literal["exact", "asymptotic"] = "exact",
    Z0: float = 50.0,
    **lom_kwargs,
) -> EprLomReport:
    """Qubit frequency versus flux from both quantization routes.

    LOM route: transmon f01 from (E_J(flux), E_C) dressed by the
    single-excitation Jaynes-Cummings pair with the LOM coupling g.

    EPR route: the same lumped network is linearized (junction replaced by
    L_J(flux), resonator by an LC with bare frequency ``f_r``), its normal
    modes and junction participations are computed, and the qubit mode is
    corrected to first order with the Kerr matrix.  With zero coupling and
    ``transmon="asymptotic"`` the two routes coincide identically.
    """
    rows = []
    for flux in fluxes:
        lom = lom_analysis(C, junction, f_r, flux=flux, Z0=Z0, **lom_kwargs)
        tp, cs = lom.transmon, lom.coupled
        f01 = tp.f01 if transmon == "exact" else transmon_asymptotic(tp.E_J, tp.E_C)[0]
        lo, hi = jc_eigenfrequencies(f01, f_r, cs.g)
        f_lom = lo if f01 <= f_r else hi

        L_J = lj_from_ej(tp.E_J)
        L_r = 1 / ((2 * np.pi * f_r) ** 2 * lom.C_r_sigma)
        Cm = np.array([[lom.C_sigma, -lom.C_qr], [-lom.C_qr, lom.C_r_sigma]])
        ms = linear_modes(Cm, [1 / L_J, 1 / L_r], 0, ("qubit", "resonator"), tp.E_J)
        km = kerr_matrix(ms)
        f_epr = float(km.f_dressed[ms.labels.index("qubit")])
        rows.append(EprLomRow(float(flux), float(f_lom), f_epr))
    return EprLomReport(tuple(rows))


def read_mode_csv(path: str | Path) -> ModeSystem:
    """Read a mode/participation report.

    First record ``E_J_Hz,<value>``, then a header ``label,f_lin_Hz,participation``
    and one row per mode.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows or rows[0][0].strip() != "E_J_Hz":
        raise ValueError(f"{path}: first record must be 'E_J_Hz,<value>'")
    E_J = float(rows[0][1])
    header = [c.strip() for c in rows[1]]
    if header != ["label", "f_lin_Hz", "participation"]:
        raise ValueError(f"{path}: unexpected header {header}")
    modes = [Mode(r[0].strip(), float(r[1]), float(r[2])) for r in rows[2:]]
    return ModeSystem(tuple(modes), E_J)


def write_mode_csv(ms: ModeSystem, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["E_J_Hz", repr(ms.E_J)])
        w.writerow(["label", "f_lin_Hz", "participation"])
        for m in ms.modes:
            w.writerow([m.label, repr(m.f_lin), repr(m.p)])

