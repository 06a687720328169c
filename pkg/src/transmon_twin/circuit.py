"""Lumped-element quantization of transmon-resonator circuits.

All public frequencies are ordinary frequencies in Hz and all energies are
expressed as E/h in Hz.  Angular frequencies only appear inside formulas.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from scipy import constants as sc
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq
from scipy.special import ellipk, mathieu_a, mathieu_b

__all__ = [
    "FLUX_QUANTUM",
    "ConvergenceError",
    "JosephsonElement",
    "CapacitanceMatrix",
    "TransmonParams",
    "CoupledSystem",
    "LomResult",
    "ej_from_lj",
    "lj_from_ej",
    "ec_from_csigma",
    "transmon_spectrum",
    "transmon_f01_batch",
    "transmon_asymptotic",
    "transmon_params",
    "squid_ej",
    "lom_analysis",
    "dispersive_shift",
    "jc_eigenfrequencies",
    "calibrate_lj",
    "cpw_line",
    "quarter_wave_freq",
    "quarter_wave_capacitance",
    "read_capacitance_csv",
    "write_capacitance_csv",
]

FLUX_QUANTUM = sc.h / (2 * sc.e)

# Minimum distance from a dispersive pole before the shift is rejected.
POLE_TOLERANCE = 1e6


class ConvergenceError(RuntimeError):
    """Raised when a truncated basis is too small for the requested accuracy."""


@dataclass(frozen=True)
class JosephsonElement:
    """A single junction or a two-junction SQUID.

    A single junction is specified by its inductance ``L_J`` (henry); a SQUID
    by its maximal Josephson energy ``E_J_max`` (Hz) and asymmetry ``d``.
    """

    kind: Literal["single", "symmetric-squid", "asymmetric-squid"] = "single"
    L_J: float | None = None
    E_J_max: float | None = None
    d: float = 0.0
    C_J: float = 0.0

    def __post_init__(self):
        if self.kind == "single":
            if self.L_J is None or not self.L_J > 0:
                raise ValueError("single junction needs L_J > 0")
        elif self.kind in ("symmetric-squid", "asymmetric-squid"):
            if self.E_J_max is None or not self.E_J_max > 0:
                raise ValueError("SQUID needs E_J_max > 0")
            if self.kind == "symmetric-squid" and self.d != 0:
                raise ValueError("symmetric SQUID must have d = 0")
        else:
            raise ValueError(f"unknown junction kind {self.kind!r}")
        if not 0 <= self.d < 1:
            raise ValueError("asymmetry d must lie in [0, 1)")
        if self.C_J < 0:
            raise ValueError("junction capacitance must be non-negative")

    def ej(self, flux: float = 0.0) -> float:
        """Josephson energy (Hz) at reduced flux ``flux`` = Phi/Phi0."""
        if self.kind == "single":
            return ej_from_lj(self.L_J)
        return float(squid_ej(self.E_J_max, self.d, flux))


@dataclass(frozen=True)
class CapacitanceMatrix:
    """Maxwell capacitance matrix with node labels (farad)."""

    labels: tuple[str, ...]
    C: np.ndarray

    def __post_init__(self):
        C = np.asarray(self.C, dtype=float)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "labels", tuple(self.labels))
        n = len(self.labels)
        if C.shape != (n, n):
            raise ValueError(f"matrix shape {C.shape} does not match {n} labels")
        if len(set(self.labels)) != n:
            raise ValueError("duplicate node labels")
        scale = np.max(np.abs(C))
        if not np.allclose(C, C.T, rtol=1e-6, atol=1e-6 * scale):
            raise ValueError("capacitance matrix is not symmetric")
        if np.any(np.diag(C) <= 0):
            raise ValueError("Maxwell matrix needs positive diagonal entries")
        off = C - np.diag(np.diag(C))
        if np.any(off > 1e-6 * scale):
            raise ValueError("Maxwell matrix needs non-positive off-diagonal entries")
        if np.any(C.sum(axis=1) < -1e-6 * scale):
            raise ValueError("Maxwell matrix rows must be diagonally dominant")

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"node {label!r} not in capacitance matrix {self.labels}") from None

    def scaled(self, s: float) -> "CapacitanceMatrix":
        return CapacitanceMatrix(self.labels, self.C * s)

    def without(self, label: str) -> "CapacitanceMatrix":
        """Drop a node (e.g. the ground conductor) from the matrix."""
        i = self.index(label)
        keep = [k for k in range(len(self.labels)) if k != i]
        return CapacitanceMatrix(
            tuple(self.labels[k] for k in keep), self.C[np.ix_(keep, keep)]
        )


@dataclass(frozen=True)
class TransmonParams:
    E_J: float
    E_C: float
    f01: float
    alpha: float

    @property
    def ratio(self) -> float:
        return self.E_J / self.E_C


@dataclass(frozen=True)
class CoupledSystem:
    f_q: float
    f_r: float
    g: float
    alpha: float

    @property
    def delta(self) -> float:
        return self.f_q - self.f_r

    @property
    def dispersive(self) -> bool:
        """True when |Delta| > 10 g, i.e. the dispersive formulas apply."""
        return abs(self.delta) > 10 * self.g

    @property
    def chi(self) -> float:
        """Signed dispersive shift (Hz)."""
        return dispersive_shift(self.g, self.delta, self.alpha)


@dataclass(frozen=True)
class LomResult:
    transmon: TransmonParams
    coupled: CoupledSystem
    C_sigma: float
    C_r_sigma: float
    C_qr: float
    L_J: float | None = None
    extras: dict = field(default_factory=dict)


def ej_from_lj(L_J: float) -> float:
    """Josephson energy E_J/h (Hz) of a junction with inductance ``L_J`` (H)."""
    if not L_J > 0:
        raise ValueError(f"Josephson inductance must be positive, got {L_J}")
    return (FLUX_QUANTUM / (2 * np.pi)) ** 2 / (sc.h * L_J)


def lj_from_ej(E_J: float) -> float:
    if not E_J > 0:
        raise ValueError(f"Josephson energy must be positive, got {E_J}")
    return (FLUX_QUANTUM / (2 * np.pi)) ** 2 / (sc.h * E_J)


def ec_from_csigma(C_sigma: float) -> float:
    """Charging energy E_C/h = e^2 / (2 C h) in Hz."""
    if not C_sigma > 0:
        raise ValueError(f"capacitance must be positive, got {C_sigma}")
    return sc.e**2 / (2 * C_sigma * sc.h)


def _cpb_levels(E_J, E_C, n_levels, cutoff, n_g):
    n = np.arange(-cutoff, cutoff + 1, dtype=float)
    diag = 4 * E_C * (n - n_g) ** 2
    off = np.full(2 * cutoff, -E_J / 2)
    return eigh_tridiagonal(
        diag, off, eigvals_only=True, select="i", select_range=(0, n_levels - 1)
    )


def transmon_spectrum(
    E_J: float,
    E_C: float,
    n_levels: int = 4,
    charge_cutoff: int = 30,
    n_g: float = 0.0,
    check_convergence: bool = True,
) -> np.ndarray:
    """Lowest eigenvalues (Hz) of the Cooper-pair-box Hamiltonian.

    The Hamiltonian ``4 E_C (n - n_g)^2 - E_J cos(phi)`` is diagonalized in
    the charge basis ``n = -cutoff..cutoff``.  With ``check_convergence`` the
    spectrum is recomputed at twice the cutoff and a :class:`ConvergenceError`
    is raised if f01 moves by more than 1e-9 relative.

    Returns
    -------
    numpy.ndarray
        Level energies sorted ascending, with the ground state at its
        absolute value (not shifted to zero).
    """
    if E_J < 0 or not E_C > 0:
        raise ValueError("need E_J >= 0 and E_C > 0")
    if charge_cutoff < 10:
        raise ValueError("charge_cutoff must be at least 10")
    if not 1 <= n_levels <= 2 * charge_cutoff - 1:
        raise ValueError("n_levels must lie in [1, 2*charge_cutoff - 1]")
    levels = _cpb_levels(E_J, E_C, n_levels, charge_cutoff, n_g)
    if check_convergence and n_levels >= 2:
        ref = _cpb_levels(E_J, E_C, n_levels, 2 * charge_cutoff, n_g)
        f01, f01_ref = levels[1] - levels[0], ref[1] - ref[0]
        if abs(f01 - f01_ref) > 1e-9 * abs(f01_ref):
            raise ConvergenceError(
                f"charge cutoff {charge_cutoff} too small: f01 changes by "
                f"{abs(f01 - f01_ref) / abs(f01_ref):.2e} on doubling"
            )
    return levels


def transmon_f01_batch(E_J: np.ndarray, E_C: float) -> np.ndarray:
    """Exact n_g = 0 f01 for many Josephson energies at once.

    Used inside fit models where the transmon is evaluated hundreds of times
    per iteration.  At n_g = 0 the ground and first excited levels are
    E_C a_0(q) and E_C b_2(q), q = E_J/(2 E_C), Mathieu characteristic
    values, which agree with the charge-basis diagonalization to rounding.
    """
    q = np.atleast_1d(np.asarray(E_J, dtype=float)) / (2 * E_C)
    return E_C * (mathieu_b(2, q) - mathieu_a(0, q))


def transmon_asymptotic(E_J: float, E_C: float) -> tuple[float, float]:
    """Large-E_J/E_C estimate: f01 = sqrt(8 E_J E_C) - E_C and alpha = -E_C."""
    return math.sqrt(8 * E_J * E_C) - E_C, -E_C


def transmon_params(E_J: float, E_C: float, charge_cutoff: int = 30) -> TransmonParams:
    lv = transmon_spectrum(E_J, E_C, n_levels=3, charge_cutoff=charge_cutoff)
    f01 = lv[1] - lv[0]
    alpha = (lv[2] - lv[1]) - f01
    return TransmonParams(E_J=E_J, E_C=E_C, f01=f01, alpha=alpha)


def squid_ej(E_J_max, d, flux):
    """Effective Josephson energy of a (possibly asymmetric) dc SQUID.

    ``E_J(flux) = E_J_max |cos(pi flux)| sqrt(1 + d^2 tan^2(pi flux))`` with
    ``flux`` in units of Phi0.  Written in the equivalent form
    ``sqrt(cos^2 + d^2 sin^2)`` which is finite at half flux.
    """
    if not 0 <= d < 1:
        raise ValueError("asymmetry d must lie in [0, 1)")
    x = np.pi * np.asarray(flux, dtype=float)
    return E_J_max * np.sqrt(np.cos(x) ** 2 + d**2 * np.sin(x) ** 2)


def dispersive_shift(g: float, delta: float, alpha: float) -> float:
    """Transmon dispersive shift chi = g^2 alpha / (Delta (Delta + alpha)).

    Raises ``ValueError`` within 1 MHz of the resonance (Delta = 0) or of the
    straddling pole (Delta = -alpha).
    """
    if abs(delta) < POLE_TOLERANCE:
        raise ValueError(f"qubit and resonator are resonant (Delta = {delta:.3g} Hz)")
    if abs(delta + alpha) < POLE_TOLERANCE:
        raise ValueError(f"detuning sits on the straddling pole (Delta + alpha = {delta + alpha:.3g} Hz)")
    return g**2 * alpha / (delta * (delta + alpha))


def jc_eigenfrequencies(f_q, f_r, g):
    """Dressed single-excitation frequencies ``(f_minus, f_plus)``.

    Vectorized over ``f_q``/``f_r``.
    """
    if np.any(np.asarray(g) < 0):
        raise ValueError("coupling g must be non-negative")
    mean = 0.5 * (np.asarray(f_q) + np.asarray(f_r))
    half = 0.5 * np.sqrt((np.asarray(f_q) - np.asarray(f_r)) ** 2 + 4 * np.asarray(g) ** 2)
    return mean - half, mean + half


def quarter_wave_capacitance(f_r: float, Z0: float = 50.0) -> float:
    """Lumped capacitance of a lambda/4 resonator near resonance, pi/(4 w_r Z0)."""
    return np.pi / (4 * 2 * np.pi * f_r * Z0)


def lom_analysis(
    C: CapacitanceMatrix,
    junction: JosephsonElement,
    f_r: float,
    *,
    qubit: str = "qubit",
    coupler: str = "coupler",
    ground: str | None = "ground",
    flux: float = 0.0,
    resonator_capacitance: float | None = None,
    Z0: float = 50.0,
    charge_cutoff: int = 30,
) -> LomResult:
    """Qubit and coupling parameters from a Maxwell capacitance matrix.

    The qubit's total capacitance is the Maxwell diagonal entry of the qubit
    island (which already contains its coupler load) plus the junction
    capacitance.  The resonator side is the coupler node plus the lumped
    equivalent of the quarter-wave resonator (``pi / (4 w_r Z0)`` unless
    ``resonator_capacitance`` is given).  The coupling is

        g = 1/2 sqrt(f_q f_r) C_qr / sqrt(C_qSigma C_rSigma)

    with ``f_q`` the exact transmon f01 and ``f_r`` the dressed resonator
    frequency passed in.
    """
    if not f_r > 0:
        raise ValueError("resonator frequency must be positive")
    if ground is not None and ground in C.labels:
        C = C.without(ground)
    iq, ir = C.index(qubit), C.index(coupler)
    C_sigma = C.C[iq, iq] + junction.C_J
    C_qr = -C.C[iq, ir]
    if resonator_capacitance is None:
        resonator_capacitance = quarter_wave_capacitance(f_r, Z0)
    C_r_sigma = C.C[ir, ir] + resonator_capacitance
    if C_sigma * C_r_sigma - C_qr**2 <= 0:
        raise ValueError("capacitance reduction is singular")
    E_C = ec_from_csigma(C_sigma)
    E_J = junction.ej(flux)
    # a symmetric SQUID at half flux leaves only floating-point residue
    if E_J <= 1e-9 * (junction.E_J_max or E_J):
        raise ValueError(f"Josephson energy vanishes at flux {flux}")
    tp = transmon_params(E_J, E_C, charge_cutoff=charge_cutoff)
    g = 0.5 * math.sqrt(tp.f01 * f_r) * C_qr / math.sqrt(C_sigma * C_r_sigma)
    cs = CoupledSystem(f_q=tp.f01, f_r=f_r, g=g, alpha=tp.alpha)
    return LomResult(
        transmon=tp,
        coupled=cs,
        C_sigma=C_sigma,
        C_r_sigma=C_r_sigma,
        C_qr=C_qr,
        L_J=junction.L_J if junction.kind == "single" else None,
    )


def calibrate_lj(
    f_q_target: float,
    C: CapacitanceMatrix,
    f_r: float,
    *,
    C_J: float = 0.0,
    bracket: tuple[float, float] = (1e-9, 50e-9),
    tol: float = 1e3,
    **lom_kwargs,
) -> float:
    """Josephson inductance that puts the LOM qubit frequency at ``f_q_target``.

    f_q decreases monotonically with L_J, so the root is bracketed in
    ``bracket`` and refined with Brent's method (bisection safeguarded
    secant/inverse-quadratic steps).  Raises ``ValueError`` if the target is
    not bracketed; the final frequency error is checked against ``tol`` Hz.
    """

    def f_q(L):
        j = JosephsonElement("single", L_J=L, C_J=C_J)
        return lom_analysis(C, j, f_r, **lom_kwargs).transmon.f01

    lo, hi = bracket
    f_lo, f_hi = f_q(lo), f_q(hi)
    if not (min(f_lo, f_hi) <= f_q_target <= max(f_lo, f_hi)):
        raise ValueError(
            f"target {f_q_target:.6g} Hz not bracketed by L_J in "
            f"[{lo:.3g}, {hi:.3g}] H (f_q spans {f_hi:.6g}..{f_lo:.6g} Hz)"
        )
    L = brentq(lambda L: f_q(L) - f_q_target, lo, hi, xtol=1e-22, rtol=1e-14, maxiter=200)
    err = abs(f_q(L) - f_q_target)
    if err > tol:
        raise ConvergenceError(f"calibrated frequency off by {err:.3g} Hz")
    return L


def cpw_line(width: float, gap: float, eps_r: float) -> tuple[float, float]:
    """Characteristic impedance and effective permittivity of a CPW.

    Conformal mapping on an infinitely thick substrate:
    ``eps_eff = (1 + eps_r)/2`` and ``Z0 = 30 pi / sqrt(eps_eff) K(k')/K(k)``
    with ``k = w / (w + 2 s)``.
    """
    if not (width > 0 and gap > 0):
        raise ValueError("width and gap must be positive")
    if eps_r < 1:
        raise ValueError("relative permittivity must be >= 1")
    k = width / (width + 2 * gap)
    eps_eff = (1 + eps_r) / 2
    # scipy's ellipk takes the parameter m = k^2
    Z0 = 30 * np.pi / math.sqrt(eps_eff) * ellipk(1 - k**2) / ellipk(k**2)
    return float(Z0), eps_eff


def quarter_wave_freq(length: float, eps_eff: float) -> float:
    """Bare lambda/4 resonance c / (4 l sqrt(eps_eff)).

    This ignores the loading of the coupling claw and the feedline coupler,
    both of which pull the physical resonance lower.
    """
    if not length > 0:
        raise ValueError("length must be positive")
    return sc.c / (4 * length * math.sqrt(eps_eff))


def read_capacitance_csv(path: str | Path) -> CapacitanceMatrix:
    """Load a labelled Maxwell capacitance matrix (farads).

    The first row holds the column labels (its first cell is ignored); every
    following row starts with its node label.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if len(rows) < 2:
        raise ValueError(f"{path}: empty capacitance matrix")
    col_labels = [c.strip() for c in rows[0][1:]]
    row_labels = [r[0].strip() for r in rows[1:]]
    if col_labels != row_labels:
        raise ValueError(f"{path}: row labels {row_labels} differ from column labels {col_labels}")
    values = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    return CapacitanceMatrix(tuple(row_labels), values)


def write_capacitance_csv(C: CapacitanceMatrix, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node", *C.labels])
        for lab, row in zip(C.labels, C.C):
            w.writerow([lab, *(repr(float(v)) for v in row)])

