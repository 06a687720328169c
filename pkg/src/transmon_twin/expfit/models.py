"""Forward models of the characterization experiments.

All frequencies are ordinary frequencies in Hz, times in seconds.  2D models
take a tuple of axes ``(a0, a1)`` and return arrays shaped
``(len(a0), len(a1))``.
"""

from __future__ import annotations

import numpy as np

from ..circuit import squid_ej, transmon_f01_batch
from ..qnd import QubitNoise, direct_detection_prob

__all__ = [
    "s21_notch_model",
    "internal_q",
    "two_tone_model",
    "flux_branches",
    "flux_map_model",
    "chevron_model",
    "chevron_td_model",
    "t1_model",
    "ramsey_model",
    "echo_model",
]


def s21_notch_model(f, f_r, Q_l, Q_c, phi=0.0, a=1.0, theta=0.0, tau=0.0):
    """Notch-type resonator transmission with impedance-mismatch rotation.

    S21 = a e^{i theta} e^{-2 pi i f tau} [1 - (Q_l/|Q_c|) e^{i phi} / (1 + 2i Q_l (f/f_r - 1))]
    """
    f = np.asarray(f, dtype=float)
    env = a * np.exp(1j * (theta - 2 * np.pi * f * tau))
    return env * (1 - (Q_l / Q_c) * np.exp(1j * phi) / (1 + 2j * Q_l * (f / f_r - 1)))


def internal_q(Q_l, Q_c, phi=0.0):
    """1/Q_i = 1/Q_l - Re(e^{i phi} / |Q_c|)."""
    return 1 / (1 / Q_l - np.cos(phi) / Q_c)


def _lorentz(x, x0, hw):
    return 1 / (1 + ((x - x0) / hw) ** 2)


def two_tone_model(axes, f01, alpha, gamma, P1, P2, P3=np.inf, amp=1.0, offset=0.0, shift=0.0):
    """Two-tone spectroscopy map over (drive power [dB], drive frequency).

    Lorentzian lines of half width ``gamma`` at the k-photon frequencies
    f0k/k: f01, f01 + alpha/2 and f01 + alpha.  Line k saturates with power
    as s/(1+s), s = 10^{k (P - P_k)/10}.  ``shift`` is an optional linear
    frequency shift per dB of every line (AC Stark, default off).
    """
    P, f = (np.asarray(a, dtype=float) for a in axes)
    P = P[:, None]
    out = np.full((P.shape[0], f.size), float(offset))
    for k, Pk, fk in ((1, P1, f01), (2, P2, f01 + alpha / 2), (3, P3, f01 + alpha)):
        if not np.isfinite(Pk):
            continue
        s = 10 ** (k * (P - Pk) / 10)
        out = out + amp * s / (1 + s) * _lorentz(f[None, :], fk + shift * P, gamma)
    return out


def flux_branches(V, E_J_max, E_C, g, f_r, V_per_phi0, V0, d=0.0):
    """Bare qubit and dressed branch frequencies along a voltage sweep.

    Returns ``(f_q, f_minus, f_plus, w_minus, w_plus)`` where w is the
    resonator weight of each dressed state.
    """
    flux = (np.asarray(V, dtype=float) - V0) / V_per_phi0
    f_q = transmon_f01_batch(squid_ej(E_J_max, d, flux), E_C)
    mean = 0.5 * (f_q + f_r)
    split = np.sqrt((f_q - f_r) ** 2 + 4 * g**2)
    f_m, f_p = mean - split / 2, mean + split / 2
    safe = np.where(split > 0, split, 1.0)
    w_p = np.where(split > 0, (f_p - f_q) / safe, 0.5)
    return f_q, f_m, f_p, 1 - w_p, w_p


def flux_map_model(axes, E_J_max, E_C, g, f_r, V_per_phi0, V0, kappa, depth, baseline=1.0, d=0.0):
    """|S21| over (bias voltage, probe frequency) near an avoided crossing.

    Each dressed branch contributes a Lorentzian dip of full width ``kappa``
    weighted by its resonator content; the bare qubit is the asymmetric
    SQUID transmon with E_J(V) = squid_ej(E_J_max, d, (V - V0)/V_per_phi0).
    """
    V, f = (np.asarray(a, dtype=float) for a in axes)
    _, f_m, f_p, w_m, w_p = flux_branches(V, E_J_max, E_C, g, f_r, V_per_phi0, V0, d)
    hw = kappa / 2
    dips = w_m[:, None] * _lorentz(f[None, :], f_m[:, None], hw) + w_p[:, None] * _lorentz(
        f[None, :], f_p[:, None], hw
    )
    return baseline - depth * dips


def chevron_td_model(axes, Omega, f01, T_d, amp=1.0, offset=0.0):
    """Rabi chevron over (pulse duration, drive frequency) with one decay time."""
    t, fd = (np.asarray(a, dtype=float) for a in axes)
    # T1 = T2 = T_d reproduces a single envelope rate 1/T_d
    P = direct_detection_prob(Omega, fd[None, :] - f01, t[:, None], QubitNoise(T1=T_d, T2=T_d))
    return offset + amp * P


def chevron_model(axes, Omega, f01, T1, T2, amp=1.0, offset=0.0):
    """Rabi chevron; T1 and T2 enter only through 1/T_d = 1/(2 T1) + 1/(2 T2)."""
    return chevron_td_model(axes, Omega, f01, 1 / (0.5 / T1 + 0.5 / T2), amp, offset)


def t1_model(t, T1, amp=1.0, offset=0.0):
    return offset + amp * np.exp(-np.asarray(t, dtype=float) / T1)


def ramsey_model(t, T2s, delta, phase=0.0, amp=0.5, offset=0.5):
    t = np.asarray(t, dtype=float)
    return offset + amp * np.cos(2 * np.pi * delta * t + phase) * np.exp(-t / T2s)


def echo_model(t, T2, amp=0.5, offset=0.5):
    return offset + amp * np.exp(-np.asarray(t, dtype=float) / T2)
