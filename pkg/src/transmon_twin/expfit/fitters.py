"""Parameter extraction for each experiment, built on :func:`lsq_fit`.

Every fitter starts from a deterministic heuristic guess (no random
restarts), so identical traces give identical results.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter1d
from scipy.signal import find_peaks

from ..circuit import ec_from_csigma, transmon_f01_batch
from .engine import FitError, FitResult, lsq_fit, propagate
from .models import (
    chevron_td_model,
    echo_model,
    flux_map_model,
    internal_q,
    ramsey_model,
    s21_notch_model,
    t1_model,
    two_tone_model,
)
from .traces import ExperimentTrace

__all__ = [
    "fit_resonator",
    "fit_two_tone",
    "fit_avoided_crossing",
    "fit_chevron",
    "fit_t1",
    "fit_ramsey",
    "fit_echo",
    "fit_trace",
    "DispersiveShift",
    "dispersive_shift_measurement",
]

INF = math.inf
TWO_PI = 2 * math.pi


def _wrap(a):
    return (a + math.pi) % TWO_PI - math.pi


def _smooth(y, n=5, axis=-1):
    if np.iscomplexobj(y):
        return _smooth(y.real, n, axis) + 1j * _smooth(y.imag, n, axis)
    return uniform_filter1d(np.asarray(y, dtype=float), n, axis=axis, mode="nearest")


def _noise_level(z, axis=-1) -> float:
    """Robust per-point noise from first differences."""
    d = np.abs(np.diff(z, axis=axis)).ravel()
    return float(np.median(d) / 0.6745 / math.sqrt(2))


def _half_width(x, y, i0) -> float:
    """Half width at half maximum of a positive peak y around index i0."""
    half = y[i0] / 2
    lo = i0
    while lo > 0 and y[lo] > half:
        lo -= 1
    hi = i0
    while hi < len(y) - 1 and y[hi] > half:
        hi += 1
    return max((x[hi] - x[lo]) / 2, abs(x[1] - x[0]))


def _set_wrapped(r: FitResult, name: str) -> FitResult:
    from dataclasses import replace

    v = r.values.copy()
    v[r.names.index(name)] = _wrap(v[r.names.index(name)])
    return replace(r, values=v)


# -- resonator ---------------------------------------------------------------


def _notch_guess(f, z):
    n = f.size
    k = max(n // 10, 5)
    edge = np.r_[0:k, n - k : n]
    ph = np.unwrap(np.angle(z))
    tau = -np.polyfit(f[edge], ph[edge], 1)[0] / TWO_PI
    z1 = z * np.exp(2j * np.pi * f * tau)
    a = float(np.mean(np.abs(z1[edge])))
    theta = float(np.angle(np.mean(z1[edge])))
    d = 1 - _smooth(z1 / (a * np.exp(1j * theta)), 5)
    dm = np.abs(d)
    i0 = int(np.argmax(dm[2:-2])) + 2
    depth = float(dm[i0])
    # |1 - S| falls to depth/sqrt(2) at the half-power points, i.e. at f_r/(2 Q_l)
    hw = _half_width(f, dm**2, i0)
    f_r = float(f[i0])
    Q_l = f_r / (2 * hw)
    return dict(f_r=f_r, Q_l=Q_l, Q_c=Q_l / min(depth, 0.99), phi=float(np.angle(d[i0])), a=a,
                theta=theta, tau=float(tau))


def fit_resonator(trace: ExperimentTrace) -> FitResult:
    """Fit the notch model to a complex S21 trace.

    Returns parameters ``f_r, Q_l, Q_c, phi, a, theta_ref, tau`` and derived
    ``Q_i`` (from 1/Q_i = 1/Q_l - cos(phi)/|Q_c|) and ``theta`` (the phase
    offset at f = 0, wrapped).  ``theta_ref`` is the phase at the trace
    centre ``flags['f_ref']``, which decorrelates it from the delay.

    Raises
    ------
    ValueError
        If the trace is not complex or spans fewer than 5 linewidths.
    """
    if not trace.is_complex:
        raise ValueError("resonator fits need complex S21 data")
    f, z = trace.axes[0], trace.response
    g = _notch_guess(f, z)
    kappa = g["f_r"] / g["Q_l"]
    if f[-1] - f[0] < 5 * kappa:
        raise ValueError(f"trace spans {(f[-1] - f[0]) / kappa:.1f} linewidths; need at least 5")
    f_ref = float(0.5 * (f[0] + f[-1]))

    def model(x, f_r, Q_l, Q_c, phi, a, theta_ref, tau):
        return s21_notch_model(x, f_r, Q_l, Q_c, phi, a, theta_ref + TWO_PI * f_ref * tau, tau)

    p0 = dict(f_r=g["f_r"], Q_l=g["Q_l"], Q_c=g["Q_c"], phi=g["phi"], a=g["a"],
              theta_ref=_wrap(g["theta"] - TWO_PI * f_ref * g["tau"]), tau=g["tau"])
    p0["phi"] = float(np.clip(p0["phi"], -1.4, 1.4))
    r = lsq_fit(
        model, p0, f, z, trace.weights(),
        bounds=dict(f_r=(f[0], f[-1]), Q_l=(0, INF), Q_c=(0, INF), phi=(-math.pi / 2, math.pi / 2), a=(0, INF)),
        scales=dict(f_r=kappa, phi=0.1, theta_ref=0.1, tau=1 / (TWO_PI * (f[-1] - f[0]))),
    )
    Qi = propagate(r, lambda p: internal_q(p["Q_l"], p["Q_c"], p["phi"]))
    th = propagate(r, lambda p: p["theta_ref"] + TWO_PI * f_ref * p["tau"])
    r = r.with_derived(Q_i=Qi, theta=(_wrap(th[0]), th[1])).with_flags(f_ref=f_ref)
    return _set_wrapped(r, "theta_ref")


# -- two-tone spectroscopy ---------------------------------------------------


def _onset(P, col) -> float:
    """Power at which a line reaches half of its largest height."""
    c = col / max(col.max(), 1e-300)
    above = np.nonzero(c >= 0.5)[0]
    if above.size == 0:
        return float(P[-1])
    i = above[0]
    if i == 0:
        return float(P[0])
    return float(np.interp(0.5, [c[i - 1], c[i]], [P[i - 1], P[i]]))


def fit_two_tone(trace: ExperimentTrace, *, min_prominence: float = 6.0) -> FitResult:
    """Extract f01 and alpha from a power-dependent two-tone map.

    Peak assignment: the line present at the lowest powers is 0-1; the
    nearest resolved line below it at the highest power is the two-photon
    0-2 line at f01 + alpha/2; the three-photon line is expected at
    f01 + alpha.  ``min_prominence`` is in units of the estimated noise.

    Raises
    ------
    FitError
        With "insufficient peaks" if no multiphoton line is resolved below f01.
    """
    P, f = trace.axes
    Z = np.asarray(trace.response, dtype=float)
    off = float(np.median(Z))
    sig = _noise_level(Z, axis=1)
    df = f[1] - f[0]
    prof = _smooth(Z - off, 3).sum(axis=0)
    i1 = int(np.argmax(prof))
    f01 = float(f[i1])
    gamma = _half_width(f, prof, i1)
    top = _smooth(Z[-1] - off, 3)
    peaks, _ = find_peaks(top, prominence=min_prominence * sig / math.sqrt(3))
    below = [int(j) for j in peaks if f[j] < f01 - max(4 * gamma, 3 * df)]
    if not below:
        raise FitError("insufficient peaks: no multiphoton line resolved below f01; alpha undetermined")
    j2 = max(below)
    alpha = 2 * (float(f[j2]) - f01)
    amp = float(Z.max() - off)
    p0 = dict(f01=f01, alpha=alpha, gamma=gamma, P1=_onset(P, Z[:, i1] - off), P2=_onset(P, Z[:, j2] - off))
    lines3 = f01 + alpha > f[0] + 2 * gamma
    if lines3:
        j3 = int(np.argmin(np.abs(f - (f01 + alpha))))
        p0["P3"] = _onset(P, _smooth(Z - off, 3)[:, j3])
    p0 |= dict(amp=amp, offset=off)
    Plo, Phi = float(P[0]) - 30, float(P[-1]) + 30
    span = float(f[-1] - f[0])

    def model(x, f01, alpha, gamma, P1, P2, P3=INF, amp=1.0, offset=0.0):
        return two_tone_model(x, f01, alpha, gamma, P1, P2, P3, amp, offset)

    bounds = dict(f01=(f[0], f[-1]), alpha=(-2 * span, 0), gamma=(0, span), amp=(0, INF),
                  **{k: (Plo, Phi) for k in ("P1", "P2", "P3")})
    for k in ("P1", "P2", "P3"):
        if k in p0:
            p0[k] = float(np.clip(p0[k], Plo + 1, Phi - 1))
    p0["alpha"] = float(np.clip(p0["alpha"], -2 * span + df, -df))
    return lsq_fit(model, p0, trace.x, Z, trace.weights(), bounds=bounds,
                   scales=dict(f01=gamma, alpha=gamma, gamma=gamma, P1=3, P2=3, P3=3, amp=amp, offset=amp))


# -- flux map ----------------------------------------------------------------


def _crossings(V, fd, min_jump):
    jumps = np.abs(np.diff(fd))
    order = np.argsort(jumps)[::-1]
    picked = []
    for i in order:
        if jumps[i] < min_jump:
            break
        if all(abs(i - j) > 3 for j in picked):
            picked.append(int(i))
        if len(picked) == 2:
            break
    return sorted(0.5 * (V[i] + V[i + 1]) for i in picked), [float(jumps[i]) for i in picked]


def fit_avoided_crossing(trace: ExperimentTrace, *, E_C: float | None = None, C_sigma: float | None = None,
                         d: float = 0.0) -> FitResult:
    """Fit a resonator-vs-flux map near the qubit-resonator avoided crossing.

    The charging energy is taken as known (``E_C`` in Hz or ``C_sigma`` in
    F); ``g``, ``E_J_max``, the flux calibration ``V_per_phi0``/``V0``, the
    bare ``f_r``, ``kappa``, ``depth`` and ``baseline`` are fitted.  When the
    map shows no avoided crossing, or g cannot be separated from zero, the
    bare-resonator fit is returned with ``flags['degenerate_g'] = True``.
    """
    if (E_C is None) == (C_sigma is None):
        raise ValueError("give exactly one of E_C or C_sigma")
    if E_C is None:
        E_C = ec_from_csigma(C_sigma)
    V, f = trace.axes
    Z = np.asarray(trace.response, dtype=float)
    w = trace.weights()
    base = float(np.median(Z))
    Zs = _smooth(Z, 3, axis=1)
    fd = f[np.argmin(Zs, axis=1)]
    depth = float(base - np.median(Zs.min(axis=1)))
    iend = 0 if abs(fd[0] - np.median(fd)) < abs(fd[-1] - np.median(fd)) else len(V) - 1
    kappa = 2 * _half_width(f, base - Zs[iend], int(np.argmin(Zs[iend])))
    f_r = float(np.median(fd))

    def bare(x, f_r, kappa, depth, baseline):
        row = baseline - depth / (1 + ((x[1] - f_r) / (kappa / 2)) ** 2)
        return np.broadcast_to(row, (x[0].size, x[1].size))

    def degenerate(reason: str) -> FitResult:
        r = lsq_fit(bare, dict(f_r=f_r, kappa=kappa, depth=depth, baseline=base), trace.x, Z, w,
                    bounds=dict(kappa=(0, INF), depth=(0, INF)), scales=dict(f_r=kappa))
        return r.with_flags(degenerate_g=True, reason=reason)

    Vc, jumps = _crossings(V, fd, max(3 * kappa, 4 * (f[1] - f[0])))
    if not Vc:
        return degenerate("no avoided crossing in the map")
    g0 = max(jumps) / 2
    if len(Vc) == 2:
        V0 = 0.5 * (Vc[0] + Vc[1])
        half = 0.5 * (Vc[1] - Vc[0])
    else:
        V0 = float(V[np.argmin(fd)])
        half = abs(Vc[0] - V0)
        if half == 0:
            return degenerate("flux offset undetermined from a single crossing")
    ej = np.geomspace(5 * E_C, 600 * E_C, 800)
    f01 = transmon_f01_batch(ej, E_C)
    ej_star = float(np.interp(f_r, f01, ej))
    best = None
    for fq_max in f_r + np.geomspace(0.5 * g0, 3e9, 40):
        ejm = float(np.interp(fq_max, f01, ej))
        ratio = (ej_star / ejm) ** 2
        if not 0 < ratio < 1:
            continue
        # |cos(pi x)| sqrt(1 + d^2 tan^2) = ratio^(1/2) at the crossing
        cx = math.sqrt(max((ratio - d**2) / (1 - d**2), 1e-12))
        Vp = math.pi * half / math.acos(min(cx, 1.0))
        p = dict(E_J_max=ejm, g=g0, f_r=f_r, V_per_phi0=Vp, V0=V0, kappa=kappa, depth=depth, baseline=base)
        r = (flux_map_model(trace.x, E_C=E_C, d=d, **p) - Z) / w
        c = float(np.sum(r * r))
        if best is None or c < best[0]:
            best = (c, p)
    if best is None:
        return degenerate("no qubit frequency consistent with the crossings")

    def model(x, E_J_max, g, f_r, V_per_phi0, V0, kappa, depth, baseline):
        return flux_map_model(x, E_J_max, E_C, g, f_r, V_per_phi0, V0, kappa, depth, baseline, d)

    p0 = best[1]
    try:
        r = lsq_fit(model, p0, trace.x, Z, w,
                    bounds=dict(E_J_max=(0, INF), g=(0, INF), V_per_phi0=(0, INF), kappa=(0, INF), depth=(0, INF)),
                    scales=dict(E_J_max=0.01 * p0["E_J_max"], g=0.1 * g0, f_r=kappa, V_per_phi0=0.01 * p0["V_per_phi0"],
                                V0=0.01 * p0["V_per_phi0"], kappa=kappa, depth=depth, baseline=depth))
    except FitError as exc:
        return degenerate(str(exc))
    if r["g"] < 3 * r.error("g"):
        return r.with_flags(degenerate_g=True, reason="g consistent with zero")
    return r.with_derived(E_C=(E_C, 0.0)).with_flags(degenerate_g=False)


# -- chevron -----------------------------------------------------------------


def fit_chevron(trace: ExperimentTrace) -> FitResult:
    """Fit a Rabi chevron (duration x drive frequency) for Omega and f01.

    T1 and T2 enter the map only through 1/T_d = 1/(2 T1) + 1/(2 T2), so the
    single decay time ``T_d`` is fitted.
    """
    t, fd = trace.axes
    Z = np.asarray(trace.response, dtype=float)
    w = trace.weights()
    cm = Z.mean(axis=0)
    off = float(np.min(cm))
    j0 = int(np.argmax(cm))
    W = _half_width(fd, cm - off, j0)
    lor = lsq_fit(lambda x, f0, hw, A, c: c + A / (1 + ((x - f0) / hw) ** 2),
                  dict(f0=float(fd[j0]), hw=W, A=float(cm[j0] - off), c=off), fd, cm,
                  bounds=dict(hw=(0, INF)), scales=dict(f0=W, hw=W))
    f01 = lor["f0"]
    y = Z[:, int(np.argmin(np.abs(fd - f01)))]
    nfft = 16 * t.size
    spec = np.abs(np.fft.rfft(y - y.mean(), nfft))
    freqs = np.fft.rfftfreq(nfft, t[1] - t[0])
    Om = float(freqs[1 + np.argmax(spec[1:])])
    if Om * (t[-1] - t[0]) < 1:
        Om = lor["hw"]
    best = None
    for Td in (t[-1] - t[0]) * np.geomspace(0.05, 5, 15):
        m = chevron_td_model(trace.x, Om, f01, Td)
        A = np.column_stack([(m / w).ravel(), (np.ones_like(m) / w).ravel()])
        coef, *_ = np.linalg.lstsq(A, (Z / w).ravel(), rcond=None)
        c = float(np.sum((A @ coef - (Z / w).ravel()) ** 2))
        if best is None or c < best[0]:
            best = (c, Td, coef)
    _, Td, (amp, off) = best
    amp = max(float(amp), 1e-6)
    return lsq_fit(chevron_td_model, dict(Omega=Om, f01=f01, T_d=Td, amp=amp, offset=float(off)), trace.x, Z, w,
                   bounds=dict(Omega=(0, INF), T_d=(0, INF), amp=(0, INF)),
                   scales=dict(Omega=0.05 * Om, f01=0.05 * Om, T_d=0.2 * Td, amp=amp, offset=amp))


# -- coherence ---------------------------------------------------------------


def _exp_guess(t, y):
    n = y.size
    tail = float(y[-max(n // 10, 3):].mean())
    head = float(y[: max(n // 20, 2)].mean())
    amp = head - tail
    yn = (y - tail) / amp if amp != 0 else np.zeros_like(y)
    mask = (yn > 0.2) & (yn < 1.5)
    T = (t[-1] - t[0]) / 3
    if mask.sum() >= 3:
        slope = np.polyfit(t[mask], np.log(yn[mask]), 1)[0]
        if slope < 0:
            T = -1 / slope
    return T, amp, tail


def _decay_fit(model, name, trace, p_extra=None):
    t, y = trace.axes[0], np.asarray(trace.response, dtype=float)
    T, amp, off = _exp_guess(t, y)
    p0 = {name: T, "amp": amp, "offset": off}
    r = lsq_fit(model, p0, t, y, trace.weights(), bounds={name: (0, INF)},
                scales={name: 0.1 * T, "amp": abs(amp) or 1.0, "offset": abs(amp) or 1.0})
    return _span_flag(r, t, name)


def _span_flag(r: FitResult, t, name) -> FitResult:
    short = bool(t[-1] - t[0] < 2 * r[name])
    if short:
        warnings.warn(f"delay span is shorter than 2 {name}; the decay constant is poorly constrained",
                      RuntimeWarning, stacklevel=3)
    return r.with_flags(short_span=short)


def fit_t1(trace: ExperimentTrace) -> FitResult:
    """P(t) = offset + amp exp(-t/T1)."""
    return _decay_fit(t1_model, "T1", trace)


def fit_echo(trace: ExperimentTrace) -> FitResult:
    """P(t) = offset + amp exp(-t/T2)."""
    return _decay_fit(echo_model, "T2", trace)


def fit_ramsey(trace: ExperimentTrace) -> FitResult:
    """P(t) = offset + amp cos(2 pi delta t + phase) exp(-t/T2*), delta >= 0."""
    t, y = trace.axes[0], np.asarray(trace.response, dtype=float)
    w = trace.weights()
    dt = t[1] - t[0]
    nfft = 16 * t.size
    spec = np.abs(np.fft.rfft(y - y.mean(), nfft))
    freqs = np.fft.rfftfreq(nfft, dt)
    delta = float(freqs[1 + np.argmax(spec[1:])])
    best = None
    for T in (t[-1] - t[0]) * np.geomspace(0.02, 2, 20):
        e = np.exp(-t / T)
        A = np.column_stack([np.ones_like(t), e * np.cos(TWO_PI * delta * t), e * np.sin(TWO_PI * delta * t)])
        A = A / np.broadcast_to(w, y.shape)[:, None]
        coef, *_ = np.linalg.lstsq(A, y / w, rcond=None)
        c = float(np.sum((A @ coef - y / w) ** 2))
        if best is None or c < best[0]:
            best = (c, T, coef)
    _, T, (off, c1, c2) = best
    amp = float(math.hypot(c1, c2))
    p0 = dict(T2s=T, delta=delta, phase=math.atan2(-c2, c1), amp=amp, offset=float(off))
    nyq = 0.5 / dt
    p0["delta"] = float(np.clip(delta, 1e-6 * nyq, 0.999 * nyq))
    r = lsq_fit(ramsey_model, p0, t, y, w, bounds=dict(T2s=(0, INF), delta=(0, nyq), amp=(0, INF)),
                scales=dict(T2s=0.1 * T, delta=0.1 / (t[-1] - t[0]), phase=0.1, amp=amp, offset=amp))
    return _span_flag(_set_wrapped(r, "phase"), t, "T2s")


FITTERS = {
    "notch": fit_resonator,
    "two_tone": fit_two_tone,
    "flux_map": fit_avoided_crossing,
    "chevron": fit_chevron,
    "t1": fit_t1,
    "ramsey": fit_ramsey,
    "echo": fit_echo,
}


def fit_trace(trace: ExperimentTrace, **kw) -> FitResult:
    """Dispatch on ``trace.kind``."""
    return FITTERS[trace.kind](trace, **kw)


# -- dispersive shift --------------------------------------------------------


@dataclass(frozen=True)
class DispersiveShift:
    chi: float
    sigma: float
    f_ground: float
    f_excited: float
    distortion_warning: bool
    residual_ratio: float

    @property
    def sign(self) -> int:
        return int(np.sign(self.chi))


def dispersive_shift_measurement(ground: ExperimentTrace, excited: ExperimentTrace,
                                 warn_ratio: float = 5.0) -> DispersiveShift:
    """chi = (f_r|g - f_r|e)/2 from two notch fits.

    ``distortion_warning`` is set when the excited-state fit's reduced
    chi-square exceeds the ground-state one by more than ``warn_ratio``,
    the signature of a lineshape distorted by qubit decay during readout.
    """
    rg, re_ = fit_resonator(ground), fit_resonator(excited)
    chi = 0.5 * (rg["f_r"] - re_["f_r"])
    sig = 0.5 * math.hypot(rg.error("f_r"), re_.error("f_r"))
    ratio = re_.chi2_red / rg.chi2_red if rg.chi2_red > 0 else (INF if re_.chi2_red > 0 else 1.0)
    return DispersiveShift(chi, sig, rg["f_r"], re_["f_r"], bool(ratio > warn_ratio), float(ratio))
