"""Monte-Carlo model of repeated QND parity measurements of cavity photons.

A qubit dispersively coupled to a storage cavity precesses at 2 n xi per
unit time when n photons are stored; an m-qubit GHZ state precesses m times
faster.  A Ramsey sequence of length t converts the phase
phi = 2 n m (2 pi xi) t into a population, so with t = 1/(4 m xi) a single
photon flips the qubit.  Repeating the measurement N times and voting
suppresses readout-error dark counts.

Randomness is counter based: trials are grouped in fixed-size chunks and
chunk k draws from ``SeedSequence(seed, spawn_key=(k,))``, so results do not
depend on how chunks are scheduled across workers.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
from scipy.stats import binom, binomtest

__all__ = [
    "StorageCavity",
    "QubitNoise",
    "QndProtocol",
    "QndRun",
    "Proportion",
    "DetectionStats",
    "parity_phase",
    "ghz_pi_time",
    "bit_probability",
    "simulate_qnd_run",
    "simulate_batch",
    "detect",
    "detect_batch",
    "majority_dark_rate",
    "dark_count_rate",
    "efficiency",
    "roc_curve",
    "direct_detection_prob",
    "sweep",
    "write_sweep_csv",
]

CHUNK = 8192
Rule = Literal["majority", "log-likelihood"]


@dataclass(frozen=True)
class StorageCavity:
    f_s: float
    Q_s: float
    n_init: int = 1
    n_thermal: float = 0.0

    def __post_init__(self):
        if not (self.f_s > 0 and self.Q_s > 0):
            raise ValueError("f_s and Q_s must be positive")
        if self.n_init < 0 or self.n_thermal < 0:
            raise ValueError("photon numbers must be non-negative")

    @property
    def tau(self) -> float:
        """Photon lifetime Q_s / omega_s, s."""
        return self.Q_s / (2 * math.pi * self.f_s)


@dataclass(frozen=True)
class QubitNoise:
    """Qubit imperfections.

    ``readout_error`` is P(read 1 | 0); ``readout_error_10`` is P(read 0 | 1)
    and defaults to the symmetric value.
    """

    T1: float = math.inf
    T2: float = math.inf
    readout_error: float = 0.0
    reset_error: float = 0.0
    readout_error_10: float | None = None

    def __post_init__(self):
        if not (self.T1 > 0 and self.T2 > 0):
            raise ValueError("T1 and T2 must be positive")
        if self.T2 > 2 * self.T1:
            raise ValueError("T2 cannot exceed 2 T1")
        for p in (self.readout_error, self.reset_error, self.eps10):
            if not 0 <= p <= 1:
                raise ValueError("probabilities must lie in [0, 1]")

    @property
    def eps10(self) -> float:
        return self.readout_error if self.readout_error_10 is None else self.readout_error_10


@dataclass(frozen=True)
class QndProtocol:
    xi: float
    t_parity: float
    n_repeats: int
    m: int = 1
    rule: Rule = "majority"
    t_readout: float = 0.0

    def __post_init__(self):
        if not self.t_parity > 0:
            raise ValueError("t_parity must be positive")
        if self.n_repeats < 1 or self.m < 1:
            raise ValueError("n_repeats and m must be >= 1")
        if self.rule not in ("majority", "log-likelihood"):
            raise ValueError(f"unknown rule {self.rule!r}")
        if self.t_readout < 0:
            raise ValueError("t_readout must be non-negative")

    @property
    def interval(self) -> float:
        return self.t_parity + self.t_readout


def parity_phase(n, protocol: QndProtocol):
    """Accumulated Ramsey phase 2 n m (2 pi xi) t, rad."""
    n = np.asarray(n)
    if np.any(n < 0):
        raise ValueError("photon number must be non-negative")
    out = 2 * n * protocol.m * 2 * np.pi * protocol.xi * protocol.t_parity
    return float(out) if out.ndim == 0 else out


def ghz_pi_time(xi: float, m: int = 1) -> float:
    """Shortest Ramsey time giving phase pi for one photon."""
    return 1 / (4 * m * xi)


def bit_probability(n, protocol: QndProtocol, noise: QubitNoise):
    """Probability that one parity repeat reads 1 with ``n`` photons present.

    Ramsey population (1 - c cos(phi))/2 with contrast c = exp(-t/T2), a
    reset error that inverts the sequence, T1 decay of |1> during readout and
    the readout confusion matrix.
    """
    c = math.exp(-protocol.t_parity / noise.T2)
    p1 = 0.5 * (1 - c * np.cos(parity_phase(n, protocol)))
    r = noise.reset_error
    p1 = (1 - r) * p1 + r * (1 - p1)
    p1 = p1 * math.exp(-protocol.t_readout / noise.T1)
    return p1 * (1 - noise.eps10) + (1 - p1) * noise.readout_error


@dataclass(frozen=True)
class QndRun:
    bits: np.ndarray  # (N,) uint8
    photons: np.ndarray  # (N,) photons present at the start of each repeat


def _root(seed) -> np.random.SeedSequence:
    ent = tuple(seed) if isinstance(seed, (tuple, list)) else (int(seed),)
    return np.random.SeedSequence(list(ent))


def _chunk(protocol, cavity, noise, n0, size, ss):
    rng = np.random.default_rng(ss)
    n = np.full(size, n0, dtype=np.int64)
    if cavity is not None and cavity.n_thermal > 0:
        n += rng.poisson(cavity.n_thermal, size)
    survive = 1.0 if cavity is None else math.exp(-protocol.interval / cavity.tau)
    N = protocol.n_repeats
    bits = np.empty((size, N), dtype=np.uint8)
    photons = np.empty((size, N), dtype=np.int64)
    for k in range(N):
        photons[:, k] = n
        bits[:, k] = rng.random(size) < bit_probability(n, protocol, noise)
        n = rng.binomial(n, survive)
    return bits, photons


def simulate_batch(
    protocol: QndProtocol,
    cavity: StorageCavity | None,
    noise: QubitNoise,
    trials: int,
    seed,
    *,
    n_init: int | None = None,
    workers: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Bit streams and photon traces for ``trials`` independent runs.

    ``n_init`` overrides the cavity's initial photon number (``cavity=None``
    means no photons and no decay).  Output is identical for any ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n0 = n_init if n_init is not None else (cavity.n_init if cavity is not None else 0)
    root = _root(seed)
    sizes = [min(CHUNK, trials - s) for s in range(0, trials, CHUNK)]
    seqs = [np.random.SeedSequence(root.entropy, spawn_key=(k,)) for k in range(len(sizes))]
    jobs = list(zip(sizes, seqs))

    def run(job):
        return _chunk(protocol, cavity, noise, n0, *job)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def simulate_qnd_run(protocol: QndProtocol, cavity: StorageCavity | None, noise: QubitNoise, seed) -> QndRun:
    """One run of ``protocol.n_repeats`` parity measurements."""
    bits, photons = simulate_batch(protocol, cavity, noise, 1, seed)
    return QndRun(bits[0], photons[0])


def _llr_weights(protocol: QndProtocol, noise: QubitNoise) -> tuple[float, float]:
    p0 = float(bit_probability(0, protocol, noise))
    p1 = float(bit_probability(1, protocol, noise))
    eps = 1e-300
    w1 = math.log(max(p1, eps)) - math.log(max(p0, eps))
    w0 = math.log(max(1 - p1, eps)) - math.log(max(1 - p0, eps))
    return w1, w0


def detect_batch(
    bits: np.ndarray,
    rule: Rule = "majority",
    *,
    protocol: QndProtocol | None = None,
    noise: QubitNoise | None = None,
    threshold: float | None = None,
) -> np.ndarray:
    """Photon-present decisions for each row of ``bits``.

    ``majority``: present when the count of ones exceeds ``threshold``
    (default N/2), so ties are absent.  ``log-likelihood``: present when the
    log-likelihood ratio of the one-photon against the zero-photon bit model
    exceeds ``threshold`` (default 0); needs ``protocol`` and ``noise``.
    """
    bits = np.atleast_2d(np.asarray(bits))
    if bits.shape[-1] == 0:
        raise ValueError("need at least one bit")
    ones = bits.sum(axis=-1)
    if rule == "majority":
        thr = bits.shape[-1] / 2 if threshold is None else threshold
        return ones > thr
    if rule == "log-likelihood":
        if protocol is None or noise is None:
            raise ValueError("log-likelihood rule needs protocol and noise")
        w1, w0 = _llr_weights(protocol, noise)
        llr = ones * w1 + (bits.shape[-1] - ones) * w0
        return llr > (0.0 if threshold is None else threshold)
    raise ValueError(f"unknown rule {rule!r}")


def detect(bits, rule: Rule = "majority", **kw) -> bool:
    """Single-run decision; see :func:`detect_batch`."""
    return bool(detect_batch(np.asarray(bits)[None, :], rule, **kw)[0])


def majority_dark_rate(N: int, p: float) -> float:
    """Exact false-positive probability of a strict majority over N i.i.d. bits."""
    return float(binom.sf(N // 2, N, p))


@dataclass(frozen=True)
class Proportion:
    successes: int
    trials: int
    ci_low: float
    ci_high: float

    @property
    def estimate(self) -> float:
        return self.successes / self.trials

    @property
    def sigma(self) -> float:
        p = self.estimate
        return math.sqrt(max(p * (1 - p), 1e-300) / self.trials)


def _proportion(k: int, n: int, level: float = 0.95) -> Proportion:
    ci = binomtest(int(k), int(n)).proportion_ci(confidence_level=level, method="wilson")
    return Proportion(int(k), int(n), float(ci.low), float(ci.high))


@dataclass(frozen=True)
class DetectionStats:
    efficiency: Proportion | None
    dark_count: Proportion | None
    trials: int
    seed: object


def _check_trials(trials: int):
    if trials < 1000:
        raise ValueError("need at least 1e3 trials for detection statistics")


def dark_count_rate(
    protocol: QndProtocol,
    noise: QubitNoise,
    trials: int,
    seed,
    *,
    cavity: StorageCavity | None = None,
    workers: int = 1,
) -> DetectionStats:
    """False-positive rate with an empty cavity (thermal photons if configured)."""
    _check_trials(trials)
    bits, _ = simulate_batch(protocol, cavity, noise, trials, seed, n_init=0, workers=workers)
    k = int(detect_batch(bits, protocol.rule, protocol=protocol, noise=noise).sum())
    return DetectionStats(None, _proportion(k, trials), trials, seed)


def efficiency(
    protocol: QndProtocol,
    cavity: StorageCavity,
    noise: QubitNoise,
    trials: int,
    seed,
    *,
    workers: int = 1,
) -> DetectionStats:
    """Detection probability with ``cavity.n_init`` photons initially stored."""
    _check_trials(trials)
    if cavity.n_init < 1:
        raise ValueError("efficiency needs at least one stored photon")
    bits, _ = simulate_batch(protocol, cavity, noise, trials, seed, workers=workers)
    k = int(detect_batch(bits, protocol.rule, protocol=protocol, noise=noise).sum())
    return DetectionStats(_proportion(k, trials), None, trials, seed)


def roc_curve(
    protocol: QndProtocol,
    cavity: StorageCavity,
    noise: QubitNoise,
    trials: int,
    seed,
) -> np.ndarray:
    """k-of-N operating points: rows of (k, dark rate, efficiency).

    A run is declared present when at least k of N bits read one.
    """
    _check_trials(trials)
    dark_bits, _ = simulate_batch(protocol, cavity, noise, trials, seed, n_init=0)
    sig_bits, _ = simulate_batch(protocol, cavity, noise, trials, seed)
    d, s = dark_bits.sum(axis=1), sig_bits.sum(axis=1)
    N = protocol.n_repeats
    return np.array([(k, np.mean(d >= k), np.mean(s >= k)) for k in range(N + 2)], dtype=float)


def direct_detection_prob(Omega, delta, t, noise: QubitNoise | None = None):
    """Excited-state probability under a weak detuned drive.

    P = A/2 [1 - cos(2 pi W t) exp(-t/T_d)],  A = Omega^2/W^2,
    W = sqrt(Omega^2 + delta^2),  1/T_d = 1/(2 T1) + 1/(2 T2).

    Without decay this is the generalized Rabi formula A sin^2(pi W t); with
    decay it relaxes to the mixed value A/2.  Frequencies in Hz, t in s.
    """
    Omega, delta, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (Omega, delta, t)))
    if np.any(Omega < 0):
        raise ValueError("Omega must be non-negative")
    W2 = Omega**2 + delta**2
    A = np.divide(Omega**2, W2, out=np.zeros_like(W2), where=W2 > 0)
    W = np.sqrt(W2)
    rate = 0.0 if noise is None else 0.5 / noise.T1 + 0.5 / noise.T2
    out = 0.5 * A * (1 - np.cos(2 * np.pi * W * t) * np.exp(-t * rate))
    return float(out) if out.ndim == 0 else out


def _with(objs: dict, name: str, value):
    for key, obj in objs.items():
        if obj is not None and name in {f.name for f in fields(obj)}:
            v = type(getattr(obj, name))(value) if isinstance(getattr(obj, name), int) else value
            return {**objs, key: replace(obj, **{name: v})}
    raise ValueError(f"no parameter named {name!r}")


def sweep(
    name: str,
    values: Sequence[float],
    protocol: QndProtocol,
    cavity: StorageCavity,
    noise: QubitNoise,
    trials: int,
    seed: int,
) -> list[dict]:
    """Efficiency and dark rate versus one protocol/noise/cavity parameter.

    Point i uses the seed ``(seed, i)``.
    """
    rows = []
    for i, v in enumerate(values):
        o = _with({"protocol": protocol, "cavity": cavity, "noise": noise}, name, v)
        eff = efficiency(o["protocol"], o["cavity"], o["noise"], trials, (seed, i)).efficiency
        dark = dark_count_rate(o["protocol"], o["noise"], trials, (seed, i)).dark_count
        rows.append({
            name: v,
            "efficiency": eff.estimate, "efficiency_lo": eff.ci_low, "efficiency_hi": eff.ci_high,
            "dark_rate": dark.estimate, "dark_lo": dark.ci_low, "dark_hi": dark.ci_high,
            "trials": trials,
        })
    return rows


def write_sweep_csv(rows: list[dict], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
