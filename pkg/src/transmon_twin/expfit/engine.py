"""Damped least-squares engine shared by every fitter.

Parameters are fitted in scaled internal coordinates.  A free parameter p
with starting value p0 and scale s is represented by q = (p - p0)/s, and
bounds are enforced by smooth transforms of q:

* two-sided ``[lo, hi]``:  q = lo' + (hi' - lo') (sin u + 1) / 2
* lower bound only:        q = lo' - 1 + sqrt(u^2 + 1)
* upper bound only:        q = hi' + 1 - sqrt(u^2 + 1)

The Levenberg-Marquardt iteration uses a central-difference Jacobian in u,
Marquardt scaling diag(J^T J) and the Nielsen damping update.  It stops when
an accepted step changes the cost by less than ``ftol`` relative, or when the
gradient infinity norm drops below ``gtol``.  Covariances are computed from
the Jacobian with respect to the external parameters at the optimum and
scaled by the reduced chi-square.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

__all__ = ["FitError", "FitResult", "lsq_fit", "numerical_jacobian", "propagate"]


class FitError(RuntimeError):
    """A fit could not produce a usable result."""


@dataclass(frozen=True)
class FitResult:
    """Fitted parameters with linearized 1-sigma uncertainties.

    ``names``/``values``/``errors`` cover every parameter passed to the fit,
    fixed ones carrying zero error.  ``covariance`` is over the free
    parameters listed in ``free``.  ``derived`` maps extra quantities to
    ``(value, sigma)``.
    """

    names: tuple[str, ...]
    values: np.ndarray
    errors: np.ndarray
    free: tuple[str, ...]
    covariance: np.ndarray
    cost: float
    chi2_red: float
    n_data: int
    iterations: int
    damping: float
    converged: bool
    message: str = ""
    derived: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> float:
        if name in self.names:
            return float(self.values[self.names.index(name)])
        return float(self.derived[name][0])

    def error(self, name: str) -> float:
        if name in self.names:
            return float(self.errors[self.names.index(name)])
        return float(self.derived[name][1])

    def params(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(self.names, self.values)}

    @property
    def residual_norm(self) -> float:
        return math.sqrt(2 * self.cost)

    def with_derived(self, **items) -> "FitResult":
        d = {**self.derived, **{k: (float(v), float(e)) for k, (v, e) in items.items()}}
        return _replace(self, derived=d)

    def with_flags(self, **flags) -> "FitResult":
        return _replace(self, flags={**self.flags, **flags})

    def to_dict(self) -> dict:
        return {
            "parameters": {
                n: {"value": float(v), "sigma": float(e)}
                for n, v, e in zip(self.names, self.values, self.errors)
            },
            "derived": {k: {"value": v, "sigma": e} for k, (v, e) in self.derived.items()},
            "covariance": {"names": list(self.free), "matrix": self.covariance.tolist()},
            "cost": self.cost,
            "chi2_red": self.chi2_red,
            "residual_norm": self.residual_norm,
            "n_data": self.n_data,
            "iterations": self.iterations,
            "damping": self.damping,
            "converged": self.converged,
            "message": self.message,
            "flags": self.flags,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: Mapping) -> "FitResult":
        names = tuple(d["parameters"])
        return cls(
            names=names,
            values=np.array([d["parameters"][n]["value"] for n in names]),
            errors=np.array([d["parameters"][n]["sigma"] for n in names]),
            free=tuple(d["covariance"]["names"]),
            covariance=np.array(d["covariance"]["matrix"], dtype=float).reshape(
                len(d["covariance"]["names"]), -1
            ),
            cost=d["cost"],
            chi2_red=d["chi2_red"],
            n_data=d["n_data"],
            iterations=d["iterations"],
            damping=d["damping"],
            converged=d["converged"],
            message=d.get("message", ""),
            derived={k: (v["value"], v["sigma"]) for k, v in d.get("derived", {}).items()},
            flags=dict(d.get("flags", {})),
        )


def _replace(r: FitResult, **kw) -> FitResult:
    from dataclasses import replace

    return replace(r, **kw)


def numerical_jacobian(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, steps: np.ndarray) -> np.ndarray:
    """Central-difference Jacobian of a vector function."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i, h in enumerate(np.broadcast_to(steps, x.shape)):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((f(x + e) - f(x - e)) / (2 * h))
    return np.column_stack(cols)


class _Transform:
    def __init__(self, p0: float, scale: float, lo: float, hi: float):
        self.p0, self.s = p0, scale
        self.lo = (lo - p0) / scale if math.isfinite(lo) else -math.inf
        self.hi = (hi - p0) / scale if math.isfinite(hi) else math.inf

    def to_ext(self, u):
        lo, hi = self.lo, self.hi
        if math.isfinite(lo) and math.isfinite(hi):
            q = lo + (hi - lo) * (np.sin(u) + 1) / 2
        elif math.isfinite(lo):
            q = lo - 1 + np.sqrt(u * u + 1)
        elif math.isfinite(hi):
            q = hi + 1 - np.sqrt(u * u + 1)
        else:
            q = u
        return self.p0 + self.s * q

    def to_int(self, p):
        q = (p - self.p0) / self.s
        lo, hi = self.lo, self.hi
        if math.isfinite(lo) and math.isfinite(hi):
            return math.asin(min(1.0, max(-1.0, 2 * (q - lo) / (hi - lo) - 1)))
        if math.isfinite(lo):
            return math.sqrt(max((q - lo + 1) ** 2 - 1, 0.0))
        if math.isfinite(hi):
            return math.sqrt(max((hi - q + 1) ** 2 - 1, 0.0))
        return q


def _residual_fn(model, x, y, sigma):
    y = np.asarray(y)
    w = 1 / np.broadcast_to(np.asarray(sigma, dtype=float), y.shape)
    cplx = np.iscomplexobj(y)

    def res(params: dict) -> np.ndarray:
        r = (np.asarray(model(x, **params)) - y) * w
        if cplx:
            return np.concatenate((r.real.ravel(), r.imag.ravel()))
        return np.asarray(r, dtype=float).ravel()

    return res


def lsq_fit(
    model: Callable,
    p0: Mapping[str, float],
    x,
    y,
    sigma=1.0,
    *,
    bounds: Mapping[str, tuple[float, float]] | None = None,
    fixed: Sequence[str] = (),
    scales: Mapping[str, float] | None = None,
    max_iter: int = 500,
    ftol: float = 1e-10,
    gtol: float = 1e-12,
    absolute_sigma: bool = False,
) -> FitResult:
    """Weighted nonlinear least squares.

    Parameters
    ----------
    model
        ``model(x, **params)`` returning an array shaped like ``y`` (real or
        complex; complex residuals are split into real and imaginary parts).
    p0
        Starting values for every model parameter, inside ``bounds``.
    sigma
        Per-point (or scalar) 1-sigma noise.
    bounds
        ``name -> (lo, hi)``; use ``-inf``/``inf`` for one-sided bounds.
    fixed
        Parameters held at their starting value.
    scales
        Typical variation of each parameter; defaults to ``|p0|`` (or 1).
    absolute_sigma
        If False (default) the covariance is scaled by the reduced chi-square.

    Raises
    ------
    FitError
        On invalid starting values or a singular Jacobian at the optimum.
    """
    bounds = dict(bounds or {})
    scales = dict(scales or {})
    names = tuple(p0)
    free = tuple(n for n in names if n not in set(fixed))
    if not free:
        raise FitError("no free parameters")
    for n in names:
        v = p0[n]
        if not np.isfinite(v):
            raise FitError(f"non-finite start value for {n}")
        lo, hi = bounds.get(n, (-math.inf, math.inf))
        if not lo <= v <= hi:
            raise FitError(f"start value of {n} = {v} outside bounds [{lo}, {hi}]")
    tr = {}
    for n in free:
        s = scales.get(n) or (abs(p0[n]) if p0[n] != 0 else 1.0)
        tr[n] = _Transform(float(p0[n]), float(s), *bounds.get(n, (-math.inf, math.inf)))
    base = {n: float(p0[n]) for n in names}
    res = _residual_fn(model, x, y, sigma)

    def ext(u):
        return {**base, **{n: float(tr[n].to_ext(ui)) for n, ui in zip(free, u)}}

    def r_of(u):
        return res(ext(u))

    u = np.array([tr[n].to_int(p0[n]) for n in free])
    r = r_of(u)
    if not np.all(np.isfinite(r)):
        raise FitError("model is not finite at the starting point")
    cost = 0.5 * float(r @ r)
    h = 1e-6 * np.maximum(np.abs(u), 1.0)
    lam, nu = None, 2.0
    converged, message, it = False, "", 0
    for it in range(1, max_iter + 1):
        J = numerical_jacobian(r_of, u, h)
        A = J.T @ J
        g = J.T @ r
        if np.max(np.abs(g)) < gtol or cost == 0:
            converged, message = True, "gradient below tolerance"
            break
        D = np.maximum(np.diag(A), 1e-12 * max(np.diag(A).max(), 1e-300))
        if lam is None:
            lam = 1e-3
        accepted = False
        while not accepted:
            try:
                step = np.linalg.solve(A + lam * np.diag(D), -g)
            except np.linalg.LinAlgError:
                lam *= nu
                nu *= 2
                continue
            r_new = r_of(u + step)
            c_new = 0.5 * float(r_new @ r_new) if np.all(np.isfinite(r_new)) else math.inf
            pred = 0.5 * float(step @ (lam * D * step - g))
            rho = (cost - c_new) / pred if pred > 0 else -1.0
            if rho > 0:
                accepted = True
                dc = cost - c_new
                u, r, cost = u + step, r_new, c_new
                lam *= max(1 / 3, 1 - (2 * rho - 1) ** 3)
                nu = 2.0
                if dc <= ftol * max(cost + dc, 1e-300):
                    converged, message = True, "relative cost change below tolerance"
            else:
                lam *= nu
                nu *= 2
                if lam > 1e16:
                    converged, message = True, "no further decrease possible"
                    break
        if converged:
            break
    else:
        message = f"iteration cap {max_iter} reached"
        warnings.warn(f"lsq_fit: {message}", RuntimeWarning, stacklevel=2)

    best = ext(u)
    # covariance in external parameters
    pvec = np.array([best[n] for n in free])
    hp = 1e-6 * np.array([tr[n].s for n in free])

    def r_of_p(p):
        return res({**best, **dict(zip(free, p))})

    Jp = numerical_jacobian(r_of_p, pvec, hp)
    n_data = Jp.shape[0]
    dof = max(n_data - len(free), 1)
    chi2_red = 2 * cost / dof
    JtJ = Jp.T @ Jp
    d = np.sqrt(np.diag(JtJ))
    if np.any(d == 0) or not np.all(np.isfinite(JtJ)):
        raise FitError("singular Jacobian: a parameter does not affect the model")
    Jn = JtJ / np.outer(d, d)
    if np.linalg.cond(Jn) > 1e13:
        raise FitError("singular Jacobian: parameters are degenerate")
    cov = np.linalg.inv(Jn) / np.outer(d, d)
    cov = 0.5 * (cov + cov.T)
    if not absolute_sigma:
        cov = cov * chi2_red
    err = dict(zip(free, np.sqrt(np.clip(np.diag(cov), 0, None))))
    return FitResult(
        names=names,
        values=np.array([best[n] for n in names]),
        errors=np.array([err.get(n, 0.0) for n in names]),
        free=free,
        covariance=cov,
        cost=cost,
        chi2_red=chi2_red,
        n_data=n_data,
        iterations=it,
        damping=float(lam if lam is not None else 0.0),
        converged=converged,
        message=message,
    )


def propagate(result: FitResult, func: Callable[[dict], float]) -> tuple[float, float]:
    """Value and linearized 1-sigma of a scalar function of the parameters."""
    p = result.params()
    free = result.free
    x0 = np.array([p[n] for n in free])
    sig = np.array([result.error(n) for n in free])
    h = np.where(sig > 0, 1e-4 * sig, 1e-8 * np.maximum(np.abs(x0), 1e-300))

    def f(x):
        return np.array([func({**p, **dict(zip(free, x))})])

    grad = numerical_jacobian(f, x0, h)[0]
    val = func(p)
    return float(val), float(math.sqrt(max(grad @ result.covariance @ grad, 0.0)))
