"""Measured or synthetic experiment traces and their CSV form.

CSV layout (long format, one row per point)::

    # kind: notch
    # meta: {"qubit": "QB-0"}
    frequency_Hz,re,im,sigma
    7.56e9,0.79,0.12,0.01
    ...

Real-valued traces use a single ``value`` column; ``sigma`` is optional.
2D traces list both axis columns with the first axis varying slowest.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["AXES", "ExperimentTrace", "read_trace_csv", "write_trace_csv"]

AXES = {
    "notch": ("frequency_Hz",),
    "two_tone": ("power_dB", "frequency_Hz"),
    "flux_map": ("voltage_V", "frequency_Hz"),
    "chevron": ("duration_s", "frequency_Hz"),
    "t1": ("delay_s",),
    "ramsey": ("delay_s",),
    "echo": ("delay_s",),
}


@dataclass(frozen=True)
class ExperimentTrace:
    """Sampled response on one or two strictly increasing axes."""

    kind: str
    axes: tuple
    response: np.ndarray
    sigma: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in AXES:
            raise ValueError(f"unknown trace kind {self.kind!r}")
        axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        if len(axes) != len(AXES[self.kind]):
            raise ValueError(f"{self.kind} traces need {len(AXES[self.kind])} axes")
        for name, a in zip(AXES[self.kind], axes):
            if a.ndim != 1 or a.size < 2 or not np.all(np.diff(a) > 0):
                raise ValueError(f"axis {name} must be strictly increasing")
        resp = np.asarray(self.response)
        shape = tuple(a.size for a in axes)
        if resp.shape != shape:
            raise ValueError(f"response shape {resp.shape} does not match axes {shape}")
        if not np.all(np.isfinite(resp)):
            raise ValueError("response contains non-finite values")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "response", resp)
        if self.sigma is not None:
            s = np.broadcast_to(np.asarray(self.sigma, dtype=float), shape).copy()
            if not np.all(s > 0):
                raise ValueError("sigma must be positive")
            object.__setattr__(self, "sigma", s)

    @property
    def x(self):
        """Axis argument as passed to the models: array for 1D, tuple for 2D."""
        return self.axes[0] if len(self.axes) == 1 else self.axes

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.response)

    def weights(self):
        return 1.0 if self.sigma is None else self.sigma


def write_trace_csv(trace: ExperimentTrace, path: str | Path) -> None:
    grids = np.meshgrid(*trace.axes, indexing="ij")
    cols = [g.ravel() for g in grids]
    names = list(AXES[trace.kind])
    r = trace.response.ravel()
    if trace.is_complex:
        cols += [r.real, r.imag]
        names += ["re", "im"]
    else:
        cols.append(r.astype(float))
        names.append("value")
    if trace.sigma is not None:
        cols.append(trace.sigma.ravel())
        names.append("sigma")
    buf = io.StringIO()
    buf.write(f"# kind: {trace.kind}\n")
    if trace.meta:
        buf.write(f"# meta: {json.dumps(trace.meta, sort_keys=True)}\n")
    np.savetxt(buf, np.column_stack(cols), delimiter=",", header=",".join(names), comments="", fmt="%.17g")
    Path(path).write_text(buf.getvalue())


def read_trace_csv(path: str | Path) -> ExperimentTrace:
    """Parse a trace written by :func:`write_trace_csv` (or by hand)."""
    path = Path(path)
    lines = path.read_text().splitlines()
    kind, meta, body = None, {}, []
    for ln in lines:
        if ln.startswith("#"):
            key, _, val = ln[1:].partition(":")
            if key.strip() == "kind":
                kind = val.strip()
            elif key.strip() == "meta":
                meta = json.loads(val)
        elif ln.strip():
            body.append(ln)
    if kind is None:
        raise ValueError(f"{path}: missing '# kind:' header")
    if kind not in AXES:
        raise ValueError(f"{path}: unknown trace kind {kind!r}")
    head = [h.strip() for h in body[0].split(",")]
    data = np.loadtxt(body[1:], delimiter=",", ndmin=2)
    col = {h: data[:, i] for i, h in enumerate(head)}
    missing = [a for a in AXES[kind] if a not in col]
    if missing:
        raise ValueError(f"{path}: missing axis columns {missing}")
    axes = [np.unique(col[a]) for a in AXES[kind]]
    shape = tuple(a.size for a in axes)
    if data.shape[0] != int(np.prod(shape)):
        raise ValueError(f"{path}: {data.shape[0]} rows do not form a {shape} grid")
    order = np.lexsort([col[a] for a in reversed(AXES[kind])])
    if "re" in col:
        resp = col["re"] + 1j * col["im"]
    elif "value" in col:
        resp = col["value"]
    else:
        raise ValueError(f"{path}: need 're,im' or 'value' columns")
    sigma = col["sigma"][order].reshape(shape) if "sigma" in col else None
    return ExperimentTrace(kind, tuple(axes), resp[order].reshape(shape), sigma, meta)
