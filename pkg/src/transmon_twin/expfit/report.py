"""Table-2-style text summary of characterization fits."""

from __future__ import annotations

import math
from typing import Mapping

from .engine import FitResult
from .fitters import DispersiveShift

__all__ = ["ROWS", "format_uncertainty", "summarize_fits", "table2_report"]

# key, label, unit scale
ROWS = (
    ("f_q", "omega_q/2pi [GHz]", 1e9),
    ("alpha", "alpha/2pi [MHz]", 1e6),
    ("g", "g/2pi [MHz]", 1e6),
    ("chi", "chi/2pi [kHz]", 1e3),
    ("f_r", "omega_r/2pi [GHz]", 1e9),
    ("Q_i", "Q_i/10^3", 1e3),
    ("Q_c", "Q_c/10^3", 1e3),
    ("T1", "T1 [us]", 1e-6),
    ("T2_star", "T2* [us]", 1e-6),
    ("T2", "T2 [us]", 1e-6),
)


def format_uncertainty(value: float, sigma: float, digits: int | None = None) -> str:
    """Concise notation, e.g. ``format_uncertainty(5.766, 0.0005) == '5.7660(5)'``.

    The uncertainty keeps two significant digits when its leading digit is
    1 or 2 and one otherwise, unless ``digits`` is given.
    """
    if not math.isfinite(sigma) or sigma <= 0:
        return f"{value:.6g}"

    def places(sig):
        exp = math.floor(math.log10(sig))
        n = digits if digits is not None else (2 if int(sig / 10**exp) <= 2 else 1)
        return n - 1 - exp

    dec = places(sigma)
    # rounding can carry into a new leading digit (0.096 -> 0.10)
    dec = places(round(sigma, dec))
    # never round the value above the units digit
    dec = max(dec, 0)
    return f"{value:.{dec}f}({round(sigma * 10**dec)})"


def summarize_fits(fits: Mapping[str, FitResult], dispersive: DispersiveShift | None = None) -> dict:
    """Collect Table 2 quantities ``key -> (value, sigma)`` from fit results."""
    pick = {
        "two_tone": (("f_q", "f01"), ("alpha", "alpha")),
        "flux_map": (("g", "g"),),
        "notch": (("f_r", "f_r"), ("Q_i", "Q_i"), ("Q_c", "Q_c")),
        "t1": (("T1", "T1"),),
        "ramsey": (("T2_star", "T2s"),),
        "echo": (("T2", "T2"),),
    }
    out = {}
    for kind, r in fits.items():
        for key, name in pick.get(kind, ()):
            out[key] = (r[name], r.error(name))
    if dispersive is not None:
        out["chi"] = (dispersive.chi, dispersive.sigma)
    return out


def _cell(v, scale) -> str:
    if v is None:
        return "-"
    if isinstance(v, str):
        return v
    if isinstance(v, tuple):
        return format_uncertainty(v[0] / scale, v[1] / scale)
    return f"{v / scale:.6g}"


def table2_report(columns: Mapping[str, Mapping]) -> str:
    """Render columns of ``key -> (value, sigma) | value | text`` as a text table.

    Values are SI; each row is scaled to the unit in its label.
    """
    names = list(columns)
    cells = [[_cell(columns[c].get(k), s) for c in names] for k, _, s in ROWS]
    w0 = max(len(r[1]) for r in ROWS)
    widths = [max(len(n), *(len(row[i]) for row in cells)) for i, n in enumerate(names)]
    lines = [" " * w0 + "  " + "  ".join(n.rjust(w) for n, w in zip(names, widths))]
    lines.append("-" * len(lines[0]))
    for (_, label, _), row in zip(ROWS, cells):
        lines.append(label.ljust(w0) + "  " + "  ".join(c.rjust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)
