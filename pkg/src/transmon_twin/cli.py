"""Batch command-line front end.

::

    transmon-twin COMMAND [--config FILE] [--seed N] [--out DIR]
                          [--format {csv,json}] [--trials N] [--resolution N] [--dry-run]
    transmon-twin xsect ... [--convergence R1,R2,R3]

Commands: quantize, epr, xsect, budget, qnd, synth, fit, report.

Configuration is one JSON object holding keys of the chosen command (see
``SCHEMAS``); unknown keys are rejected and relative paths resolve against
the config file's directory.  Command-line flags override config values.
The seed defaults to ``DEFAULT_SEED``.  Every run writes ``manifest.json``
into the output directory with the resolved configuration and a SHA-256 of
each output; all files are written atomically (temporary file + rename).

Exit codes: 0 success, 1 computation failed, 2 invalid configuration,
3 missing input file.  Failures print one JSON error record on stderr.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .circuit import JosephsonElement, calibrate_lj, lj_from_ej, lom_analysis, read_capacitance_csv
from .data import fixture_path, load_table2
from .epr import kerr_matrix, linear_modes, read_mode_csv
from .expfit import (
    AXES,
    FitResult,
    dispersive_shift_measurement,
    fit_trace,
    read_trace_csv,
    scenario,
    summarize_fits,
    synthesize,
    table2_report,
    write_trace_csv,
)
from .losses import (
    DEFAULT_TAN_DELTA,
    PartitionRegion,
    ReadoutResonator,
    SurfaceEPR,
    channels,
    combine_hybrid,
    load_table1,
    q_tls,
    read_energy_report,
    t1_budget,
)
from .qnd import QndProtocol, QubitNoise, StorageCavity, ghz_pi_time, roc_curve, sweep
from .xsect import (
    CrossSectionGeometry,
    InterfaceEPR,
    InterfaceLayer,
    box_sensitivity,
    convergence_study,
    interface_participation,
    solve_potential,
    write_potential,
)

DEFAULT_SEED = 1234
EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_MISSING = 0, 1, 2, 3

PATH, PATHS = "path", "paths"

# key -> (default, type); None defaults mean "derive from the qubit fixture"
_LOM_KEYS = {
    "qubit": ("QB-0", str),
    "capacitance": (None, PATH),
    "f_r": (None, float),
    "L_J": (None, float),
    "f_q_target": (None, float),
    "C_J": (2e-15, float),
    "Z0": (50.0, float),
}
SCHEMAS: dict[str, dict] = {
    "quantize": dict(_LOM_KEYS),
    "epr": {**_LOM_KEYS, "modes": (None, PATH)},
    "xsect": {
        "width": (15e-6, float),
        "gap": (9e-6, float),
        "eps_r": (11.65, float),
        "metal_thickness": (100e-9, float),
        "substrate_thickness": (None, float),
        "vacuum_height": (None, float),
        "ground_extent": (None, float),
        "corner_cutoff": (5e-9, float),
        "layers": (None, dict),
        "resolution": (128, int),
        "method": ("direct", str),
        "convergence": (None, list),
        "box_factors": (None, list),
        "potential": ("none", str),
    },
    "budget": {
        "qubit": ("QB-0", str),
        "participation": (None, dict),
        "table1_column": ("3D-2D (MER-coupler)", str),
        "energy_report": (None, PATH),
        "region_xsect": (None, dict),
        "remainder_3d": (None, dict),
        "tan_delta": (dict(DEFAULT_TAN_DELTA), dict),
        "f_q": (None, float),
        "g": (None, float),
        "delta": (None, float),
        "resonator": (None, dict),
        "purcell": (True, bool),
    },
    "qnd": {
        "xi": (350e3, float),
        "m": (1, int),
        "n_repeats": (5, int),
        "rule": ("majority", str),
        "t_parity": (None, float),
        "t_readout": (0.0, float),
        "cavity": ({"f_s": 7.0e9, "Q_s": 1.0e6, "n_init": 1, "n_thermal": 0.0}, dict),
        "noise": ({"T1": 1.52e-6, "T2": 0.61e-6, "readout_error": 0.1, "reset_error": 0.0}, dict),
        "sweep": (None, dict),
        "roc": (False, bool),
        "trials": (100_000, int),
    },
    "synth": {
        "kinds": (list(AXES), list),
        "qubit": ("QB-0", str),
        "flux_qubit": ("QB-1", str),
        "snr": (20.0, float),
        "dispersive": (True, bool),
    },
    "fit": {"traces": (None, PATHS), "E_C": (None, float)},
    "report": {
        "fits": (None, PATHS),
        "qubit": ("QB-0", str),
        "ground": (None, PATH),
        "excited": (None, PATH),
    },
}
COMMON = {"seed": (DEFAULT_SEED, int), "format": ("csv", str)}
REQUIRED = {"fit": ("traces",), "report": ("fits",)}


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str, **extra):
        super().__init__(message)
        self.code, self.record = code, {"error": kind, "message": message, **extra}


# -- config ------------------------------------------------------------------


def _check_type(key, value, typ):
    ok = {
        float: lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
        int: lambda v: isinstance(v, int) and not isinstance(v, bool),
        str: lambda v: isinstance(v, str),
        bool: lambda v: isinstance(v, bool),
        list: lambda v: isinstance(v, list),
        dict: lambda v: isinstance(v, dict),
        PATH: lambda v: isinstance(v, str),
        PATHS: lambda v: isinstance(v, list) and all(isinstance(p, str) for p in v),
    }[typ]
    if not ok(value):
        raise CliError(EXIT_CONFIG, "invalid_value", f"config key {key!r} has the wrong type", key=key)


def resolve_config(command: str, args: argparse.Namespace) -> tuple[dict, Path]:
    """Merge defaults, config file and flags; validate keys, types and paths."""
    schema = {**SCHEMAS[command], **COMMON}
    cfg = {k: copy.deepcopy(d) for k, (d, _) in schema.items()}
    base = Path.cwd()
    if args.config:
        cpath = Path(args.config)
        if not cpath.is_file():
            raise CliError(EXIT_MISSING, "missing_input", f"config file not found: {cpath}", path=str(cpath))
        try:
            user = json.loads(cpath.read_text())
        except json.JSONDecodeError as exc:
            raise CliError(EXIT_CONFIG, "invalid_config", f"{cpath}: {exc}", path=str(cpath)) from None
        if not isinstance(user, dict):
            raise CliError(EXIT_CONFIG, "invalid_config", f"{cpath}: top level must be an object")
        user.pop("command", command)
        for k, v in user.items():
            if k not in schema:
                raise CliError(EXIT_CONFIG, "unknown_key", f"unknown config key {k!r} for {command}", key=k)
            if v is not None:
                _check_type(k, v, schema[k][1])
            cfg[k] = v
        base = cpath.parent
    for flag, key in (("seed", "seed"), ("format", "format"), ("trials", "trials"), ("resolution", "resolution"),
                      ("convergence", "convergence")):
        v = getattr(args, flag, None)
        if v is None:
            continue
        if key not in schema:
            raise CliError(EXIT_CONFIG, "invalid_flag", f"--{flag} does not apply to {command}", key=flag)
        cfg[key] = v
    if cfg["format"] not in ("csv", "json"):
        raise CliError(EXIT_CONFIG, "invalid_value", "format must be csv or json", key="format")
    for k in REQUIRED.get(command, ()):
        if not cfg[k]:
            raise CliError(EXIT_CONFIG, "missing_key", f"{command} needs config key {k!r}", key=k)
    for k, (_, typ) in schema.items():
        if typ == PATH and cfg[k] is not None:
            _require(base, cfg[k])
        elif typ == PATHS and cfg[k] is not None:
            for p in cfg[k]:
                _require(base, p)
    return cfg, base


def _require(base: Path, p: str) -> Path:
    path = (base / p) if not Path(p).is_absolute() else Path(p)
    if not path.exists():
        raise CliError(EXIT_MISSING, "missing_input", f"input file not found: {p}", path=str(p))
    return path


# -- output helpers ----------------------------------------------------------


def _plain(obj):
    """JSON-safe copy: numpy scalars/arrays to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def _json_text(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}{k}.")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix[:-1], obj


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(float(v)) if isinstance(v, (float, np.floating)) else v for k, v in r.items()})
    return buf.getvalue()


def _record(name: str, rec: dict, fmt: str) -> dict[str, str]:
    if fmt == "json":
        return {f"{name}.json": _json_text(rec)}
    rows = [{"key": k, "value": v} for k, v in _flatten(_plain(rec))]
    return {f"{name}.csv": _csv_text(rows)}


def _table(name: str, rows: list[dict], fmt: str) -> dict[str, str]:
    if fmt == "json":
        return {f"{name}.json": _json_text(rows)}
    return {f"{name}.csv": _csv_text(rows)}


def _write_atomic(path: Path, content: str | bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    if isinstance(content, bytes):
        tmp.write_bytes(content)
    else:
        tmp.write_text(content)
    os.replace(tmp, path)


def _via_file(writer: Callable[[Path], None], suffix: str) -> bytes:
    """Run a path-based writer into a scratch file and return its bytes."""
    import tempfile

    with tempfile.TemporaryDirectory() as d:
        p = Path(d) / f"out{suffix}"
        writer(p)
        return p.read_bytes()


# -- commands ----------------------------------------------------------------


def _lom(cfg, base):
    qubit = cfg["qubit"]
    table = load_table2()
    if qubit not in table:
        raise CliError(EXIT_CONFIG, "invalid_value", f"unknown qubit {qubit!r}", key="qubit")
    exp = table[qubit]["expected"]
    cpath = _require(base, cfg["capacitance"]) if cfg["capacitance"] else fixture_path(
        f"{qubit.lower().replace('-', '')}_capacitance.csv")
    C = read_capacitance_csv(cpath)
    f_r = cfg["f_r"] or exp["f_r"]
    if cfg["L_J"]:
        L, target = cfg["L_J"], None
    else:
        target = cfg["f_q_target"] or exp["f_q"]
        L = calibrate_lj(target, C, f_r, C_J=cfg["C_J"], Z0=cfg["Z0"])
    r = lom_analysis(C, JosephsonElement("single", L_J=L, C_J=cfg["C_J"]), f_r, Z0=cfg["Z0"])
    return r, exp, target


def cmd_quantize(cfg, base, out):
    r, exp, target = _lom(cfg, base)
    tp, cs = r.transmon, r.coupled
    rec = {
        "qubit": cfg["qubit"], "L_J": r.L_J, "calibrated_to": target,
        "E_J": tp.E_J, "E_C": tp.E_C, "E_J_over_E_C": tp.ratio,
        "C_sigma": r.C_sigma, "C_r_sigma": r.C_r_sigma, "C_qr": r.C_qr,
        "f_q": tp.f01, "alpha": tp.alpha, "g": cs.g, "f_r": cs.f_r, "delta": cs.delta,
        "chi": cs.chi, "dispersive": cs.dispersive,
        "expected": {k: exp[k] for k in ("f_q", "alpha", "g", "chi", "f_r")},
    }
    return _record("quantize", rec, cfg["format"])


def cmd_epr(cfg, base, out):
    if cfg["modes"]:
        ms = read_mode_csv(_require(base, cfg["modes"]))
    else:
        r, _, _ = _lom(cfg, base)
        L_r = 1 / ((2 * np.pi * r.coupled.f_r) ** 2 * r.C_r_sigma)
        Cm = np.array([[r.C_sigma, -r.C_qr], [-r.C_qr, r.C_r_sigma]])
        ms = linear_modes(Cm, [1 / lj_from_ej(r.transmon.E_J), 1 / L_r], 0, ("qubit", "resonator"),
                          r.transmon.E_J)
    km = kerr_matrix(ms)
    rows = []
    for i, m in enumerate(ms.modes):
        row = {"mode": m.label, "f_lin": m.f_lin, "participation": m.p, "f_dressed": km.f_dressed[i],
               "alpha": km.alpha[i]}
        row |= {f"chi_{lab}": km.chi[i, j] for j, lab in enumerate(km.labels)}
        rows.append(row)
    return _table("kerr", rows, cfg["format"])


def cmd_xsect(cfg, base, out):
    layers = None
    if cfg["layers"]:
        layers = tuple(InterfaceLayer(k, v["sigma"], v["eps"]) for k, v in sorted(cfg["layers"].items()))
    kw = {k: cfg[k] for k in ("substrate_thickness", "vacuum_height", "ground_extent") if cfg[k] is not None}
    if layers is not None:
        kw["layers"] = layers
    geom = CrossSectionGeometry(cfg["width"], cfg["gap"], cfg["eps_r"], metal_thickness=cfg["metal_thickness"],
                                corner_cutoff=cfg["corner_cutoff"], **kw)
    sol = solve_potential(geom, cfg["resolution"], method=cfg["method"])
    f = interface_participation(sol)
    rec = {
        "resolution": cfg["resolution"], "nodes": int(sol.potential.size),
        "fractions": {k: f[k] for k in ("MA", "MS", "SA")},
        "capacitance_F_per_m": sol.capacitance, "energy_J_per_m": sol.energy,
        "energy_substrate_J_per_m": sol.energy_substrate, "residual": sol.residual,
    }
    files = _record("xsect", rec, cfg["format"])
    if cfg["convergence"]:
        cs = convergence_study(geom, [int(r) for r in cfg["convergence"]], method=cfg["method"])
        rows = [{"resolution": r, "energy_J_per_m": e, "f_MA": fr["MA"], "f_MS": fr["MS"], "f_SA": fr["SA"]}
                for r, e, fr in zip(cs.resolutions, cs.energies, cs.fractions)]
        ex = cs.extrapolated
        rows.append({"resolution": "inf", "energy_J_per_m": cs.energy_extrapolated,
                     "f_MA": ex["MA"], "f_MS": ex["MS"], "f_SA": ex["SA"]})
        files |= _table("convergence", rows, cfg["format"])
        files |= {"convergence_study.json": _json_text(cs.as_dict())}
    if cfg["box_factors"]:
        rows = [{"margin_gaps": fac, "f_MA": e["MA"], "f_MS": e["MS"], "f_SA": e["SA"], "capacitance_F_per_m": c}
                for fac, e, c in box_sensitivity(geom, cfg["box_factors"], cfg["resolution"])]
        files |= _table("box_sensitivity", rows, cfg["format"])
    if cfg["potential"] != "none":
        if cfg["potential"] not in ("csv", "npz"):
            raise CliError(EXIT_CONFIG, "invalid_value", "potential must be none, csv or npz", key="potential")
        files[f"potential.{cfg['potential']}"] = _via_file(lambda p: write_potential(sol, p), f".{cfg['potential']}")
    return files


def _read_fractions(path: Path) -> dict:
    """Interface fractions from an xsect output record (JSON or key,value CSV)."""
    if path.suffix == ".json":
        return json.loads(path.read_text())
    with path.open(newline="") as fh:
        rows = {r["key"]: r["value"] for r in csv.DictReader(fh)}
    return {k: float(rows[f"fractions.{k}"]) for k in ("MA", "MS", "SA")}


def _surface(obj) -> SurfaceEPR:
    d = obj.get("fractions", obj)
    return SurfaceEPR(*(float(d.get(k, d.get(f"f_{k}"))) for k in ("MA", "MS", "SA")))


def cmd_budget(cfg, base, out):
    t2 = load_table2()[cfg["qubit"]]
    meas = {k: v[0] for k, v in t2["measured"].items()}
    exp = t2["expected"]
    if cfg["energy_report"]:
        F = read_energy_report(_require(base, cfg["energy_report"]))
        rx = cfg["region_xsect"] or {}
        missing = sorted(set(F) - set(rx))
        if missing:
            raise CliError(EXIT_CONFIG, "missing_key", f"region_xsect lacks regions {missing}", key="region_xsect")
        regions = []
        for name in sorted(F):
            src = rx[name]
            s = _surface(_read_fractions(_require(base, src)) if isinstance(src, str) else src)
            regions.append(PartitionRegion(name, F[name], InterfaceEPR(s.MA, s.MS, s.SA)))
        rem = _surface(cfg["remainder_3d"]) if cfg["remainder_3d"] else None
        p = combine_hybrid(regions, rem)
        source = "energy_report"
    elif cfg["participation"]:
        p, source = _surface(cfg["participation"]), "participation"
    else:
        table = load_table1()
        if cfg["table1_column"] not in table:
            raise CliError(EXIT_CONFIG, "invalid_value", f"no Table 1 column {cfg['table1_column']!r}",
                           key="table1_column")
        p, source = table[cfg["table1_column"]], f"table1:{cfg['table1_column']}"
    Q = q_tls(channels(p, cfg["tan_delta"]))
    f_q = cfg["f_q"] or meas["f_q"]
    kw = {}
    if cfg["purcell"]:
        res = cfg["resonator"] or {"f_r": meas["f_r"], "Q_i": meas["Q_i"], "Q_c": meas["Q_c"]}
        kw = dict(g=cfg["g"] or exp["g"], delta=cfg["delta"] or exp["f_q"] - exp["f_r"],
                  resonator=ReadoutResonator(**res))
    b = t1_budget(f_q, Q, **kw)
    rec = {"participation_source": source, "participation": p.as_dict(), "tan_delta": cfg["tan_delta"],
           "f_q": f_q, **json.loads(b.to_json())}
    return _record("budget", rec, cfg["format"])


def cmd_qnd(cfg, base, out):
    t_parity = cfg["t_parity"] or ghz_pi_time(cfg["xi"], cfg["m"])
    proto = QndProtocol(cfg["xi"], t_parity, cfg["n_repeats"], cfg["m"], cfg["rule"], cfg["t_readout"])
    cav = StorageCavity(**cfg["cavity"])
    noise = QubitNoise(**cfg["noise"])
    sw = cfg["sweep"] or {"name": "n_repeats", "values": [cfg["n_repeats"]]}
    if set(sw) != {"name", "values"}:
        raise CliError(EXIT_CONFIG, "invalid_value", "sweep needs exactly 'name' and 'values'", key="sweep")
    rows = sweep(sw["name"], sw["values"], proto, cav, noise, cfg["trials"], cfg["seed"])
    files = _table("qnd", rows, cfg["format"])
    if cfg["roc"]:
        roc = roc_curve(proto, cav, noise, cfg["trials"], cfg["seed"])
        files |= _table("roc", [{"threshold": int(k), "dark_rate": d, "efficiency": e} for k, d, e in roc],
                        cfg["format"])
    return files


def cmd_synth(cfg, base, out):
    files = {}
    kinds = list(AXES)
    for kind in cfg["kinds"]:
        if kind not in AXES:
            raise CliError(EXIT_CONFIG, "invalid_value", f"unknown trace kind {kind!r}", key="kinds")
        qubit = cfg["flux_qubit"] if kind == "flux_map" else cfg["qubit"]
        sc = scenario(kind, qubit, cfg["snr"])
        meta = {"params": sc.params, "qubit": qubit, "snr": cfg["snr"]}
        tr = synthesize(kind, sc.params, sc.axes, sc.sigma, (cfg["seed"], kinds.index(kind)), meta)
        files[f"traces/{kind}.csv"] = _via_file(lambda p, tr=tr: write_trace_csv(tr, p), ".csv")
    if cfg["dispersive"]:
        # readout resonator with the qubit in |g> and |e>, split by 2 chi
        sc = scenario("notch", cfg["qubit"], cfg["snr"])
        chi = load_table2()[cfg["qubit"]]["measured"]["chi"][0]
        for i, (state, sgn) in enumerate((("ground", 1), ("excited", -1))):
            params = {**sc.params, "f_r": sc.params["f_r"] + sgn * chi}
            tr = synthesize("notch", params, sc.axes, sc.sigma, (cfg["seed"], len(kinds) + i),
                            {"params": params, "qubit": cfg["qubit"], "snr": cfg["snr"], "state": state})
            files[f"traces/readout_{state}.csv"] = _via_file(lambda p, tr=tr: write_trace_csv(tr, p), ".csv")
    return files


def cmd_fit(cfg, base, out):
    files = {}
    for p in cfg["traces"]:
        path = _require(base, p)
        tr = read_trace_csv(path)
        kw = {}
        if tr.kind == "flux_map":
            E_C = cfg["E_C"] or tr.meta.get("params", {}).get("E_C")
            if E_C is None:
                raise CliError(EXIT_CONFIG, "missing_key", "flux-map fits need E_C", key="E_C")
            kw["E_C"] = E_C
        r = fit_trace(tr, **kw)
        stem = path.stem
        files[f"fits/{stem}.json"] = _json_text({"kind": tr.kind, "trace": path.name, "qubit": tr.meta.get("qubit"),
                                                 "result": r.to_dict()})
        if cfg["format"] == "csv":
            rows = [{"parameter": n, "value": v, "sigma": e} for n, v, e in zip(r.names, r.values, r.errors)]
            rows += [{"parameter": k, "value": v, "sigma": e} for k, (v, e) in sorted(r.derived.items())]
            files[f"fits/{stem}.csv"] = _csv_text(rows)
    return files


def cmd_report(cfg, base, out):
    fits, notes = {}, []
    for p in cfg["fits"]:
        d = json.loads(_require(base, p).read_text())
        fits[d["kind"]] = FitResult.from_dict(d["result"])
        if d.get("qubit") not in (None, cfg["qubit"]):
            notes.append(f"{d['kind']} fit is from {d['qubit']}")
    disp = None
    if cfg["ground"] and cfg["excited"]:
        disp = dispersive_shift_measurement(read_trace_csv(_require(base, cfg["ground"])),
                                            read_trace_csv(_require(base, cfg["excited"])))
    col = summarize_fits(fits, disp)
    exp = load_table2()[cfg["qubit"]]["expected"]
    expected = {k: v for k, v in exp.items() if k != "T1_bound"}
    expected["T1"] = f"<= {exp['T1_bound'] * 1e6:g}"
    text = table2_report({cfg["qubit"]: col, f"Exp. {cfg['qubit']}": expected})
    rows = [{"quantity": k, "value": col[k][0] if k in col else None, "sigma": col[k][1] if k in col else None,
             "expected": expected.get(k)} for k in ("f_q", "alpha", "g", "chi", "f_r", "Q_i", "Q_c", "T1",
                                                    "T2_star", "T2")]
    text += "".join(f"\nnote: {n}" for n in notes)
    return {"table2.txt": text + "\n", **_table("table2", rows, cfg["format"])}


COMMANDS = {
    "quantize": cmd_quantize,
    "epr": cmd_epr,
    "xsect": cmd_xsect,
    "budget": cmd_budget,
    "qnd": cmd_qnd,
    "synth": cmd_synth,
    "fit": cmd_fit,
    "report": cmd_report,
}


# -- entry point -------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="transmon-twin", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help=f"random seed (default {DEFAULT_SEED})")
        p.add_argument("--out", default="out", help="output directory (default ./out)")
        p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
        p.add_argument("--trials", type=int, help="Monte Carlo trials (qnd)")
        p.add_argument("--resolution", type=int, help="grid resolution (xsect)")
        p.add_argument("--dry-run", action="store_true", help="validate the config and exit")
        if name == "xsect":
            p.add_argument("--convergence", type=_int_list, metavar="R1,R2,R3",
                           help="comma-separated resolutions for a convergence sweep")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, base = resolve_config(args.command, args)
        if args.dry_run:
            sys.stdout.write(_json_text({"command": args.command, "config": cfg, "valid": True}))
            return EXIT_OK
        out = Path(args.out)
        try:
            files = COMMANDS[args.command](cfg, base, out)
        except CliError:
            raise
        except FileNotFoundError as exc:
            raise CliError(EXIT_MISSING, "missing_input", str(exc), path=str(exc.filename)) from None
        except Exception as exc:  # noqa: BLE001 - every failure becomes an error record
            raise CliError(EXIT_FAILED, type(exc).__name__, str(exc)) from None
        digests = {}
        for name in sorted(files):
            data = files[name]
            _write_atomic(out / name, data)
            digests[name] = hashlib.sha256(data if isinstance(data, bytes) else data.encode()).hexdigest()
        manifest = {"command": args.command, "version": __version__, "config": cfg, "outputs": digests}
        _write_atomic(out / "manifest.json", _json_text(manifest))
        return EXIT_OK
    except CliError as err:
        sys.stderr.write(json.dumps(err.record, sort_keys=True) + "\n")
        return err.code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
