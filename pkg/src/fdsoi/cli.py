"""Command-line front end.

    fdsoi analytic   [--config FILE] [--out DIR] [--wf A:B:S]
    fdsoi simulate   [--config FILE] [--out DIR] [--vg A:B:S|V] [--vd A:B:S|V] [--mesh M]
    fdsoi extract    IV.csv [IV.csv ...] [--config FILE] [--out DIR]
    fdsoi sweep-wf   [--config FILE] [--out DIR] [--wf A:B:S] [--vg A:B:S] [--mesh M] [--jobs N]

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import dataclasses
import hashlib
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .ddsolver import QUANTITIES, ConvergenceError, SolverSettings, SweepFailed, TransportParams
from .ddsolver import as_solver, export_cutline, sweep_drain, sweep_gate
from .device import NM, DeviceSpec, SpecError, validate_spec
from .extract import (ExtractionError, ExtractionSettings, IVCurve, extract_report, format_number,
                      ingest_iv_csv, write_iv_csv)
from .physcore import (CONST, AnalyticInputs, DomainError, MaterialParams, fermi_potential,
                       subthreshold_slope_analytic, vth_classic, vth_fdsoi)
from .sweep import BiasPlan, SweepError, SweepPlan, grid, run_wf_sweep

log = logging.getLogger("fdsoi")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

ANALYTIC_HEADER = "phi_m_eV,vth_classic_V,vth_fdsoi_V,ss_mV_per_dec"
SUMMARY_HEADER = ("wf_eV,vth_cc_V,vth_extrap_V,ss_mV_per_dec,dibl_mV_per_V,"
                  "ioff_A_per_um,ion_A_per_um,ion_ioff,gm_max_S_per_um")
SUMMARY_FIELDS = ("vth_cc", "vth_extrap", "ss", "dibl", "ioff", "ion", "ion_ioff", "gm_max")

# lengths are given in nm in the config and converted to cm for DeviceSpec
_NM_KEYS = ("l_gate", "t_si", "t_ox", "t_box", "t_spacer", "l_sd", "junction_decay")


def _device_defaults() -> dict:
    out = {}
    for k, v in DeviceSpec().to_dict().items():
        if k in _NM_KEYS:
            out[f"{k}_nm"] = round(v / NM, 12)
        else:
            out[k] = v
    return out


def default_config() -> dict:
    ex = ExtractionSettings()
    mat = dataclasses.asdict(MaterialParams())
    return {
        "device": _device_defaults(),
        "materials": mat,
        "transport": {"srh_enabled": True, "n_t": 0.0},
        "solver": dataclasses.asdict(SolverSettings()),
        "extraction": {"i_crit": ex.i_crit, "ss_window": list(ex.ss_window),
                       "vd_low": ex.vd_low, "vd_high": ex.vd_high, "vdd": ex.vdd, "r_d": ex.r_d},
        "analytic": {"wf": "4.4:5.0:0.05", "q_ss": 0.0, "q_ssb": 0.0},
        "simulate": {"vg": "0:1:0.05", "vd": 1.0,
                     "cutline": {"direction": "vertical", "at_nm": None,
                                 "quantities": list(QUANTITIES)}},
        "sweep": {"wf": "4.4:5.0:0.05", "vg": "-0.4:1.2:0.05", "vd": "0:1:0.05", "jobs": 1},
        "mesh": "nominal",
        "out": "out",
    }


class ConfigError(ValueError):
    """Invalid configuration or input; maps to exit code 2."""


# ----------------------------------------------------------------- config
def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key: {where}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config key {where} must be an object")
            out[key] = _merge(base[key], val, where + ".")
        else:
            out[key] = val
    return out


def parse_range(value, name: str) -> tuple[float, ...]:
    """``"a:b:s"``, ``{"start", "stop", "step"}``, a list, or a single number."""
    try:
        if isinstance(value, bool):
            raise ConfigError(f"{name}: expected a number or range")
        if isinstance(value, (int, float)):
            return (float(value),)
        if isinstance(value, str):
            parts = value.split(":")
            if len(parts) == 1:
                return (float(parts[0]),)
            if len(parts) != 3:
                raise ConfigError(f"{name}: expected start:stop:step, got {value!r}")
            return grid(*(float(p) for p in parts))
        if isinstance(value, dict):
            for key in ("start", "stop", "step"):
                if key not in value:
                    raise ConfigError(f"{name}: missing required key '{key}'")
            extra = set(value) - {"start", "stop", "step"}
            if extra:
                raise ConfigError(f"{name}: unknown key '{sorted(extra)[0]}'")
            return grid(float(value["start"]), float(value["stop"]), float(value["step"]))
        if isinstance(value, list):
            out = tuple(float(v) for v in value)
            if not out:
                raise ConfigError(f"{name}: empty list")
            return out
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{name}: {exc}") from None
    raise ConfigError(f"{name}: expected a number or range")


def load_config(path: str | None, flags: dict) -> dict:
    """Resolve defaults < file < flags."""
    cfg = default_config()
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        cfg = _merge(cfg, data)
    for dotted, val in flags.items():
        if val is None:
            continue
        node = cfg
        *head, last = dotted.split(".")
        for k in head:
            node = node[k]
        node[last] = val
    return cfg


def build_device(cfg: dict) -> DeviceSpec:
    d = {}
    for k, v in cfg["device"].items():
        if k.endswith("_nm") and k[:-3] in _NM_KEYS:
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ConfigError(f"device.{k}: expected a number")
            d[k[:-3]] = float(v) * NM
        else:
            d[k] = v
    spec = DeviceSpec.from_dict(d)
    try:
        errors = validate_spec(spec)
    except TypeError:
        raise ConfigError("device: non-numeric value") from None
    if errors:
        raise ConfigError("device: " + "; ".join(errors))
    return spec


def _build(cls, section: str, values: dict):
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}: {exc}") from None


def build_objects(cfg: dict):
    spec = build_device(cfg)
    mat = _build(MaterialParams, "materials", cfg["materials"])
    tr = cfg["transport"]
    tp = _build(TransportParams, "transport",
                dict(mu_n=mat.mu_n, mu_p=mat.mu_p, tau_n=mat.tau_n, tau_p=mat.tau_p,
                     srh_enabled=bool(tr["srh_enabled"]), n_t=tr["n_t"], temp=spec.temp))
    settings = _build(SolverSettings, "solver", cfg["solver"])
    ex = dict(cfg["extraction"])
    ex["ss_window"] = tuple(ex["ss_window"])
    extraction = _build(ExtractionSettings, "extraction", ex)
    if cfg["mesh"] not in ("coarse", "nominal", "fine"):
        raise ConfigError(f"mesh: unknown density {cfg['mesh']!r}")
    return spec, mat, tp, settings, extraction


# ----------------------------------------------------------------- output
def _clean(obj):
    """JSON-safe copy: NaN/inf become null, numpy scalars become Python."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


class Outputs:
    """Writes files under one directory and keeps a hash manifest."""

    def __init__(self, root: Path):
        self.root = root
        self.root.mkdir(parents=True, exist_ok=True)
        self.files: dict[str, str] = {}

    def _record(self, path: Path) -> Path:
        data = path.read_bytes()
        self.files[path.name] = hashlib.sha256(data).hexdigest()
        return path

    def text(self, name: str, content: str) -> Path:
        path = self.root / name
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(content)
        return self._record(path)

    def json(self, name: str, obj) -> Path:
        return self.text(name, json.dumps(_clean(obj), indent=2, sort_keys=True,
                                          allow_nan=False) + "\n")

    def iv(self, name: str, curve: IVCurve) -> Path:
        return self._record(write_iv_csv(curve, self.root / name))

    def manifest(self) -> list[dict]:
        return [{"file": k, "sha256": v} for k, v in sorted(self.files.items())]


def _csv_field(x) -> str:
    return "" if x is None or (isinstance(x, float) and not math.isfinite(x)) else format_number(x)


def write_report(out: Outputs, command: str, cfg: dict, timings: dict, status: str,
                 results: dict, failures: list) -> None:
    out.json("report.json", {
        "tool": "fdsoi",
        "version": __version__,
        "command": command,
        "status": status,
        "config": cfg,
        "timings_s": timings,
        "results": results,
        "failures": failures,
        "manifest": out.manifest(),
    })


# ----------------------------------------------------------------- commands
def cmd_analytic(cfg: dict, out: Outputs) -> int:
    spec, mat, *_ = build_objects(cfg)
    a = cfg["analytic"]
    wf = parse_range(a["wf"], "analytic.wf")
    # body factor of a fully depleted film: film and BOX capacitances in series
    c_si = mat.eps_r_si * CONST.eps0 / spec.t_si
    c_box = mat.eps_r_ox * CONST.eps0 / spec.t_box
    cd = c_si * c_box / (c_si + c_box)
    ci = mat.eps_r_ox * CONST.eps0 / spec.t_ox
    ss = subthreshold_slope_analytic(cd, ci, spec.temp)
    lines = [ANALYTIC_HEADER]
    t0 = time.perf_counter()
    for phi in wf:
        inp = AnalyticInputs(phi_m=phi, na=spec.na_channel, nd_film=spec.na_channel,
                             t_ox=spec.t_ox, t_si=spec.t_si, q_ss=float(a["q_ss"]),
                             q_ssb=float(a["q_ssb"]), temp=spec.temp)
        try:
            row = (phi, vth_classic(inp, mat), vth_fdsoi(inp, mat), ss)
        except DomainError as exc:
            raise ConfigError(f"analytic: {exc}") from None
        lines.append(",".join(format_number(x) for x in row))
    out.text("analytic.csv", "\n".join(lines) + "\n")
    print("\n".join(lines))
    write_report(out, "analytic", cfg, {"analytic": time.perf_counter() - t0}, "ok",
                 {"phi_f_V": fermi_potential(spec.na_channel, mat.ni, spec.temp),
                  "cd_F_per_cm2": cd, "ci_F_per_cm2": ci}, [])
    return EXIT_OK


def _fmt_bias(x: float) -> str:
    return format_number(x)


def cmd_simulate(cfg: dict, out: Outputs) -> int:
    spec, mat, tp, settings, _ = build_objects(cfg)
    s = cfg["simulate"]
    vg = parse_range(s["vg"], "simulate.vg")
    vd = parse_range(s["vd"], "simulate.vd")
    if len(vg) > 1 and len(vd) > 1:
        raise ConfigError("simulate: sweep either vg or vd; the other must be a single value")
    cut = s["cutline"]
    extra = set(cut) - {"direction", "at_nm", "quantities"}
    if extra:
        raise ConfigError(f"unknown config key: simulate.cutline.{sorted(extra)[0]}")
    bad = [q for q in cut["quantities"] if q not in QUANTITIES]
    if bad:
        raise ConfigError(f"simulate.cutline.quantities: unknown {bad}; choose from {QUANTITIES}")
    if cut["direction"] not in ("vertical", "horizontal"):
        raise ConfigError("simulate.cutline.direction: must be 'vertical' or 'horizontal'")

    timings: dict = {}
    t0 = time.perf_counter()
    solver = as_solver(spec, cfg["mesh"], mat, tp, settings)
    timings["mesh"] = time.perf_counter() - t0
    failures, results = [], {"mesh_nodes": solver.mesh.n_nodes}
    t0 = time.perf_counter()
    try:
        if len(vd) == 1:
            name = "iv_gate.csv"
            curve, states = sweep_gate(solver, vd[0], vg, return_states=True)
        else:
            name = "iv_drain.csv"
            curve, states = sweep_drain(solver, vg[0], vd, return_states=True)
    except SweepFailed as exc:
        timings["sweep"] = time.perf_counter() - t0
        failures.append({"stage": "sweep", "message": str(exc), "failed_bias": exc.failed_bias})
        if exc.partial_v:
            kind = "gate" if len(vd) == 1 else "drain"
            fixed = vd[0] if kind == "gate" else vg[0]
            partial = IVCurve(kind, fixed, exc.partial_v, exc.partial_i, min_points=1)
            out.iv("iv_gate.csv" if kind == "gate" else "iv_drain.csv", partial)
        write_report(out, "simulate", cfg, timings, "failed", results, failures)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ConvergenceError as exc:
        failures.append({"stage": "sweep", "message": str(exc)})
        write_report(out, "simulate", cfg, timings, "failed", results, failures)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    timings["sweep"] = time.perf_counter() - t0
    out.iv(name, curve)

    # cutlines at the last bias point
    final = states[-1]
    mesh = solver.mesh
    at_nm = cut["at_nm"]
    if at_nm is None:
        if cut["direction"] == "vertical":
            coord = spec.l_sd + 0.5 * spec.l_gate
        else:
            coord = mesh.y_lines[mesh.film_rows[-1]] - 0.5 * NM
    else:
        coord = float(at_nm) * NM
    try:
        line = export_cutline(final, mesh, cut["direction"], coord, cut["quantities"])
    except IndexError as exc:
        raise ConfigError(f"simulate.cutline.at_nm: {exc}") from None
    for q in cut["quantities"]:
        rows = ["position_nm,value"]
        rows += [f"{format_number(p / NM)},{format_number(v)}" for p, v in line.rows(q)]
        out.text(f"cutline_{q}.csv", "\n".join(rows) + "\n")
    results.update({
        "cutline": {"direction": cut["direction"], "coordinate_nm": coord / NM,
                    "bias": {k: _clean(v) for k, v in final.bias.items()}},
        "points": len(curve.v),
    })
    write_report(out, "simulate", cfg, timings, "ok", results, failures)
    print(f"wrote {name} ({len(curve.v)} points) and {len(cut['quantities'])} cutlines to {out.root}")
    return EXIT_OK


def classify_curves(curves: list[IVCurve]):
    """Split ingested curves into (gate_high, gate_low, drain)."""
    gates = sorted((c for c in curves if c.kind == "gate"), key=lambda c: c.fixed_bias)
    drains = [c for c in curves if c.kind == "drain"]
    if not gates:
        raise ConfigError("extract: need at least one gate sweep (constant vd)")
    if len(gates) > 2 or len(drains) > 1:
        raise ConfigError("extract: expected at most two gate sweeps and one drain sweep")
    gate_high = gates[-1]
    gate_low = gates[0] if len(gates) == 2 else None
    return gate_high, gate_low, (drains[0] if drains else None)


def cmd_extract(cfg: dict, out: Outputs, files: list[str]) -> int:
    *_, extraction = build_objects(cfg)
    if not files:
        raise ConfigError("extract: no I-V files given")
    t0 = time.perf_counter()
    curves = []
    for f in files:
        try:
            curves.append(ingest_iv_csv(f))
        except OSError as exc:
            raise ConfigError(f"{f}: {exc.strerror}") from None
        except ExtractionError as exc:
            msg = str(exc)
            raise ConfigError(msg if msg.startswith(f) else f"{f}: {msg}") from None
    high, low, drain = classify_curves(curves)
    rep = extract_report(high, low, drain, extraction)
    out.json("extraction.json", {
        "inputs": [str(Path(f).name) for f in files],
        "settings": dataclasses.asdict(extraction),
        "report": rep.to_dict(),
    })
    write_report(out, "extract", cfg, {"extract": time.perf_counter() - t0}, "ok",
                 {"complete": rep.complete}, [])
    for k, v in rep.to_dict().items():
        if k not in ("windows", "errors"):
            print(f"{k:>10s} = {v}")
    for k, v in rep.errors.items():
        print(f"{k:>10s} : {v}")
    return EXIT_OK


def summary_csv(report) -> str:
    lines = [SUMMARY_HEADER]
    for row in report.rows:
        vals = [format_number(row.wf)] + [_csv_field(row.value(k)) for k in SUMMARY_FIELDS]
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


def cmd_sweep_wf(cfg: dict, out: Outputs) -> int:
    spec, mat, tp, settings, extraction = build_objects(cfg)
    sw = cfg["sweep"]
    extra_ok = isinstance(sw["jobs"], int) and not isinstance(sw["jobs"], bool)
    if not extra_ok:
        raise ConfigError("sweep.jobs: expected an integer")
    bias = BiasPlan(vg=parse_range(sw["vg"], "sweep.vg"), vd=parse_range(sw["vd"], "sweep.vd"),
                    vd_low=extraction.vd_low, vd_high=extraction.vd_high, vdd=extraction.vdd)
    plan = SweepPlan(device=spec, wf_values=parse_range(sw["wf"], "sweep.wf"), bias=bias,
                     density=cfg["mesh"], settings=settings, extraction=extraction,
                     material=mat, transport=tp, jobs=sw["jobs"])
    errors = plan.validate()
    if errors:
        raise ConfigError("sweep: " + "; ".join(errors))
    t0 = time.perf_counter()
    status, code = "ok", EXIT_OK
    try:
        report = run_wf_sweep(plan)
    except SweepError as exc:
        report, status, code = exc.report, "failed", EXIT_NUMERIC
    timings = {"sweep": time.perf_counter() - t0}
    out.text("sweep_summary.csv", summary_csv(report))
    failures = [{"wf_eV": r.wf, "status": r.status, "errors": r.errors}
                for r in report.rows if r.status != "ok"]
    if status == "ok" and failures:
        status = "partial"
    write_report(out, "sweep-wf", cfg, timings, status, report.to_dict(), failures)
    print(summary_csv(report), end="")
    if report.optimum_wf is not None:
        print(f"optimum work function: {report.optimum_wf:.4f} eV ({report.policy['name']})")
    return code


# ----------------------------------------------------------------- entry point
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fdsoi", description="FD-SOI NMOSFET drift-diffusion "
                                "simulation and gate work-function studies.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("-v", "--verbose", action="store_true")

    sp = sub.add_parser("analytic", help="closed-form threshold voltage and swing")
    common(sp)
    sp.add_argument("--wf", help="work-function grid start:stop:step (eV)")

    sp = sub.add_parser("simulate", help="I-V sweep and cutlines of one device")
    common(sp)
    sp.add_argument("--vg", help="gate bias value or start:stop:step (V)")
    sp.add_argument("--vd", help="drain bias value or start:stop:step (V)")
    sp.add_argument("--mesh", choices=("coarse", "nominal", "fine"))

    sp = sub.add_parser("extract", help="metrics from I-V CSV files")
    common(sp)
    sp.add_argument("files", nargs="*", help="I-V CSV files (up to two gate sweeps, one drain sweep)")

    sp = sub.add_parser("sweep-wf", help="gate work-function sweep")
    common(sp)
    sp.add_argument("--wf", help="work-function grid start:stop:step (eV)")
    sp.add_argument("--vg", help="gate grid start:stop:step (V)")
    sp.add_argument("--mesh", choices=("coarse", "nominal", "fine"))
    sp.add_argument("--jobs", type=int, help="worker processes")
    return p


def _flags(args) -> dict:
    cmd = args.command
    f = {"out": args.out}
    if cmd == "analytic":
        f["analytic.wf"] = args.wf
    elif cmd == "simulate":
        f.update({"simulate.vg": args.vg, "simulate.vd": args.vd, "mesh": args.mesh})
    elif cmd == "sweep-wf":
        f.update({"sweep.wf": args.wf, "sweep.vg": args.vg, "mesh": args.mesh,
                  "sweep.jobs": args.jobs})
    return f


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, _flags(args))
        out = Outputs(Path(cfg["out"]))
        if args.command == "analytic":
            return cmd_analytic(cfg, out)
        if args.command == "simulate":
            return cmd_simulate(cfg, out)
        if args.command == "extract":
            return cmd_extract(cfg, out, args.files)
        return cmd_sweep_wf(cfg, out)
    except (ConfigError, SpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
