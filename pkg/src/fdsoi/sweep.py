"""Gate work-function sweeps: simulate, extract, fit trends, pick an optimum."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .ddsolver import ConvergenceError, SolverSettings, SweepFailed, TransportParams, as_solver
from .device import DeviceSpec, SpecError, default_device, validate_spec
from .extract import ExtractionReport, ExtractionSettings, IVCurve, extract_report
from .physcore import SILICON, DomainError, MaterialParams

log = logging.getLogger(__name__)

WF_RANGE = (3.5, 6.0)
POLICY = "minmax-normalized"


class SweepError(RuntimeError):
    """Every point of a sweep failed."""

    def __init__(self, message: str, report: "SweepReport"):
        super().__init__(message)
        self.report = report


class PolicyError(ValueError):
    """The optimum-selection policy is undefined for the given data."""


def grid(start: float, stop: float, step: float) -> tuple[float, ...]:
    """Inclusive arithmetic grid, rounded so that e.g. 0.05 * 20 lands on 1.0."""
    if not step > 0:
        raise ValueError("step must be positive")
    if stop < start:
        raise ValueError("stop must not be below start")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + k * step, 12) for k in range(n))


DEFAULT_WF = grid(4.40, 5.00, 0.05)


@dataclass(frozen=True)
class BiasPlan:
    """Bias grids for one work-function point.

    The gate grid extends past Vdd so that the transconductance peak of the
    linear-region curve is interior for high work functions too.
    """

    vg: tuple[float, ...] = grid(-0.4, 1.2, 0.05)
    vd: tuple[float, ...] = grid(0.0, 1.0, 0.05)
    vd_low: float = 0.05
    vd_high: float = 1.0
    vdd: float = 1.0

    def extraction(self, base: ExtractionSettings = ExtractionSettings()) -> ExtractionSettings:
        return ExtractionSettings(base.i_crit, tuple(base.ss_window), self.vd_low, self.vd_high,
                                  self.vdd, base.r_d)


@dataclass(frozen=True)
class SweepPlan:
    device: DeviceSpec = field(default_factory=default_device)
    wf_values: tuple[float, ...] = DEFAULT_WF
    bias: BiasPlan = BiasPlan()
    density: str = "nominal"
    settings: SolverSettings = SolverSettings()
    extraction: ExtractionSettings = ExtractionSettings()
    material: MaterialParams = SILICON
    transport: TransportParams | None = None
    jobs: int = 1

    def validate(self) -> list[str]:
        errors = list(validate_spec(self.device))
        wf = np.asarray(self.wf_values, dtype=float)
        if wf.size == 0:
            errors.append("wf_values: empty")
        elif np.any(np.diff(wf) <= 0):
            errors.append("wf_values: must be strictly increasing")
        if wf.size and (wf.min() < WF_RANGE[0] or wf.max() > WF_RANGE[1]):
            errors.append(f"wf_values: outside [{WF_RANGE[0]}, {WF_RANGE[1]}] eV")
        b = self.bias
        vg = np.asarray(b.vg, dtype=float)
        if vg.size < 5 or np.any(np.diff(vg) <= 0):
            errors.append("bias.vg: need at least 5 strictly increasing values")
        elif not (vg[0] <= 0.0 and vg[-1] >= b.vdd):
            errors.append(f"bias.vg: grid must cover [0, {b.vdd}]")
        vd = np.asarray(b.vd, dtype=float)
        if vd.size < 5 or np.any(np.diff(vd) <= 0):
            errors.append("bias.vd: need at least 5 strictly increasing values")
        elif not vd[0] <= b.vdd <= vd[-1]:
            errors.append(f"bias.vd: grid must contain vdd={b.vdd}")
        if not 0 <= b.vd_low < b.vd_high:
            errors.append("bias: need 0 <= vd_low < vd_high")
        if self.density not in ("coarse", "nominal", "fine"):
            errors.append(f"density: unknown value {self.density!r}")
        if not (isinstance(self.jobs, int) and self.jobs >= 1):
            errors.append("jobs: must be a positive integer")
        return errors


@dataclass
class SweepRow:
    wf: float
    status: str  # "ok" | "partial" | "failed"
    report: ExtractionReport | None
    errors: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    curves: dict = field(default_factory=dict, repr=False)

    def value(self, name: str):
        return None if self.report is None else getattr(self.report, name)

    def to_dict(self) -> dict:
        return {
            "wf_eV": self.wf,
            "status": self.status,
            "metrics": None if self.report is None else self.report.to_dict(),
            "errors": dict(self.errors),
            "diagnostics": dict(self.diagnostics),
        }


@dataclass(frozen=True)
class TrendFit:
    slope: float
    intercept: float
    r2: float
    n: int


@dataclass
class SweepReport:
    rows: list[SweepRow]
    vth_fit: TrendFit | None = None
    log_ioff_fit: TrendFit | None = None
    optimum_wf: float | None = None
    policy: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    @property
    def wf(self) -> np.ndarray:
        return np.array([r.wf for r in self.rows])

    def column(self, name: str) -> np.ndarray:
        """Metric per row as floats, NaN where missing."""
        return np.array([np.nan if r.value(name) is None else r.value(name) for r in self.rows],
                        dtype=float)

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "trend_fits": {
                "vth_cc_vs_wf": None if self.vth_fit is None else asdict(self.vth_fit),
                "log10_ioff_vs_wf": None if self.log_ioff_fit is None else asdict(self.log_ioff_fit),
            },
            "optimum_wf_eV": self.optimum_wf,
            "policy": dict(self.policy),
            "notes": dict(self.notes),
        }


# ---------------------------------------------------------------- single point
def _try_sweep(fn, name, errors, diag):
    try:
        curve = fn()
    except SweepFailed as exc:
        errors[name] = str(exc)
        diag[f"{name}_failed_bias"] = exc.failed_bias
        if len(exc.partial_v) >= 5:
            return IVCurve(name.split("_")[0], float("nan"), exc.partial_v, exc.partial_i)
        return None
    except ConvergenceError as exc:
        errors[name] = str(exc)
        return None
    return curve


def run_point(plan: SweepPlan, wf: float, keep_curves: bool = False) -> SweepRow:
    """Simulate and characterize the device at one gate work function."""
    from .ddsolver import sweep_drain, sweep_gate

    spec = plan.device.replace(phi_m=float(wf))
    solver = as_solver(spec, plan.density, plan.material, plan.transport, plan.settings)
    b = plan.bias
    errors: dict = {}
    diag: dict = {"mesh_nodes": solver.mesh.n_nodes}
    try:
        eq = solver.equilibrium()
    except ConvergenceError as exc:
        return SweepRow(float(wf), "failed", None, {"equilibrium": str(exc)}, diag)
    diag["equilibrium_iterations"] = eq.diagnostics.get("outer_iterations")

    low = _try_sweep(lambda: sweep_gate(solver, b.vd_low, b.vg, start=eq), "gate_low", errors, diag)
    high = _try_sweep(lambda: sweep_gate(solver, b.vd_high, b.vg, start=eq), "gate_high", errors, diag)
    drain = _try_sweep(lambda: sweep_drain(solver, b.vdd, b.vd, start=eq), "drain", errors, diag)
    if high is not None and not math.isfinite(high.fixed_bias):
        high = IVCurve("gate", b.vd_high, high.v, high.i)
    if low is not None and not math.isfinite(low.fixed_bias):
        low = IVCurve("gate", b.vd_low, low.v, low.i)
    if drain is not None and not math.isfinite(drain.fixed_bias):
        drain = IVCurve("drain", b.vdd, drain.v, drain.i)

    if high is None:
        return SweepRow(float(wf), "failed", None, errors, diag,
                        {"gate_low": low, "drain": drain} if keep_curves else {})
    rep = extract_report(high, low, drain, b.extraction(plan.extraction))
    all_errors = {**errors, **rep.errors}
    status = "ok" if not all_errors else "partial"
    curves = {"gate_low": low, "gate_high": high, "drain": drain} if keep_curves else {}
    return SweepRow(float(wf), status, rep, all_errors, diag, curves)


def _point_task(args):
    plan, wf, keep = args
    return run_point(plan, wf, keep)


# ---------------------------------------------------------------- trends
def fit_trend(xs, ys) -> TrendFit:
    """Ordinary least squares y = slope * x + intercept.

    Convention: if ``ys`` has zero variance the fit is exact, so slope = 0
    and r2 = 1.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DomainError("xs and ys must be 1-D and equal length")
    if x.size < 3 or not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DomainError("need at least 3 finite points")
    if np.ptp(x) == 0:
        raise DomainError("xs have zero variance")
    if np.ptp(y) == 0:
        return TrendFit(0.0, float(y[0]), 1.0, int(x.size))
    res = stats.linregress(x, y)
    return TrendFit(float(res.slope), float(res.intercept),
                    float(min(1.0, max(0.0, res.rvalue ** 2))), int(x.size))


def _normalize(a: np.ndarray, name: str) -> np.ndarray:
    span = a.max() - a.min()
    if span == 0:
        raise PolicyError(f"{name} is constant over the sweep; normalization undefined")
    return (a - a.min()) / span


def minmax_crossover(wf, vth, log_ioff) -> float:
    """Work function minimizing max(normalized vth, normalized log10 Ioff).

    Both objectives are scaled to [0, 1] over the sweep and linearly
    interpolated between grid points; the minimizer is either a grid point
    or a crossing of the two interpolants.
    """
    wf = np.asarray(wf, dtype=float)
    nv = _normalize(np.asarray(vth, dtype=float), "vth")
    nl = _normalize(np.asarray(log_ioff, dtype=float), "log10(ioff)")
    cand_x = list(wf)
    cand_f = list(np.maximum(nv, nl))
    d = nv - nl
    for k in range(wf.size - 1):
        if d[k] * d[k + 1] < 0:
            t = d[k] / (d[k] - d[k + 1])
            cand_x.append(wf[k] + t * (wf[k + 1] - wf[k]))
            cand_f.append(nv[k] + t * (nv[k + 1] - nv[k]))
    best = int(np.argmin(cand_f))
    return float(cand_x[best])


def select_optimum_wf(report: SweepReport, policy: str = POLICY) -> float:
    """Optimum gate work function of a sweep under ``policy``."""
    if policy != POLICY:
        raise PolicyError(f"unknown policy {policy!r}")
    vth = report.column("vth_cc")
    ioff = report.column("ioff")
    ok = np.isfinite(vth) & np.isfinite(ioff) & (ioff > 0)
    if ok.sum() < 3:
        raise PolicyError("need at least 3 rows with vth_cc and ioff")
    return minmax_crossover(report.wf[ok], vth[ok], np.log10(ioff[ok]))


def _fit_or_none(report: SweepReport, name: str, transform, notes: dict):
    y = report.column(name)
    ok = np.isfinite(y)
    if name == "ioff":
        ok &= y > 0
    try:
        return fit_trend(report.wf[ok], transform(y[ok]))
    except DomainError as exc:
        notes[f"{name}_fit"] = f"not applicable: {exc}"
        return None


def summarize(rows: list[SweepRow]) -> SweepReport:
    report = SweepReport(rows)
    report.vth_fit = _fit_or_none(report, "vth_cc", lambda a: a, report.notes)
    report.log_ioff_fit = _fit_or_none(report, "ioff", np.log10, report.notes)
    report.policy = {
        "name": POLICY,
        "description": "normalize vth_cc and log10(ioff) to [0, 1] over the sweep; "
                       "return the work function minimizing the larger of the two, "
                       "with linear interpolation between grid points",
        "formalized": True,
    }
    try:
        report.optimum_wf = select_optimum_wf(report)
    except PolicyError as exc:
        report.notes["optimum"] = f"not applicable: {exc}"
    return report


def run_wf_sweep(plan: SweepPlan, keep_curves: bool = False) -> SweepReport:
    """Characterize the device at every work function of ``plan``.

    Points are independent and run on up to ``plan.jobs`` worker processes;
    rows come back ordered by work function either way.  Failed points are
    kept as rows with status ``"failed"``.  Raises :class:`SweepError` only
    when every point fails.
    """
    errors = plan.validate()
    if errors:
        raise SpecError(errors)
    tasks = [(plan, wf, keep_curves) for wf in plan.wf_values]
    if plan.jobs == 1 or len(tasks) == 1:
        rows = [_point_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(plan.jobs, len(tasks))) as pool:
            rows = list(pool.map(_point_task, tasks))
    rows.sort(key=lambda r: r.wf)
    for r in rows:
        log.info("wf=%.3f eV: %s", r.wf, r.status)
    report = summarize(rows)
    if all(r.status == "failed" for r in rows):
        raise SweepError("all sweep points failed", report)
    return report
