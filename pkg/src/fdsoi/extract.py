"""Transistor metric extraction from Id-Vg / Id-Vd curves.

Currents are per unit width (A/um) throughout; conductances are S/um.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

IV_HEADER = ("vg_V", "vd_V", "id_A_per_um")


class ExtractionError(ValueError):
    pass


class RangeError(ExtractionError):
    """Requested level or window lies outside the data."""


class WindowError(ExtractionError):
    """Feature (e.g. a gm maximum) falls on the boundary of the sweep."""


class IVParseError(ExtractionError):
    def __init__(self, message: str, line: int, path: str | None = None):
        where = f"{path}:{line}" if path else f"line {line}"
        super().__init__(f"{where}: {message}")
        self.line = line
        self.path = path


class IVValidationError(ExtractionError):
    pass


@dataclass(frozen=True, eq=False)
class IVCurve:
    kind: Literal["gate", "drain"]
    fixed_bias: float
    v: np.ndarray
    i: np.ndarray
    provenance: Literal["simulated", "ingested", "synthetic"] = "simulated"
    min_points: int = field(default=5, repr=False)

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        i = np.asarray(self.i, dtype=float)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "i", i)
        if self.kind not in ("gate", "drain"):
            raise IVValidationError(f"unknown curve kind {self.kind!r}")
        if v.shape != i.shape or v.ndim != 1:
            raise IVValidationError("voltage and current arrays must be 1-D and equal length")
        if v.size < self.min_points:
            raise IVValidationError(f"need at least {self.min_points} points, got {v.size}")
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(i))):
            raise IVValidationError("non-finite voltage or current")
        if np.any(np.diff(v) <= 0):
            k = int(np.nonzero(np.diff(v) <= 0)[0][0])
            raise IVValidationError(
                f"swept voltage not strictly increasing at point {k + 1} (v={v[k + 1]!r})")

    @property
    def vg(self) -> np.ndarray:
        return self.v if self.kind == "gate" else np.full_like(self.v, self.fixed_bias)

    @property
    def vd(self) -> np.ndarray:
        return self.v if self.kind == "drain" else np.full_like(self.v, self.fixed_bias)

    def scaled(self, c: float) -> "IVCurve":
        return IVCurve(self.kind, self.fixed_bias, self.v, c * self.i, self.provenance, self.min_points)


# ----------------------------------------------------------------------- CSV I/O
def format_number(x: float) -> str:
    """Shortest round-trip decimal representation."""
    return repr(float(x))


def iv_to_csv(curve: IVCurve) -> str:
    lines = [",".join(IV_HEADER)]
    for vg, vd, i in zip(curve.vg, curve.vd, curve.i):
        lines.append(f"{format_number(vg)},{format_number(vd)},{format_number(i)}")
    return "\n".join(lines) + "\n"


def write_iv_csv(curve: IVCurve, path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(iv_to_csv(curve))
    return path


def parse_iv_csv(text: str, path: str | None = None) -> IVCurve:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(c.strip() for c in rows[0]) != IV_HEADER:
        raise IVParseError(f"expected header {','.join(IV_HEADER)}", 1, path)
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise IVParseError(f"expected 3 columns, got {len(row)}", lineno, path)
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise IVParseError(f"non-numeric field in {row!r}", lineno, path) from None
        if not all(math.isfinite(x) for x in vals):
            raise IVParseError("non-finite value", lineno, path)
        data.append(vals)
    if len(data) < 2:
        raise IVValidationError("curve has fewer than 2 rows")
    arr = np.array(data)
    vg, vd, i = arr.T
    if np.all(vd == vd[0]):
        kind, v, fixed = "gate", vg, vd[0]
    elif np.all(vg == vg[0]):
        kind, v, fixed = "drain", vd, vg[0]
    else:
        raise IVValidationError("neither vg nor vd is constant: not a single sweep")
    return IVCurve(kind, float(fixed), v, i, "ingested")


def ingest_iv_csv(path) -> IVCurve:
    path = Path(path)
    return parse_iv_csv(path.read_text(encoding="utf-8"), str(path))


# -------------------------------------------------------------------- extraction
def _require(iv: IVCurve, kind: str) -> None:
    if iv.kind != kind:
        raise ExtractionError(f"expected a {kind} sweep, got {iv.kind}")


def _log_current(i: np.ndarray) -> np.ndarray:
    return np.log10(np.maximum(np.abs(i), 1e-300))


def vth_constant_current(iv: IVCurve, i_crit: float = 1e-7) -> float:
    """Gate voltage at which Id first rises through ``i_crit``.

    Log-linear interpolation between the bracketing samples.
    """
    _require(iv, "gate")
    if not i_crit > 0:
        raise ExtractionError("i_crit must be positive")
    li = _log_current(iv.i)
    lc = math.log10(i_crit)
    above = np.nonzero(li >= lc)[0]
    if above.size == 0 or above[0] == 0:
        raise RangeError(
            f"i_crit={i_crit:g} not crossed in current range "
            f"[{np.abs(iv.i).min():.3g}, {np.abs(iv.i).max():.3g}]")
    k = int(above[0])
    v0, v1 = iv.v[k - 1], iv.v[k]
    l0, l1 = li[k - 1], li[k]
    return float(v0 + (lc - l0) / (l1 - l0) * (v1 - v0))


def transconductance(iv: IVCurve) -> np.ndarray:
    """dId/dVg: nonuniform three-point central differences, second-order one-sided at ends."""
    _require(iv, "gate")
    if iv.v.size < 3:
        raise ExtractionError("need at least 3 points")
    # offset removal keeps a constant curve exactly zero at the end stencils
    return np.gradient(iv.i - iv.i[0], iv.v, edge_order=2)


def output_conductance(iv: IVCurve) -> np.ndarray:
    """dId/dVd with the same stencil as :func:`transconductance`."""
    _require(iv, "drain")
    if iv.v.size < 3:
        raise ExtractionError("need at least 3 points")
    # offset removal keeps a constant curve exactly zero at the end stencils
    return np.gradient(iv.i - iv.i[0], iv.v, edge_order=2)


def vth_linear_extrapolation(iv: IVCurve) -> float:
    """Vg-axis intercept of the tangent at the transconductance maximum."""
    gm = transconductance(iv)
    peak = gm.max()
    if not peak > 0:
        raise WindowError("no positive transconductance")
    k = int(np.nonzero(gm >= peak * (1 - 1e-9))[0][0])
    if k == 0 or k == gm.size - 1:
        raise WindowError(f"gm maximum at sweep boundary (Vg={iv.v[k]!r})")
    return float(iv.v[k] - iv.i[k] / gm[k])


def subthreshold_slope(iv: IVCurve, decade_window: tuple[float, float] = (1e-11, 1e-8)) -> float:
    """Inverse slope (mV/dec) of a least-squares fit of log10(Id) vs Vg in a current window."""
    _require(iv, "gate")
    lo, hi = decade_window
    if not 0 < lo < hi:
        raise ExtractionError("window must satisfy 0 < lo < hi")
    ai = np.abs(iv.i)
    inside = (ai >= lo) & (ai <= hi)
    if inside.sum() < 3:
        raise RangeError(f"fewer than 3 points inside window [{lo:g}, {hi:g}] A/um")
    li = np.log10(ai[inside])
    if li.max() - li.min() < 1.0:
        raise RangeError("points inside the window span less than one decade")
    slope = np.polyfit(iv.v[inside], li, 1)[0]
    if not slope > 0:
        raise ExtractionError("current does not rise with Vg inside the window")
    return float(1e3 / slope)


def dibl(iv_low: IVCurve, iv_high: IVCurve, i_crit: float = 1e-7) -> float:
    """Threshold shift per volt of drain bias, mV/V."""
    if not iv_low.fixed_bias < iv_high.fixed_bias:
        if iv_low.fixed_bias == iv_high.fixed_bias and np.array_equal(iv_low.i, iv_high.i) \
                and np.array_equal(iv_low.v, iv_high.v):
            return 0.0
        raise ExtractionError("iv_low must be taken at a lower drain bias than iv_high")
    v_lo = vth_constant_current(iv_low, i_crit)
    v_hi = vth_constant_current(iv_high, i_crit)
    return float((v_lo - v_hi) / (iv_high.fixed_bias - iv_low.fixed_bias) * 1e3)


def voltage_gain(gm_max: float, r_d: float) -> float:
    if not (gm_max > 0 and r_d > 0):
        raise ExtractionError("gm and R_D must be positive")
    return gm_max * r_d


def ioff_ion(iv: IVCurve, vdd: float = 1.0) -> tuple[float, float, float]:
    """(Id at Vg=0, Id at Vg=vdd, ratio) from a gate sweep at Vd = vdd."""
    _require(iv, "gate")
    v = iv.v
    if not (v[0] <= 0.0 <= v[-1] and v[0] <= vdd <= v[-1]):
        raise RangeError(f"sweep [{v[0]}, {v[-1]}] does not cover Vg=0 and Vg={vdd}")

    def at(x, log):
        hit = np.nonzero(v == x)[0]
        if hit.size:
            return float(iv.i[hit[0]])
        k = int(np.searchsorted(v, x))
        t = (x - v[k - 1]) / (v[k] - v[k - 1])
        if log:
            l0, l1 = _log_current(iv.i[k - 1:k + 1])
            return float(10 ** (l0 + t * (l1 - l0)))
        return float(iv.i[k - 1] + t * (iv.i[k] - iv.i[k - 1]))

    ioff = at(0.0, True)
    ion = at(vdd, False)
    return ioff, ion, ion / ioff


# ------------------------------------------------------------------------ report
@dataclass(frozen=True)
class ExtractionSettings:
    i_crit: float = 1e-7
    ss_window: tuple[float, float] = (1e-11, 1e-8)
    vd_low: float = 0.05
    vd_high: float = 1.0
    vdd: float = 1.0
    r_d: float = 1e4


@dataclass
class ExtractionReport:
    vth_cc: float | None = None
    vth_extrap: float | None = None
    ss: float | None = None
    dibl: float | None = None
    gm_max: float | None = None
    gd: float | None = None
    av: float | None = None
    ioff: float | None = None
    ion: float | None = None
    ion_ioff: float | None = None
    windows: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return asdict(self)


def _attempt(report: ExtractionReport, name: str, fn):
    try:
        return fn()
    except ExtractionError as exc:
        report.errors[name] = str(exc)
        return None


def extract_report(gate_high: IVCurve, gate_low: IVCurve | None = None,
                   drain: IVCurve | None = None,
                   settings: ExtractionSettings = ExtractionSettings()) -> ExtractionReport:
    """Full metric set.

    ``gate_high`` is the Id-Vg sweep at the high (Vdd) drain bias; vth_cc,
    gm_max, Ioff and Ion come from it.  SS and the extrapolated threshold use
    ``gate_low`` when given (linear region).  gm_max is the peak over the
    operating window 0 <= Vg <= Vdd.  DIBL needs both gate sweeps and gd the
    drain sweep.
    """
    s = settings
    rep = ExtractionReport()
    rep.windows = {
        "i_crit_A_per_um": s.i_crit,
        "ss_window_A_per_um": list(s.ss_window),
        "ss_curve_vd_V": (gate_low or gate_high).fixed_bias,
        "extrap_curve_vd_V": (gate_low or gate_high).fixed_bias,
        "gm_window_vg_V": [0.0, s.vdd],
        "vd_low_V": gate_low.fixed_bias if gate_low is not None else None,
        "vd_high_V": gate_high.fixed_bias,
        "vdd_V": s.vdd,
        "r_d_ohm_um": s.r_d,
        "gd_at_vd_V": s.vdd,
        "gd_at_vg_V": drain.fixed_bias if drain is not None else None,
    }
    rep.vth_cc = _attempt(rep, "vth_cc", lambda: vth_constant_current(gate_high, s.i_crit))
    rep.vth_extrap = _attempt(rep, "vth_extrap", lambda: vth_linear_extrapolation(gate_low or gate_high))
    rep.ss = _attempt(rep, "ss", lambda: subthreshold_slope(gate_low or gate_high, s.ss_window))
    if gate_low is not None:
        rep.dibl = _attempt(rep, "dibl", lambda: dibl(gate_low, gate_high, s.i_crit))
    gm = _attempt(rep, "gm_max", lambda: transconductance(gate_high))
    if gm is not None:
        win = (gate_high.v >= 0.0) & (gate_high.v <= s.vdd)
        rep.gm_max = float(gm[win].max() if win.any() else gm.max())
        rep.av = _attempt(rep, "av", lambda: voltage_gain(rep.gm_max, s.r_d))
    if drain is not None:
        gd = _attempt(rep, "gd", lambda: output_conductance(drain))
        if gd is not None:
            rep.gd = float(np.interp(s.vdd, drain.v, gd))
    res = _attempt(rep, "ioff_ion", lambda: ioff_ion(gate_high, s.vdd))
    if res is not None:
        rep.ioff, rep.ion, rep.ion_ioff = res
    return rep
