import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdsoi.extract import (ExtractionSettings, IVCurve, IVParseError, IVValidationError,
                           RangeError, WindowError, dibl, extract_report, ingest_iv_csv,
                           ioff_ion, output_conductance, parse_iv_csv,
                           subthreshold_slope, transconductance, voltage_gain,
                           vth_constant_current, vth_linear_extrapolation, write_iv_csv)

VG = np.round(np.arange(0.0, 1.0001, 0.01), 10)


def exp_curve(ss_mv=70.0, vth=0.30, scale=1.0, vd=1.0, vg=VG):
    """Id = 1e-7 * 10^((Vg - vth) / SS): crosses 1e-7 A/um exactly at vth."""
    return IVCurve("gate", vd, vg, scale * 1e-7 * 10 ** ((vg - vth) / (ss_mv * 1e-3)), "synthetic")


def linear_curve(k=1e-3, vt=0.30, vg=VG):
    return IVCurve("gate", 0.05, vg, np.where(vg > vt, k * (vg - vt), 0.0), "synthetic")


# --------------------------------------------------------------- csv
def test_csv_round_trip(tmp_path):
    c = exp_curve()
    path = write_iv_csv(c, tmp_path / "iv.csv")
    raw = path.read_bytes()
    assert raw.startswith(b"vg_V,vd_V,id_A_per_um\n") and b"\r" not in raw
    back = ingest_iv_csv(path)
    assert back.provenance == "ingested" and back.kind == "gate" and back.fixed_bias == 1.0
    np.testing.assert_array_equal(back.v, c.v)
    np.testing.assert_array_equal(back.i, c.i)
    assert len(back.v) == len(c.v)


def test_csv_drain_sweep():
    text = "vg_V,vd_V,id_A_per_um\n" + "".join(f"1.0,{v},{v * 1e-3}\n" for v in range(6))
    c = parse_iv_csv(text)
    assert c.kind == "drain" and c.fixed_bias == 1.0


def test_csv_errors():
    with pytest.raises(IVParseError) as info:
        parse_iv_csv("0,1,1e-9\n0.1,1,1e-8\n")
    assert info.value.line == 1
    with pytest.raises(IVParseError) as info:
        parse_iv_csv("vg_V,vd_V,id_A_per_um\n0,1,1e-9\n0.1,1\n", "f.csv")
    assert info.value.line == 3 and "f.csv:3" in str(info.value)
    rows = "".join(f"{v},1,1e-9\n" for v in (0.0, 0.1, 0.1, 0.2, 0.3))
    with pytest.raises(IVValidationError):
        parse_iv_csv("vg_V,vd_V,id_A_per_um\n" + rows)


def test_curve_invariants():
    with pytest.raises(IVValidationError):
        IVCurve("gate", 1.0, [0, 0.1, 0.2, 0.3], [1, 2, 3, 4])
    with pytest.raises(IVValidationError):
        IVCurve("gate", 1.0, [0, 0.1, 0.2, 0.3, 0.4], [1, 2, np.nan, 4, 5])


# --------------------------------------------------------------- thresholds
def test_vth_cc_synthetic():
    assert vth_constant_current(exp_curve(), 1e-7) == pytest.approx(0.300, abs=1e-6)


def test_vth_cc_scaling_shift():
    a = vth_constant_current(exp_curve(), 1e-7)
    b = vth_constant_current(exp_curve(scale=10.0), 1e-7)
    assert b - a == pytest.approx(-0.070, abs=1e-9)


def test_vth_cc_range_error():
    with pytest.raises(RangeError):
        vth_constant_current(exp_curve(), 1e6)


def test_vth_extrap_synthetic():
    assert vth_linear_extrapolation(linear_curve()) == pytest.approx(0.300, abs=2e-3)


def test_vth_extrap_flat_window_error():
    c = IVCurve("gate", 1.0, VG, np.full_like(VG, 1e-6))
    with pytest.raises(WindowError):
        vth_linear_extrapolation(c)
    with pytest.raises(WindowError):
        vth_linear_extrapolation(exp_curve())  # gm peaks at the last point


@given(st.floats(1e-6, 1e6))
def test_scale_invariance(c):
    base = linear_curve()
    assert vth_linear_extrapolation(base.scaled(c)) == vth_linear_extrapolation(base)
    e = exp_curve(ss_mv=80.0)
    window = (1e-11, 1e-8)
    shifted = (window[0] * c, window[1] * c)
    assert subthreshold_slope(e.scaled(c), shifted) == pytest.approx(
        subthreshold_slope(e, window), rel=1e-9)


# --------------------------------------------------------------- swing
def test_ss_synthetic():
    assert subthreshold_slope(exp_curve(70.0)) == pytest.approx(70.0, abs=0.7)


def test_ss_ideal_floor():
    ideal = 0.025851999786435532 * math.log(10) * 1e3
    ss = subthreshold_slope(exp_curve(ideal, vg=np.round(np.arange(-0.2, 1.0001, 0.005), 10)))
    assert ss >= 59.0
    assert ss == pytest.approx(ideal, rel=1e-6)


def test_ss_range_error():
    with pytest.raises(RangeError):
        subthreshold_slope(exp_curve(), (1e6, 1e8))


# --------------------------------------------------------------- dibl
def test_dibl_synthetic():
    low = exp_curve(vth=0.300, vd=0.05)
    high = exp_curve(vth=0.250, vd=1.0)
    assert dibl(low, high) == pytest.approx(52.63, abs=0.01)


def test_dibl_identical_curves():
    a = exp_curve()
    assert dibl(a, a) == 0.0


# --------------------------------------------------------------- derivatives
@pytest.mark.parametrize("h", [0.02, 0.01])
def test_gm_quadratic(h):
    vg = np.round(np.arange(0.4, 1.0001, h), 10)
    k, vt = 2e-3, 0.3
    c = IVCurve("gate", 1.0, vg, k * (vg - vt) ** 2)
    gm = transconductance(c)
    # a three-point stencil is exact for a quadratic
    np.testing.assert_allclose(gm, 2 * k * (vg - vt), rtol=1e-9)


def test_gm_cubic_second_order():
    errs = []
    for h in (0.02, 0.01):
        vg = np.round(np.arange(0.0, 1.0001, h), 10)
        c = IVCurve("gate", 1.0, vg, vg ** 3)
        errs.append(np.max(np.abs(transconductance(c)[1:-1] - 3 * vg[1:-1] ** 2)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_gm_nonuniform_grid():
    vg = np.array([0.0, 0.05, 0.15, 0.2, 0.4, 0.45, 0.7])
    c = IVCurve("gate", 1.0, vg, 3e-4 * vg ** 2 + 1e-4 * vg)
    np.testing.assert_allclose(transconductance(c), 6e-4 * vg + 1e-4, rtol=1e-9)


def test_gm_constant_and_affine():
    assert np.all(transconductance(IVCurve("gate", 1.0, VG, np.full_like(VG, 2e-4))) == 0)
    g = transconductance(IVCurve("gate", 1.0, VG, 1e-3 * VG + 1e-6))
    np.testing.assert_allclose(g[1:-1], 1e-3, rtol=1e-12)


def test_gd_resistor():
    vd = np.round(np.arange(0.0, 1.0001, 0.05), 10)
    c = IVCurve("drain", 1.0, vd, vd / 5e3)
    np.testing.assert_allclose(output_conductance(c), 1 / 5e3, rtol=1e-9)
    flat = IVCurve("drain", 1.0, vd, np.full_like(vd, 1e-3))
    assert np.all(output_conductance(flat) == 0)


def test_voltage_gain():
    assert voltage_gain(1e-3, 1e4) == pytest.approx(10.0)
    assert voltage_gain(1e-3, 2e4) == pytest.approx(2 * voltage_gain(1e-3, 1e4))
    with pytest.raises(ValueError):
        voltage_gain(0.0, 1e4)


# --------------------------------------------------------------- ion/ioff
def test_ioff_ion_exact_samples():
    c = exp_curve()
    ioff, ion, ratio = ioff_ion(c, 1.0)
    assert ioff == c.i[0] and ion == c.i[-1] and ratio == ion / ioff


def test_ioff_ion_interpolated():
    vg = np.array([-0.05, 0.05, 0.3, 0.95, 1.05])
    c = IVCurve("gate", 1.0, vg, 1e-7 * 10 ** ((vg - 0.3) / 0.07))
    ioff, ion, _ = ioff_ion(c, 1.0)
    assert ioff == pytest.approx(1e-7 * 10 ** (-0.3 / 0.07), rel=1e-12)
    assert ion == pytest.approx(0.5 * (c.i[3] + c.i[4]), rel=1e-12)


def test_ioff_ion_coverage():
    with pytest.raises(RangeError):
        ioff_ion(IVCurve("gate", 1.0, VG[10:], exp_curve().i[10:]), 1.0)


# --------------------------------------------------------------- report
def test_report_complete():
    vg = np.round(np.arange(-0.4, 1.5001, 0.02), 10)
    # smooth synthetic device: exponential below threshold, saturating above
    def device(vth):
        x = (vg - vth) / 0.07
        return 1e-7 * np.log1p(10 ** x) / np.log(2) * (1 + 0 * vg) / (1 + 0.2 * np.log1p(10 ** x))
    low = IVCurve("gate", 0.05, vg, device(0.30))
    high = IVCurve("gate", 1.0, vg, device(0.25))
    vd = np.round(np.arange(0.0, 1.0001, 0.05), 10)
    drain = IVCurve("drain", 1.0, vd, 1e-3 * np.tanh(3 * vd) + 1e-5 * vd)
    rep = extract_report(high, low, drain, ExtractionSettings())
    assert rep.complete, rep.errors
    assert rep.ss >= 59.0
    assert rep.ion >= rep.ioff and rep.ion_ioff == rep.ion / rep.ioff
    assert rep.av == pytest.approx(rep.gm_max * 1e4)
    assert rep.windows["gm_window_vg_V"] == [0.0, 1.0]


def test_report_records_failures():
    c = exp_curve()
    rep = extract_report(c, None, None, ExtractionSettings(i_crit=1e6))
    assert "vth_cc" in rep.errors and rep.vth_cc is None
    assert not rep.complete
