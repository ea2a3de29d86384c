import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdsoi.physcore import (CONST, SILICON, AnalyticInputs, DomainError, MaterialParams,
                            fermi_potential, is_fully_depleted, max_depletion_width,
                            oxide_capacitance, subthreshold_slope_analytic, thermal_voltage,
                            vth_classic, vth_fdsoi, work_function_difference)

# Frozen oracle values, evaluated independently at 30 significant digits
# (mpmath) from the fixed constants and the default material parameters.
VT_300 = 0.025851999786435532
PHI_F_1E17 = 0.41668500532632197
PHI_F_1E19 = 0.53573786399098538
PHI_MS_450 = -0.52668500532632197
XDMAX_1E17 = 1.0381163492953296e-5
XDMAX_1E19 = 1.1771132966510163e-6
COX_06NM = 5.75522207832e-6
VTH_CLASSIC_450 = 0.3355847721047375
VTH_FDSOI_450 = 0.30835532485060453
SS_IDEAL = 59.526429332331709
SS_CD_01 = 65.47907226556488

phi_m = st.floats(3.6, 5.4, allow_nan=False)
delta = st.floats(0.0, 0.5, allow_nan=False)


def test_constants_fixed():
    assert (CONST.q, CONST.k, CONST.eps0) == (1.602176634e-19, 1.380649e-23, 8.8541878128e-14)


def test_thermal_voltage():
    assert thermal_voltage(300) == pytest.approx(VT_300, rel=1e-14)
    assert thermal_voltage(600) == pytest.approx(2 * thermal_voltage(300), rel=1e-15)
    with pytest.raises(DomainError):
        thermal_voltage(0)


def test_fermi_potential():
    assert fermi_potential(1e17, 1e10, 300) == pytest.approx(PHI_F_1E17, rel=1e-13)
    assert fermi_potential(1e19, 1e10, 300) == pytest.approx(PHI_F_1E19, rel=1e-13)
    assert fermi_potential(1e10, 1e10, 300) == 0.0
    with pytest.raises(DomainError):
        fermi_potential(1e9, 1e10, 300)


@given(st.floats(1e10, 1e20), st.floats(1.01, 100.0))
def test_fermi_potential_increasing(na, factor):
    assert fermi_potential(na * factor, 1e10, 300) > fermi_potential(na, 1e10, 300)


def test_work_function_difference():
    assert work_function_difference(4.5, 4.05, 1.12, PHI_F_1E17) == pytest.approx(PHI_MS_450, abs=1e-14)
    assert work_function_difference(4.05 + 0.56 + 0.3, 4.05, 1.12, 0.3) == pytest.approx(0.0, abs=1e-15)
    a = work_function_difference(4.6, 4.05, 1.12, 0.4)
    b = work_function_difference(4.5, 4.05, 1.12, 0.4)
    assert a - b == pytest.approx(0.1, abs=1e-14)
    with pytest.raises(DomainError):
        work_function_difference(float("nan"), 4.05, 1.12, 0.4)


def test_depletion_width():
    assert max_depletion_width(1e17, PHI_F_1E17) == pytest.approx(XDMAX_1E17, rel=1e-12)
    assert max_depletion_width(1e19, PHI_F_1E19) == pytest.approx(XDMAX_1E19, rel=1e-12)
    w1 = max_depletion_width(1e17, 0.4)
    w4 = max_depletion_width(4e17, 0.4)
    assert abs(w4 - w1 / 2) / (w1 / 2) < 1e-12
    with pytest.raises(DomainError):
        max_depletion_width(1e17, 0.0)


def test_oxide_capacitance():
    assert oxide_capacitance(0.6e-7) == pytest.approx(COX_06NM, rel=1e-11)
    with pytest.raises(DomainError):
        oxide_capacitance(0.0)


def test_vth_classic_oracle():
    assert vth_classic(AnalyticInputs()) == pytest.approx(VTH_CLASSIC_450, abs=1e-12)


def test_vth_classic_intrinsic_zero():
    phi = SILICON.chi_si + SILICON.eg / 2
    assert vth_classic(AnalyticInputs(phi_m=phi, na=SILICON.ni)) == pytest.approx(0.0, abs=1e-15)


def test_vth_fdsoi_oracle():
    assert vth_fdsoi(AnalyticInputs()) == pytest.approx(VTH_FDSOI_450, abs=1e-12)


def test_vth_fdsoi_unit_step():
    a = vth_fdsoi(AnalyticInputs(phi_m=4.6))
    b = vth_fdsoi(AnalyticInputs(phi_m=4.5))
    assert a - b == pytest.approx(0.1, abs=1e-12)


@given(phi_m, delta)
def test_vth_affine_unit_slope(p, d):
    for fn in (vth_classic, vth_fdsoi):
        assert fn(AnalyticInputs(phi_m=p + d)) - fn(AnalyticInputs(phi_m=p)) == pytest.approx(d, abs=1e-12)


def test_back_interface_charge_lowers_vth():
    assert vth_fdsoi(AnalyticInputs(q_ssb=1e-8)) < vth_fdsoi(AnalyticInputs())
    assert vth_fdsoi(AnalyticInputs(q_ss=1e-8)) < vth_fdsoi(AnalyticInputs())


def test_analytic_inputs_validated():
    with pytest.raises(DomainError):
        vth_fdsoi(AnalyticInputs(phi_m=7.0))
    with pytest.raises(DomainError):
        vth_classic(AnalyticInputs(t_ox=-1.0))


def test_subthreshold_slope():
    assert subthreshold_slope_analytic(0.0, 1e-6, 300) == pytest.approx(SS_IDEAL, rel=1e-13)
    assert subthreshold_slope_analytic(1e-7, 1e-6, 300) == pytest.approx(SS_CD_01, rel=1e-13)
    ideal = subthreshold_slope_analytic(0.0, 1e-6, 300)
    assert subthreshold_slope_analytic(1e-6, 1e-6, 300) == pytest.approx(2 * ideal, rel=1e-15)
    with pytest.raises(DomainError):
        subthreshold_slope_analytic(0.0, 0.0, 300)


@given(st.floats(0.0, 1e-4), st.floats(1e-8, 1e-4))
def test_subthreshold_slope_floor(cd, ci):
    floor = thermal_voltage(300) * math.log(10) * 1e3
    ss = subthreshold_slope_analytic(cd, ci, 300)
    assert ss >= floor * (1 - 1e-15)
    if cd == 0:
        assert ss == pytest.approx(floor, rel=1e-15)


def test_fully_depleted():
    assert is_fully_depleted(6e-7, 1e17, PHI_F_1E17)
    w = max_depletion_width(1e17, PHI_F_1E17)
    assert not is_fully_depleted(w, 1e17, PHI_F_1E17)
    assert not is_fully_depleted(100e-7, 1e19, PHI_F_1E19)


def test_material_validation():
    with pytest.raises(DomainError):
        MaterialParams(ni=0.0)
    with pytest.raises(DomainError):
        MaterialParams(eps_r_ox=1.0)


def test_pure():
    assert vth_fdsoi(AnalyticInputs(phi_m=4.73)) == vth_fdsoi(AnalyticInputs(phi_m=4.73))
