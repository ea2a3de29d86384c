"""
Closed-form threshold voltage versus gate work function
========================================================

Bulk and fully depleted SOI threshold formulas for the default
25 nm device, evaluated across a metal-gate work-function grid.
"""

import numpy as np

from fdsoi.device import default_device
from fdsoi.physcore import (CONST, SILICON, AnalyticInputs, fermi_potential,
                            is_fully_depleted, max_depletion_width,
                            subthreshold_slope_analytic, vth_classic, vth_fdsoi)

spec = default_device()

# A 6 nm film is far thinner than the bulk depletion width, so the body
# is fully depleted and the SOI formula applies.
phi_f = fermi_potential(spec.na_channel, SILICON.ni, spec.temp)
xd = max_depletion_width(spec.na_channel, phi_f)
print(f"phi_F = {phi_f:.4f} V, max depletion width = {xd * 1e7:.1f} nm")
print("fully depleted:", is_fully_depleted(spec.t_si, spec.na_channel, phi_f))

# %% threshold voltage over the work-function grid
print("\n phi_m   vth_bulk  vth_soi")
for phi_m in np.round(np.arange(4.40, 5.0001, 0.10), 2):
    inp = AnalyticInputs(phi_m=phi_m, na=spec.na_channel, nd_film=spec.na_channel,
                         t_ox=spec.t_ox, t_si=spec.t_si)
    print(f" {phi_m:.2f}   {vth_classic(inp):+.4f}   {vth_fdsoi(inp):+.4f}")

# Both formulas move one volt per electron-volt of work function.

# %% swing: film and buried oxide in series load the gate oxide
c_si = SILICON.eps_r_si * CONST.eps0 / spec.t_si
c_box = SILICON.eps_r_ox * CONST.eps0 / spec.t_box
c_ox = SILICON.eps_r_ox * CONST.eps0 / spec.t_ox
c_d = c_si * c_box / (c_si + c_box)
print(f"\nideal swing   {subthreshold_slope_analytic(0.0, c_ox, spec.temp):.2f} mV/dec")
print(f"body-loaded   {subthreshold_slope_analytic(c_d, c_ox, spec.temp):.2f} mV/dec")
