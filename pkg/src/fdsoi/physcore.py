"""Physical constants, silicon material parameters and closed-form
threshold / subthreshold models for FD-SOI NMOSFETs.

Units: lengths in cm, potentials in V, charge in C, densities in cm^-3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class DomainError(ValueError):
    """Input outside the domain of a physical formula."""


@dataclass(frozen=True)
class PhysicalConstants:
    q: float = 1.602176634e-19  # C
    k: float = 1.380649e-23  # J/K
    eps0: float = 8.8541878128e-14  # F/cm

    def __post_init__(self):
        if min(self.q, self.k, self.eps0) <= 0:
            raise DomainError("physical constants must be strictly positive")


CONST = PhysicalConstants()


@dataclass(frozen=True)
class MaterialParams:
    eps_r_si: float = 11.7
    eps_r_ox: float = 3.9
    eps_r_nitride: float = 7.5
    ni: float = 1.0e10
    chi_si: float = 4.05
    eg: float = 1.12
    mu_n: float = 1417.0
    mu_p: float = 470.5
    tau_n: float = 1e-7
    tau_p: float = 1e-7

    def __post_init__(self):
        for name in ("eps_r_si", "eps_r_ox", "eps_r_nitride"):
            if not getattr(self, name) > 1.0:
                raise DomainError(f"{name} must be > 1")
        for name in ("ni", "mu_n", "mu_p", "tau_n", "tau_p"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"{name} must be > 0")

    @property
    def phi_ref(self) -> float:
        """Work function of intrinsic silicon (eV), the potential reference."""
        return self.chi_si + 0.5 * self.eg


SILICON = MaterialParams()


@dataclass(frozen=True)
class AnalyticInputs:
    phi_m: float = 4.50
    na: float = 1e17
    nd_film: float = 1e17
    t_ox: float = 0.6e-7
    t_si: float = 6e-7
    q_ss: float = 0.0
    q_ssb: float = 0.0
    temp: float = 300.0

    def validate(self, ni: float = SILICON.ni) -> None:
        if not 3.5 <= self.phi_m <= 6.0:
            raise DomainError(f"phi_m={self.phi_m} outside [3.5, 6.0] eV")
        if self.na < ni:
            raise DomainError(f"na={self.na:g} below ni={ni:g}")
        if self.t_ox <= 0 or self.t_si <= 0:
            raise DomainError("t_ox and t_si must be positive")
        if self.temp <= 0:
            raise DomainError("temp must be positive")


def thermal_voltage(temp: float, const: PhysicalConstants = CONST) -> float:
    """kT/q in volts."""
    if not temp > 0:
        raise DomainError(f"temperature must be positive, got {temp}")
    return const.k * temp / const.q


def fermi_potential(na: float, ni: float, temp: float) -> float:
    """Bulk Fermi potential (kT/q) ln(na/ni) of a p-type region."""
    if not ni > 0:
        raise DomainError("ni must be positive")
    if na < ni:
        raise DomainError(f"na={na:g} < ni={ni:g}: not p-type")
    return thermal_voltage(temp) * math.log(na / ni)


def work_function_difference(phi_m: float, chi_si: float, eg: float, phi_f: float) -> float:
    vals = (phi_m, chi_si, eg, phi_f)
    if not all(math.isfinite(v) for v in vals):
        raise DomainError("non-finite input")
    return phi_m - (chi_si + 0.5 * eg + phi_f)


def max_depletion_width(
    na: float, phi_f: float, mat: MaterialParams = SILICON, const: PhysicalConstants = CONST
) -> float:
    if not (na > 0 and phi_f > 0):
        raise DomainError("na and phi_f must be positive")
    return math.sqrt(4.0 * mat.eps_r_si * const.eps0 * phi_f / (const.q * na))


def oxide_capacitance(t_ox: float, mat: MaterialParams = SILICON) -> float:
    """Gate capacitance per area, F/cm^2."""
    if not t_ox > 0:
        raise DomainError("t_ox must be positive")
    return mat.eps_r_ox * CONST.eps0 / t_ox


def vth_classic(inp: AnalyticInputs, mat: MaterialParams = SILICON) -> float:
    """Bulk (partially depleted) threshold voltage."""
    inp.validate(mat.ni)
    phi_f = fermi_potential(inp.na, mat.ni, inp.temp)
    phi_ms = work_function_difference(inp.phi_m, mat.chi_si, mat.eg, phi_f)
    cox = oxide_capacitance(inp.t_ox, mat)
    if phi_f == 0.0:
        # intrinsic channel: no depletion charge
        q_dep = 0.0
    else:
        q_dep = CONST.q * inp.na * max_depletion_width(inp.na, phi_f, mat)
    return phi_ms - inp.q_ss / cox + 2.0 * phi_f + q_dep / cox


def vth_fdsoi(inp: AnalyticInputs, mat: MaterialParams = SILICON) -> float:
    """Fully depleted SOI threshold voltage, film charge limited by t_si and
    a back-interface charge q_ssb acting through the oxide and film."""
    inp.validate(mat.ni)
    phi_f = fermi_potential(inp.na, mat.ni, inp.temp)
    phi_ms = work_function_difference(inp.phi_m, mat.chi_si, mat.eg, phi_f)
    ox = inp.t_ox / (mat.eps_r_ox * CONST.eps0)
    film = inp.t_si / (mat.eps_r_si * CONST.eps0)
    return (
        phi_ms
        - inp.q_ss * ox
        + 2.0 * phi_f
        + CONST.q * inp.nd_film * inp.t_si * ox
        - inp.q_ssb * (ox + film)
    )


def subthreshold_slope_analytic(cd: float, ci: float, temp: float) -> float:
    """Ideal-body subthreshold swing in mV/decade."""
    if not ci > 0:
        raise DomainError("ci must be positive")
    if cd < 0:
        raise DomainError("cd must be non-negative")
    return thermal_voltage(temp) * math.log(10.0) * (1.0 + cd / ci) * 1e3


def is_fully_depleted(t_si: float, na: float, phi_f: float, mat: MaterialParams = SILICON) -> bool:
    return t_si < max_depletion_width(na, phi_f, mat)
