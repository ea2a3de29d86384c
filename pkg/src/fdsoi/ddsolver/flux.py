"""Bernoulli function and Scharfetter-Gummel edge fluxes."""

from __future__ import annotations

import numpy as np


def bernoulli(x):
    """B(x) = x / (exp(x) - 1), with B(0) = 1.

    Uses a Taylor expansion near zero and is overflow-safe for large |x|.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-4
    xs = x[small]
    out[small] = 1.0 - xs / 2.0 + xs * xs / 12.0
    xl = x[~small]
    with np.errstate(over="ignore"):
        out[~small] = xl / np.expm1(xl)
    return out if out.ndim else float(out)


def sg_electron_flux(n_a, n_b, dv, vt, d, h):
    """Electron current density / q from node a to node b, cm^-2 s^-1 * cm.

    ``dv = V_b - V_a``.  At dv = 0 this is ``d * (n_b - n_a) / h``; for
    dv >> vt it tends to drift of the upwind density ``n_a``.
    """
    u = np.asarray(dv) / vt
    return d / h * (n_b * bernoulli(u) - n_a * bernoulli(-u))


def sg_hole_flux(p_a, p_b, dv, vt, d, h):
    """Hole current density / q from node a to node b."""
    u = np.asarray(dv) / vt
    return d / h * (p_a * bernoulli(u) - p_b * bernoulli(-u))
