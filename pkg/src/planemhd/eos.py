"""Pointwise constitutive evaluations shared by the solver and diagnostics.

All functions accept scalars or numpy arrays and are pure.
"""

from __future__ import annotations

import numpy as np

from .core import InvalidStateError, KappaModel, PhysParams


def pressure(rho, theta, gamma: float):
    """Perfect-gas pressure gamma * rho * theta."""
    if np.any(np.asarray(rho) <= 0):
        raise InvalidStateError("pressure requires positive density")
    return gamma * np.asarray(rho) * np.asarray(theta)


def internal_energy(theta, c_v: float):
    """Internal energy per unit mass c_v * theta."""
    return c_v * np.asarray(theta)


def kappa(rho, theta, model: KappaModel):
    """Heat conductivity kappa1*(1 + theta**q) + kappa2*rho.

    Bounded below by kappa1*(1 + theta**q) for all admissible states.
    """
    rho = np.asarray(rho)
    theta = np.asarray(theta)
    if np.any(rho <= 0) or np.any(theta <= 0):
        raise InvalidStateError("kappa requires positive rho and theta")
    return model.kappa1 * (1.0 + theta ** model.q) + model.kappa2 * rho


def total_energy_density(rho, u, w, b, theta, c_v: float = 1.0):
    """rho*(c_v*theta + |u|^2/2 + |w|^2/2) + |b|^2/2.

    w and b are 2-vectors along the last axis.
    """
    w = np.asarray(w)
    b = np.asarray(b)
    kinetic = 0.5 * np.asarray(u) ** 2 + 0.5 * (w * w).sum(axis=-1)
    return np.asarray(rho) * (c_v * np.asarray(theta) + kinetic) \
        + 0.5 * (b * b).sum(axis=-1)


def entropy_density(rho, theta, gamma: float):
    """Specific entropy ln(theta) - gamma * ln(rho)."""
    rho = np.asarray(rho)
    theta = np.asarray(theta)
    if np.any(rho <= 0) or np.any(theta <= 0):
        raise InvalidStateError("entropy requires positive rho and theta")
    return np.log(theta) - gamma * np.log(rho)


def dissipation_q(u_x, w_x, b_x, params: PhysParams):
    """Viscous and resistive heating lam*u_x^2 + mu*|w_x|^2 + nu*|b_x|^2."""
    w_x = np.asarray(w_x)
    b_x = np.asarray(b_x)
    return (params.lam * np.asarray(u_x) ** 2
            + params.mu * (w_x * w_x).sum(axis=-1)
            + params.nu * (b_x * b_x).sum(axis=-1))
