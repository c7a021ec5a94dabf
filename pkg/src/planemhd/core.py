"""Grids, field states, physical parameters, and trajectory containers.

Staggered layout on the unit interval: density and temperature live at
cell centers, velocities and the magnetic field at nodes. States are
immutable once constructed, so they can be shared freely across sweep
workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Mapping, Sequence, Union

import numpy as np


class InvalidStateError(ValueError):
    """Raised when field data violates positivity or boundary constraints."""


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell grid on [0, 1] with n_cells cells and n_cells+1 nodes."""

    n_cells: int

    def __post_init__(self):
        if self.n_cells < 8:
            raise InvalidStateError(f"n_cells must be >= 8, got {self.n_cells}")

    @property
    def dx(self) -> float:
        return 1.0 / self.n_cells

    @property
    def cell_centers(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def node_positions(self) -> np.ndarray:
        return np.arange(self.n_cells + 1) * self.dx


@dataclass(frozen=True)
class KappaModel:
    """Heat conductivity kappa1*(1 + theta**q) + kappa2*rho."""

    kappa1: float = 1.0
    kappa2: float = 0.0
    q: float = 2.0

    def __post_init__(self):
        if self.kappa1 <= 0:
            raise InvalidStateError("kappa1 must be positive")
        if self.kappa2 < 0:
            raise InvalidStateError("kappa2 must be nonnegative")
        if self.q <= 0:
            raise InvalidStateError("q must be positive")


@dataclass(frozen=True)
class PhysParams:
    """Viscosities, diffusivity, adiabatic constant and conductivity model.

    lam is the bulk viscosity, mu the shear viscosity (mu = 0 selects the
    limit system), nu the magnetic diffusivity.
    """

    lam: float = 1.0
    mu: float = 0.1
    nu: float = 1.0
    gamma: float = 1.4
    c_v: float = 1.0
    kappa_model: KappaModel = field(default_factory=KappaModel)

    def __post_init__(self):
        for name in ("lam", "nu", "gamma", "c_v"):
            if getattr(self, name) <= 0:
                raise InvalidStateError(f"{name} must be positive")
        if self.mu < 0:
            raise InvalidStateError("mu must be nonnegative")


@dataclass(frozen=True)
class BoundaryData:
    """Transverse velocity data at the two walls as functions of time.

    u, b and theta_x are homogeneous at the walls and carry no free data.
    """

    w_minus: Callable[[float], np.ndarray]
    w_plus: Callable[[float], np.ndarray]
    preset: str = "custom"
    amplitude: float = 0.0
    ramp_period: float = 0.0

    @staticmethod
    def zero() -> "BoundaryData":
        f = lambda t: np.zeros(2)
        return BoundaryData(f, f, preset="zero")

    @staticmethod
    def constant(value: Sequence[float]) -> "BoundaryData":
        v = _frozen(value)
        f = lambda t: v
        return BoundaryData(f, f, preset="constant",
                            amplitude=float(np.abs(v).max()))

    @staticmethod
    def cosine_ramp(amplitude: float = 1.0,
                    ramp_period: float = 0.25) -> "BoundaryData":
        """Smooth ramp from 0 to amplitude over ramp_period, then held.

        Vanishes with zero slope at t = 0, so it is compatible with
        transverse fields that start from rest.
        """
        A, Tr = float(amplitude), float(ramp_period)

        def f(t: float) -> np.ndarray:
            s = min(max(t / Tr, 0.0), 1.0)
            return np.array([0.5 * A * (1.0 - np.cos(np.pi * s)), 0.0])

        return BoundaryData(f, f, preset="cosine-ramp",
                            amplitude=A, ramp_period=Tr)


@dataclass(frozen=True)
class FlowState:
    """Field arrays at one time instant.

    rho and theta are cell-centered (n_cells,), u is node-centered
    (n_cells+1,), w and b are node-centered 2-vectors (n_cells+1, 2).
    """

    t: float
    rho: np.ndarray
    u: np.ndarray
    w: np.ndarray
    b: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rho", _frozen(self.rho))
        object.__setattr__(self, "u", _frozen(self.u))
        object.__setattr__(self, "w", _frozen(self.w))
        object.__setattr__(self, "b", _frozen(self.b))
        object.__setattr__(self, "theta", _frozen(self.theta))
        n = self.rho.shape[0]
        if self.theta.shape != (n,):
            raise InvalidStateError("rho and theta must have equal length")
        if self.u.shape != (n + 1,):
            raise InvalidStateError("u must be node-centered (n_cells+1,)")
        if self.w.shape != (n + 1, 2) or self.b.shape != (n + 1, 2):
            raise InvalidStateError("w and b must have shape (n_cells+1, 2)")
        for name in ("rho", "theta"):
            vals = getattr(self, name)
            if not np.all(vals > 0):
                idx = int(np.argmin(vals))
                raise InvalidStateError(
                    f"{name} must be positive everywhere; "
                    f"{name}[{idx}] = {vals[idx]}")
        if self.u[0] != 0.0 or self.u[-1] != 0.0:
            raise InvalidStateError("u must vanish at the boundary nodes")
        if np.any(self.b[0] != 0.0) or np.any(self.b[-1] != 0.0):
            raise InvalidStateError("b must vanish at the boundary nodes")

    @property
    def n_cells(self) -> int:
        return self.rho.shape[0]


@dataclass(frozen=True)
class Trajectory:
    """Ordered snapshots with their times plus per-step diagnostics."""

    snapshots: tuple
    snapshot_times: np.ndarray
    diagnostics: tuple

    def __post_init__(self):
        object.__setattr__(self, "snapshots", tuple(self.snapshots))
        object.__setattr__(self, "snapshot_times",
                           _frozen(self.snapshot_times))
        object.__setattr__(self, "diagnostics", tuple(self.diagnostics))
        t = self.snapshot_times
        if len(t) != len(self.snapshots):
            raise InvalidStateError("snapshot_times must match snapshots")
        if len(t) and (t[0] != 0.0 or np.any(np.diff(t) <= 0)):
            raise InvalidStateError(
                "snapshot_times must start at 0 and be strictly increasing")

    @property
    def final(self) -> FlowState:
        return self.snapshots[-1]


def interpolate_to_nodes(cell_values: np.ndarray) -> np.ndarray:
    """Average adjacent cells onto interior nodes, copy at the walls."""
    c = np.asarray(cell_values, dtype=float)
    out = np.empty(c.shape[0] + 1)
    out[1:-1] = 0.5 * (c[:-1] + c[1:])
    out[0] = c[0]
    out[-1] = c[-1]
    return out


_Profiles = Union[str, Mapping[str, np.ndarray]]

PRESETS = ("uniform", "bump", "transverse-rest")


def _bump(x: np.ndarray) -> np.ndarray:
    return np.exp(-50.0 * (x - 0.5) ** 2)


def make_initial_state(grid: GridSpec, profiles: _Profiles = "uniform",
                       bdry: BoundaryData = None) -> FlowState:
    """Build a validated t=0 state from a named preset or tabulated fields.

    Presets: "uniform" (rho=theta=1, all velocities and fields zero),
    "bump" (smooth Gaussian bump in density and temperature), and
    "transverse-rest" (uniform with w = b identically zero, the starting
    configuration for boundary-layer experiments). Tabulated profiles are
    given as a mapping with keys rho, theta and optionally u, w, b.
    """
    n = grid.n_cells
    if isinstance(profiles, str):
        if profiles not in PRESETS:
            raise InvalidStateError(f"unknown preset {profiles!r}; "
                                    f"choose one of {PRESETS}")
        x = grid.cell_centers
        rho = np.ones(n)
        theta = np.ones(n)
        if profiles == "bump":
            rho = 1.0 + 0.2 * _bump(x)
            theta = 1.0 + 0.1 * _bump(x)
        u = np.zeros(n + 1)
        w = np.zeros((n + 1, 2))
        b = np.zeros((n + 1, 2))
    else:
        rho = np.asarray(profiles["rho"], dtype=float)
        theta = np.asarray(profiles["theta"], dtype=float)
        u = np.asarray(profiles.get("u", np.zeros(n + 1)), dtype=float)
        w = np.asarray(profiles.get("w", np.zeros((n + 1, 2))), dtype=float)
        b = np.asarray(profiles.get("b", np.zeros((n + 1, 2))), dtype=float)
        if u[0] != 0.0 or u[-1] != 0.0:
            raise InvalidStateError("tabulated u must vanish at the walls")
        if np.any(b[0] != 0.0) or np.any(b[-1] != 0.0):
            raise InvalidStateError("tabulated b must vanish at the walls")
    if bdry is not None:
        w = np.array(w)
        w[0] = bdry.w_minus(0.0)
        w[-1] = bdry.w_plus(0.0)
    return FlowState(t=0.0, rho=rho, u=u, w=w, b=b, theta=theta)
