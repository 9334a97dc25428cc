"""Classical canonical dynamics in a uniform magnetic field.

Symmetric gauge, e*A = (hbar/2) B x r, field along z.  The canonical
equations have the same form in the nonrelativistic and relativistic cases;
only the dynamical mass M differs (rest mass m, or H_RL/c^2 which is a
constant of motion).  The closed-form solution is the production path; the
RK4 integrator exists as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import PhysParams

MAX_RK4_STEPS = 10**8


class ResourceLimitError(RuntimeError):
    """Raised when an integration would exceed the step budget."""


@dataclass(frozen=True)
class PhaseSpacePoint:
    """Canonical position and momentum, all components finite."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    px: float = 0.0
    py: float = 0.0
    pz: float = 0.0

    def __post_init__(self) -> None:
        for name in ("x", "y", "z", "px", "py", "pz"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"component {name} is not finite")

    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def momentum(self) -> np.ndarray:
        return np.array([self.px, self.py, self.pz])

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.px, self.py, self.pz])

    @staticmethod
    def from_array(a) -> "PhaseSpacePoint":
        x, y, z, px, py, pz = (float(v) for v in a)
        return PhaseSpacePoint(x, y, z, px, py, pz)


def hamiltonian_nr(p: PhaseSpacePoint, params: PhysParams) -> float:
    """Nonrelativistic Hamiltonian, symmetric gauge:
    (1/2m)[p^2 + (hbar B)^2 (x^2+y^2)/4 - hbar B (x py - y px)]."""
    hb = params.hbar * params.B
    psq = p.px**2 + p.py**2 + p.pz**2
    return (psq + hb**2 * (p.x**2 + p.y**2) / 4.0 - hb * (p.x * p.py - p.y * p.px)) / (
        2.0 * params.m
    )


def hamiltonian_rl(p: PhaseSpacePoint, params: PhysParams) -> float:
    """Relativistic Hamiltonian c*sqrt(m^2 c^2 + 2 m H_NR)."""
    return params.c * math.sqrt(
        (params.m * params.c) ** 2 + 2.0 * params.m * hamiltonian_nr(p, params)
    )


def relativistic_mass(p0: PhaseSpacePoint, params: PhysParams) -> float:
    """Dynamical mass M = H_RL/c^2, a constant of motion."""
    return hamiltonian_rl(p0, params) / params.c**2


@dataclass(frozen=True)
class TrajectoryParams:
    """Initial data plus the dynamical mass M and cyclotron frequency
    omega = hbar*B/M.  Build with the factories below so omega stays
    consistent with M."""

    initial: PhaseSpacePoint
    M: float
    omega: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.M) or self.M <= 0.0:
            raise ValueError(f"M must be positive, got {self.M}")
        if not math.isfinite(self.omega) or self.omega < 0.0:
            raise ValueError(f"omega must be nonnegative, got {self.omega}")

    @property
    def period(self) -> float:
        """Cyclotron period 2 pi / omega (inf for zero field)."""
        return math.inf if self.omega == 0.0 else 2.0 * math.pi / self.omega

    @staticmethod
    def nonrelativistic(initial: PhaseSpacePoint, params: PhysParams) -> "TrajectoryParams":
        M = params.m
        return TrajectoryParams(initial, M, params.cyclotron_frequency(M))

    @staticmethod
    def relativistic(initial: PhaseSpacePoint, params: PhysParams) -> "TrajectoryParams":
        M = relativistic_mass(initial, params)
        return TrajectoryParams(initial, M, params.cyclotron_frequency(M))


def closed_form_arrays(tp: TrajectoryParams, t):
    """Closed-form trajectory, vectorized over t.

    Returns (x, y, z, px, py, pz) arrays.  For omega = 0 the removable
    sin(w t)/w singularities are taken in the free-motion limit by an
    explicit branch.
    """
    t = np.asarray(t, dtype=float)
    p0 = tp.initial
    M, w = tp.M, tp.omega
    if w == 0.0:
        x = p0.x + p0.px * t / M
        y = p0.y + p0.py * t / M
        z = p0.z + p0.pz * t / M
        ones = np.ones_like(t)
        return x, y, z, p0.px * ones, p0.py * ones, p0.pz * ones
    s, c = np.sin(w * t), np.cos(w * t)
    x = 0.5 * p0.x * (1 + c) + 0.5 * p0.y * s + p0.px * s / (M * w) + p0.py * (1 - c) / (M * w)
    y = -0.5 * p0.x * s + 0.5 * p0.y * (1 + c) - p0.px * (1 - c) / (M * w) + p0.py * s / (M * w)
    z = p0.z + p0.pz * t / M
    px = (
        -0.25 * p0.x * M * w * s
        - 0.25 * p0.y * M * w * (1 - c)
        + 0.5 * p0.px * (1 + c)
        + 0.5 * p0.py * s
    )
    py = (
        0.25 * p0.x * M * w * (1 - c)
        - 0.25 * p0.y * M * w * s
        - 0.5 * p0.px * s
        + 0.5 * p0.py * (1 + c)
    )
    pz = p0.pz * np.ones_like(t)
    return x, y, z, px, py, pz


def trajectory_closed_form(tp: TrajectoryParams, t: float) -> PhaseSpacePoint:
    """Exact trajectory point at time t."""
    vals = closed_form_arrays(tp, float(t))
    return PhaseSpacePoint(*(float(v) for v in vals))


def _canonical_rhs(state, M: float, hb: float):
    x, y, z, px, py, pz = state
    half = hb / (2.0 * M)
    return (
        px / M + half * y,
        py / M - half * x,
        pz / M,
        -hb**2 * x / (4.0 * M) + half * py,
        -hb**2 * y / (4.0 * M) - half * px,
        0.0,
    )


def trajectory_rk4(tp: TrajectoryParams, t: float, dt: float) -> PhaseSpacePoint:
    """Classic fourth-order Runge-Kutta integration of the canonical
    equations; independent oracle for trajectory_closed_form."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    n_steps = int(round(abs(t) / dt))
    if abs(t) / dt > MAX_RK4_STEPS:
        raise ResourceLimitError(f"{abs(t)/dt:.3g} steps exceeds limit {MAX_RK4_STEPS:.0e}")
    if n_steps == 0 and t != 0.0:
        n_steps = 1
    h = t / n_steps if n_steps else 0.0
    hb = tp.M * tp.omega  # hbar*B recovered from the stored frequency
    state = tuple(tp.initial.as_array())
    for _ in range(n_steps):
        k1 = _canonical_rhs(state, tp.M, hb)
        k2 = _canonical_rhs(tuple(s + 0.5 * h * k for s, k in zip(state, k1)), tp.M, hb)
        k3 = _canonical_rhs(tuple(s + 0.5 * h * k for s, k in zip(state, k2)), tp.M, hb)
        k4 = _canonical_rhs(tuple(s + h * k for s, k in zip(state, k3)), tp.M, hb)
        state = tuple(
            s + h * (a + 2 * b + 2 * c_ + d) / 6.0
            for s, a, b, c_, d in zip(state, k1, k2, k3, k4)
        )
    return PhaseSpacePoint.from_array(state)


def guiding_center(tp: TrajectoryParams):
    """Guiding center (xc, yc) and orbit radius of the transverse circle.

    xc = x0/2 + py0/(M w), yc = y0/2 - px0/(M w); both are constants of the
    motion for omega > 0.
    """
    if tp.omega == 0.0:
        raise ValueError("guiding center undefined for zero field")
    p0 = tp.initial
    mw = tp.M * tp.omega
    xc = 0.5 * p0.x + p0.py / mw
    yc = 0.5 * p0.y - p0.px / mw
    radius = math.hypot(0.5 * p0.x - p0.py / mw, 0.5 * p0.y + p0.px / mw)
    return xc, yc, radius
