"""Trajectory injection for quadratic Hamiltonians.

Any solution psi of a Schrodinger equation with Hamiltonian
H = p.A.p/2 + x.Bq.x/2 + p.C.x maps to a new solution

    psi'(r, t) = exp(i[phi + p(t).r]/hbar) * psi(r - x(t), t)

where (x(t), p(t)) follows the classical flow of H and the c-number phase is
phi = -p(t).x(t)/2.  The center of the new state rides the classical
trajectory while the profile is carried along rigidly.  ``injection_residual``
turns this statement into a checkable grid identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .classical import ResourceLimitError, MAX_RK4_STEPS
from .numerics import ComplexField, TimeSlices, fourier_shift, residual_schrodinger
from .params import PhysParams


@dataclass
class QuadraticHamiltonian:
    """Matrices of H = p.A.p/2 + x.Bq.x/2 + p.C.x.

    A (kinetic form) and Bq (potential form) are symmetrized on construction;
    C couples momenta to positions, C[i, j] multiplying p_i x_j.
    """

    dim: int
    A: np.ndarray
    Bq: np.ndarray
    C: np.ndarray

    def __post_init__(self) -> None:
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        for name in ("A", "Bq", "C"):
            m = np.asarray(getattr(self, name), dtype=float)
            if m.shape != (self.dim, self.dim):
                raise ValueError(f"{name} must be {self.dim}x{self.dim}")
            if not np.all(np.isfinite(m)):
                raise ValueError(f"{name} has non-finite entries")
            setattr(self, name, m)
        self.A = 0.5 * (self.A + self.A.T)
        self.Bq = 0.5 * (self.Bq + self.Bq.T)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "A": self.A.ravel().tolist(),
            "Bq": self.Bq.ravel().tolist(),
            "C": self.C.ravel().tolist(),
        }

    @staticmethod
    def from_dict(d: dict) -> "QuadraticHamiltonian":
        dim = int(d["dim"])
        shape = (dim, dim)
        return QuadraticHamiltonian(
            dim,
            np.asarray(d["A"], dtype=float).reshape(shape),
            np.asarray(d["Bq"], dtype=float).reshape(shape),
            np.asarray(d["C"], dtype=float).reshape(shape),
        )


@dataclass
class ClassicalFlowState:
    """Classical flow snapshot: position x_t, momentum p_t, and the
    accumulated action_phase, which equals -p(t).x(t)/2 (divide by hbar for
    the c-number phase in radians)."""

    x_t: np.ndarray
    p_t: np.ndarray
    action_phase: float
    t: float = 0.0

    def __post_init__(self) -> None:
        self.x_t = np.asarray(self.x_t, dtype=float)
        self.p_t = np.asarray(self.p_t, dtype=float)
        if self.x_t.shape != self.p_t.shape or self.x_t.ndim != 1:
            raise ValueError("x_t and p_t must be 1D vectors of equal length")
        if not (np.all(np.isfinite(self.x_t)) and np.all(np.isfinite(self.p_t))
                and math.isfinite(self.action_phase)):
            raise ValueError("flow state has non-finite components")

    @property
    def dim(self) -> int:
        return self.x_t.size


def flow_state(x, p, t: float = 0.0) -> ClassicalFlowState:
    """Flow snapshot with the action phase set to its exact value -p.x/2."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    return ClassicalFlowState(x, p, -0.5 * float(np.dot(p, x)), t)


def magnetic_to_quadratic(params: PhysParams, M: float, dim: int = 2) -> QuadraticHamiltonian:
    """Quadratic form of the symmetric-gauge magnetic Hamiltonian with
    dynamical mass M; reproduces the canonical equations of motion."""
    if M <= 0.0:
        raise ValueError("M must be positive")
    if dim not in (2, 3):
        raise ValueError("magnetic Hamiltonian is 2D or 3D")
    hb = params.hbar * params.B
    A = np.eye(dim) / M
    Bq = np.zeros((dim, dim))
    Bq[0, 0] = Bq[1, 1] = hb**2 / (4.0 * M)
    C = np.zeros((dim, dim))
    C[0, 1] = hb / (2.0 * M)
    C[1, 0] = -hb / (2.0 * M)
    return QuadraticHamiltonian(dim, A, Bq, C)


def detect_magnetic(H: QuadraticHamiltonian, rtol: float = 1e-12):
    """Recognize the magnetic form; returns (M, hbar*B) or None."""
    if H.dim < 2 or H.A[0, 0] <= 0.0:
        return None
    M = 1.0 / H.A[0, 0]
    hb = 2.0 * H.C[0, 1] * M
    if hb < 0.0:
        return None
    dim = H.dim
    refA = np.eye(dim) / M
    refB = np.zeros((dim, dim))
    refB[0, 0] = refB[1, 1] = hb**2 / (4.0 * M)
    refC = np.zeros((dim, dim))
    refC[0, 1] = hb / (2.0 * M)
    refC[1, 0] = -hb / (2.0 * M)
    scale = max(np.max(np.abs(H.A)), np.max(np.abs(H.Bq)), np.max(np.abs(H.C)))
    for a, b in ((H.A, refA), (H.Bq, refB), (H.C, refC)):
        if np.max(np.abs(a - b)) > rtol * max(scale, 1e-300):
            return None
    return M, hb


def _flow_rhs(x: np.ndarray, p: np.ndarray, H: QuadraticHamiltonian):
    dx = H.A @ p + H.C @ x
    dp = -H.Bq @ x - H.C.T @ p
    return dx, dp


def _characteristic_period(H: QuadraticHamiltonian) -> float:
    wa = float(np.linalg.norm(H.A, 2))
    wb = float(np.linalg.norm(H.Bq, 2))
    wc = float(np.linalg.norm(H.C, 2))
    w = math.sqrt(wa * wb) + wc
    return 2.0 * math.pi / w if w > 0.0 else math.inf


def _magnetic_closed_flow(M: float, hb: float, z0: ClassicalFlowState,
                          t: float) -> ClassicalFlowState:
    w = hb / M
    x0, p0 = z0.x_t, z0.p_t
    if w == 0.0:
        x = x0 + p0 * (t / M)
        p = p0.copy()
    else:
        s, c = math.sin(w * t), math.cos(w * t)
        x = np.empty_like(x0)
        p = np.empty_like(p0)
        x[0] = (0.5 * x0[0] * (1 + c) + 0.5 * x0[1] * s
                + p0[0] * s / (M * w) + p0[1] * (1 - c) / (M * w))
        x[1] = (-0.5 * x0[0] * s + 0.5 * x0[1] * (1 + c)
                - p0[0] * (1 - c) / (M * w) + p0[1] * s / (M * w))
        p[0] = (-0.25 * x0[0] * M * w * s - 0.25 * x0[1] * M * w * (1 - c)
                + 0.5 * p0[0] * (1 + c) + 0.5 * p0[1] * s)
        p[1] = (0.25 * x0[0] * M * w * (1 - c) - 0.25 * x0[1] * M * w * s
                - 0.5 * p0[0] * s + 0.5 * p0[1] * (1 + c))
        if z0.dim == 3:
            x[2] = x0[2] + p0[2] * t / M
            p[2] = p0[2]
    return flow_state(x, p, z0.t + t)


def classical_flow(H: QuadraticHamiltonian, z0: ClassicalFlowState, t: float,
                   dt: float | None = None, method: str = "auto") -> ClassicalFlowState:
    """Advance the classical flow of H by time t.

    method="auto" uses the exact closed form when H is recognized as the
    magnetic Hamiltonian and RK4 otherwise (default dt: characteristic period
    over 1e4).  The action phase is accumulated alongside the RK4 state and
    equals -p(t).x(t)/2 at the end.
    """
    if method not in ("auto", "rk4", "closed"):
        raise ValueError(f"unknown method {method!r}")
    if z0.dim != H.dim:
        raise ValueError(f"flow dimension {z0.dim} != Hamiltonian dimension {H.dim}")
    if t == 0.0:
        return ClassicalFlowState(z0.x_t.copy(), z0.p_t.copy(), z0.action_phase, z0.t)

    if method in ("auto", "closed"):
        mag = detect_magnetic(H)
        if mag is not None:
            return _magnetic_closed_flow(mag[0], mag[1], z0, t)
        if method == "closed":
            raise ValueError("closed-form flow requested for a non-magnetic Hamiltonian")

    if dt is None:
        T = _characteristic_period(H)
        dt = (T / 1e4) if math.isfinite(T) else abs(t) / 1e3
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    n_steps = max(1, int(round(abs(t) / dt)))
    if abs(t) / dt > MAX_RK4_STEPS:
        raise ResourceLimitError(f"{abs(t)/dt:.3g} steps exceeds limit {MAX_RK4_STEPS:.0e}")
    h = t / n_steps

    x, p = z0.x_t.astype(float).copy(), z0.p_t.astype(float).copy()
    theta = z0.action_phase

    def rhs(x_, p_):
        dx_, dp_ = _flow_rhs(x_, p_, H)
        return dx_, dp_, -0.5 * (float(np.dot(dp_, x_)) + float(np.dot(p_, dx_)))

    for _ in range(n_steps):
        k1x, k1p, k1t = rhs(x, p)
        k2x, k2p, k2t = rhs(x + 0.5 * h * k1x, p + 0.5 * h * k1p)
        k3x, k3p, k3t = rhs(x + 0.5 * h * k2x, p + 0.5 * h * k2p)
        k4x, k4p, k4t = rhs(x + h * k3x, p + h * k3p)
        x = x + h * (k1x + 2 * k2x + 2 * k3x + k4x) / 6.0
        p = p + h * (k1p + 2 * k2p + 2 * k3p + k4p) / 6.0
        theta = theta + h * (k1t + 2 * k2t + 2 * k3t + k4t) / 6.0
    return ClassicalFlowState(x, p, theta, z0.t + t)


def flows_at_times(H: QuadraticHamiltonian, z0: ClassicalFlowState, times,
                   dt: float | None = None, method: str = "auto"):
    """Flow snapshots at the given times (measured from z0.t)."""
    return [classical_flow(H, z0, float(t), dt=dt, method=method) for t in times]


def inject(psi: Callable, flow: ClassicalFlowState, hbar: float) -> Callable:
    """Wrap an evaluator psi(*coords) into its trajectory-injected image

        r -> exp(i[action_phase + p.r]/hbar) * psi(r - x_t).
    """
    if hbar <= 0.0:
        raise ValueError("hbar must be positive")
    x_t, p_t, phi = flow.x_t, flow.p_t, flow.action_phase
    dim = flow.dim

    def injected(*coords):
        if len(coords) != dim:
            raise ValueError(f"expected {dim} coordinates, got {len(coords)}")
        p_dot_r = sum(p_t[i] * np.asarray(coords[i]) for i in range(dim))
        shifted = tuple(np.asarray(coords[i]) - x_t[i] for i in range(dim))
        return np.exp(1j * (phi + p_dot_r) / hbar) * psi(*shifted)

    return injected


def inject_grid(field: ComplexField, flow: ClassicalFlowState, hbar: float) -> ComplexField:
    """Grid realization of ``inject``: periodic Fourier shift by x_t followed
    by the plane-wave and c-number phases.  Valid for fields that decay below
    roundoff at the domain boundary (periodic padding)."""
    grid = field.grid
    active = [a for a in range(3) if grid.shape[a] > 1]
    if flow.dim != len(active):
        raise ValueError(
            f"flow dimension {flow.dim} does not match grid with {len(active)} active axes"
        )
    shifts = [0.0, 0.0, 0.0]
    for i, a in enumerate(active):
        shifts[a] = float(flow.x_t[i])
    shifted = fourier_shift(field.data, shifts, grid.spacing)
    mesh = grid.mesh()
    p_dot_r = np.zeros(grid.shape)
    for i, a in enumerate(active):
        p_dot_r = p_dot_r + flow.p_t[i] * mesh[a]
    phase = np.exp(1j * (flow.action_phase + p_dot_r) / hbar)
    return ComplexField(grid, phase * shifted)


def injection_residual(H: QuadraticHamiltonian, slices: TimeSlices,
                       flows: Sequence[ClassicalFlowState], hbar: float) -> float:
    """Schrodinger residual of the trajectory-injected field.

    The input slices must already solve the equation on the grid; the map
    preserves solutions, so the returned residual stays at discretization
    level and refines at stencil order.  A corrupted flow breaks the identity
    and sends the residual to O(1).
    """
    if len(flows) != len(slices.times):
        raise ValueError("need one flow snapshot per time slice")
    out = np.empty_like(slices.data)
    for k, fl in enumerate(flows):
        out[k] = inject_grid(ComplexField(slices.grid, slices.data[k]), fl, hbar).data
    transformed = TimeSlices(slices.grid, slices.times, out)
    return residual_schrodinger(transformed, H, hbar)
