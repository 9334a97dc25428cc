"""Closed-form nonrelativistic states in a uniform magnetic field.

Landau stationary states, axially localized Gaussian packets, and helical
states whose probability density rides a classical trajectory.  The helical
state is constructed as the trajectory-injected image of the packet, so its
phase comes from the unitary map rather than a hand-coded expression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import injection
from .classical import TrajectoryParams, closed_form_arrays
from .numerics import IntegralResult, QuadratureSpec, quadrature_nodes, _weight_tensor
from .params import PhysParams
from .specfun import QuantumNumbers, laguerre, landau_norm

WAVE_KINDS = ("landau", "packet", "helical", "kg_helical", "dirac_helical")


@dataclass(frozen=True)
class PacketParams:
    """Quantum numbers plus the axial Gaussian width d and the axial momentum
    pz used by the plane-wave Landau states."""

    qn: QuantumNumbers
    d: float = 1.0
    pz: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.d) or not math.isfinite(self.pz):
            raise ValueError("packet parameters must be finite")


@dataclass(frozen=True)
class WaveModel:
    """A closed-form wavefunction family, evaluable at any spacetime point."""

    kind: str
    params: PhysParams
    packet: PacketParams
    traj: TrajectoryParams | None = None
    spin: str = "up"

    def __post_init__(self) -> None:
        if self.kind not in WAVE_KINDS:
            raise ValueError(f"unknown wave kind {self.kind!r}")
        if self.kind in ("helical", "kg_helical", "dirac_helical") and self.traj is None:
            raise ValueError(f"{self.kind} model requires trajectory parameters")
        if self.kind in ("packet", "helical") and self.packet.d <= 0.0:
            raise ValueError("packet width d must be positive")
        if self.spin not in ("up", "down"):
            raise ValueError(f"spin must be 'up' or 'down', got {self.spin!r}")


def landau_model(params: PhysParams, n: int, l: int, pz: float = 0.0) -> WaveModel:
    return WaveModel("landau", params, PacketParams(QuantumNumbers(n, l), pz=pz))


def packet_model(params: PhysParams, n: int, l: int, d: float) -> WaveModel:
    return WaveModel("packet", params, PacketParams(QuantumNumbers(n, l), d=d))


def helical_model(params: PhysParams, n: int, l: int, d: float,
                  traj: TrajectoryParams) -> WaveModel:
    return WaveModel("helical", params, PacketParams(QuantumNumbers(n, l), d=d), traj)


# ---------------------------------------------------------------------------
# Building blocks
# ---------------------------------------------------------------------------

def transverse_profile(n: int, l: int, B: float, u, v):
    """Normalized transverse Landau profile

        N_nl * exp(-B(u^2+v^2)/4) * (u+iv)^l * L_n^l(B(u^2+v^2)/2)

    with unit 2D norm; the vortex factor (u+iv)^l zeroes it on the axis for
    l >= 1.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    xi = 0.5 * B * (u**2 + v**2)
    core = np.exp(-0.5 * xi) * laguerre(n, l, xi)
    if l > 0:
        core = core * (u + 1j * v) ** l
    return landau_norm(n, l, B) * core


def transverse_profile_and_grad(n: int, l: int, B: float, u, v):
    """Profile g together with dg/du and dg/dv (analytic)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    norm = landau_norm(n, l, B)
    xi = 0.5 * B * (u**2 + v**2)
    gauss = np.exp(-0.5 * xi)
    L = laguerre(n, l, xi)
    Lp = -laguerre(n - 1, l + 1, xi)  # dL/dxi
    w = (u + 1j * v) ** l if l > 0 else np.ones_like(u + 1j * v)
    g = norm * gauss * w * L
    # d(xi)/du = B u, d(xi)/dv = B v; d(w)/du = l w/(u+iv), d(w)/dv = i l w/(u+iv)
    common = norm * gauss
    du = common * w * (-0.5 * B * u * L + B * u * Lp)
    dv = common * w * (-0.5 * B * v * L + B * v * Lp)
    if l > 0:
        wl = (u + 1j * v) ** (l - 1)
        du = du + common * l * wl * L
        dv = dv + common * 1j * l * wl * L
    return g, du, dv


def axial_packet(z, t, d: float, m: float, hbar: float):
    """Spreading axial Gaussian pi^{-1/4} (d + i hbar t/(m d))^{-1/2}
    exp(-m z^2/(2 m d^2 + 2 i hbar t)); principal branch, continuous in t."""
    z = np.asarray(z, dtype=float)
    width = d + 1j * hbar * t / (m * d)
    return math.pi ** (-0.25) * width ** (-0.5) * np.exp(-m * z**2 / (2.0 * m * d**2 + 2j * hbar * t))


def axial_width(t: float, d: float, m: float, hbar: float) -> float:
    """Gaussian width s(t) of the axial density, |psi_z|^2 ~ exp(-z^2/s^2)."""
    return math.sqrt(d**2 + (hbar * t / (m * d)) ** 2)


def flow3_from_trajectory(tp: TrajectoryParams, t: float) -> injection.ClassicalFlowState:
    """3D classical flow snapshot taken from the closed-form trajectory."""
    x, y, z, px, py, pz = closed_form_arrays(tp, float(t))
    return injection.flow_state([x, y, z], [px, py, pz], float(t))


def flow2_from_trajectory(tp: TrajectoryParams, t: float) -> injection.ClassicalFlowState:
    """Transverse (2D) flow snapshot from the closed-form trajectory."""
    x, y, _, px, py, _ = closed_form_arrays(tp, float(t))
    return injection.flow_state([x, y], [px, py], float(t))


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

def landau_state(model: WaveModel, x, y, z, t):
    """Stationary Landau state: transverse profile times exp(i pz z/hbar) and
    the energy phase; the modulus is independent of z and t."""
    if model.kind != "landau":
        raise ValueError("model kind must be 'landau'")
    p = model.params
    qn = model.packet.qn
    pz = model.packet.pz
    z = np.asarray(z, dtype=float)
    energy_rate = (pz**2 + (2 * qn.n + 1) * p.B * p.hbar**2) / (2.0 * p.m * p.hbar)
    phase = np.exp(-1j * energy_rate * t + 1j * pz * z / p.hbar)
    return transverse_profile(qn.n, qn.l, p.B, x, y) * phase


def packet_state(model: WaveModel, x, y, z, t):
    """Axially localized packet, fully normalized in all three variables."""
    if model.kind not in ("packet", "helical"):
        raise ValueError("model kind must be 'packet' or 'helical'")
    p = model.params
    qn = model.packet.qn
    rot_phase = np.exp(-1j * (2 * qn.n + 1) * p.B * p.hbar * t / (2.0 * p.m))
    return (
        axial_packet(z, t, model.packet.d, p.m, p.hbar)
        * transverse_profile(qn.n, qn.l, p.B, x, y)
        * rot_phase
    )


def helical_state(model: WaveModel, x, y, z, t):
    """Trajectory-injected packet: the modulus equals the packet modulus with
    shifted arguments and the center follows the classical trajectory."""
    if model.kind != "helical":
        raise ValueError("model kind must be 'helical'")
    flow = flow3_from_trajectory(model.traj, t)
    packet = WaveModel("packet", model.params, model.packet)
    psi = lambda u, v, w: packet_state(packet, u, v, w, t)
    return injection.inject(psi, flow, model.params.hbar)(
        np.asarray(x, dtype=float), np.asarray(y, dtype=float), np.asarray(z, dtype=float)
    )


def density_helical(model: WaveModel, x, y, z, t):
    """Probability density of the helical state, evaluated without complex
    arithmetic: spreading axial Gaussian times the shifted transverse ring
    pattern, normalized to unit 3D integral."""
    if model.kind != "helical":
        raise ValueError("model kind must be 'helical'")
    p = model.params
    qn = model.packet.qn
    d = model.packet.d
    xc, yc, zc, _, _, _ = closed_form_arrays(model.traj, float(t))
    u = np.asarray(x, dtype=float) - xc
    v = np.asarray(y, dtype=float) - yc
    w = np.asarray(z, dtype=float) - zc
    s = axial_width(t, d, p.m, p.hbar)
    xi = 0.5 * p.B * (u**2 + v**2)
    radial = np.exp(-xi) * laguerre(qn.n, qn.l, xi) ** 2
    if qn.l > 0:
        radial = radial * (u**2 + v**2) ** qn.l
    norm = landau_norm(qn.n, qn.l, p.B) ** 2 / math.sqrt(math.pi)
    return norm * np.exp(-(w / s) ** 2) / s * radial


def default_centroid_quad(model: WaveModel, t: float) -> QuadratureSpec:
    """Gauss-Hermite spec matched to the Gaussian factors of the density and
    centered on the classical position; exact for Gaussian-times-polynomial
    integrands up to the rule's degree."""
    p = model.params
    if model.kind == "helical":
        xc, yc, zc, _, _, _ = closed_form_arrays(model.traj, float(t))
        center = (float(xc), float(yc), float(zc))
    else:
        center = (0.0, 0.0, 0.0)
    # Rule convention is exp(-(x-c)^2/sigma^2): the transverse density factor
    # exp(-B u^2/2) has sigma = sqrt(2/B) = ell_B, the axial one sigma = s(t).
    sigma_t = math.sqrt(2.0 / p.B)
    sigma_z = axial_width(t, model.packet.d, p.m, p.hbar)
    return QuadratureSpec("gauss_hermite", 48, center, (sigma_t, sigma_t, sigma_z))


def default_trapezoid_quad(model: WaveModel, t: float, points: int = 128) -> QuadratureSpec:
    """Trapezoid spec with the box |u|,|v| <= (8 + 2 sqrt(n+l)) ell_B and
    |w| <= 8 spreading widths, centered on the classical position."""
    p = model.params
    qn = model.packet.qn
    if model.kind == "helical":
        xc, yc, zc, _, _, _ = closed_form_arrays(model.traj, float(t))
        center = (float(xc), float(yc), float(zc))
    else:
        center = (0.0, 0.0, 0.0)
    half_t = (8.0 + 2.0 * math.sqrt(qn.n + qn.l)) * p.ell_B
    half_z = 8.0 * axial_width(t, model.packet.d, p.m, p.hbar)
    return QuadratureSpec("trapezoid", points, center, (half_t, half_t, half_z))


def centroid(model: WaveModel, t: float, quad: QuadratureSpec | None = None) -> np.ndarray:
    """Position expectation value by 3D quadrature of r times the density.

    For helical models this must land on the classical trajectory; the
    density evaluation is shared between the norm and the three moments.
    """
    if model.kind == "landau":
        raise ValueError("plane-wave Landau states are not normalizable in z")
    if model.kind == "packet":
        density = lambda X, Y, Z: np.abs(packet_state(model, X, Y, Z, t)) ** 2
    elif model.kind == "helical":
        density = lambda X, Y, Z: density_helical(model, X, Y, Z, t)
    else:
        raise ValueError(f"centroid unsupported for kind {model.kind!r}")

    spec = quad if quad is not None else default_centroid_quad(model, t)
    nodes, weights = quadrature_nodes(spec)
    X, Y, Z = np.meshgrid(*nodes, indexing="ij")
    rho = np.asarray(density(X, Y, Z), dtype=float)
    wt = _weight_tensor(weights)
    norm = float(np.sum(rho * wt))
    if not (norm > 0.0) or abs(norm - 1.0) > 1e-3:
        from .numerics import AccuracyError

        raise AccuracyError(
            f"centroid quadrature did not converge: density integrates to {norm!r}"
        )
    moments = np.array([
        float(np.sum(X * rho * wt)),
        float(np.sum(Y * rho * wt)),
        float(np.sum(Z * rho * wt)),
    ])
    return moments / norm


def norm_squared(model: WaveModel, t: float, quad: QuadratureSpec | None = None) -> IntegralResult:
    """3D integral of |psi|^2 (packet and helical kinds)."""
    if model.kind == "packet":
        f = lambda X, Y, Z: np.abs(packet_state(model, X, Y, Z, t)) ** 2
    elif model.kind == "helical":
        f = lambda X, Y, Z: density_helical(model, X, Y, Z, t)
    else:
        raise ValueError(f"norm unsupported for kind {model.kind!r}")
    from .numerics import integrate

    spec = quad if quad is not None else default_centroid_quad(model, t)
    return integrate(f, spec)


# ---------------------------------------------------------------------------
# Transverse (2D) helical evaluator shared with the relativistic sector
# ---------------------------------------------------------------------------

class TransverseHelical:
    """Trajectory-injected 2D Landau state with dynamical mass M.

    Solves the transverse Schrodinger equation i hbar d_tau Phi = H_2D Phi,
    where tau is ordinary time in the nonrelativistic setting and the
    backward lightcone time in the relativistic reduction.
    """

    def __init__(self, qn: QuantumNumbers, params: PhysParams, M: float,
                 traj_init=(0.0, 0.0, 0.0, 0.0)):
        if M <= 0.0:
            raise ValueError("M must be positive")
        self.qn = qn
        self.params = params
        self.M = M
        self.omega = params.cyclotron_frequency(M)
        x0, y0, px0, py0 = (float(v) for v in traj_init)
        from .classical import PhaseSpacePoint

        self.traj = TrajectoryParams(PhaseSpacePoint(x0, y0, 0.0, px0, py0, 0.0),
                                     M, self.omega)
        self.energy = (2 * qn.n + 1) * params.B * params.hbar**2 / (2.0 * M)

    def stationary(self, u, v, tau):
        return transverse_profile(self.qn.n, self.qn.l, self.params.B, u, v) * np.exp(
            -1j * self.energy * tau / self.params.hbar
        )

    def flow(self, tau: float) -> injection.ClassicalFlowState:
        return flow2_from_trajectory(self.traj, tau)

    def __call__(self, x, y, tau):
        fl = self.flow(float(tau))
        psi = lambda u, v: self.stationary(u, v, float(tau))
        return injection.inject(psi, fl, self.params.hbar)(
            np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        )
