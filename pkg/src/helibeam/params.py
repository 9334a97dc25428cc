"""Physical parameters and unit conventions.

Magnetic induction is carried in geometric units of 1/length**2: the field
strength B here equals e*B_SI/hbar.  Two unit regimes are supported, full SI
and natural units with m = c = hbar = 1.  CODATA 2018 values are hard coded
for reproducibility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# CODATA 2018
ELEMENTARY_CHARGE = 1.602176634e-19      # C (exact)
HBAR_SI = 1.054571817e-34                # J s
C_SI = 2.99792458e8                      # m/s (exact)
ELECTRON_MASS_SI = 9.1093837015e-31      # kg


@dataclass(frozen=True)
class PhysParams:
    """Particle and field constants.

    m, c, hbar are strictly positive; B is the magnetic induction in
    geometric units (1/length**2) and must be nonnegative.
    """

    m: float
    c: float
    hbar: float
    B: float

    def __post_init__(self) -> None:
        for name in ("m", "c", "hbar"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0.0:
                raise ValueError(f"{name} must be finite and positive, got {v}")
        if not math.isfinite(self.B) or self.B < 0.0:
            raise ValueError(f"B must be finite and nonnegative, got {self.B}")

    @property
    def lambda_bar(self) -> float:
        """Reduced Compton wavelength hbar/(m c)."""
        return self.hbar / (self.m * self.c)

    @property
    def ell_B(self) -> float:
        """Magnetic length sqrt(2/B); infinite for B = 0."""
        if self.B == 0.0:
            return math.inf
        return math.sqrt(2.0 / self.B)

    def cyclotron_frequency(self, M: float) -> float:
        """Cyclotron angular frequency hbar*B/M for dynamical mass M."""
        if M <= 0.0:
            raise ValueError("M must be positive")
        return self.hbar * self.B / M

    def to_dict(self) -> dict:
        return {"m": self.m, "c": self.c, "hbar": self.hbar, "B": self.B}

    @staticmethod
    def from_dict(d: dict) -> "PhysParams":
        return PhysParams(m=d["m"], c=d["c"], hbar=d["hbar"], B=d["B"])


def from_si(mass_kg: float, B_tesla: float) -> PhysParams:
    """SI parameter set with B converted to geometric units, B = e*B_SI/hbar."""
    if not math.isfinite(mass_kg) or mass_kg <= 0.0:
        raise ValueError(f"mass must be positive, got {mass_kg}")
    if not math.isfinite(B_tesla) or B_tesla < 0.0:
        raise ValueError(f"B_tesla must be nonnegative, got {B_tesla}")
    return PhysParams(
        m=mass_kg,
        c=C_SI,
        hbar=HBAR_SI,
        B=ELEMENTARY_CHARGE * B_tesla / HBAR_SI,
    )


def natural_units(B: float) -> PhysParams:
    """Natural units m = c = hbar = 1 with the given geometric field strength."""
    if not math.isfinite(B) or B < 0.0:
        raise ValueError(f"B must be nonnegative, got {B}")
    return PhysParams(m=1.0, c=1.0, hbar=1.0, B=B)


def b_tesla(params: PhysParams) -> float:
    """Convert the geometric field strength back to tesla, B_SI = hbar*B/e."""
    return params.hbar * params.B / ELEMENTARY_CHARGE
