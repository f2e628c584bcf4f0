"""Interferometer plant physics.

A tuned dual-recycled interferometer acts differently on the three sideband
fields involved in the teleportation readout:

* the probe field entering the dark port (Victor) sees an active cavity and
  comes back ponderomotively squeezed, with the GW signal riding its phase
  quadrature (Kimble et al., PRD 65, 022002);
* its entangled idler (Alice) sees a passive cavity, i.e. a pure quadrature
  rotation;
* the reference sideband (Bob) never enters and is detected as-is.

The opto-mechanical coupling strength is the frequency-dependent Kimble
factor K(Omega) = 2 Theta gamma / (Omega^2 (Omega^2 + gamma^2)) with
Theta = 8 omega_p I_c / (M c L), and the free-mass standard quantum limit
is h_SQL = sqrt(8 hbar / (M L^2 Omega^2)).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from scipy.constants import c as SPEED_OF_LIGHT, hbar as HBAR

from .field_algebra import SpectralMatrix, TransferMatrix, propagate, ponderomotive, rotation


@dataclass(frozen=True)
class PlantParams:
    """Interferometer constants, all strictly positive.

    mirror_mass kg, arm_length m, circulating_power W, carrier_omega rad/s,
    half_bandwidth rad/s.
    """

    mirror_mass: float
    arm_length: float
    circulating_power: float
    carrier_omega: float
    half_bandwidth: float

    def __post_init__(self):
        for name in ("mirror_mass", "arm_length", "circulating_power",
                     "carrier_omega", "half_bandwidth"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")
            object.__setattr__(self, name, v)

    @property
    def carrier_wavelength(self) -> float:
        """Carrier wavelength in meters, 2 pi c / omega_p."""
        return 2.0 * math.pi * SPEED_OF_LIGHT / self.carrier_omega


@dataclass(frozen=True)
class SignalChannel:
    """Complex coefficient multiplying h / h_SQL in the phase quadrature."""

    coefficient: complex

    def __post_init__(self):
        c = complex(self.coefficient)
        if not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise ValueError("signal coefficient must be finite")
        object.__setattr__(self, "coefficient", c)


def theta(p: PlantParams) -> float:
    """Power-mass coupling Theta = 8 omega_p I_c / (M c L), in rad/s^3."""
    return 8.0 * p.carrier_omega * p.circulating_power / (
        p.mirror_mass * SPEED_OF_LIGHT * p.arm_length
    )


def kimble_from_theta(theta_value: float, gamma: float, omega: float) -> float:
    """K(Omega) from an explicit Theta and cavity half-bandwidth.

    This is the normalized-units entry point: the dimensionless convention
    Theta = gamma^3 puts K = 1 exactly at Omega = gamma.
    """
    omega = float(omega)
    if not (math.isfinite(omega) and omega > 0):
        raise ValueError(f"omega must be > 0 (K diverges at DC), got {omega!r}")
    return 2.0 * theta_value * gamma / (omega**2 * (omega**2 + gamma**2))


def kimble_factor(p: PlantParams, omega: float) -> float:
    """Kimble factor K = 2 Theta gamma / (Omega^2 (Omega^2 + gamma^2))."""
    return kimble_from_theta(theta(p), p.half_bandwidth, omega)


def h_sql_sq(p: PlantParams, omega: float) -> float:
    """Squared SQL strain PSD, 8 hbar / (M L^2 Omega^2), in 1/Hz."""
    omega = float(omega)
    if not (math.isfinite(omega) and omega > 0):
        raise ValueError(f"omega must be > 0, got {omega!r}")
    return 8.0 * HBAR / (p.mirror_mass * p.arm_length**2 * omega**2)


def h_sql(p: PlantParams, omega: float) -> float:
    """Free-mass standard quantum limit h_SQL(Omega), amplitude form."""
    return math.sqrt(h_sql_sq(p, omega))


def victor_transfer(kimble: float, beta_b: float = 0.0) -> TransferMatrix:
    """Active-cavity (ponderomotive) response seen by the probe field."""
    return ponderomotive(kimble, beta_b)


def victor_output_from_kimble(
    kimble: float,
    v: SpectralMatrix,
    beta_b: float = 0.0,
    beta_v: float = 0.0,
) -> tuple[SpectralMatrix, SignalChannel]:
    """Probe-field output spectrum plus its signal transfer coefficient.

    Noise: the input spectrum pushed through [[1,0],[-K,1]].  Signal:
    sqrt(K) e^{i beta_v} in the phase quadrature only, in units of
    h / h_SQL.
    """
    noise = propagate(victor_transfer(kimble, beta_b), v)
    signal = SignalChannel(math.sqrt(kimble) * cmath.exp(1j * beta_v))
    return noise, signal


def victor_output(
    p: PlantParams,
    omega: float,
    v: SpectralMatrix,
    beta_b: float = 0.0,
    beta_v: float = 0.0,
) -> tuple[SpectralMatrix, SignalChannel]:
    """victor_output_from_kimble evaluated at the plant's K(Omega)."""
    return victor_output_from_kimble(kimble_factor(p, omega), v, beta_b, beta_v)


def alice_output(theta_a: float, beta_a: float, a: SpectralMatrix) -> SpectralMatrix:
    """Passive-cavity response: rotation by theta_a with phase e^{2i beta_a}."""
    t = rotation(theta_a)
    t = TransferMatrix(t.m, cmath.exp(2j * float(beta_a)))
    return propagate(t, a)


def bob_output(b: SpectralMatrix) -> SpectralMatrix:
    """Identity map: the reference sideband is detected without entering."""
    return b
