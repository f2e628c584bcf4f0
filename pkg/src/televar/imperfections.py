"""Loss and RMS phase-noise (dephasing) models.

Losses are lumped beamsplitter admixtures of uncorrelated vacuum: a power
efficiency eta maps S -> eta S + (1 - eta) I per field, and any
cross-correlation with another field shrinks by sqrt(eta) per lossy field
(that scaling is applied where the correlations live, not here).

Dephasing is a Gaussian quadrature-angle jitter averaged to second order:
cos^2 -> 1 - rms^2, sin^2 -> rms^2.  Table-level RMS values are at most
~10 mrad, where the truncation error is below 1e-6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

from .errors import ModelValidityError
from .field_algebra import SpectralMatrix, propagate, rotation

# Second-order Gaussian averaging is only trusted well below this jitter.
DEPHASING_RMS_LIMIT = 0.3

_FRACTION_FIELDS = (
    "injection_loss",
    "arm_round_trip_loss",
    "sec_loss",
    "readout_loss",
    "fc_round_trip_loss",
)
_RMS_FIELDS = ("squeezer_rms", "lo_rms", "sec_length_rms", "fc_length_rms")


@dataclass(frozen=True)
class ImperfectionBudget:
    """Efficiencies and RMS jitters of one detector configuration.

    Loss entries are power fractions in [0, 1).  squeezer_rms and lo_rms
    are radians; sec_length_rms and fc_length_rms are meters and convert
    to radians via the carrier wavelength.  detuning (rad/s) places the
    entangled sideband pair and is bookkeeping only; squeeze_db is the
    injected squeezing level, negative for squeezing.
    """

    injection_loss: float = 0.0
    arm_round_trip_loss: float = 0.0
    sec_loss: float = 0.0
    readout_loss: float = 0.0
    fc_round_trip_loss: float = 0.0
    squeezer_rms: float = 0.0
    lo_rms: float = 0.0
    sec_length_rms: float = 0.0
    fc_length_rms: float = 0.0
    detuning: float = 0.0
    squeeze_db: float = 0.0

    def __post_init__(self):
        for name in _FRACTION_FIELDS:
            v = float(getattr(self, name))
            if not (0.0 <= v < 1.0) or not math.isfinite(v):
                raise ValueError(f"{name} must be a fraction in [0, 1), got {v!r}")
            object.__setattr__(self, name, v)
        for name in _RMS_FIELDS:
            v = float(getattr(self, name))
            if v < 0 or not math.isfinite(v):
                raise ValueError(f"{name} must be >= 0, got {v!r}")
            object.__setattr__(self, name, v)
        det = float(self.detuning)
        if det < 0 or not math.isfinite(det):
            raise ValueError(f"detuning must be >= 0, got {det!r}")
        db = float(self.squeeze_db)
        if db > 0 or not math.isfinite(db):
            raise ValueError(f"squeeze_db must be <= 0 (negative = squeezing), got {db!r}")
        object.__setattr__(self, "detuning", det)
        object.__setattr__(self, "squeeze_db", db)

    def is_ideal(self) -> bool:
        return all(
            getattr(self, f.name) == 0.0
            for f in fields(self)
            if f.name not in ("detuning", "squeeze_db")
        )

    @property
    def squeeze_r(self) -> float:
        return db_to_r(self.squeeze_db)


def db_to_r(db: float) -> float:
    """Squeeze parameter from a dB level (negative = squeezing).

    -20 r / ln 10 dB of quadrature noise reduction, so r = -dB ln(10)/20.
    """
    db = float(db)
    if db > 0:
        raise ValueError(f"expected a squeezing (non-positive) dB value, got {db!r}")
    return -db * math.log(10.0) / 20.0


def length_to_phase_rms(length_rms: float, wavelength: float) -> float:
    """Displacement jitter to quadrature-angle jitter: 2 pi dL / lambda."""
    if wavelength <= 0:
        raise ValueError("wavelength must be > 0")
    if length_rms < 0:
        raise ValueError("length_rms must be >= 0")
    return 2.0 * math.pi * length_rms / wavelength


def apply_loss(s: SpectralMatrix, eta: float) -> SpectralMatrix:
    """Admix (1 - eta) of uncorrelated vacuum: S' = eta S + (1 - eta) I."""
    eta = float(eta)
    if not (0.0 < eta <= 1.0):
        raise ValueError(f"efficiency must be in (0, 1], got {eta!r}")
    return SpectralMatrix(
        eta * s.s11 + (1.0 - eta),
        eta * s.s22 + (1.0 - eta),
        eta * s.s12,
    )


def apply_dephasing(s: SpectralMatrix, rms: float) -> SpectralMatrix:
    """Second-order Gaussian average over quadrature-angle jitter.

    S' = (1 - rms^2) S + rms^2 R(pi/2) S R(pi/2)~ : each quadrature is
    contaminated by a rms^2 share of its conjugate.  Isotropic states are
    fixed points.
    """
    rms = float(rms)
    if rms < 0 or not math.isfinite(rms):
        raise ValueError(f"rms must be >= 0, got {rms!r}")
    if rms >= DEPHASING_RMS_LIMIT:
        raise ModelValidityError(
            f"rms = {rms:g} rad is outside the second-order averaging regime "
            f"(limit {DEPHASING_RMS_LIMIT} rad)"
        )
    if rms == 0.0:
        return s
    swapped = propagate(rotation(math.pi / 2.0), s)
    w = rms * rms
    return SpectralMatrix(
        (1.0 - w) * s.s11 + w * swapped.s11,
        (1.0 - w) * s.s22 + w * swapped.s22,
        (1.0 - w) * s.s12 + w * swapped.s12,
    )


def cross_dephasing_factor(rms: float) -> float:
    """Mean shrink of a cross-correlation against a jittering channel.

    E[cos delta] to second order; one factor per independently jittering
    detector or field.
    """
    rms = float(rms)
    if rms < 0:
        raise ValueError("rms must be >= 0")
    if rms >= DEPHASING_RMS_LIMIT:
        raise ModelValidityError(f"rms = {rms:g} rad too large for the model")
    return 1.0 - 0.5 * rms * rms


def joint_squeeze_dephasing_factor(rms: float) -> float:
    """Shrink of the two-mode correlation under squeeze-ellipse jitter.

    A common squeeze-angle jitter delta rotates the pair correlation
    pattern at 2 delta, so the surviving amplitude is E[cos 2 delta]
    = 1 - 2 rms^2 to second order.  The isotropic per-mode marginals are
    untouched.
    """
    rms = float(rms)
    if rms < 0:
        raise ValueError("rms must be >= 0")
    if rms >= DEPHASING_RMS_LIMIT:
        raise ModelValidityError(f"rms = {rms:g} rad too large for the model")
    return 1.0 - 2.0 * rms * rms
