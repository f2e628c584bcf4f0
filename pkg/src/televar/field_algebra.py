"""Two-photon-formalism primitives.

Sideband fields are described by their (amplitude, phase) quadrature pair.
Linear optics and opto-mechanics act on that pair through 2x2 complex
transfer matrices; second moments are carried as 2x2 Hermitian spectral
matrices.

Conventions used throughout the package:

* single-sided spectra, vacuum-normalized: a unit vacuum input has
  auto-PSD 1 in each quadrature;
* cross-spectra follow S_xy = <x y~>, so S_yx = conj(S_xy);
* overall propagation phases (the e^{2i beta} reflection phase of a
  cavity, for instance) are carried as explicit unit-modulus scalars.
  They cancel in every auto-PSD but survive in cross-spectra against
  other fields, so they are never silently dropped.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

# Tolerance for the |scalar_phase| = 1 check.
UNIT_PHASE_TOL = 1e-12
# Slack allowed on the positive-semidefiniteness of spectral matrices.
PSD_TOL = 1e-9


def _require_finite(name, *values):
    for v in values:
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class QuadPair:
    """Complex coefficients on the (amplitude, phase) quadrature basis.

    Used for deterministic content such as signal transfer coefficients;
    stochastic content lives in :class:`SpectralMatrix`.
    """

    a1: complex
    a2: complex

    def __post_init__(self):
        _require_finite("QuadPair component", complex(self.a1), complex(self.a2))


@dataclass(frozen=True)
class TransferMatrix:
    """2x2 complex quadrature map with a unit scalar propagation phase."""

    m: np.ndarray
    scalar_phase: complex = 1.0 + 0.0j

    def __post_init__(self):
        m = np.asarray(self.m, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"transfer matrix must be 2x2, got {m.shape}")
        if not np.all(np.isfinite(m.view(float))):
            raise ValueError("transfer matrix entries must be finite")
        phase = complex(self.scalar_phase)
        if abs(abs(phase) - 1.0) > UNIT_PHASE_TOL:
            raise ValueError(f"|scalar_phase| must be 1, got {abs(phase)!r}")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "scalar_phase", phase)

    def full(self) -> np.ndarray:
        """Matrix including the scalar phase."""
        return self.m * self.scalar_phase

    def apply(self, pair: QuadPair) -> QuadPair:
        v = self.full() @ np.array([pair.a1, pair.a2])
        return QuadPair(v[0], v[1])


@dataclass(frozen=True)
class SpectralMatrix:
    """Hermitian 2x2 second-moment matrix of one field at one frequency.

    s11 and s22 are the quadrature auto-PSDs (vacuum = 1), s12 the complex
    cross-spectrum <x1 x2~>.
    """

    s11: float
    s22: float
    s12: complex = 0.0 + 0.0j

    def __post_init__(self):
        s11, s22, s12 = float(self.s11), float(self.s22), complex(self.s12)
        if not (math.isfinite(s11) and math.isfinite(s22)):
            raise ValueError("spectral matrix diagonals must be finite")
        _require_finite("s12", s12)
        if s11 < 0 or s22 < 0:
            raise ValueError(f"auto-PSDs must be non-negative, got {s11}, {s22}")
        slack = PSD_TOL * max(1.0, s11 * s22)
        if s11 * s22 - abs(s12) ** 2 < -slack:
            raise ValueError(
                f"spectral matrix not positive semidefinite: "
                f"det = {s11 * s22 - abs(s12) ** 2:g}"
            )
        object.__setattr__(self, "s11", s11)
        object.__setattr__(self, "s22", s22)
        object.__setattr__(self, "s12", s12)

    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.s11, self.s12], [np.conj(self.s12), self.s22]], dtype=complex
        )


def vacuum() -> SpectralMatrix:
    """Unit vacuum: isotropic, unit PSD per quadrature."""
    return SpectralMatrix(1.0, 1.0, 0.0)


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing positive angular frequencies (rad/s)."""

    omegas: np.ndarray

    def __post_init__(self):
        om = np.asarray(self.omegas, dtype=float)
        if om.ndim != 1 or om.size == 0:
            raise ValueError("frequency grid must be a non-empty 1-d array")
        if not np.all(np.isfinite(om)):
            raise ValueError("frequency grid must be finite")
        if om[0] <= 0 or np.any(np.diff(om) <= 0):
            raise ValueError("frequency grid must be positive and strictly increasing")
        object.__setattr__(self, "omegas", om)

    def __len__(self):
        return self.omegas.size

    @classmethod
    def log_spaced(cls, fmin: float, fmax: float, points_per_decade: int,
                   angular: bool = False) -> "FrequencyGrid":
        """Decade-spaced grid from fmin to (at most) fmax.

        Points sit at fmin * 10^(k / points_per_decade).  With ``angular``
        the inputs are taken as angular frequencies already; otherwise they
        are Hz and converted by 2*pi.
        """
        if not (fmin > 0 and fmax > fmin):
            raise ValueError("need 0 < fmin < fmax")
        if points_per_decade < 1:
            raise ValueError("points_per_decade must be >= 1")
        n = int(math.floor(math.log10(fmax / fmin) * points_per_decade + 1e-9)) + 1
        f = fmin * 10.0 ** (np.arange(n) / points_per_decade)
        scale = 1.0 if angular else 2.0 * math.pi
        return cls(scale * f)


def rotation(theta: float) -> TransferMatrix:
    """Quadrature rotation by ``theta`` radians, unit scalar phase."""
    theta = float(theta)
    if not math.isfinite(theta):
        raise ValueError(f"rotation angle must be finite, got {theta!r}")
    c, s = math.cos(theta), math.sin(theta)
    return TransferMatrix(np.array([[c, -s], [s, c]], dtype=complex))


def ponderomotive(kimble: float, beta: float = 0.0) -> TransferMatrix:
    """Radiation-pressure quadrature coupling [[1, 0], [-K, 1]].

    The amplitude quadrature drives the mirrors and reappears in the phase
    quadrature with weight -K; the scalar phase e^{2i beta} is the cavity
    reflection phase.
    """
    kimble = float(kimble)
    if not math.isfinite(kimble) or kimble < 0:
        raise ValueError(f"kimble factor must be finite and >= 0, got {kimble!r}")
    return TransferMatrix(
        np.array([[1.0, 0.0], [-kimble, 1.0]], dtype=complex),
        cmath.exp(2j * float(beta)),
    )


def compose(t1: TransferMatrix, t2: TransferMatrix) -> TransferMatrix:
    """Matrix product t1 . t2 (t2 acts first); scalar phases multiply."""
    phase = t1.scalar_phase * t2.scalar_phase
    # renormalize so roundoff cannot accumulate past the unit-modulus check
    phase /= abs(phase)
    return TransferMatrix(t1.m @ t2.m, phase)


def propagate(t: TransferMatrix, s: SpectralMatrix) -> SpectralMatrix:
    """Push a spectral matrix through a transfer matrix: S' = (mp) S (mp)~.

    The unit scalar phase cancels against its conjugate, so only the 2x2
    part enters.  Hermiticity and positive semidefiniteness are preserved.
    """
    out = t.m @ s.matrix() @ t.m.conj().T
    return SpectralMatrix(out[0, 0].real, out[1, 1].real, out[0, 1])
