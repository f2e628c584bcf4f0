"""Bell readout, spectral catalog, filter synthesis and strain sensitivity.

The readout chain measures three channels: the phase quadrature B of the
reference sideband, and the joint Bell quadratures

    alpha1 = (V1 - A1) / sqrt(2),    alpha2 = (V2 + A2) / sqrt(2),

where V is the ponderomotively squeezed probe (carrying the GW signal in
V2) and A the rotated idler.  Post-processing forms

    B^g = B - g1 alpha1 - g2 alpha2

and the strain-referred noise is the filtered residual divided by the
squared signal gain.  The GW signal enters alpha2 through V2/sqrt(2), so
the signal gain carried by B^g is g2/sqrt(2) in Bell-normalized units;
the strain assembly below accounts for that factor once, explicitly.

Two filter solutions are provided:

* :func:`wiener_filters` is the unconstrained two-channel least-squares
  solution: it minimizes the filtered residual itself and is the right
  reference point for optimality checks on arbitrary catalogs;
* :func:`variational_filters` is the readout scheme's own pair: g1 = K g2
  cancels the radiation-pressure quadrature identically (that is the
  variational-readout property), and |g2| is the minimum-variance
  teleportation gain.  With the idler rotation tuned to arctan K this
  pair reproduces the closed-form sensitivity of
  :func:`qtvr_closed_form`, which an unconstrained residual minimizer
  does not.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateCatalogError,
    InternalConsistencyError,
    SignalLossError,
)
from .field_algebra import SpectralMatrix, propagate, rotation

SQRT2 = math.sqrt(2.0)

# Negative residuals beyond this (relative) slack indicate a broken catalog.
RESIDUAL_TOL = 1e-9
CATALOG_PSD_TOL = 1e-9
GRAM_COND_LIMIT = 1e12


@dataclass(frozen=True)
class EntanglementParams:
    """Two-mode squeeze strength plus optional probe-field squeezing.

    r is the entanglement parameter (cosh 2r is each sideband's auto-PSD;
    r = inf selects the perfect-teleportation limit).  victor_squeeze and
    victor_angle define the probe input: its phase quadrature is squeezed
    by e^{-2 r_v} at victor_angle = 0.
    """

    r: float
    victor_squeeze: float = 0.0
    victor_angle: float = 0.0

    def __post_init__(self):
        r = float(self.r)
        rv = float(self.victor_squeeze)
        if math.isnan(r) or r < 0:
            raise ValueError(f"squeeze parameter r must be >= 0, got {r!r}")
        if not (math.isfinite(rv) and rv >= 0):
            raise ValueError(f"victor_squeeze must be finite and >= 0, got {rv!r}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "victor_squeeze", rv)
        object.__setattr__(self, "victor_angle", float(self.victor_angle))


@dataclass(frozen=True)
class SpectralCatalog:
    """Auto/cross spectral densities of the measured channels (B, a1, a2)."""

    s_bb: float
    s_a1a1: float
    s_a2a2: float
    s_a1a2: complex
    s_ba1: complex
    s_ba2: complex

    def gram(self) -> np.ndarray:
        """2x2 Hermitian Gram matrix of the Bell channels."""
        return np.array(
            [[self.s_a1a1, self.s_a1a2], [np.conj(self.s_a1a2), self.s_a2a2]],
            dtype=complex,
        )

    def full_matrix(self) -> np.ndarray:
        """3x3 Hermitian matrix over (B, alpha1, alpha2)."""
        return np.array(
            [
                [self.s_bb, self.s_ba1, self.s_ba2],
                [np.conj(self.s_ba1), self.s_a1a1, self.s_a1a2],
                [np.conj(self.s_ba2), np.conj(self.s_a1a2), self.s_a2a2],
            ],
            dtype=complex,
        )

    def validate(self, tol: float = CATALOG_PSD_TOL) -> "SpectralCatalog":
        m = self.full_matrix()
        scale = max(1.0, float(np.max(np.abs(m))))
        if min(self.s_bb, self.s_a1a1, self.s_a2a2) < -tol * scale:
            raise InternalConsistencyError("catalog has a negative auto-PSD")
        if float(np.linalg.eigvalsh(m).min()) < -tol * scale:
            raise InternalConsistencyError(
                "catalog is not positive semidefinite; "
                "cross-spectrum sign conventions are inconsistent"
            )
        return self


@dataclass(frozen=True)
class WienerPair:
    """Complex post-processing filters (g1, g2).

    zero_correlation marks the degenerate r = 0 catalog (no reference
    correlation at all); callers should then use the analytic limit
    instead of dividing by |g2|.
    """

    g1: complex
    g2: complex
    zero_correlation: bool = False

    def __post_init__(self):
        g1, g2 = complex(self.g1), complex(self.g2)
        for g in (g1, g2):
            if not (math.isfinite(g.real) and math.isfinite(g.imag)):
                raise ValueError("filters must be finite")
        object.__setattr__(self, "g1", g1)
        object.__setattr__(self, "g2", g2)


def victor_input_spectrum(epr: EntanglementParams) -> SpectralMatrix:
    """Probe input spectrum: squeezed diag(e^{2rv}, e^{-2rv}) rotated by phi."""
    base = SpectralMatrix(
        math.exp(2.0 * epr.victor_squeeze), math.exp(-2.0 * epr.victor_squeeze)
    )
    if epr.victor_angle == 0.0:
        return base
    return propagate(rotation(epr.victor_angle), base)


def assemble_catalog(
    victor_out: SpectralMatrix,
    alice_out: SpectralMatrix,
    bob_out: SpectralMatrix,
    cross_sinh: float,
    theta_a: float,
    beta_a: float = 0.0,
    beta_b: float = 0.0,
) -> SpectralCatalog:
    """Build the measured-channel catalog from per-field spectra.

    cross_sinh is the surviving idler-reference correlation amplitude
    (sinh 2r for an undegraded pair; losses and dephasing shrink it).
    The correlation pattern is fixed: amplitude quadratures correlated,
    phase quadratures anti-correlated, which is what yields negative
    B-alpha cross-spectra proportional to sin/cos of the idler rotation.
    """
    phase = cmath.exp(2j * (float(beta_b) - float(beta_a)))
    return SpectralCatalog(
        s_bb=bob_out.s22,
        s_a1a1=0.5 * (victor_out.s11 + alice_out.s11),
        s_a2a2=0.5 * (victor_out.s22 + alice_out.s22),
        s_a1a2=0.5 * (victor_out.s12 - alice_out.s12),
        s_ba1=-(1.0 / SQRT2) * phase * math.sin(theta_a) * cross_sinh,
        s_ba2=-(1.0 / SQRT2) * phase * math.cos(theta_a) * cross_sinh,
    )


def bell_combine_catalog(
    plant_out: SpectralMatrix,
    alice_out: SpectralMatrix,
    bob_out: SpectralMatrix,
    epr: EntanglementParams,
    theta_a: float,
    beta_a: float = 0.0,
    beta_b: float = 0.0,
) -> SpectralCatalog:
    """Catalog for an undegraded entangled pair of strength epr.r."""
    if math.isinf(epr.r):
        raise ValueError("catalog assembly needs finite r; use the closed form "
                         "for the perfect-teleportation limit")
    cat = assemble_catalog(
        plant_out, alice_out, bob_out, math.sinh(2.0 * epr.r),
        theta_a, beta_a, beta_b,
    )
    return cat.validate()


def wiener_filters(c: SpectralCatalog, cond_limit: float = GRAM_COND_LIMIT) -> WienerPair:
    """Unconstrained two-channel least-squares filters.

    Solves the stationarity conditions of :func:`filtered_spectrum`,
    i.e. conj(Gram) (g1, g2)^T = (s_ba1, s_ba2)^T.  A catalog with no
    reference correlation at all (both cross terms exactly zero, the
    r = 0 case) is reported via the zero_correlation flag with zero
    filters rather than solved.
    """
    if c.s_ba1 == 0 and c.s_ba2 == 0:
        return WienerPair(0.0, 0.0, zero_correlation=True)
    gram = c.gram()
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > cond_limit:
        raise DegenerateCatalogError(
            f"Bell Gram matrix condition number {cond:g} exceeds {cond_limit:g}"
        )
    g = np.linalg.solve(gram.conj(), np.array([c.s_ba1, c.s_ba2]))
    return WienerPair(g[0], g[1])


def filtered_spectrum(c: SpectralCatalog, w: WienerPair) -> float:
    """Residual PSD of B - g1 alpha1 - g2 alpha2.

    Term-by-term quadratic form in the filters, including both
    g1 g2* cross terms.  Always real; negative beyond tolerance means the
    catalog violated positive semidefiniteness.
    """
    g1, g2 = w.g1, w.g2
    val = (
        c.s_bb
        + abs(g1) ** 2 * c.s_a1a1
        + abs(g2) ** 2 * c.s_a2a2
        - 2.0 * (np.conj(g1) * c.s_ba1).real
        - 2.0 * (np.conj(g2) * c.s_ba2).real
        + 2.0 * (g1 * np.conj(g2) * c.s_a1a2).real
    )
    scale = max(1.0, c.s_bb, abs(g1) ** 2 * c.s_a1a1, abs(g2) ** 2 * c.s_a2a2)
    if val < -RESIDUAL_TOL * scale:
        raise InternalConsistencyError(f"filtered spectrum is negative: {val:g}")
    return max(float(val), 0.0)


def strain_sensitivity(
    s_residual: float, w: WienerPair, kimble: float, h_sql_sq: float
) -> float:
    """Strain-referred noise PSD: h_SQL^2 / (2K) * S_residual / |g2|^2.

    g2 carries the signal; a vanishing g2 means the signal was filtered
    out along with the noise and no strain calibration exists.
    """
    if abs(w.g2) <= 1e-30:
        raise SignalLossError("signal gain |g2| is (numerically) zero")
    if kimble <= 0:
        raise ValueError("kimble must be > 0")
    return h_sql_sq / (2.0 * kimble) * s_residual / abs(w.g2) ** 2


def qtvr_closed_form(
    s_v2: float, kimble: float, r: float, h_sql_sq: float
) -> float:
    """Tuned teleportation-readout sensitivity, closed form.

    S_h = h_SQL^2/(2K) * (S_v2v2 + (1 + K^2)/cosh 2r): the teleported
    probe phase noise plus the entanglement-limited residual, the latter
    a conventional-shaped term suppressed by 1/cosh 2r.  Holds with the
    idler rotation tuned to arctan K.
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    if kimble <= 0:
        raise ValueError("kimble must be > 0")
    if math.isinf(r):
        entanglement_term = 0.0
    else:
        entanglement_term = (1.0 + kimble**2) / math.cosh(2.0 * r)
    return h_sql_sq / (2.0 * kimble) * (s_v2 + entanglement_term)


def _chi_moments(c: SpectralCatalog, kimble: float) -> tuple[float, complex]:
    """Second moments of the back-action-evading combination chi = K a1 + a2."""
    s_chichi = (
        kimble**2 * c.s_a1a1 + c.s_a2a2 + 2.0 * kimble * complex(c.s_a1a2).real
    )
    s_bchi = kimble * c.s_ba1 + c.s_ba2
    return float(s_chichi), complex(s_bchi)


def variational_filters(c: SpectralCatalog, kimble: float) -> WienerPair:
    """Readout-scheme filters: exact back-action cancellation + optimal gain.

    g1 = K g2 removes the radiation-pressure quadrature from the filtered
    output identically (the probe's amplitude noise enters alpha1 with
    weight 1 and alpha2 with weight -K).  Within that one-parameter
    family, g2 = S_BB S_Bchi / |S_Bchi|^2 is the gain minimizing the
    strain-referred residual, where chi = K alpha1 + alpha2.
    """
    if kimble < 0:
        raise ValueError("kimble must be >= 0")
    _, s_bchi = _chi_moments(c, kimble)
    if s_bchi == 0:
        return WienerPair(0.0, 0.0, zero_correlation=True)
    g2 = c.s_bb * s_bchi / abs(s_bchi) ** 2
    return WienerPair(kimble * g2, g2)


def variational_strain(
    c: SpectralCatalog, kimble: float, h_sql_sq: float
) -> tuple[float, WienerPair, float]:
    """Strain sensitivity of the teleportation-variational readout.

    Runs catalog -> filters -> filtered residual -> strain normalization.
    The Bell combination hands the signal to alpha2 with a 1/sqrt(2)
    weight, so the gain entering the strain formula is g2/sqrt(2); that
    single factor is applied here and nowhere else.

    In the r = 0 limit the optimal gain diverges while the sensitivity
    stays finite, so the analytic limit (reference channel ignored, two
    vacuum units from the teleportation) is evaluated instead of the
    filter division.

    Returns (s_h, filters, filtered residual).
    """
    w = variational_filters(c, kimble)
    s_chichi, s_bchi = _chi_moments(c, kimble)
    if w.zero_correlation:
        s_h = h_sql_sq / (2.0 * kimble) * 2.0 * s_chichi
        return s_h, w, filtered_spectrum(c, w)
    s_res = filtered_spectrum(c, w)
    signal_pair = WienerPair(w.g1 / SQRT2, w.g2 / SQRT2, w.zero_correlation)
    s_h = strain_sensitivity(s_res, signal_pair, kimble, h_sql_sq)
    return s_h, w, s_res


def qtvr_ideal_point(
    kimble: float,
    epr: EntanglementParams,
    h_sql_sq: float = 1.0,
    theta_a: float | None = None,
    beta_a: float = 0.0,
    beta_b: float = 0.0,
) -> float:
    """Lossless single-frequency sensitivity through the full pipeline.

    theta_a defaults to the tuned value arctan K.  For r = inf the
    teleportation is perfect and the closed-form first term is returned
    directly (the catalog entries would be infinite).
    """
    from .plant import alice_output, bob_output, victor_output_from_kimble

    if theta_a is None:
        theta_a = math.atan(kimble)
    v_in = victor_input_spectrum(epr)
    if math.isinf(epr.r):
        return qtvr_closed_form(v_in.s22, kimble, math.inf, h_sql_sq)
    cosh2r = math.cosh(2.0 * epr.r)
    v_out, _ = victor_output_from_kimble(kimble, v_in, beta_b=beta_b)
    a_out = alice_output(theta_a, beta_a, SpectralMatrix(cosh2r, cosh2r))
    b_out = bob_output(SpectralMatrix(cosh2r, cosh2r))
    cat = bell_combine_catalog(v_out, a_out, b_out, epr, theta_a, beta_a, beta_b)
    s_h, _, _ = variational_strain(cat, kimble, h_sql_sq)
    return s_h
