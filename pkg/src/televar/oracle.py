"""Brute-force Gaussian verifier for the readout chain.

Everything the fast path computes per frequency can be recomputed from the
full 6x6 second-moment matrix of the three sideband fields
(v1, v2, a1, a2, b1, b2) plus a complex signal-coefficient row.  This
module does exactly that, slowly and with no shared algebra beyond numpy:

* the entangled pair enters with cosh 2r marginals and the fixed
  correlation pattern <a1 b1> = +sinh 2r, <a2 b2> = -sinh 2r;
* the plant is a block transform (ponderomotive / rotation / identity);
* the Bell map projects onto the three measured channels;
* filters are evaluated as plain quadratic forms, and optionally found by
  derivative-free coordinate refinement instead of a linear solve.

Intended for the test suite; orders of magnitude slower than the main path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SearchFailureError
from .teleportation import (
    SQRT2,
    EntanglementParams,
    SpectralCatalog,
    victor_input_spectrum,
)

UNCERTAINTY_TOL = 1e-9

# Bell projection onto (B, alpha1, alpha2).
BELL_MAP = np.array(
    [
        [0, 0, 0, 0, 0, 1],
        [1 / SQRT2, 0, -1 / SQRT2, 0, 0, 0],
        [0, 1 / SQRT2, 0, 1 / SQRT2, 0, 0],
    ],
    dtype=float,
)


def symplectic_form() -> np.ndarray:
    """Standard 6x6 symplectic form, block-diagonal [[0, 1], [-1, 0]]."""
    j = np.array([[0.0, 1.0], [-1.0, 0.0]])
    out = np.zeros((6, 6))
    for k in range(3):
        out[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = j
    return out


@dataclass
class GaussianState:
    """6x6 Hermitian spectral matrix plus complex signal coefficients.

    cov is real symmetric whenever no propagation phases are in play; the
    complex form accommodates nonzero beta parameters.
    """

    cov: np.ndarray
    signal_row: np.ndarray

    def __post_init__(self):
        cov = np.asarray(self.cov, dtype=complex)
        row = np.asarray(self.signal_row, dtype=complex)
        if cov.shape != (6, 6) or row.shape != (6,):
            raise ValueError("need a 6x6 matrix and a 6-vector")
        if np.max(np.abs(cov - cov.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(cov))):
            raise ValueError("covariance must be Hermitian")
        self.cov = cov
        self.signal_row = row

    def check_uncertainty(self, tol: float = UNCERTAINTY_TOL) -> None:
        """cov + i Omega / 2 must be positive semidefinite."""
        m = self.cov + 0.5j * symplectic_form()
        lo = float(np.linalg.eigvalsh(m).min())
        if lo < -tol * max(1.0, float(np.max(np.abs(self.cov)))):
            raise ValueError(f"state violates the uncertainty relation: {lo:g}")


def build_initial_state(epr: EntanglementParams) -> GaussianState:
    """Probe vacuum/squeezed block plus the two-mode squeezed pair."""
    if math.isinf(epr.r):
        raise ValueError("the oracle needs a finite squeeze parameter")
    c2, s2 = math.cosh(2.0 * epr.r), math.sinh(2.0 * epr.r)
    cov = np.zeros((6, 6), dtype=complex)
    cov[:2, :2] = victor_input_spectrum(epr).matrix()
    cov[2:4, 2:4] = c2 * np.eye(2)
    cov[4:6, 4:6] = c2 * np.eye(2)
    cov[2, 4] = cov[4, 2] = s2
    cov[3, 5] = cov[5, 3] = -s2
    st = GaussianState(cov, np.zeros(6, dtype=complex))
    st.check_uncertainty()
    return st


def plant_block_matrix(
    kimble: float,
    theta_a: float,
    beta_b: float = 0.0,
    beta_a: float = 0.0,
) -> np.ndarray:
    """Block transform: ponderomotive on the probe, rotation on the idler,
    phase-only on the reference (identity for beta_b = 0)."""
    m = np.zeros((6, 6), dtype=complex)
    m[:2, :2] = np.exp(2j * beta_b) * np.array([[1.0, 0.0], [-kimble, 1.0]])
    ca, sa = math.cos(theta_a), math.sin(theta_a)
    m[2:4, 2:4] = np.exp(2j * beta_a) * np.array([[ca, -sa], [sa, ca]])
    m[4:6, 4:6] = np.exp(2j * beta_b) * np.eye(2)
    return m


def apply_plant(
    st: GaussianState,
    kimble: float,
    theta_a: float,
    beta_b: float = 0.0,
    beta_a: float = 0.0,
    beta_v: float = 0.0,
) -> GaussianState:
    """Push the state through the plant and inject the signal coefficient."""
    if kimble < 0:
        raise ValueError("kimble must be >= 0")
    m = plant_block_matrix(kimble, theta_a, beta_b, beta_a)
    row = m @ st.signal_row
    row[1] += math.sqrt(kimble) * np.exp(1j * beta_v)
    return GaussianState(m @ st.cov @ m.conj().T, row)


def measured_catalog(st: GaussianState) -> SpectralCatalog:
    """Catalog of the three measured channels, straight from the 6x6."""
    s3 = BELL_MAP @ st.cov @ BELL_MAP.T
    return SpectralCatalog(
        s_bb=s3[0, 0].real,
        s_a1a1=s3[1, 1].real,
        s_a2a2=s3[2, 2].real,
        s_a1a2=s3[1, 2],
        s_ba1=s3[0, 1],
        s_ba2=s3[0, 2],
    )


def measure_and_filter(
    st: GaussianState, g1: complex, g2: complex
) -> tuple[float, complex]:
    """Variance of B - g1 alpha1 - g2 alpha2 and the complex signal gain."""
    s3 = BELL_MAP @ st.cov @ BELL_MAP.T
    c = np.array([1.0, -g1, -g2], dtype=complex)
    residual = float((c @ s3 @ c.conj()).real)
    gain = complex(c @ (BELL_MAP @ st.signal_row))
    return residual, gain


def strain_from_measurement(
    residual: float, gain: complex, h_sql_sq: float = 1.0
) -> float:
    """Strain-referred PSD from a measured residual and signal gain.

    h_SQL^2 * residual / (2 |gain|^2): the factor 2 is the single-sided
    signal-power normalization matching the fast path's strain assembly.
    """
    if abs(gain) <= 1e-30:
        raise ZeroDivisionError("signal gain is zero")
    return h_sql_sq * residual / (2.0 * abs(gain) ** 2)


def _coordinate_refine(obj, x0, span0, levels, max_steps=200000):
    """Compass / pattern search: walk coordinate steps of the current span
    until nothing improves, then halve the span; ``levels`` halvings total.
    Successful steps double in length (so both distant optima and flat
    asymptotes are handled in logarithmically many moves), bounded by a
    generous travel radius."""
    x = np.asarray(x0, dtype=float).copy()
    best = obj(x)
    span = float(span0)
    bound = 1e12 * max(1.0, span, float(np.max(np.abs(x))))
    shrinks = 0
    steps = 0
    while shrinks < levels:
        improved = False
        for i in range(x.size):
            for direction in (span, -span):
                step = direction
                cand = x.copy()
                cand[i] += step
                val = obj(cand)
                if not val < best:
                    continue
                while val < best and abs(cand[i]) < bound:
                    x, best = cand, val
                    step *= 2.0
                    cand = x.copy()
                    cand[i] += step
                    val = obj(cand)
                    steps += 1
                    if steps > max_steps:
                        raise SearchFailureError(
                            "pattern search exceeded its step budget"
                        )
                improved = True
                break
        if not improved:
            span *= 0.5
            shrinks += 1
        steps += 1
        if steps > max_steps:
            raise SearchFailureError("pattern search exceeded its step budget")
    return x, best


def _analytic_seed(st, objective, back_action_evading, kimble, ndim):
    """Starting point taken from the analytic filters, when solvable."""
    from .errors import TelevarError
    from .teleportation import variational_filters, wiener_filters

    try:
        cat = measured_catalog(st)
        if objective == "residual":
            w = wiener_filters(cat)
        else:
            w = variational_filters(cat, kimble)
    except TelevarError:
        return None
    if ndim == 2:
        return np.array([w.g2.real, w.g2.imag])
    return np.array([w.g1.real, w.g1.imag, w.g2.real, w.g2.imag])


def grid_search_filters(
    st: GaussianState,
    resolution: int = 6,
    objective: str = "residual",
    kimble: float | None = None,
    h_sql_sq: float = 1.0,
    back_action_evading: bool = False,
):
    """Derivative-free filter search over complex (g1, g2).

    objective "residual" minimizes the filtered variance itself (the
    optimality witness for the analytic least-squares filters).
    objective "strain" minimizes the strain-referred PSD; with
    back_action_evading the search is restricted to the readout scheme's
    g1 = K g2 ray, which is where its strain optimum lives.  resolution
    counts span-halving refinement levels (>= 3).  Two starts are run
    (origin and a displaced cold start) and the better minimum kept.

    Returns (g1, g2, best objective value).
    """
    if resolution < 3:
        raise ValueError("resolution must be >= 3 refinement levels")
    if objective not in ("residual", "strain"):
        raise ValueError(f"unknown objective {objective!r}")
    if objective == "strain" and kimble is None:
        raise ValueError("strain objective needs the kimble factor")

    s3 = BELL_MAP @ st.cov @ BELL_MAP.T

    def residual_of(c):
        return float((c @ s3 @ c.conj()).real)

    if objective == "residual":
        def obj(x):
            c = np.array([1.0, -(x[0] + 1j * x[1]), -(x[2] + 1j * x[3])])
            return residual_of(c)
        ndim = 4
    elif back_action_evading:
        def obj(x):
            g2 = x[0] + 1j * x[1]
            if abs(g2) < 1e-12:
                return np.inf
            c = np.array([1.0, -kimble * g2, -g2])
            return h_sql_sq / (2.0 * kimble) * 2.0 * residual_of(c) / abs(g2) ** 2
        ndim = 2
    else:
        def obj(x):
            g2 = x[2] + 1j * x[3]
            if abs(g2) < 1e-12:
                return np.inf
            c = np.array([1.0, -(x[0] + 1j * x[1]), -g2])
            return h_sql_sq / (2.0 * kimble) * 2.0 * residual_of(c) / abs(g2) ** 2
        ndim = 4

    scale = max(1.0, math.sqrt(abs(s3[0, 0].real)))
    starts = [np.zeros(ndim), np.full(ndim, -0.5 * scale)]
    starts.append(_analytic_seed(st, objective, back_action_evading, kimble, ndim))
    results = []
    for x0 in starts:
        if x0 is None:
            continue
        results.append(_coordinate_refine(obj, x0, span0=scale,
                                          levels=resolution))
    x, best = min(results, key=lambda t: t[1])
    if objective == "strain" and back_action_evading:
        g2 = x[0] + 1j * x[1]
        return kimble * g2, g2, best
    return x[0] + 1j * x[1], x[2] + 1j * x[3], best
