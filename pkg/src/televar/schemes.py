"""End-to-end sensitivity pipelines and scheme comparison.

Four configurations share one plant:

* Conventional: phase-quadrature readout with vacuum input,
  S_h = h_SQL^2 (K + 1/K) / 2, touching the SQL at K = 1;
* FDS: frequency-dependent squeezing modeled as an ideal arctan-K
  rotation of the squeeze ellipse plus lumped filter-cavity loss and
  length jitter, scaling the conventional curve by an effective noise
  factor;
* EPRS: the EPR-squeezing reference, the conventional curve divided by
  cosh 2r before its own loss/dephasing budget;
* QTVR: the teleportation-based variational readout evaluated through
  the full catalog -> filter -> strain pipeline per frequency.

Loss placement follows the usual lumped-station budget: injection losses
before the plant on every injected field, arm + signal-extraction losses
on the probe path, readout loss on every detected channel.  RMS phase
jitters enter as second-order Gaussian dephasing at their source.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import ComputationError, InternalConsistencyError
from .field_algebra import FrequencyGrid, SpectralMatrix
from .imperfections import (
    ImperfectionBudget,
    apply_dephasing,
    apply_loss,
    cross_dephasing_factor,
    joint_squeeze_dephasing_factor,
    length_to_phase_rms,
)
from .plant import (
    PlantParams,
    alice_output,
    bob_output,
    h_sql_sq,
    kimble_factor,
    kimble_from_theta,
    victor_output_from_kimble,
)
from .teleportation import (
    EntanglementParams,
    SpectralCatalog,
    assemble_catalog,
    qtvr_closed_form,
    variational_strain,
    victor_input_spectrum,
)


class Scheme(str, Enum):
    CONVENTIONAL = "Conventional"
    FDS = "FDS"
    EPRS = "EPRS"
    QTVR = "QTVR"


@dataclass(frozen=True)
class NoiseCurve:
    """Strain PSD over a frequency grid, plus the SQL-relative curve.

    QTVR curves also carry the ideal-limit term split: the teleported
    probe noise and the entanglement-limited residual.  Their sum equals
    s_h only for an ideal budget.
    """

    grid: FrequencyGrid
    s_h: np.ndarray
    s_h_rel_sql: np.ndarray
    term_victor: Optional[np.ndarray] = None
    term_entanglement: Optional[np.ndarray] = None

    def __post_init__(self):
        n = len(self.grid)
        for name in ("s_h", "s_h_rel_sql", "term_victor", "term_entanglement"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.asarray(arr, dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have one value per grid point")
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise ValueError(f"{name} must be finite and positive")
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class SchemeResult:
    scheme: Scheme
    curve: NoiseCurve
    metadata: dict


@dataclass(frozen=True)
class ComparisonReport:
    """Pointwise ratios, sub-SQL bands and a human-readable verdict table."""

    ratios: dict
    sql_bands: dict
    verdicts: tuple

    def table(self) -> str:
        return "\n".join(self.verdicts)


def _plant_arrays(p: Optional[PlantParams], grid: FrequencyGrid, normalized: bool):
    """Per-point Kimble factor and squared SQL.

    Normalized mode uses the dimensionless convention Theta = gamma^3 = 1
    (so K = 1 exactly at Omega/gamma = 1) and reports S_h in units of
    h_SQL^2; the plant constants are not needed.
    """
    om = grid.omegas
    if normalized:
        kim = np.array([kimble_from_theta(1.0, 1.0, w) for w in om])
        h2 = np.ones_like(om)
    else:
        if p is None:
            raise ValueError("absolute-units run requires plant parameters")
        kim = np.array([kimble_factor(p, w) for w in om])
        h2 = np.array([h_sql_sq(p, w) for w in om])
    return kim, h2


def _wavelength_for(p: Optional[PlantParams], wavelength: Optional[float],
                    budget: ImperfectionBudget, need_fc: bool) -> Optional[float]:
    needed = budget.sec_length_rms > 0 or (need_fc and budget.fc_length_rms > 0)
    if not needed:
        return None
    if wavelength is not None:
        return float(wavelength)
    if p is not None:
        return p.carrier_wavelength
    raise ValueError(
        "length RMS entries need the carrier wavelength; pass plant parameters "
        "or an explicit wavelength"
    )


def _signal_efficiency(budget: ImperfectionBudget, sigma_sec: float) -> float:
    """Power efficiency of the GW signal from plant to calibrated output.

    Losses after signal injection (arm, SEC, readout) attenuate it, and
    jitter of the probe path and readout basis decoheres it against the
    static filters by E[cos]^2 per source.  Injection loss acts before
    the signal exists and does not enter.
    """
    eta = (1.0 - budget.arm_round_trip_loss) * (1.0 - budget.sec_loss) \
        * (1.0 - budget.readout_loss)
    eta *= cross_dephasing_factor(sigma_sec) ** 2
    eta *= cross_dephasing_factor(budget.lo_rms) ** 2
    return eta


def _catalog_readout_loss(cat: SpectralCatalog, eta: float) -> SpectralCatalog:
    """Detection efficiency on each measured channel, independent vacua."""
    if eta == 1.0:
        return cat
    add = 1.0 - eta
    return SpectralCatalog(
        s_bb=eta * cat.s_bb + add,
        s_a1a1=eta * cat.s_a1a1 + add,
        s_a2a2=eta * cat.s_a2a2 + add,
        s_a1a2=eta * cat.s_a1a2,
        s_ba1=eta * cat.s_ba1,
        s_ba2=eta * cat.s_ba2,
    )


def _catalog_lo_dephasing(cat: SpectralCatalog, rms: float) -> SpectralCatalog:
    """Local-oscillator jitter of both homodyne bases.

    The Bell pair (alpha1, alpha2) mixes at second order like any
    quadrature pair; every B-alpha cross-spectrum shrinks by E[cos] per
    independently jittering detector.  The reference marginal is
    isotropic, so its own auto-PSD is untouched.
    """
    if rms == 0.0:
        return cat
    w = rms * rms
    fac = cross_dephasing_factor(rms) ** 2
    return SpectralCatalog(
        s_bb=cat.s_bb,
        s_a1a1=(1.0 - w) * cat.s_a1a1 + w * cat.s_a2a2,
        s_a2a2=(1.0 - w) * cat.s_a2a2 + w * cat.s_a1a1,
        s_a1a2=(1.0 - w) * cat.s_a1a2 - w * np.conj(cat.s_a1a2),
        s_ba1=fac * cat.s_ba1,
        s_ba2=fac * cat.s_ba2,
    )


def qtvr_budget_catalog(
    kimble: float,
    epr: EntanglementParams,
    budget: ImperfectionBudget,
    sigma_sec: float = 0.0,
    theta_a: Optional[float] = None,
) -> tuple[SpectralCatalog, float]:
    """Measured-channel catalog of the teleportation readout under a budget.

    Returns the catalog and the tuned (or supplied) idler rotation.
    """
    if theta_a is None:
        theta_a = math.atan(kimble)
    eta_inj = 1.0 - budget.injection_loss
    eta_ifo = (1.0 - budget.arm_round_trip_loss) * (1.0 - budget.sec_loss)
    eta_ro = 1.0 - budget.readout_loss

    v_in = victor_input_spectrum(epr)
    v_in = apply_dephasing(v_in, budget.squeezer_rms)
    v_in = apply_loss(v_in, eta_inj)
    v_out, _ = victor_output_from_kimble(kimble, v_in)
    v_out = apply_dephasing(v_out, sigma_sec)
    v_out = apply_loss(v_out, eta_ifo)

    cosh2r = math.cosh(2.0 * epr.r)
    pair_marginal = apply_loss(SpectralMatrix(cosh2r, cosh2r), eta_inj)
    a_out = alice_output(theta_a, 0.0, pair_marginal)
    b_out = bob_output(pair_marginal)
    cross = (
        math.sinh(2.0 * epr.r)
        * joint_squeeze_dephasing_factor(budget.squeezer_rms)
        * eta_inj
    )

    cat = assemble_catalog(v_out, a_out, b_out, cross, theta_a)
    cat = _catalog_readout_loss(cat, eta_ro)
    cat = _catalog_lo_dephasing(cat, budget.lo_rms)
    return cat, theta_a


def qtvr_budget_point(
    kimble: float,
    h2: float,
    epr: EntanglementParams,
    budget: ImperfectionBudget,
    sigma_sec: float = 0.0,
    theta_a: Optional[float] = None,
) -> float:
    """Single-frequency QTVR sensitivity including the full budget."""
    if math.isinf(epr.r):
        if not budget.is_ideal():
            raise ValueError(
                "the perfect-teleportation limit is only defined for an "
                "ideal budget"
            )
        return qtvr_closed_form(victor_input_spectrum(epr).s22, kimble,
                                math.inf, h2)
    cat, _ = qtvr_budget_catalog(kimble, epr, budget, sigma_sec, theta_a)
    s_h, _, _ = variational_strain(cat, kimble, h2)
    return s_h / _signal_efficiency(budget, sigma_sec)


def _effective_squeeze_factor(
    anti: float,
    squeezed: float,
    budget: ImperfectionBudget,
    sigma_sec: float,
    fc: bool,
    sigma_fc: float,
) -> float:
    """Degraded squeezed-quadrature PSD of an effective noise ellipse.

    The ellipse diag(anti, squeezed) passes source dephasing, the lumped
    path losses, path-length dephasing and readout, in that order; the
    surviving squeezed-entry multiplies the conventional curve.
    """
    ell = SpectralMatrix(anti, squeezed)
    ell = apply_dephasing(ell, budget.squeezer_rms)
    eta_path = (1.0 - budget.injection_loss) \
        * (1.0 - budget.arm_round_trip_loss) * (1.0 - budget.sec_loss)
    if fc:
        ell = apply_loss(ell, 1.0 - budget.fc_round_trip_loss)
        ell = apply_dephasing(ell, sigma_fc)
    ell = apply_loss(ell, eta_path)
    ell = apply_dephasing(ell, sigma_sec)
    ell = apply_loss(ell, 1.0 - budget.readout_loss)
    ell = apply_dephasing(ell, budget.lo_rms)
    return ell.s22


def conventional_curve(
    p: Optional[PlantParams],
    grid: FrequencyGrid,
    normalized: bool = False,
) -> SchemeResult:
    """Unsqueezed tuned interferometer: S_h = h_SQL^2 (1/K + K) / 2."""
    kim, h2 = _plant_arrays(p, grid, normalized)
    rel = 0.5 * (1.0 / kim + kim)
    curve = NoiseCurve(grid, rel * h2, rel)
    return SchemeResult(Scheme.CONVENTIONAL, curve,
                        {"scheme": Scheme.CONVENTIONAL.value,
                         "normalized": normalized})


def _budget_metadata(scheme: Scheme, r: float, budget: ImperfectionBudget,
                     normalized: bool, **extra) -> dict:
    md = {"scheme": scheme.value, "r": float(r), "normalized": normalized,
          "budget": asdict(budget)}
    md.update(extra)
    return md


def eprs_reference_curve(
    p: Optional[PlantParams],
    r: float,
    grid: FrequencyGrid,
    budget: ImperfectionBudget,
    normalized: bool = False,
    wavelength: Optional[float] = None,
) -> SchemeResult:
    """EPR-squeezing reference: conventional / cosh 2r plus the budget.

    The conditional ellipse of the entangled readout has squeezed noise
    1/cosh 2r and anti-squeezed noise cosh 2r (pure state), which is what
    loss and dephasing degrade.
    """
    if not (math.isfinite(r) and r >= 0):
        raise ValueError("r must be finite and >= 0")
    kim, h2 = _plant_arrays(p, grid, normalized)
    lam = _wavelength_for(p, wavelength, budget, need_fc=False)
    sigma_sec = length_to_phase_rms(budget.sec_length_rms, lam) if lam else 0.0
    cosh2r = math.cosh(2.0 * r)
    v_eff = _effective_squeeze_factor(cosh2r, 1.0 / cosh2r, budget,
                                      sigma_sec, fc=False, sigma_fc=0.0)
    rel = 0.5 * (1.0 / kim + kim) * v_eff / _signal_efficiency(budget, sigma_sec)
    curve = NoiseCurve(grid, rel * h2, rel)
    return SchemeResult(Scheme.EPRS, curve,
                        _budget_metadata(Scheme.EPRS, r, budget, normalized))


def fds_baseline_curve(
    p: Optional[PlantParams],
    r: float,
    grid: FrequencyGrid,
    budget: ImperfectionBudget,
    normalized: bool = False,
    wavelength: Optional[float] = None,
) -> SchemeResult:
    """Baseline frequency-dependent squeezing with lumped cavity defects.

    An ideal arctan-K rotation keeps the e^{-2r} quadrature aligned with
    the readout; the filter cavity contributes its round-trip loss and
    length jitter on top of the common budget.
    """
    if not (math.isfinite(r) and r >= 0):
        raise ValueError("r must be finite and >= 0")
    kim, h2 = _plant_arrays(p, grid, normalized)
    lam = _wavelength_for(p, wavelength, budget, need_fc=True)
    sigma_sec = length_to_phase_rms(budget.sec_length_rms, lam) if lam else 0.0
    sigma_fc = length_to_phase_rms(budget.fc_length_rms, lam) if lam else 0.0
    v_eff = _effective_squeeze_factor(math.exp(2.0 * r), math.exp(-2.0 * r),
                                      budget, sigma_sec, fc=True,
                                      sigma_fc=sigma_fc)
    rel = 0.5 * (1.0 / kim + kim) * v_eff / _signal_efficiency(budget, sigma_sec)
    curve = NoiseCurve(grid, rel * h2, rel)
    return SchemeResult(Scheme.FDS, curve,
                        _budget_metadata(Scheme.FDS, r, budget, normalized))


def qtvr_curve(
    p: Optional[PlantParams],
    epr: EntanglementParams,
    grid: FrequencyGrid,
    budget: ImperfectionBudget,
    normalized: bool = False,
    wavelength: Optional[float] = None,
    theta_fn: Optional[Callable[[float], float]] = None,
) -> SchemeResult:
    """Teleportation-based variational readout, full per-frequency pipeline.

    theta_fn maps the local Kimble factor to the idler rotation; the
    default is the tuned arctan K profile.  The curve carries the two
    ideal-limit noise terms as its component split.
    """
    kim, h2 = _plant_arrays(p, grid, normalized)
    lam = _wavelength_for(p, wavelength, budget, need_fc=False)
    sigma_sec = length_to_phase_rms(budget.sec_length_rms, lam) if lam else 0.0
    s_v2 = victor_input_spectrum(epr).s22

    s_h = np.empty_like(h2)
    t_vic = np.empty_like(h2)
    t_ent = None if math.isinf(epr.r) else np.empty_like(h2)
    for i, (k, hh) in enumerate(zip(kim, h2)):
        theta_a = None if theta_fn is None else theta_fn(k)
        try:
            s_h[i] = qtvr_budget_point(k, hh, epr, budget, sigma_sec, theta_a)
        except Exception as exc:
            raise ComputationError(Scheme.QTVR.value, str(exc)) from exc
        t_vic[i] = hh / (2.0 * k) * s_v2
        if t_ent is not None:
            t_ent[i] = hh / (2.0 * k) * (1.0 + k * k) / math.cosh(2.0 * epr.r)
    curve = NoiseCurve(grid, s_h, s_h / h2, term_victor=t_vic,
                       term_entanglement=t_ent)
    md = _budget_metadata(Scheme.QTVR, epr.r, budget, normalized,
                          victor_squeeze=epr.victor_squeeze,
                          victor_angle=epr.victor_angle)
    return SchemeResult(Scheme.QTVR, curve, md)


def _same_grid(results) -> FrequencyGrid:
    grid = results[0].curve.grid
    for res in results[1:]:
        if len(res.curve.grid) != len(grid) or not np.array_equal(
            res.curve.grid.omegas, grid.omegas
        ):
            raise ValueError("scheme results are not on a common grid")
    return grid


def _sub_sql_bands(grid: FrequencyGrid, rel: np.ndarray):
    bands = []
    below = rel < 1.0
    start = None
    for i, b in enumerate(below):
        if b and start is None:
            start = i
        elif not b and start is not None:
            bands.append((float(grid.omegas[start]), float(grid.omegas[i - 1])))
            start = None
    if start is not None:
        bands.append((float(grid.omegas[start]), float(grid.omegas[-1])))
    return bands


def compare(results: list[SchemeResult]) -> ComparisonReport:
    """Pointwise comparison of scheme results on a common grid.

    When an EPRS and a QTVR result with identical entanglement and budget
    are both present, the EPRS curve must lower-bound the QTVR curve at
    every point; a violation is an internal-consistency failure of the
    budget models, not a user error.
    """
    if not results:
        raise ValueError("nothing to compare")
    grid = _same_grid(results)
    by_scheme = {res.scheme.value: res for res in results}

    ratios = {}
    for i, a in enumerate(results):
        for b in results[i + 1:]:
            ratios[(a.scheme.value, b.scheme.value)] = (
                a.curve.s_h / b.curve.s_h
            )

    sql_bands = {
        res.scheme.value: _sub_sql_bands(grid, res.curve.s_h_rel_sql)
        for res in results
    }

    verdicts = []
    for res in results:
        bands = sql_bands[res.scheme.value]
        best = float(np.min(res.curve.s_h_rel_sql))
        verdicts.append(
            f"{res.scheme.value}: min S_h/h_SQL^2 = {best:.4g}, "
            f"{len(bands)} sub-SQL band(s)"
        )
    for (a, b), ratio in ratios.items():
        verdicts.append(
            f"{a}/{b}: ratio in [{float(np.min(ratio)):.4g}, "
            f"{float(np.max(ratio)):.4g}]"
        )

    eprs, qtvr = by_scheme.get(Scheme.EPRS.value), by_scheme.get(Scheme.QTVR.value)
    if eprs is not None and qtvr is not None:
        same = (
            eprs.metadata.get("r") == qtvr.metadata.get("r")
            and eprs.metadata.get("budget") == qtvr.metadata.get("budget")
        )
        if same:
            excess = eprs.curve.s_h / qtvr.curve.s_h
            if float(np.max(excess)) > 1.0 + 1e-12:
                raise InternalConsistencyError(
                    "EPRS exceeds QTVR despite equal entanglement and budget"
                )
            verdicts.append("EPRS lower-bounds QTVR at every grid point")

    return ComparisonReport(ratios, sql_bands, tuple(verdicts))
