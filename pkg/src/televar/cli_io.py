"""Configuration ingestion, scheme execution and result emission.

The run configuration is a flat ``key = value`` text file with ``#``
comments.  Unknown keys are rejected unless the run is lenient; every
parse or validation failure reports the key and line number.

Emission formats:

* ``csv``: header ``freq_hz,scheme,s_h,s_h_rel_sql,term_victor,
  term_entanglement`` (term columns empty for non-QTVR rows);
* ``json``: results plus a field-for-field echo of the configuration and
  the tool version;
* ``plotdata``: one two-column block per scheme, blank-line separated.

Numbers are written with 17 significant digits so parsing them back
reproduces the in-memory doubles exactly.  In a normalized run the
frequency column holds Omega/gamma and s_h is S_h/h_SQL^2.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from typing import Optional

from scipy.constants import c as SPEED_OF_LIGHT

from . import __version__
from .errors import ConfigError, ComputationError, TelevarError
from .field_algebra import FrequencyGrid
from .imperfections import ImperfectionBudget, db_to_r
from .plant import PlantParams
from .schemes import (
    Scheme,
    SchemeResult,
    conventional_curve,
    eprs_reference_curve,
    fds_baseline_curve,
    qtvr_curve,
)
from .teleportation import EntanglementParams

_REQUIRED_KEYS = ("normalized", "fmin", "fmax", "points_per_decade", "schemes")

_PLANT_KEYS = (
    "mirror_mass_kg",
    "arm_length_m",
    "circulating_power_w",
    "carrier_omega_rad_per_s",
    "half_bandwidth_rad_per_s",
)

_OPTIONAL_FLOAT_DEFAULTS = {
    "squeeze_db": 0.0,
    "victor_squeeze_db": 0.0,
    "victor_angle_rad": 0.0,
    "injection_loss": 0.0,
    "arm_round_trip_loss": 0.0,
    "sec_loss": 0.0,
    "readout_loss": 0.0,
    "fc_round_trip_loss": 0.0,
    "squeezer_rms_rad": 0.0,
    "lo_rms_rad": 0.0,
    "sec_length_rms_m": 0.0,
    "fc_length_rms_m": 0.0,
    "detuning_hz": 0.0,
}

_KNOWN_KEYS = (
    set(_REQUIRED_KEYS) | set(_PLANT_KEYS) | set(_OPTIONAL_FLOAT_DEFAULTS)
)

_SCHEME_LOOKUP = {s.value.lower(): s for s in Scheme}

FORMATS = ("csv", "json", "plotdata")


@dataclass(frozen=True)
class RunConfig:
    normalized: bool
    fmin: float
    fmax: float
    points_per_decade: int
    schemes: tuple
    entanglement: EntanglementParams
    budget: ImperfectionBudget
    plant: Optional[PlantParams] = None
    carrier_omega: Optional[float] = None

    def __post_init__(self):
        if not (self.fmin > 0 and self.fmin < self.fmax):
            raise ValueError("need 0 < fmin < fmax")
        if self.points_per_decade < 1:
            raise ValueError("points_per_decade must be >= 1")
        if not self.schemes:
            raise ValueError("at least one scheme must be selected")

    @property
    def wavelength(self) -> Optional[float]:
        omega = self.carrier_omega
        if omega is None and self.plant is not None:
            omega = self.plant.carrier_omega
        if omega is None:
            return None
        return 2.0 * math.pi * SPEED_OF_LIGHT / omega


def _parse_lines(text: str):
    """Yield (line_number, key, raw_value) for each assignment line."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"empty key or value in {raw.strip()!r}", lineno)
        yield lineno, key, value


def _parse_bool(value: str, key: str, lineno: int) -> bool:
    low = value.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {value!r}", lineno)


def _parse_float(value: str, key: str, lineno: int) -> float:
    try:
        out = float(value)
    except ValueError:
        raise ConfigError(f"{key}: unparsable number {value!r}", lineno) from None
    if math.isnan(out):
        raise ConfigError(f"{key}: NaN is not a valid value", lineno)
    return out


def parse_schemes(value: str, lineno: int = 0) -> tuple:
    out = []
    for name in value.split(","):
        name = name.strip().lower()
        if not name:
            continue
        if name not in _SCHEME_LOOKUP:
            raise ConfigError(
                f"unknown scheme {name!r} (choose from "
                f"{', '.join(s.value for s in Scheme)})", lineno or None,
            )
        scheme = _SCHEME_LOOKUP[name]
        if scheme not in out:
            out.append(scheme)
    if not out:
        raise ConfigError("schemes: at least one scheme required", lineno or None)
    return tuple(out)


def load_config(path: str, lenient: bool = False) -> RunConfig:
    """Parse and fully validate a run configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc

    raw = {}
    lines = {}
    for lineno, key, value in _parse_lines(text):
        if key not in _KNOWN_KEYS:
            if lenient:
                print(f"warning: ignoring unknown key {key!r} "
                      f"(line {lineno})", file=sys.stderr)
                continue
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        raw[key] = value
        lines[key] = lineno

    for key in _REQUIRED_KEYS:
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")

    normalized = _parse_bool(raw["normalized"], "normalized", lines["normalized"])
    fmin = _parse_float(raw["fmin"], "fmin", lines["fmin"])
    fmax = _parse_float(raw["fmax"], "fmax", lines["fmax"])
    ppd_f = _parse_float(raw["points_per_decade"], "points_per_decade",
                         lines["points_per_decade"])
    if ppd_f != int(ppd_f):
        raise ConfigError("points_per_decade must be an integer",
                          lines["points_per_decade"])
    schemes = parse_schemes(raw["schemes"], lines["schemes"])

    values = {}
    for key, default in _OPTIONAL_FLOAT_DEFAULTS.items():
        values[key] = (
            _parse_float(raw[key], key, lines[key]) if key in raw else default
        )

    plant = None
    present_plant = [k for k in _PLANT_KEYS if k in raw]
    full_plant = len(present_plant) == len(_PLANT_KEYS)
    # carrier_omega alone is allowed in normalized mode (length-RMS conversion)
    stray = [k for k in present_plant if k != "carrier_omega_rad_per_s"]
    if not full_plant:
        if not normalized and not present_plant:
            raise ConfigError(
                "absolute-units run requires the plant keys "
                + ", ".join(_PLANT_KEYS)
            )
        if (not normalized) or stray:
            missing = sorted(set(_PLANT_KEYS) - set(present_plant))
            raise ConfigError(
                f"incomplete plant parameters; missing {', '.join(missing)}"
            )
    else:
        try:
            plant = PlantParams(
                mirror_mass=_parse_float(raw["mirror_mass_kg"],
                                         "mirror_mass_kg",
                                         lines["mirror_mass_kg"]),
                arm_length=_parse_float(raw["arm_length_m"], "arm_length_m",
                                        lines["arm_length_m"]),
                circulating_power=_parse_float(
                    raw["circulating_power_w"], "circulating_power_w",
                    lines["circulating_power_w"]),
                carrier_omega=_parse_float(
                    raw["carrier_omega_rad_per_s"],
                    "carrier_omega_rad_per_s",
                    lines["carrier_omega_rad_per_s"]),
                half_bandwidth=_parse_float(
                    raw["half_bandwidth_rad_per_s"],
                    "half_bandwidth_rad_per_s",
                    lines["half_bandwidth_rad_per_s"]),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    carrier_omega = None
    if "carrier_omega_rad_per_s" in raw:
        carrier_omega = _parse_float(raw["carrier_omega_rad_per_s"],
                                     "carrier_omega_rad_per_s",
                                     lines["carrier_omega_rad_per_s"])

    try:
        budget = ImperfectionBudget(
            injection_loss=values["injection_loss"],
            arm_round_trip_loss=values["arm_round_trip_loss"],
            sec_loss=values["sec_loss"],
            readout_loss=values["readout_loss"],
            fc_round_trip_loss=values["fc_round_trip_loss"],
            squeezer_rms=values["squeezer_rms_rad"],
            lo_rms=values["lo_rms_rad"],
            sec_length_rms=values["sec_length_rms_m"],
            fc_length_rms=values["fc_length_rms_m"],
            detuning=2.0 * math.pi * values["detuning_hz"],
            squeeze_db=values["squeeze_db"],
        )
        entanglement = EntanglementParams(
            r=db_to_r(values["squeeze_db"]),
            victor_squeeze=db_to_r(values["victor_squeeze_db"]),
            victor_angle=values["victor_angle_rad"],
        )
        cfg = RunConfig(
            normalized=normalized,
            fmin=fmin,
            fmax=fmax,
            points_per_decade=int(ppd_f),
            schemes=schemes,
            entanglement=entanglement,
            budget=budget,
            plant=plant,
            carrier_omega=carrier_omega,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    needs_lambda = budget.sec_length_rms > 0 or (
        Scheme.FDS in schemes and budget.fc_length_rms > 0
    )
    if needs_lambda and cfg.wavelength is None:
        raise ConfigError(
            "length RMS entries need carrier_omega_rad_per_s (or full plant "
            "parameters) to convert meters to radians"
        )
    return cfg


def config_to_dict(cfg: RunConfig) -> dict:
    """Flat, JSON-safe echo of a configuration."""
    out = {
        "normalized": cfg.normalized,
        "fmin": cfg.fmin,
        "fmax": cfg.fmax,
        "points_per_decade": cfg.points_per_decade,
        "schemes": [s.value for s in cfg.schemes],
        "squeeze_db": cfg.budget.squeeze_db,
        "victor_squeeze_r": cfg.entanglement.victor_squeeze,
        "victor_angle_rad": cfg.entanglement.victor_angle,
        "injection_loss": cfg.budget.injection_loss,
        "arm_round_trip_loss": cfg.budget.arm_round_trip_loss,
        "sec_loss": cfg.budget.sec_loss,
        "readout_loss": cfg.budget.readout_loss,
        "fc_round_trip_loss": cfg.budget.fc_round_trip_loss,
        "squeezer_rms_rad": cfg.budget.squeezer_rms,
        "lo_rms_rad": cfg.budget.lo_rms,
        "sec_length_rms_m": cfg.budget.sec_length_rms,
        "fc_length_rms_m": cfg.budget.fc_length_rms,
        "detuning_rad_per_s": cfg.budget.detuning,
        "carrier_omega_rad_per_s": cfg.carrier_omega,
        "plant": None,
    }
    if cfg.plant is not None:
        out["plant"] = {
            "mirror_mass_kg": cfg.plant.mirror_mass,
            "arm_length_m": cfg.plant.arm_length,
            "circulating_power_w": cfg.plant.circulating_power,
            "carrier_omega_rad_per_s": cfg.plant.carrier_omega,
            "half_bandwidth_rad_per_s": cfg.plant.half_bandwidth,
        }
    return out


def build_grid(cfg: RunConfig) -> FrequencyGrid:
    return FrequencyGrid.log_spaced(
        cfg.fmin, cfg.fmax, cfg.points_per_decade, angular=cfg.normalized
    )


def run(cfg: RunConfig) -> list:
    """Evaluate every selected scheme on the configured grid."""
    grid = build_grid(cfg)
    r = cfg.entanglement.r
    lam = cfg.wavelength
    results = []
    for scheme in cfg.schemes:
        try:
            if scheme is Scheme.CONVENTIONAL:
                res = conventional_curve(cfg.plant, grid, cfg.normalized)
            elif scheme is Scheme.EPRS:
                res = eprs_reference_curve(cfg.plant, r, grid, cfg.budget,
                                           cfg.normalized, wavelength=lam)
            elif scheme is Scheme.FDS:
                res = fds_baseline_curve(cfg.plant, r, grid, cfg.budget,
                                         cfg.normalized, wavelength=lam)
            else:
                res = qtvr_curve(cfg.plant, cfg.entanglement, grid, cfg.budget,
                                 cfg.normalized, wavelength=lam)
        except ComputationError:
            raise
        except TelevarError as exc:
            raise ComputationError(scheme.value, str(exc)) from exc
        except ValueError as exc:
            raise ComputationError(scheme.value, str(exc)) from exc
        results.append(res)
    return results


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _freq_column(res: SchemeResult) -> list:
    om = res.curve.grid.omegas
    if res.metadata.get("normalized"):
        return list(om)
    return [w / (2.0 * math.pi) for w in om]


def render_csv(results: list) -> str:
    lines = ["freq_hz,scheme,s_h,s_h_rel_sql,term_victor,term_entanglement"]
    for res in results:
        freqs = _freq_column(res)
        tv = res.curve.term_victor
        te = res.curve.term_entanglement
        for i, f in enumerate(freqs):
            cols = [
                _fmt(f),
                res.scheme.value,
                _fmt(res.curve.s_h[i]),
                _fmt(res.curve.s_h_rel_sql[i]),
                _fmt(tv[i]) if tv is not None else "",
                _fmt(te[i]) if te is not None else "",
            ]
            lines.append(",".join(cols))
    return "\n".join(lines) + "\n"


def render_json(results: list, cfg: RunConfig) -> str:
    payload = {
        "tool": "televar",
        "version": __version__,
        "config": config_to_dict(cfg),
        "results": [
            {
                "scheme": res.scheme.value,
                "freq_hz": _freq_column(res),
                "s_h": list(map(float, res.curve.s_h)),
                "s_h_rel_sql": list(map(float, res.curve.s_h_rel_sql)),
                "term_victor": (
                    list(map(float, res.curve.term_victor))
                    if res.curve.term_victor is not None else None
                ),
                "term_entanglement": (
                    list(map(float, res.curve.term_entanglement))
                    if res.curve.term_entanglement is not None else None
                ),
                "metadata": res.metadata,
            }
            for res in results
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def render_plotdata(results: list) -> str:
    blocks = []
    for res in results:
        lines = [f"# scheme: {res.scheme.value}", "# freq s_h"]
        for f, s in zip(_freq_column(res), res.curve.s_h):
            lines.append(f"{_fmt(f)} {_fmt(s)}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def render(results: list, fmt: str, cfg: RunConfig) -> str:
    if fmt == "csv":
        return render_csv(results)
    if fmt == "json":
        return render_json(results, cfg)
    if fmt == "plotdata":
        return render_plotdata(results)
    raise ValueError(f"unknown format {fmt!r} (choose from {', '.join(FORMATS)})")


def emit(results: list, fmt: str, path: str, cfg: RunConfig) -> None:
    """Render and write atomically (temp file + rename)."""
    payload = render(results, fmt, cfg)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".televar-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except OSError:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="televar",
        description="Quantum-noise strain sensitivity for teleportation-based "
                    "variational readout and its reference schemes.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="evaluate the schemes in a config file")
    runp.add_argument("config", help="path to a key = value configuration file")
    runp.add_argument("--out", default=None, help="output path (default stdout)")
    runp.add_argument("--format", default="csv", choices=FORMATS)
    runp.add_argument("--lenient", action="store_true",
                      help="warn on unknown config keys instead of failing")
    runp.add_argument("--schemes", default=None,
                      help="comma-separated override of the config's schemes")

    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config, lenient=args.lenient)
        if args.schemes:
            try:
                schemes = parse_schemes(args.schemes)
            except ConfigError:
                raise
            cfg = RunConfig(
                normalized=cfg.normalized, fmin=cfg.fmin, fmax=cfg.fmax,
                points_per_decade=cfg.points_per_decade, schemes=schemes,
                entanglement=cfg.entanglement, budget=cfg.budget,
                plant=cfg.plant, carrier_omega=cfg.carrier_omega,
            )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        results = run(cfg)
        if args.out is None:
            sys.stdout.write(render(results, args.format, cfg))
        else:
            emit(results, args.format, args.out, cfg)
    except (TelevarError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
