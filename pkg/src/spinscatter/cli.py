"""Command-line front end.

    spinscatter spectrum-numeric --omega 1.5 --omega-b 2 -o spec.csv
    spinscatter sweep --config sweep.toml --jobs 4

Config files are TOML: flat model keys (``omega``, ``omega_b``, ``delta``,
``gamma_pd``, ``omega_d``, ``gamma``) or a ``[cavity]`` table, plus optional
``[grid]``, ``[tau]``, ``[sweep]`` and ``[validate]`` tables. Flags override
file keys. Frequencies are in units of Gamma unless ``--absolute-units``.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .analytic import (analytic_g1, analytic_spectrum, classify_regime, effective_rates,
                       tls_limit_spectrum)
from .correlation import default_grid, numeric_g1, numeric_spectrum, peak_analysis, resolved_grid
from .errors import (ConsistencyError, GridTooCoarseError, InvalidParameterError, SingularParameterError,
                     SpinScatterError, UnsupportedConfigurationError)
from .liouville import build_liouvillian
from .model import CavityParams, ModelParams, cavity_reduction
from .validate import DEFAULT_BREAKDOWN_OMEGAS, Tolerances, breakdown_sweep, discrepancy_is_monotone

MODES = ("spectrum-analytic", "spectrum-numeric", "g1-analytic", "g1-numeric",
         "rates", "regime", "validate", "sweep")
MODEL_KEYS = ("gamma", "delta", "omega_b", "omega", "omega_r", "omega_l", "gamma_pd", "omega_d")
SWEEPABLE = ("gamma", "delta", "omega_b", "omega", "gamma_pd", "omega_d")
# Spin-only terms that the cavity reduction does not produce.
CAVITY_EXTRAS = ("omega_b", "gamma_pd")

EXIT_CONFIG, EXIT_PARAMS, EXIT_NUMERIC = 2, 3, 4


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


@dataclass(frozen=True)
class GridSpec:
    kind: str = "auto"          # auto | default | resolved | linear
    min: float | None = None
    max: float | None = None
    points: int = 2001

    def build(self, p: ModelParams) -> np.ndarray:
        if self.kind == "linear" or (self.min is not None and self.max is not None):
            if self.min is None or self.max is None or not self.max > self.min:
                raise ConfigError("linear grid needs min < max")
            return np.linspace(self.min, self.max, self.points)
        if self.kind == "default":
            return default_grid(p, self.points)
        return resolved_grid(p, self.points)


@dataclass(frozen=True)
class TauSpec:
    max: float | None = None
    points: int = 4001

    def build(self, p: ModelParams) -> np.ndarray:
        t_max = self.max
        if t_max is None:
            try:
                er = effective_rates(p)
                slow = er.gamma_total - 2 * abs(er.omega_e.imag)
                t_max = 10.0 / slow if slow > 0 else 100.0 / p.gamma
            except SpinScatterError:
                t_max = 100.0 / p.gamma
        return np.linspace(0.0, t_max, self.points)


@dataclass(frozen=True)
class RunConfig:
    mode: str
    params: ModelParams
    cavity: CavityParams | None = None
    grid: GridSpec = GridSpec()
    tau: TauSpec = TauSpec()
    sweep_param: str | None = None
    sweep_values: tuple = ()
    sweep_of: str = "spectrum-numeric"
    validate_omegas: tuple = DEFAULT_BREAKDOWN_OMEGAS
    tolerances: Tolerances = field(default_factory=Tolerances)
    output: str | None = None
    format: str | None = None
    absolute_units: bool = False
    jobs: int = 1

    @property
    def fmt(self) -> str:
        if self.format:
            return self.format
        if self.output and self.output.endswith(".json"):
            return "json"
        kind = self.sweep_of if self.mode == "sweep" else self.mode
        return "csv" if kind.startswith(("spectrum", "g1")) else "json"

    @property
    def units(self) -> str:
        return "absolute" if self.absolute_units else "Gamma"


# -- config parsing ------------------------------------------------------------

def _number(value, name, allow_complex=False):
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected a number")
    if isinstance(value, (int, float)):
        return float(value)
    if allow_complex:
        if isinstance(value, dict) and set(value) <= {"re", "im"}:
            return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"{name}: expected a number, got {value!r}")


def _float_list(text, name):
    if isinstance(text, (list, tuple)):
        return tuple(_number(v, name) for v in text)
    try:
        return tuple(float(v) for v in str(text).split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from None


def resolve_jobs(flag: int | None) -> int:
    if flag is not None:
        if flag < 1:
            raise ConfigError("--jobs must be >= 1")
        return flag
    env = os.environ.get("SPINSCATTER_JOBS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"SPINSCATTER_JOBS={env!r} is not an integer") from None
        if n < 1:
            raise ConfigError("SPINSCATTER_JOBS must be >= 1")
        return n
    return os.cpu_count() or 1


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="spinscatter",
                 description="Resonance fluorescence of a driven spin in a transverse field.")
    ap.add_argument("mode", nargs="?", choices=MODES, help="computation to run (or set 'mode' in the config)")
    ap.add_argument("-c", "--config", help="TOML config file")
    for key in MODEL_KEYS:
        if key in ("omega_r", "omega_l"):
            continue
        ap.add_argument("--" + key.replace("_", "-"), dest=key, type=float)
    ap.add_argument("--grid", dest="grid_kind", choices=("auto", "default", "resolved", "linear"))
    ap.add_argument("--grid-min", type=float)
    ap.add_argument("--grid-max", type=float)
    ap.add_argument("--grid-points", type=int)
    ap.add_argument("--tau-max", type=float)
    ap.add_argument("--tau-points", type=int)
    ap.add_argument("--sweep-param", choices=SWEEPABLE)
    ap.add_argument("--sweep-values", help="comma-separated values")
    ap.add_argument("--sweep-of", choices=MODES[:6], help="per-point computation of a sweep")
    ap.add_argument("--omegas", help="comma-separated drive strengths for validate")
    ap.add_argument("--rel-linf", type=float, help="validate pass threshold")
    ap.add_argument("-o", "--output", help="output file (default: stdout)")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--absolute-units", action="store_true", default=None)
    ap.add_argument("--jobs", type=int)
    return ap


def load_config(args: argparse.Namespace) -> RunConfig:
    doc = {}
    if args.config:
        try:
            with open(args.config, "rb") as fh:
                doc = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML: {exc}") from None

    known = set(MODEL_KEYS) | {"mode", "cavity", "grid", "tau", "sweep", "validate",
                               "output", "format", "absolute_units", "jobs"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    mode = args.mode or doc.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    absolute = bool(args.absolute_units if args.absolute_units is not None else doc.get("absolute_units", False))

    model = {k: doc[k] for k in MODEL_KEYS if k in doc}
    for k in MODEL_KEYS:
        if getattr(args, k, None) is not None:
            model[k] = getattr(args, k)
    params, cavity = _build_params(model, doc.get("cavity"), absolute)

    g = doc.get("grid", {})
    grid = GridSpec(
        kind=args.grid_kind or g.get("kind", "auto"),
        min=args.grid_min if args.grid_min is not None else g.get("min"),
        max=args.grid_max if args.grid_max is not None else g.get("max"),
        points=int(args.grid_points or g.get("points", 2001)),
    )
    t = doc.get("tau", {})
    tau = TauSpec(max=args.tau_max if args.tau_max is not None else t.get("max"),
                  points=int(args.tau_points or t.get("points", 4001)))
    if grid.points < 2 or tau.points < 2:
        raise ConfigError("grids need at least two points")

    s = doc.get("sweep", {})
    sweep_param = args.sweep_param or s.get("param")
    sweep_values = _float_list(args.sweep_values if args.sweep_values is not None else s.get("values", ()),
                               "sweep values")
    sweep_of = args.sweep_of or s.get("of", "spectrum-numeric")
    if mode == "sweep":
        if sweep_param not in SWEEPABLE:
            raise ConfigError(f"sweep param must be one of {SWEEPABLE}, got {sweep_param!r}")
        if sweep_of not in MODES[:6]:
            raise ConfigError(f"sweep 'of' must be one of {MODES[:6]}")
        if cavity is not None and sweep_param not in CAVITY_EXTRAS:
            raise ConfigError("with a [cavity] table only omega_b or gamma_pd can be swept")
        if sweep_param == "gamma" and not absolute:
            raise ConfigError("sweeping gamma requires --absolute-units")

    v = doc.get("validate", {})
    omegas = _float_list(args.omegas if args.omegas is not None else v.get("omegas", DEFAULT_BREAKDOWN_OMEGAS),
                         "validate omegas")
    rel_linf = args.rel_linf if args.rel_linf is not None else v.get("rel_linf", 0.05)

    fmt = args.format or doc.get("format")
    if fmt not in (None, "csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    return RunConfig(
        mode=mode, params=params, cavity=cavity, grid=grid, tau=tau,
        sweep_param=sweep_param, sweep_values=sweep_values, sweep_of=sweep_of,
        validate_omegas=omegas, tolerances=Tolerances(rel_linf=float(rel_linf)),
        output=args.output or doc.get("output"), format=fmt, absolute_units=absolute,
        jobs=resolve_jobs(args.jobs if args.jobs is not None else doc.get("jobs")),
    )


def _build_params(model: dict, cavity: dict | None, absolute: bool):
    if cavity is not None:
        clash = set(model) - set(CAVITY_EXTRAS)
        if clash:
            raise ConfigError(f"give either model keys or a [cavity] table, not both: {sorted(clash)}")
        names = {f.name for f in fields(CavityParams)}
        extra = set(cavity) - names
        if extra:
            raise ConfigError(f"unknown cavity keys: {sorted(extra)}")
        try:
            cp = CavityParams(**{k: _number(val, k, allow_complex=k.startswith("alpha"))
                                 for k, val in cavity.items()})
        except TypeError as exc:
            raise ConfigError(f"cavity table: {exc}") from None
        p = cavity_reduction(cp)
        extras = {k: _number(model[k], k) for k in CAVITY_EXTRAS if k in model}
        if not absolute:
            # Reduced quantities are reported in units of the Purcell rate;
            # spin-only extras are already given in those units.
            p = p.normalized()
        return p.with_(**extras), cp

    vals = {k: _number(val, k, allow_complex=k in ("omega_r", "omega_l")) for k, val in model.items()}
    if "omega" in vals and ({"omega_r", "omega_l"} & set(vals)):
        raise ConfigError("give either omega or omega_r/omega_l")
    if not absolute and vals.get("gamma", 1.0) != 1.0:
        raise InvalidParameterError("gamma is the unit in Gamma units; pass --absolute-units to set it")
    omega = vals.pop("omega", None)
    p = ModelParams(**vals)
    return (p.with_(omega=omega) if omega is not None else p), None


# -- computations ---------------------------------------------------------------

def _peaks(s):
    try:
        return peak_analysis(s).to_list(), None
    except GridTooCoarseError as exc:
        return [], str(exc)


def _regime_name(p: ModelParams) -> str | None:
    try:
        return classify_regime(effective_rates(p)).value
    except (UnsupportedConfigurationError, InvalidParameterError):
        return None


def compute(mode: str, cfg: RunConfig, p: ModelParams) -> dict:
    """One computation; returns a record with the JSON report keys plus
    mode-specific ``data``."""
    rec = {"params": p.to_dict(), "metrics": {}, "peaks": [], "delta_lines": [],
           "regime": _regime_name(p)}
    if mode.startswith("spectrum"):
        nu = cfg.grid.build(p)
        if mode == "spectrum-numeric":
            s = numeric_spectrum(build_liouvillian(p), nu)
        elif p.omega_b == 0:
            s = tls_limit_spectrum(p, nu)
        else:
            s = analytic_spectrum(p, nu)
        rec["peaks"], note = _peaks(s)
        rec["delta_lines"] = [[pos, w] for pos, w in s.delta_lines]
        rec["metrics"] = {"continuous_weight": s.continuous_weight(), "total_weight": s.total_weight()}
        warnings = list(s.warnings) + ([note] if note else [])
        if warnings:
            rec["warnings"] = warnings
        rec["data"] = {"detuning": s.detuning, "S": s.values}
    elif mode.startswith("g1"):
        tau = cfg.tau.build(p)
        tr = numeric_g1(build_liouvillian(p), tau) if mode == "g1-numeric" else analytic_g1(p, tau)
        rec["metrics"] = {"g1_zero": float(tr.values[0].real)}
        if tr.warnings:
            rec["warnings"] = list(tr.warnings)
        rec["data"] = {"tau": tau, "g1": tr.values}
    elif mode == "rates":
        er = effective_rates(p)
        rec["regime"] = classify_regime(er).value
        rec["metrics"] = er.to_dict()
    elif mode == "regime":
        er = effective_rates(p)
        rec["regime"] = classify_regime(er).value
        rec["metrics"] = {"omega_e": {"re": er.omega_e.real, "im": er.omega_e.imag},
                          "gamma_total": er.gamma_total}
    else:
        raise ConfigError(f"mode {mode!r} is not a per-point computation")
    return rec


def run_validate(cfg: RunConfig) -> dict:
    grid = None if cfg.grid.kind == "auto" and cfg.grid.min is None else cfg.grid
    p = cfg.params
    reports = breakdown_sweep(cfg.validate_omegas, base=p,
                              grid=grid.build(p) if grid else None,
                              tolerances=cfg.tolerances, jobs=cfg.jobs)
    first = reports[0] if reports else None
    return {
        "params": p.to_dict(),
        "metrics": {
            "omegas": list(cfg.validate_omegas),
            "rel_linf": [r.metrics["rel_linf"] for r in reports],
            "rel_l2": [r.metrics["rel_l2"] for r in reports],
            "monotone_rel_linf": discrepancy_is_monotone(reports, "rel_linf"),
            "monotone_rel_l2": discrepancy_is_monotone(reports, "rel_l2", strict=False),
            "passed": [r.passed for r in reports],
        },
        "peaks": list(first.numeric_peaks) if first else [],
        "delta_lines": [list(d) for d in first.delta_lines] if first else [],
        "regime": _regime_name(p),
        "reports": [r.to_dict() for r in reports],
    }


def run_sweep(cfg: RunConfig) -> list[dict]:
    points = [cfg.params.with_(**{cfg.sweep_param: v}) for v in cfg.sweep_values]
    if cfg.jobs > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as ex:
            return list(ex.map(lambda q: compute(cfg.sweep_of, cfg, q), points))
    return [compute(cfg.sweep_of, cfg, q) for q in points]


# -- output ------------------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": obj.real.tolist(), "im": obj.imag.tolist()}
        return obj.tolist()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating, float)):
        return None if not math.isfinite(obj) else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _csv_rows(rec: dict, prefix: list[str]) -> list[str]:
    data = rec["data"]
    lead = "".join(v + "," for v in prefix)
    if "S" in data:
        return [lead + f"{_fmt(n)},{_fmt(s)}" for n, s in zip(data["detuning"], data["S"])]
    return [lead + f"{_fmt(t)},{_fmt(g.real)},{_fmt(g.imag)},{_fmt(abs(g))}"
            for t, g in zip(data["tau"], data["g1"])]


def render(cfg: RunConfig, result) -> str:
    buf = io.StringIO()
    if cfg.fmt == "json":
        body = result
        if cfg.mode == "sweep":
            body = {"params": cfg.params.to_dict(),
                    "sweep": {"param": cfg.sweep_param, "values": list(cfg.sweep_values), "of": cfg.sweep_of},
                    "points": result}
        body = dict(_jsonable(body))
        body["units"] = cfg.units
        json.dump(body, buf, indent=2, sort_keys=True, allow_nan=False)
        buf.write("\n")
        return buf.getvalue()

    kind = cfg.sweep_of if cfg.mode == "sweep" else cfg.mode
    if not kind.startswith(("spectrum", "g1")):
        raise ConfigError(f"csv output is only available for spectra and g1, not {kind!r}")
    buf.write(f"# units={cfg.units}\n")
    records = result if cfg.mode == "sweep" else [result]
    values = cfg.sweep_values if cfg.mode == "sweep" else [None]
    cols = "detuning,S" if kind.startswith("spectrum") else "tau,re_g1,im_g1,abs_g1"
    buf.write((cfg.sweep_param + "," if cfg.mode == "sweep" else "") + cols + "\n")
    for v, rec in zip(values, records):
        prefix = [] if v is None else [_fmt(v)]
        for row in _csv_rows(rec, prefix):
            buf.write(row + "\n")
        for pos, w in rec["delta_lines"]:
            buf.write("# delta," + "".join(p + "," for p in prefix) + f"{_fmt(pos)},{_fmt(w)}\n")
    return buf.getvalue()


def execute(cfg: RunConfig) -> str:
    if cfg.mode == "validate":
        result = run_validate(cfg)
    elif cfg.mode == "sweep":
        result = run_sweep(cfg)
    else:
        result = compute(cfg.mode, cfg, cfg.params)
    return render(cfg, result)


def _fail(code: int, exc: BaseException) -> int:
    msg = " ".join(str(exc).split())
    print(f"spinscatter: error code={code} type={type(exc).__name__} message={json.dumps(msg)}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        cfg = load_config(build_parser().parse_args(argv))
        text = execute(cfg)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc)
    except (InvalidParameterError, UnsupportedConfigurationError, SingularParameterError) as exc:
        return _fail(EXIT_PARAMS, exc)
    except (ConsistencyError, GridTooCoarseError, SpinScatterError, np.linalg.LinAlgError,
            FloatingPointError) as exc:
        return _fail(EXIT_NUMERIC, exc)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
