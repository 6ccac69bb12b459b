"""``sap`` command-line front end.

Usage::

    sap <command> --config job.json [--set key=value]... [--workers N] [--seed S] [--out DIR]

The config is a JSON object validated against ``CONFIG_SCHEMA`` before any
computation.  ``--set`` overrides use dotted keys (``pulse.omega_max=3``)
and JSON-parsed values; they are applied after the file is read and are
recorded in the manifest.

Exit codes: 0 success, 2 config/schema error, 3 physics validation error,
4 solver failure.  A failed run writes only ``manifest.json`` (with the
error) and no data files.
"""
from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__, _accel
from .analysis import (
    AXIS_UNITS,
    Boundary,
    ChirpComparison,
    FidelityMap,
    band_average,
    bandwidth_at_threshold,
    chirp_direction_comparison,
    detuning_grid,
    detuning_sweep,
    freq_shift_scan,
    params_on_axis,
    phase_average,
    rabi_error_scan,
    scaling_study,
    threshold_boundary,
)
from .dynamics import SolverOptions
from .errors import DomainError, SapError, SolverError, ValidationError
from .optimizer import Objective, OptimizationResult, optimize
from .pulse import DEFAULT_ATTENUATION, HshParams, build_sap, chirp_span
from .suture import SutureSeries, phi_numeric, phi_series, suture_fidelity

COMMANDS = (
    "sweep",
    "scaling",
    "optimize",
    "robustness-rabi",
    "robustness-shift",
    "chirp-compare",
    "suture",
    "phase-average",
    "boundary",
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PHYSICS = 3
EXIT_SOLVER = 4

_NUM = {"type": "number"}
_NUM_LIST = {"type": "array", "items": _NUM, "minItems": 1}
_RANGE = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "values": _NUM_LIST,
        "min": _NUM,
        "max": _NUM,
        "half_width": _NUM,
        "points": {"type": "integer", "minimum": 1},
        "per_omega": _NUM,
    },
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "seed": {"type": "integer", "minimum": 0},
        "workers": {"type": "integer", "minimum": 1},
        "threshold": _NUM,
        "pulse": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "omega_max": _NUM,
                "edge_shape_T": _NUM,
                "edge_rate_r": _NUM,
                "linear_rate_r1": _NUM,
                "edge_duration_t1": _NUM,
                "center_duration_t2": _NUM,
                "tau": _NUM,
                "n": {"type": "integer"},
                "attenuation": _NUM,
                "delta_f": _NUM,
                "same_chirp": {"type": "boolean"},
                "phases": {
                    "oneOf": [
                        {"enum": ["zero", "random"]},
                        _NUM_LIST,
                    ]
                },
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "delta": _RANGE,
                "axis": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["name"],
                    "properties": {
                        "name": {"enum": ["duration", "rabi"]},
                        **_RANGE["properties"],
                    },
                },
                "errors": _RANGE,
                "shifts": _RANGE,
                "bandwidths": _RANGE,
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rel_tol": _NUM,
                "abs_tol": _NUM,
                "max_step": _NUM,
                "method": {"enum": ["dopri", "rk4"]},
                "rk4_steps": {"type": "integer"},
                "backend": {"enum": list(_accel.BACKENDS)},
            },
        },
        "objective": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["suture_point", "band_average", "bandwidth_at_threshold",
                                  "phase_averaged_band"]},
                "band": _NUM,
                "threshold": _NUM,
                "phase_samples": {"type": "integer"},
                "phase_seed": {"type": "integer"},
                "per_omega": _NUM,
            },
        },
        "optimizer": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "bounds": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        k: {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
                        for k in ("edge_shape_T", "edge_rate_r", "linear_rate_r1")
                    },
                },
                "budget": {"type": "integer"},
                "coarse": {"enum": ["grid", "lhs"]},
                "coarse_points": {"type": "integer", "minimum": 2},
                "reoptimize": {"type": "boolean"},
                "cache_dir": {"type": "string"},
            },
        },
        "series": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"n_terms": {"type": "integer"}},
        },
        "phase_average": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "samples": {"type": "integer"},
                "delta": _NUM,
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"format": {"enum": ["csv", "json", "both"]}},
        },
    },
}

PROFILE_FIELDS = (
    "omega_max",
    "edge_shape_T",
    "edge_rate_r",
    "linear_rate_r1",
    "edge_duration_t1",
    "center_duration_t2",
)


class ConfigError(SapError):
    """Malformed config: bad JSON, schema violation, unknown key or missing block."""


# ---------------------------------------------------------------- serialization


def fmt(x) -> str:
    """17 significant digits; NaN and infinities become empty CSV cells."""
    x = float(x)
    if not math.isfinite(x):
        return ""
    return format(x, ".17g")


def _json_value(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or obj is True or obj is False:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return "null" if not math.isfinite(obj) else format(float(obj), ".17g")
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return _json_value(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json_value(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_json_value(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _json_value(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _json_value(obj, 2, 0) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if isinstance(v, (float, int, np.floating, np.integer)) and not isinstance(v, bool)
                    else v for v in r])
    return buf.getvalue()


def _unit(name: str) -> str:
    return f"{name} [{AXIS_UNITS.get(name, '1')}]"


def _map_csv(m: FidelityMap) -> str:
    if m.secondary_values is None:
        header = [_unit("delta"), "fidelity [1]"]
        rows = [(d, f) for d, f in zip(m.detuning_grid, m.values[0])]
    else:
        header = [_unit(m.secondary_name), _unit("delta"), "fidelity [1]"]
        rows = [(s, d, f) for s, row in zip(m.secondary_values, m.values)
                for d, f in zip(m.detuning_grid, row)]
    return _csv_text(header, rows)


def _result_json(obj) -> dict:
    if isinstance(obj, FidelityMap):
        return {"type": "FidelityMap", **obj.to_dict()}
    if isinstance(obj, OptimizationResult):
        return {"type": "OptimizationResult", **obj.to_dict()}
    if isinstance(obj, SutureSeries):
        return {
            "type": "SutureSeries",
            "a": obj.a,
            "b": obj.b,
            "t0": obj.t0,
            "phi_t0": obj.phi_t0,
            "terms": list(obj.terms),
            "partial_sums": list(obj.partial_sums),
            "t0_is_maximum": obj.t0_is_maximum,
            "crossings": list(obj.crossings),
        }
    if isinstance(obj, ChirpComparison):
        return {
            "type": "ChirpComparison",
            "summary": obj.summary(),
            "opposite": obj.opposite.to_dict(),
            "same": obj.same.to_dict(),
        }
    if isinstance(obj, Boundary):
        return {
            "type": "Boundary",
            "axis1_name": obj.axis1_name,
            "axis2_name": obj.axis2_name,
            "axis1_grid": list(obj.axis1_grid),
            "axis2_grid": list(obj.axis2_grid),
            "threshold": obj.threshold,
            "band_average": obj.grid.tolist(),
            "points": [{"axis1": a, "axis2": b} for a, b in obj.points],
        }
    if isinstance(obj, dict):
        return obj
    raise TypeError(f"cannot emit {type(obj).__name__}")


def _result_csv(obj) -> str:
    if isinstance(obj, FidelityMap):
        return _map_csv(obj)
    if isinstance(obj, OptimizationResult):
        names = ("edge_shape_T", "edge_rate_r", "linear_rate_r1")
        units = ("us", "rad/us", "rad/us")
        header = ["evaluation"] + [f"{n} [{u}]" for n, u in zip(names, units)] + ["objective"]
        rows = [[i] + [p[n] for n in names] + [v] for i, (p, v) in enumerate(obj.trace)]
        return _csv_text(header, rows)
    if isinstance(obj, SutureSeries):
        header = ["k", "term [rad]", "partial_sum [rad]"]
        rows = [[0, "", obj.partial_sums[0]]]
        rows += [[k + 1, t, s] for k, (t, s) in enumerate(zip(obj.terms, obj.partial_sums[1:]))]
        return _csv_text(header, rows)
    if isinstance(obj, ChirpComparison):
        header = [_unit("delta"), "fidelity_opposite [1]", "fidelity_same [1]"]
        rows = zip(obj.opposite.detuning_grid, obj.opposite.values[0], obj.same.values[0])
        return _csv_text(header, rows)
    if isinstance(obj, Boundary):
        unit2 = "rad/us"
        header = [f"{obj.axis2_name} [{unit2}]", _unit(obj.axis1_name)]
        rows = [(b if b is not None else "", a) for a, b in obj.points]
        return _csv_text(header, rows)
    if isinstance(obj, dict) and "csv" in obj:
        return obj["csv"]
    raise TypeError(f"cannot emit {type(obj).__name__} as csv")


def emit(obj, fmt_name: str, out_dir: str | Path, extra: dict | None = None) -> dict[str, Path]:
    """Write ``result.csv`` and/or ``result.json`` into ``out_dir``.

    Returns the written paths by file name.  ``extra`` is merged into the
    JSON object (used for companion data such as fits).
    """
    out = Path(out_dir)
    written = {}
    try:
        out.mkdir(parents=True, exist_ok=True)
        if fmt_name in ("csv", "both"):
            p = out / "result.csv"
            with open(p, "w", newline="\n", encoding="utf-8") as fh:
                fh.write(_result_csv(obj))
            written[p.name] = p
        if fmt_name in ("json", "both"):
            payload = _result_json(obj)
            if extra:
                payload = {**payload, **extra}
            p = out / "result.json"
            with open(p, "w", newline="\n", encoding="utf-8") as fh:
                fh.write(dumps(payload))
            written[p.name] = p
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc}") from exc
    return written


# ---------------------------------------------------------------- config


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(cfg: dict, overrides: list[str]) -> list[dict]:
    """Apply dotted ``key=value`` overrides in place; return a log of them."""
    log = []
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, raw = item.split("=", 1)
        parts = key.strip().split(".")
        if not all(parts):
            raise ConfigError(f"bad override key {key!r}")
        node = cfg
        for p in parts[:-1]:
            nxt = node.setdefault(p, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f"override {key!r} descends into a non-object")
            node = nxt
        value = _parse_value(raw)
        node[parts[-1]] = value
        log.append({"key": key, "value": value})
    return log


@dataclass
class RunConfig:
    """A validated job description (the parsed config after overrides)."""

    command: str
    data: dict
    seed: int = 0
    workers: int = 1
    overrides: list = field(default_factory=list)

    @classmethod
    def from_dict(cls, command: str, data: dict, overrides: list | None = None,
                  seed: int | None = None, workers: int | None = None) -> "RunConfig":
        if command not in COMMANDS:
            raise ConfigError(f"unknown command {command!r}")
        data = copy.deepcopy(data)
        log = apply_overrides(data, list(overrides or []))
        if seed is not None:
            data["seed"] = seed
        if workers is not None:
            data["workers"] = workers
        try:
            jsonschema.validate(data, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"config invalid at {where}: {exc.message}") from None
        if data.get("command", command) != command:
            raise ConfigError(f"config is for {data['command']!r}, not {command!r}")
        data["command"] = command
        return cls(command, data, int(data.get("seed", 0)), int(data.get("workers", 1)), log)

    def section(self, name: str) -> dict:
        return self.data.get(name, {})


def _require(block: dict, keys, where: str):
    missing = [k for k in keys if k not in block]
    if missing:
        raise ConfigError(f"{where} is missing {missing}")


def _profile(pulse: dict, required=PROFILE_FIELDS) -> HshParams:
    p = dict(pulse)
    if "tau" in p:
        if "center_duration_t2" in p:
            raise ConfigError("give either pulse.tau or pulse.center_duration_t2, not both")
        if "edge_duration_t1" not in p:
            raise ConfigError("pulse.tau needs pulse.edge_duration_t1")
        t2 = p["tau"] - 2.0 * p["edge_duration_t1"]
        if not t2 > 0:
            raise ValidationError(f"tau={p['tau']} leaves no linear segment for t1={p['edge_duration_t1']}")
        p["center_duration_t2"] = t2
    _require(p, required, "pulse")
    return HshParams(*(p[k] for k in PROFILE_FIELDS))


def _fixed(pulse: dict, supplied=()) -> dict:
    """Fixed optimizer fields; names in ``supplied`` come from a grid axis instead."""
    p = dict(pulse)
    if "tau" in p:
        _require(p, ["edge_duration_t1"], "pulse")
        t2 = p["tau"] - 2.0 * p["edge_duration_t1"]
        if not t2 > 0:
            raise ValidationError(f"tau={p['tau']} leaves no linear segment")
        p["center_duration_t2"] = t2
    names = [k for k in ("omega_max", "edge_duration_t1", "center_duration_t2") if k not in supplied]
    _require(p, names, "pulse")
    for k in names:
        if not (math.isfinite(p[k]) and p[k] > 0):
            raise ValidationError(f"pulse.{k} must be positive")
    return {k: float(p[k]) for k in names}


def _range(block: dict | None, default=None, name="grid") -> np.ndarray:
    if block is None:
        if default is None:
            raise ConfigError(f"{name} is required")
        return np.asarray(default, dtype=float)
    if "values" in block:
        return np.asarray(block["values"], dtype=float)
    if "min" in block and "max" in block:
        pts = block.get("points", 2)
        return np.linspace(block["min"], block["max"], pts)
    raise ConfigError(f"{name} needs 'values' or 'min'/'max'/'points'")


def _delta(cfg: RunConfig, band: float, omega: float) -> np.ndarray:
    block = cfg.section("grid").get("delta")
    if block is None or ("values" not in block and "min" not in block):
        block = block or {}
        half = block.get("half_width", 0.75 * band)
        return detuning_grid(half, block.get("points"), omega, block.get("per_omega", 8.0))
    return _range(block, name="grid.delta")


def _phases(pulse: dict, n: int, seed: int):
    ph = pulse.get("phases", "zero")
    if ph == "zero":
        return None
    if ph == "random":
        return int(seed)
    return [float(x) for x in ph]


def _solver(cfg: RunConfig) -> tuple[SolverOptions, str | None]:
    s = dict(cfg.section("solver"))
    backend = s.pop("backend", None)
    try:
        return SolverOptions(**s), backend
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None


def _objective(cfg: RunConfig, default_band=None) -> Objective:
    o = dict(cfg.section("objective"))
    if "band" not in o and default_band is not None:
        o["band"] = default_band
    try:
        return Objective(**o)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None


def _opt_kwargs(cfg: RunConfig) -> dict:
    o = cfg.section("optimizer")
    kw = {}
    if "bounds" in o:
        kw["bounds"] = {k: tuple(v) for k, v in o["bounds"].items()}
    for k in ("budget", "coarse", "coarse_points", "cache_dir"):
        if k in o:
            kw[k] = o[k]
    return kw


# ---------------------------------------------------------------- commands


def _pulse_setup(cfg: RunConfig):
    pulse = cfg.section("pulse")
    params = _profile(pulse)
    n = pulse.get("n", 1)
    att = pulse.get("attenuation", DEFAULT_ATTENUATION)
    sap = build_sap(params, n, att, _phases(pulse, n, cfg.seed), pulse.get("delta_f", 0.0),
                    pulse.get("same_chirp", False))
    return params, sap


def prepare(cfg: RunConfig):
    """Build every physics object the command needs; no propagation yet.

    Returns a zero-argument callable that runs the job and yields
    ``(result, extra_json, failures)``.
    """
    opts, backend = _solver(cfg)
    threshold = cfg.data.get("threshold", 0.95)
    if not 0.0 < threshold < 1.0:
        raise ConfigError("threshold must lie in (0, 1)")
    w = cfg.workers
    cmd = cfg.command
    pulse = cfg.section("pulse")

    if cmd == "sweep":
        params, sap = _pulse_setup(cfg)
        grid = _delta(cfg, sap.band_width, params.omega_max)

        def job():
            m = detuning_sweep(sap, grid, opts, w, backend, {"config": cfg.data})
            extra = {
                "bandwidth_at_threshold": bandwidth_at_threshold(m, threshold),
                "band_average": band_average(grid, m.values[0], sap.band_width)[0],
            }
            return m, extra, m.failures
        return job

    if cmd == "scaling":
        params, sap = _pulse_setup(cfg)
        axis = cfg.section("grid").get("axis")
        if axis is None:
            raise ConfigError("scaling needs grid.axis")
        values = _range(axis, name="grid.axis")
        probe = [params_on_axis(params, axis["name"], float(v)) for v in values]
        widest = max(p.omega_max for p in probe)
        band = max(sap.n_components * chirp_span(p) for p in probe)
        grid = _delta(cfg, band, widest)

        def job():
            m = scaling_study(params, sap.n_components, axis["name"], values, grid, opts,
                              pulse.get("attenuation", DEFAULT_ATTENUATION), threshold, w, backend)
            m.metadata["config"] = cfg.data
            return m, {}, m.failures
        return job

    if cmd == "optimize":
        fixed = _fixed(pulse)
        obj = _objective(cfg)
        kw = _opt_kwargs(cfg)
        n = pulse.get("n", 2)

        def job():
            r = optimize(obj, fixed, n=n, attenuation=pulse.get("attenuation", DEFAULT_ATTENUATION),
                         delta_f=pulse.get("delta_f", 0.0), seed=cfg.seed, opts=opts, workers=w,
                         backend=backend, **kw)
            return r, {"config": cfg.data}, 0
        return job

    if cmd == "robustness-rabi":
        params, sap = _pulse_setup(cfg)
        grid = _delta(cfg, sap.band_width, params.omega_max)
        errs = _range(cfg.section("grid").get("errors"), [-0.1, 0.0, 0.1])

        def job():
            m = rabi_error_scan(sap, grid, errs, opts, w, backend)
            m.metadata["config"] = cfg.data
            return m, {}, m.failures
        return job

    if cmd == "robustness-shift":
        params, sap = _pulse_setup(cfg)
        grid = _delta(cfg, sap.band_width, params.omega_max)
        shifts = _range(cfg.section("grid").get("shifts"), name="grid.shifts")
        reopt = cfg.section("optimizer").get("reoptimize", False)
        setup = None
        if reopt:
            setup = {"objective": _objective(cfg, sap.band_width), "fixed": _fixed(pulse),
                     "seed": cfg.seed, **_opt_kwargs(cfg)}

        def job():
            m = freq_shift_scan(params, grid, shifts, reopt, sap.n_components,
                                pulse.get("attenuation", DEFAULT_ATTENUATION), opts, setup, w, backend)
            m.metadata["config"] = cfg.data
            return m, {}, m.failures
        return job

    if cmd == "chirp-compare":
        params = _profile(pulse)
        grid = _delta(cfg, 2 * chirp_span(params), params.omega_max)

        def job():
            c = chirp_direction_comparison(params, grid, opts,
                                           pulse.get("attenuation", DEFAULT_ATTENUATION), w, backend)
            return c, {"config": cfg.data}, c.opposite.failures + c.same.failures
        return job

    if cmd == "suture":
        params = _profile(pulse)
        n_terms = cfg.section("series").get("n_terms")
        if n_terms is not None and n_terms < 2:
            raise ValidationError("series.n_terms must be >= 2")

        def job():
            s = phi_series(params, n_terms)
            phi = phi_numeric(params, params.tau)
            extra = {"phi_numeric_tau": phi, "suture_fidelity": suture_fidelity(params),
                     "config": cfg.data}
            return s, extra, 0
        return job

    if cmd == "phase-average":
        params, sap = _pulse_setup(cfg)
        pa = cfg.section("phase_average")
        samples = pa.get("samples", 16)
        if samples < 2:
            raise ValidationError("phase_average.samples must be >= 2")
        if "delta" in pa:
            grid = np.array([pa["delta"]], dtype=float)
        else:
            grid = _delta(cfg, sap.band_width, params.omega_max)

        def job():
            mean, std = phase_average(params, grid, samples, cfg.seed, sap.n_components,
                                      pulse.get("attenuation", DEFAULT_ATTENUATION),
                                      pulse.get("delta_f", 0.0), opts, w, backend)
            text = _csv_text([_unit("delta"), "mean_fidelity [1]", "std_fidelity [1]"],
                             zip(grid, mean, std))
            out = {"type": "PhaseAverage", "samples": samples, "seed": cfg.seed,
                   "delta": grid.tolist(), "mean": mean.tolist(), "std": std.tolist(),
                   "config": cfg.data, "csv": text}
            return out, {}, int(np.count_nonzero(np.isnan(mean)))
        return job

    if cmd == "boundary":
        g = cfg.section("grid")
        axis = g.get("axis")
        if axis is None:
            raise ConfigError("boundary needs grid.axis (duration or rabi)")
        fixed = _fixed(pulse, ("center_duration_t2",) if axis["name"] == "duration" else ("omega_max",))
        a1 = _range(axis, name="grid.axis")
        a2 = _range(g.get("bandwidths"), name="grid.bandwidths")
        if np.any(a2 <= 0):
            raise ValidationError("bandwidths must be positive")
        n = pulse.get("n", 1)
        att = pulse.get("attenuation", DEFAULT_ATTENUATION)
        obj0 = _objective(cfg)
        kw = _opt_kwargs(cfg)
        if axis["name"] == "duration" and np.any(a1 <= 2 * fixed["edge_duration_t1"]):
            raise ValidationError("every duration must exceed 2*t1")

        def cell(x, wband):
            fx = dict(fixed)
            if axis["name"] == "duration":
                fx["center_duration_t2"] = x - 2.0 * fx["edge_duration_t1"]
            else:
                fx["omega_max"] = x
            o = Objective(**{**obj0.to_dict(), "band": wband})
            r = optimize(o, fx, n=n, attenuation=att, seed=cfg.seed, opts=opts, workers=w,
                         backend=backend, **kw)
            p = r.best_params
            sap = build_sap(p, n, att)
            return sap, detuning_grid(0.5 * sap.band_width, omega=p.omega_max, per_omega=o.per_omega)

        def job():
            b = threshold_boundary(a1, a2, cell, threshold, opts, (axis["name"], "bandwidth"), w,
                                   backend)
            return b, {"config": cfg.data}, 0
        return job

    raise ConfigError(f"unknown command {cmd!r}")


# ---------------------------------------------------------------- entry point


def _point_count(result) -> int:
    """Number of propagations behind ``result`` (0 when not applicable)."""
    if isinstance(result, FidelityMap):
        return int(result.values.size)
    if isinstance(result, ChirpComparison):
        return int(result.opposite.values.size + result.same.values.size)
    if isinstance(result, dict) and "mean" in result:
        return len(result["mean"])
    return 0


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(out: Path, manifest: dict):
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "manifest.json", "w", newline="\n", encoding="utf-8") as fh:
        fh.write(dumps(manifest))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sap", description="Suture adiabatic pulse toolkit")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON job description")
    ap.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                    help="dotted-key override, repeatable")
    ap.add_argument("--workers", type=int, default=None, help="concurrency cap (no effect on values)")
    ap.add_argument("--seed", type=int, default=None, help="master seed")
    ap.add_argument("--out", default="sap-out", help="output directory")
    return ap


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    out = Path(args.out)
    started = time.perf_counter()
    manifest = {
        "tool": "sapkit",
        "version": __version__,
        "command": args.command,
        "config_path": str(args.config),
        "overrides": [],
        "backend": _accel.get_backend(),
    }

    def fail(code: int, kind: str, msg: str) -> int:
        for name in ("result.csv", "result.json"):
            (out / name).unlink(missing_ok=True)
        manifest.update({
            "status": "error",
            "exit_code": code,
            "error": {"category": kind, "message": msg},
            "wall_clock_s": time.perf_counter() - started,
            "outputs": {},
        })
        _write_manifest(out, manifest)
        print(f"sap: {kind} error: {msg}", file=sys.stderr)
        return code

    try:
        try:
            raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        cfg = RunConfig.from_dict(args.command, raw, args.overrides, args.seed, args.workers)
        manifest.update({"config": cfg.data, "overrides": cfg.overrides, "seed": cfg.seed,
                         "workers": cfg.workers})
        job = prepare(cfg)
    except ConfigError as exc:
        return fail(EXIT_CONFIG, "config", str(exc))
    except (ValidationError, DomainError) as exc:
        return fail(EXIT_PHYSICS, "physics", str(exc))

    try:
        result, extra, failures = job()
    except (ValidationError, DomainError) as exc:
        return fail(EXIT_PHYSICS, "physics", str(exc))
    except SolverError as exc:
        return fail(EXIT_SOLVER, "solver", str(exc))
    total = _point_count(result)
    if total and failures >= total:
        return fail(EXIT_SOLVER, "solver", f"all {total} points failed to integrate")

    fmt_name = cfg.section("output").get("format", "both")
    if isinstance(result, dict) and "csv" in result:
        payload = {k: v for k, v in result.items() if k != "csv"}
        written = {}
        if fmt_name in ("csv", "both"):
            written.update(emit(result, "csv", out))
        if fmt_name in ("json", "both"):
            written.update(emit(payload, "json", out))
    else:
        written = emit(result, fmt_name, out, extra)
    manifest.update({
        "status": "ok",
        "exit_code": EXIT_OK,
        "failures": int(failures),
        "wall_clock_s": time.perf_counter() - started,
        "outputs": {name: _sha256(p) for name, p in sorted(written.items())},
    })
    _write_manifest(out, manifest)
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
