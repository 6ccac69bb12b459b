"""Derivative-free optimization of the HSH shape parameters ``(T, r, r1)``.

Two stages: a coarse scan over the bounds box (log-spaced grid or a seeded
Latin hypercube, evaluated concurrently) followed by a bounded Nelder-Mead
refinement from the best scan point.  The search runs in log-parameter
space because the box typically spans an order of magnitude.

When the objective fixes a total band ``W``, ``r1`` is not searched: it is
slaved to ``W`` through ``n * chirp_span = W``, so every candidate covers
exactly the requested band.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from . import __version__
from .analysis import DEFAULT_THRESHOLD, band_average, bandwidth_from_row, fidelities, phase_vectors
from .dynamics import DEFAULT_OPTIONS, SolverOptions
from .errors import ValidationError
from .pulse import DEFAULT_ATTENUATION, HshParams, build_sap, chirp_span

OBJECTIVE_KINDS = ("suture_point", "band_average", "bandwidth_at_threshold", "phase_averaged_band")
PARAM_NAMES = (
    "omega_max",
    "edge_shape_T",
    "edge_rate_r",
    "linear_rate_r1",
    "edge_duration_t1",
    "center_duration_t2",
)
SEARCHABLE = ("edge_shape_T", "edge_rate_r", "linear_rate_r1")
DEFAULT_BOUNDS = {
    "edge_shape_T": (0.1, 1.0),
    "edge_rate_r": (0.1, 10.0),
    "linear_rate_r1": (0.1, 10.0),
}
DEFAULT_COARSE_POINTS = 11
DEFAULT_REFINE_BUDGET = 200
FATOL = 1e-4


@dataclass(frozen=True)
class Objective:
    """What to maximize.

    Attributes
    ----------
    kind : str
        ``suture_point`` (mean F at the ``n-1`` window junctions),
        ``band_average`` (trapezoid mean of F over ``[-W/2, W/2]``),
        ``bandwidth_at_threshold`` (contiguous width with ``F >= threshold``,
        rad/us) or ``phase_averaged_band`` (band average, then mean over
        ``phase_samples`` random tone-phase vectors).
    band : float, optional
        Total band ``W`` in rad/us.  When given, ``linear_rate_r1`` is derived
        from it instead of searched.
    per_omega : float
        Detuning grid density, points per ``Omega``.
    """

    kind: str = "band_average"
    band: float | None = None
    threshold: float = DEFAULT_THRESHOLD
    phase_samples: int = 8
    phase_seed: int = 0
    per_omega: float = 8.0

    def __post_init__(self):
        if self.kind not in OBJECTIVE_KINDS:
            raise ValidationError(f"objective kind must be one of {OBJECTIVE_KINDS}, got {self.kind!r}")
        if not 0.0 < self.threshold < 1.0:
            raise ValidationError("threshold must lie in (0, 1)")
        if self.band is not None and not (math.isfinite(self.band) and self.band > 0):
            raise ValidationError("band W must be positive")
        if self.kind == "phase_averaged_band" and self.phase_samples < 2:
            raise ValidationError("phase_samples must be >= 2")
        if not self.per_omega > 0:
            raise ValidationError("per_omega must be positive")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "band": self.band,
            "threshold": self.threshold,
            "phase_samples": self.phase_samples,
            "phase_seed": self.phase_seed,
            "per_omega": self.per_omega,
        }


@dataclass
class OptimizationResult:
    best_params: HshParams
    best_value: float
    evaluations: int
    trace: list = field(default_factory=list)
    converged: bool = False
    message: str = ""

    @property
    def best_so_far(self) -> list[float]:
        """Running maximum of the objective over the evaluation order."""
        out, best = [], -math.inf
        for _, v in self.trace:
            best = max(best, v)
            out.append(best)
        return out

    def to_dict(self) -> dict:
        return {
            "best_params": self.best_params.to_dict(),
            "best_value": self.best_value,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "message": self.message,
            "trace": [{"params": p, "value": v} for p, v in self.trace],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OptimizationResult":
        return cls(
            best_params=HshParams(**d["best_params"]),
            best_value=float(d["best_value"]),
            evaluations=int(d["evaluations"]),
            trace=[(dict(t["params"]), float(t["value"])) for t in d["trace"]],
            converged=bool(d["converged"]),
            message=d.get("message", ""),
        )


def r1_for_band(band: float, n: int, T: float, r: float, t1: float, t2: float) -> float:
    """``r1`` giving ``n * chirp_span = band``; non-positive when unreachable."""
    return (band / n - 2.0 * r * math.tanh(t1 / T)) * T / t2


def _delta_grid(half: float, omega: float, per_omega: float) -> np.ndarray:
    pts = int(math.ceil(2.0 * half * per_omega / omega)) + 1
    pts += 1 - pts % 2
    return np.linspace(-half, half, max(pts, 3))


@dataclass(frozen=True)
class _Problem:
    free: tuple[str, ...]
    lo: np.ndarray
    hi: np.ndarray
    fixed: dict
    objective: Objective
    n: int
    attenuation: float
    delta_f: float
    opts: SolverOptions
    backend: str | None

    def raw(self, values: Mapping[str, float]) -> dict:
        """Every profile field for a candidate, feasible or not."""
        p = dict(self.fixed)
        p.update(values)
        if self.objective.band is not None:
            p["linear_rate_r1"] = r1_for_band(self.objective.band, self.n, p["edge_shape_T"],
                                              p["edge_rate_r"], p["edge_duration_t1"],
                                              p["center_duration_t2"])
        return {k: float(p[k]) for k in PARAM_NAMES}

    def params(self, values: Mapping[str, float]) -> HshParams | None:
        p = self.raw(values)
        if not p["linear_rate_r1"] > 0:
            return None
        return HshParams(**p)

    def evaluate(self, params: HshParams | None) -> float:
        if params is None:
            return 0.0
        obj = self.objective
        n = self.n
        if obj.kind == "suture_point":
            f = chirp_span(params) + self.delta_f
            deltas = np.array([(0.5 * n - k) * f for k in range(1, n)])
            vals, _ = fidelities(build_sap(params, n, self.attenuation, delta_f=self.delta_f), deltas,
                                 self.opts, backend=self.backend)
            vals = vals[np.isfinite(vals)]
            return float(vals.mean()) if vals.size else 0.0
        band = n * chirp_span(params)
        if obj.kind == "bandwidth_at_threshold":
            grid = _delta_grid(0.75 * band, params.omega_max, obj.per_omega)
            row, _ = fidelities(build_sap(params, n, self.attenuation, delta_f=self.delta_f), grid,
                                self.opts, backend=self.backend)
            return bandwidth_from_row(grid, row, obj.threshold)
        grid = _delta_grid(0.5 * band, params.omega_max, obj.per_omega)
        if obj.kind == "band_average":
            phase_sets = [None]
        else:
            phase_sets = list(phase_vectors(n, obj.phase_samples, obj.phase_seed))
        vals = []
        for ph in phase_sets:
            row, _ = fidelities(build_sap(params, n, self.attenuation, ph, self.delta_f), grid,
                                self.opts, backend=self.backend)
            v, _ = band_average(grid, row, band)
            vals.append(0.0 if math.isnan(v) else v)
        return float(np.mean(vals))


def _setup(bounds, fixed, objective, n, attenuation, delta_f, opts, backend) -> _Problem:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValidationError("n must be an integer >= 1")
    if objective.kind == "suture_point" and n < 2:
        raise ValidationError("suture_point objective needs n >= 2")
    bounds = dict(DEFAULT_BOUNDS if bounds is None else bounds)
    fixed = dict(fixed or {})
    for k in list(bounds) + list(fixed):
        if k not in PARAM_NAMES:
            raise ValidationError(f"unknown parameter {k!r}")
    both = set(bounds) & set(fixed)
    if both:
        raise ValidationError(f"parameters both fixed and bounded: {sorted(both)}")
    for k in bounds:
        if k not in SEARCHABLE:
            raise ValidationError(f"{k} cannot be optimized; only {SEARCHABLE}")
    if objective.band is not None:
        bounds.pop("linear_rate_r1", None)
        if "linear_rate_r1" in fixed:
            raise ValidationError("linear_rate_r1 is derived from the band and cannot be fixed")
        derived = {"linear_rate_r1"}
    else:
        derived = set()
    missing = set(PARAM_NAMES) - set(bounds) - set(fixed) - derived
    if missing:
        raise ValidationError(f"parameters neither fixed nor bounded: {sorted(missing)}")
    for k, (lo, hi) in bounds.items():
        if not (math.isfinite(lo) and math.isfinite(hi) and 0 < lo <= hi):
            raise ValidationError(f"bounds for {k} must satisfy 0 < lo <= hi, got ({lo}, {hi})")
    free = tuple(k for k in SEARCHABLE if k in bounds and bounds[k][0] < bounds[k][1])
    for k in SEARCHABLE:
        if k in bounds and bounds[k][0] == bounds[k][1]:
            fixed[k] = float(bounds[k][0])
    lo = np.log(np.array([bounds[k][0] for k in free], dtype=float))
    hi = np.log(np.array([bounds[k][1] for k in free], dtype=float))
    return _Problem(free, lo, hi, fixed, objective, int(n), float(attenuation), float(delta_f), opts,
                    backend)


def _coarse_points(prob: _Problem, coarse: str, coarse_points: int, seed: int) -> np.ndarray:
    d = len(prob.free)
    if coarse == "grid":
        axes = [np.linspace(a, b, coarse_points) for a, b in zip(prob.lo, prob.hi)]
        return np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, d)
    if coarse == "lhs":
        sampler = qmc.LatinHypercube(d=d, seed=np.random.default_rng(seed))
        u = sampler.random(coarse_points ** d if coarse_points ** d <= 4096 else 4096)
        return qmc.scale(u, prob.lo, prob.hi)
    raise ValidationError(f"coarse scan must be 'grid' or 'lhs', got {coarse!r}")


def _cache_key(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:32]


def optimize(
    objective: Objective,
    fixed: Mapping[str, float],
    bounds: Mapping[str, tuple[float, float]] | None = None,
    n: int = 2,
    attenuation: float = DEFAULT_ATTENUATION,
    delta_f: float = 0.0,
    budget: int | None = None,
    seed: int = 0,
    opts: SolverOptions = DEFAULT_OPTIONS,
    coarse: str = "grid",
    coarse_points: int = DEFAULT_COARSE_POINTS,
    workers: int = 1,
    backend: str | None = None,
    cache_dir: str | Path | None = None,
) -> OptimizationResult:
    """Maximize ``objective`` over the free shape parameters.

    Parameters
    ----------
    fixed : mapping
        Values of every parameter that is not searched (at least
        ``omega_max``, ``edge_duration_t1`` and ``center_duration_t2``).
    bounds : mapping, optional
        ``name -> (lo, hi)`` for the searched subset of ``(T, r, r1)``.
        Equal bounds pin a parameter.  ``r1`` bounds are dropped when the
        objective fixes the band.
    budget : int, optional
        Total objective evaluations.  The coarse scan always runs in full
        (``coarse_points**d`` grid nodes or as many hypercube samples); the
        rest goes to the simplex.  Defaults to the scan plus 200.
    cache_dir : path, optional
        Directory of JSON results keyed by a digest of every input; a hit
        skips the computation entirely.

    Raises
    ------
    ValidationError
        On an inconsistent box or a budget smaller than the coarse scan.
    """
    prob = _setup(bounds, fixed, objective, n, attenuation, delta_f, opts, backend)
    d = len(prob.free)
    n_coarse = 0 if d == 0 else (coarse_points ** d if coarse == "grid" else min(coarse_points ** d, 4096))
    if budget is None:
        budget = n_coarse + DEFAULT_REFINE_BUDGET
    if budget < max(n_coarse, 1):
        raise ValidationError(f"budget {budget} is smaller than the coarse scan ({n_coarse} points)")

    cache_path = None
    if cache_dir is not None:
        key = _cache_key({
            "version": __version__,
            "objective": objective.to_dict(),
            "fixed": {k: float(v) for k, v in sorted(dict(fixed).items())},
            "bounds": {k: list(map(float, v)) for k, v in sorted(dict(bounds or DEFAULT_BOUNDS).items())},
            "n": int(n), "attenuation": float(attenuation), "delta_f": float(delta_f),
            "budget": int(budget), "seed": int(seed), "coarse": coarse,
            "coarse_points": int(coarse_points),
            "opts": [opts.rel_tol, opts.abs_tol, opts.max_step, opts.method, opts.rk4_steps],
        })
        cache_path = Path(cache_dir) / f"opt-{key}.json"
        if cache_path.exists():
            return OptimizationResult.from_dict(json.loads(cache_path.read_text()))

    trace: list[tuple[dict, float]] = []
    memo: dict[tuple, float] = {}

    def to_params(x) -> HshParams | None:
        return prob.params({k: float(math.exp(v)) for k, v in zip(prob.free, x)})

    def record(x, value, params):
        shown = params.to_dict() if params is not None else prob.raw(
            {k: float(math.exp(v)) for k, v in zip(prob.free, x)})
        trace.append((shown, value))

    if d == 0:
        p = to_params(np.zeros(0))
        v = prob.evaluate(p)
        record(np.zeros(0), v, p)
        result = OptimizationResult(p, v, 1, trace, True, "degenerate box")
    else:
        pts = _coarse_points(prob, coarse, coarse_points, seed)
        cands = [to_params(x) for x in pts]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=int(workers)) as pool:
                vals = list(pool.map(prob.evaluate, cands))
        else:
            vals = [prob.evaluate(c) for c in cands]
        for x, v, c in zip(pts, vals, cands):
            memo[tuple(x)] = v
            record(x, v, c)
        start = int(np.argmax(vals))
        x0 = pts[start]
        remaining = budget - len(pts)
        converged = False
        message = "coarse scan only"
        if remaining > 0:
            def neg(x):
                x = np.clip(x, prob.lo, prob.hi)
                key = tuple(x)
                if key not in memo:
                    p = to_params(x)
                    memo[key] = prob.evaluate(p)
                    record(x, memo[key], p)
                return -memo[key]

            step = (prob.hi - prob.lo) / max(coarse_points - 1, 1)
            simplex = [x0.copy()]
            for i in range(d):
                v = x0.copy()
                v[i] = v[i] + step[i] if v[i] + step[i] <= prob.hi[i] else v[i] - step[i]
                simplex.append(v)
            res = minimize(
                neg, x0, method="Nelder-Mead",
                bounds=list(zip(prob.lo, prob.hi)),
                options={"maxfev": remaining, "fatol": FATOL, "xatol": 1e-4,
                         "initial_simplex": np.array(simplex)},
            )
            converged = bool(res.status == 0)
            message = str(res.message)
        feasible = [i for i, (p, _) in enumerate(trace) if p["linear_rate_r1"] > 0]
        if not feasible:
            raise ValidationError(f"no candidate in the box reaches band {objective.band}")
        best_i = max(feasible, key=lambda i: trace[i][1])
        best_p, best_v = trace[best_i]
        result = OptimizationResult(HshParams(**best_p), best_v, len(trace), trace, converged, message)

    if cache_path is not None:
        cache_path.parent.mkdir(parents=True, exist_ok=True)
        cache_path.write_text(json.dumps(result.to_dict()))
    return result


def derive_seeds(master: int, count: int) -> list[int]:
    """Independent per-condition seeds from one master seed."""
    children = np.random.SeedSequence(int(master)).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


CONDITION_KEYS = ("delta_f", "omega_max", "edge_duration_t1", "center_duration_t2", "band", "n")


def reoptimize_per_condition(
    conditions: Sequence[Mapping[str, float]],
    objective: Objective,
    fixed: Mapping[str, float],
    bounds: Mapping[str, tuple[float, float]] | None = None,
    n: int = 2,
    attenuation: float = DEFAULT_ATTENUATION,
    delta_f: float = 0.0,
    budget: int | None = None,
    seed: int = 0,
    opts: SolverOptions = DEFAULT_OPTIONS,
    workers: int = 1,
    backend: str | None = None,
    **kwargs,
) -> list[OptimizationResult]:
    """One :func:`optimize` call per condition.

    Each condition is a mapping of overrides drawn from ``CONDITION_KEYS``
    (``delta_f``, a fixed profile field, the objective ``band`` or ``n``).
    Seeds come from ``SeedSequence(seed).spawn``.  Conditions run
    concurrently when ``workers > 1``; results are returned in input order.
    """
    conditions = [dict(c) for c in conditions]
    if not conditions:
        raise ValidationError("condition grid is empty")
    for c in conditions:
        bad = set(c) - set(CONDITION_KEYS)
        if bad:
            raise ValidationError(f"unsupported condition keys {sorted(bad)}")
    seeds = derive_seeds(seed, len(conditions))

    def run(i):
        c = conditions[i]
        fx = dict(fixed)
        for k in ("omega_max", "edge_duration_t1", "center_duration_t2"):
            if k in c:
                fx[k] = c[k]
        obj = objective
        if "band" in c:
            obj = Objective(**{**objective.to_dict(), "band": c["band"]})
        return optimize(obj, fx, bounds, int(c.get("n", n)), attenuation,
                        float(c.get("delta_f", delta_f)), budget, seeds[i], opts,
                        backend=backend, **kwargs)

    if workers > 1 and len(conditions) > 1:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            return list(pool.map(run, range(len(conditions))))
    return [run(i) for i in range(len(conditions))]


__all__ = [
    "DEFAULT_BOUNDS",
    "OBJECTIVE_KINDS",
    "Objective",
    "OptimizationResult",
    "derive_seeds",
    "optimize",
    "r1_for_band",
    "reoptimize_per_condition",
]
