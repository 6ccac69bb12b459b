"""Fidelity maps over detuning and parameter grids, bandwidth metrics and
robustness studies.

Every sweep is embarrassingly parallel over detuning points.  Points are
split into contiguous chunks and handed to a thread pool; the compiled
kernels release the GIL, so ``workers > 1`` gives real concurrency.  Chunks
are reassembled in grid order and every point is integrated independently,
so the worker count never changes a value.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dynamics import DEFAULT_OPTIONS, SolverOptions, propagate_batch
from .errors import ValidationError
from .pulse import DEFAULT_ATTENUATION, HshParams, Profile, SapPulse, build_sap, chirp_span

SECONDARY_AXES = ("duration", "rabi", "rabi_error", "shift")
AXIS_UNITS = {
    "delta": "rad/us",
    "duration": "us",
    "rabi": "rad/us",
    "rabi_error": "1",
    "shift": "rad/us",
}
DEFAULT_THRESHOLD = 0.95


@dataclass
class FidelityMap:
    """Fidelity sampled on a detuning grid, optionally against a second axis.

    ``values`` always has shape ``(rows, len(detuning_grid))``; a plain sweep
    has one row.  Points whose propagation failed hold NaN and are counted in
    ``failures``.
    """

    detuning_grid: np.ndarray
    values: np.ndarray
    secondary_name: str | None = None
    secondary_values: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)
    failures: int = 0

    def __post_init__(self):
        self.detuning_grid = np.asarray(self.detuning_grid, dtype=float)
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.secondary_values is not None:
            self.secondary_values = np.asarray(self.secondary_values, dtype=float)
        if self.secondary_name is not None and self.secondary_name not in SECONDARY_AXES:
            raise ValidationError(f"unknown secondary axis {self.secondary_name!r}")
        rows = 1 if self.secondary_values is None else len(self.secondary_values)
        if self.values.shape != (rows, len(self.detuning_grid)):
            raise ValidationError(
                f"values shape {self.values.shape} does not match grids ({rows}, {len(self.detuning_grid)})"
            )
        finite = self.values[np.isfinite(self.values)]
        if finite.size and (finite.min() < 0.0 or finite.max() > 1.0):
            raise ValidationError("fidelity values must lie in [0, 1]")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def row(self, i: int = 0) -> "FidelityMap":
        return FidelityMap(self.detuning_grid, self.values[i:i + 1], metadata=dict(self.metadata))

    def to_dict(self) -> dict:
        return {
            "detuning_grid": self.detuning_grid.tolist(),
            "secondary_name": self.secondary_name,
            "secondary_values": None if self.secondary_values is None else self.secondary_values.tolist(),
            "values": [[None if not math.isfinite(v) else v for v in r] for r in self.values.tolist()],
            "failures": int(self.failures),
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FidelityMap":
        vals = np.array([[np.nan if v is None else v for v in r] for r in d["values"]], dtype=float)
        sec = d.get("secondary_values")
        return cls(
            detuning_grid=np.asarray(d["detuning_grid"], dtype=float),
            values=vals,
            secondary_name=d.get("secondary_name"),
            secondary_values=None if sec is None else np.asarray(sec, dtype=float),
            metadata=dict(d.get("metadata", {})),
            failures=int(d.get("failures", 0)),
        )


def detuning_grid(half_width: float, points: int | None = None, omega: float | None = None,
                  per_omega: float = 8.0) -> np.ndarray:
    """Uniform grid on ``[-half_width, half_width]``.

    Without ``points`` the density is ``per_omega`` points per ``omega`` of
    detuning (rounded up to an odd count so ``delta = 0`` is a node).
    """
    if not half_width > 0:
        raise ValidationError("half_width must be positive")
    if points is None:
        if omega is None or not omega > 0:
            raise ValidationError("need points or a positive omega")
        points = int(math.ceil(2.0 * half_width * per_omega / omega)) + 1
    if points < 2:
        raise ValidationError("a grid needs at least two points")
    if points % 2 == 0:
        points += 1
    return np.linspace(-half_width, half_width, points)


def _check_grid(grid) -> np.ndarray:
    g = np.asarray(grid, dtype=float).ravel()
    if g.size == 0:
        raise ValidationError("detuning grid is empty")
    if not np.all(np.isfinite(g)):
        raise ValidationError("detuning grid must be finite")
    if g.size > 1 and np.any(np.diff(g) <= 0):
        raise ValidationError("detuning grid must be strictly increasing")
    return g


def _chunks(n: int, workers: int) -> list[slice]:
    k = max(1, min(int(workers), n))
    edges = np.linspace(0, n, k + 1).round().astype(int)
    return [slice(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def fidelities(
    pulse: SapPulse,
    deltas,
    opts: SolverOptions = DEFAULT_OPTIONS,
    rabi_errors=None,
    workers: int = 1,
    backend: str | None = None,
) -> tuple[np.ndarray, int]:
    """Fidelity per detuning (NaN where the run failed) and the failure count."""
    d = np.asarray(deltas, dtype=float)
    errs = None if rabi_errors is None else np.broadcast_to(np.asarray(rabi_errors, float), d.shape)
    parts = _chunks(d.size, workers)

    def run(sl):
        re = None if errs is None else np.ascontiguousarray(errs[sl])
        return propagate_batch(pulse, np.ascontiguousarray(d[sl]), opts, re, backend=backend).fidelity

    if len(parts) == 1:
        out = run(parts[0])
    else:
        with ThreadPoolExecutor(max_workers=len(parts)) as pool:
            out = np.concatenate(list(pool.map(run, parts)))
    return out, int(np.count_nonzero(np.isnan(out)))


def _pulse_meta(pulse: SapPulse) -> dict:
    return pulse.to_dict()


def detuning_sweep(
    pulse: SapPulse,
    delta_grid,
    opts: SolverOptions = DEFAULT_OPTIONS,
    workers: int = 1,
    backend: str | None = None,
    metadata: dict | None = None,
) -> FidelityMap:
    """One transfer fidelity per detuning; failed points are stored as NaN."""
    g = _check_grid(delta_grid)
    vals, bad = fidelities(pulse, g, opts, workers=workers, backend=backend)
    meta = {"pulse": _pulse_meta(pulse), "threshold_definition": "contiguous F >= threshold around delta=0"}
    meta.update(metadata or {})
    return FidelityMap(g, vals[None, :], metadata=meta, failures=bad)


def _zero_index(grid: np.ndarray) -> int:
    if not (grid[0] <= 0.0 <= grid[-1]):
        raise ValidationError("detuning grid must contain delta = 0 in its range")
    return int(np.argmin(np.abs(grid)))


def _edge(x0, f0, x1, f1, thr):
    """Linear interpolation of the threshold crossing between two nodes."""
    if f1 == f0:
        return x0
    return x0 + (thr - f0) * (x1 - x0) / (f1 - f0)


def bandwidth_from_row(grid, row, threshold: float = DEFAULT_THRESHOLD) -> float:
    """Width of the contiguous ``F >= threshold`` run containing ``delta = 0``.

    The run's ends are placed by linear interpolation between the last node
    above and the first node below threshold, so the value is stable under
    grid refinement to within one grid spacing.  A missing (NaN) point ends
    the run.
    """
    g = np.asarray(grid, dtype=float)
    f = np.asarray(row, dtype=float)
    i0 = _zero_index(g)
    ok = np.where(np.isnan(f), False, f >= threshold)
    if not ok[i0]:
        return 0.0
    lo = i0
    while lo > 0 and ok[lo - 1]:
        lo -= 1
    hi = i0
    while hi < len(g) - 1 and ok[hi + 1]:
        hi += 1
    left = g[lo]
    if lo > 0 and np.isfinite(f[lo - 1]):
        left = _edge(g[lo - 1], f[lo - 1], g[lo], f[lo], threshold)
    right = g[hi]
    if hi < len(g) - 1 and np.isfinite(f[hi + 1]):
        right = _edge(g[hi], f[hi], g[hi + 1], f[hi + 1], threshold)
    return float(right - left)


def bandwidth_at_threshold(fmap: FidelityMap, threshold: float = DEFAULT_THRESHOLD) -> float:
    """Contiguous band around ``delta = 0`` with ``F >= threshold``, rad/us.

    Zero when ``F(0)`` is below threshold.  Only single-row maps are
    accepted; use :func:`bandwidths` for 2-D maps.
    """
    if fmap.values.shape[0] != 1:
        raise ValidationError("bandwidth_at_threshold needs a single-row map")
    return bandwidth_from_row(fmap.detuning_grid, fmap.values[0], threshold)


def bandwidths(fmap: FidelityMap, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    return np.array([bandwidth_from_row(fmap.detuning_grid, r, threshold) for r in fmap.values])


def band_average(grid, row, band: float) -> tuple[float, int]:
    """Trapezoid-weighted mean of ``F`` over ``[-band/2, band/2]``.

    Grid nodes inside the window are used; missing points are dropped from
    the quadrature and their number returned alongside the mean.
    """
    g = np.asarray(grid, dtype=float)
    f = np.asarray(row, dtype=float)
    half = 0.5 * band * (1.0 + 1e-12)
    inside = np.abs(g) <= half
    missing = int(np.count_nonzero(inside & np.isnan(f)))
    keep = inside & np.isfinite(f)
    x, y = g[keep], f[keep]
    if x.size == 0:
        return float("nan"), missing
    if x.size == 1:
        return float(y[0]), missing
    return float(np.trapezoid(y, x) / (x[-1] - x[0])), missing


def nominal_band(pulse: SapPulse) -> float:
    """``n * chirp_span``: the design band used for band averages."""
    return pulse.band_width


# ---------------------------------------------------------------- scaling


@dataclass(frozen=True)
class ScalingFit:
    """Linear and log-log fits of bandwidth against the study axis.

    ``slope``/``intercept`` fit ``W = slope*x + intercept``; ``exponent`` is
    the slope of ``log W`` against ``log x``.  Both use only points with
    ``W > 0``.
    """

    axis: str
    axis_values: tuple[float, ...]
    bandwidths: tuple[float, ...]
    slope: float
    intercept: float
    exponent: float
    points_used: int

    def to_dict(self) -> dict:
        return {
            "axis": self.axis,
            "axis_values": list(self.axis_values),
            "bandwidths": list(self.bandwidths),
            "slope": self.slope,
            "intercept": self.intercept,
            "exponent": self.exponent,
            "points_used": self.points_used,
        }


def fit_scaling(fmap: FidelityMap, threshold: float = DEFAULT_THRESHOLD) -> ScalingFit:
    if fmap.secondary_values is None:
        raise ValidationError("scaling fit needs a 2-D map")
    x = fmap.secondary_values
    w = bandwidths(fmap, threshold)
    use = w > 0
    nan = float("nan")
    slope = intercept = exponent = nan
    if np.count_nonzero(use) >= 2:
        slope, intercept = (float(v) for v in np.polyfit(x[use], w[use], 1))
        exponent = float(np.polyfit(np.log(x[use]), np.log(w[use]), 1)[0])
    return ScalingFit(
        axis=fmap.secondary_name or "",
        axis_values=tuple(float(v) for v in x),
        bandwidths=tuple(float(v) for v in w),
        slope=slope,
        intercept=intercept,
        exponent=exponent,
        points_used=int(np.count_nonzero(use)),
    )


def params_on_axis(base: HshParams, axis: str, value: float) -> HshParams:
    """Profile for one point of a scaling study.

    ``duration`` sets ``tau`` by changing ``t2``; ``rabi`` sets ``Omega`` with
    ``r = 0.3 Omega^2`` and ``r1 = 0.15 Omega^2``.
    """
    if axis == "duration":
        return HshParams.from_duration(base.omega_max, base.edge_shape_T, base.edge_rate_r,
                                       base.linear_rate_r1, base.edge_duration_t1, value)
    if axis == "rabi":
        return HshParams(value, base.edge_shape_T, 0.3 * value ** 2, 0.15 * value ** 2,
                         base.edge_duration_t1, base.center_duration_t2)
    raise ValidationError(f"scaling axis must be 'duration' or 'rabi', got {axis!r}")


def scaling_study(
    base: HshParams,
    n: int,
    axis: str,
    axis_grid: Sequence[float],
    delta_grid,
    opts: SolverOptions = DEFAULT_OPTIONS,
    attenuation: float = DEFAULT_ATTENUATION,
    threshold: float = DEFAULT_THRESHOLD,
    workers: int = 1,
    backend: str | None = None,
) -> FidelityMap:
    """Fidelity against detuning and either pulse duration or Rabi frequency.

    The returned map carries the bandwidth fit (see :class:`ScalingFit`) in
    ``metadata["fit"]``.
    """
    g = _check_grid(delta_grid)
    axis_grid = np.asarray(axis_grid, dtype=float).ravel()
    if axis_grid.size == 0:
        raise ValidationError("axis grid is empty")
    profiles = [params_on_axis(base, axis, float(v)) for v in axis_grid]
    rows = np.empty((axis_grid.size, g.size))
    bad = 0
    for i, p in enumerate(profiles):
        rows[i], nb = fidelities(build_sap(p, n, attenuation), g, opts, workers=workers,
                                 backend=backend)
        bad += nb
    fmap = FidelityMap(
        g, rows, "duration" if axis == "duration" else "rabi", axis_grid,
        metadata={
            "base": base.to_dict(),
            "n": int(n),
            "attenuation": attenuation,
            "axis": axis,
            "threshold": threshold,
        },
        failures=bad,
    )
    fmap.metadata["fit"] = fit_scaling(fmap, threshold).to_dict()
    return fmap


# ---------------------------------------------------------------- phases


def phase_vectors(n: int, samples: int, seed: int) -> np.ndarray:
    """``samples x n`` uniform phases on ``[0, 2pi)`` from a PCG64 stream."""
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    return rng.uniform(0.0, 2.0 * math.pi, size=(samples, n))


def phase_average(
    params: Profile,
    delta,
    samples: int,
    seed: int,
    n: int = 2,
    attenuation: float = DEFAULT_ATTENUATION,
    delta_f: float = 0.0,
    opts: SolverOptions = DEFAULT_OPTIONS,
    workers: int = 1,
    backend: str | None = None,
) -> tuple:
    """Mean and sample standard deviation of ``F`` over random tone phases.

    ``delta`` may be a scalar or an array; the statistics are per detuning.
    """
    if samples < 2:
        raise ValidationError("phase averaging needs at least two samples")
    d = np.atleast_1d(np.asarray(delta, dtype=float))
    fs = np.empty((samples, d.size))
    for k, ph in enumerate(phase_vectors(n, samples, seed)):
        fs[k], _ = fidelities(build_sap(params, n, attenuation, ph, delta_f), d, opts,
                              workers=workers, backend=backend)
    mean = np.nanmean(fs, axis=0)
    std = np.nanstd(fs, axis=0, ddof=1)
    if np.ndim(delta) == 0:
        return float(mean[0]), float(std[0])
    return mean, std


# ---------------------------------------------------------------- robustness


def rabi_error_scan(
    pulse: SapPulse,
    delta_grid,
    error_grid,
    opts: SolverOptions = DEFAULT_OPTIONS,
    workers: int = 1,
    backend: str | None = None,
) -> FidelityMap:
    """``F(delta, dOmega/Omega)``; band averages per error in ``metadata``."""
    g = _check_grid(delta_grid)
    errs = np.asarray(error_grid, dtype=float).ravel()
    if errs.size == 0 or np.any(errs <= -1.0) or not np.all(np.isfinite(errs)):
        raise ValidationError("rabi errors must be finite and > -1")
    rows = np.empty((errs.size, g.size))
    bad = 0
    for i, e in enumerate(errs):
        rows[i], nb = fidelities(pulse, g, opts, rabi_errors=e, workers=workers, backend=backend)
        bad += nb
    band = nominal_band(pulse)
    avgs = [band_average(g, r, band) for r in rows]
    return FidelityMap(
        g, rows, "rabi_error", errs,
        metadata={
            "pulse": _pulse_meta(pulse),
            "band": band,
            "band_average": [a for a, _ in avgs],
            "band_missing": [m for _, m in avgs],
        },
        failures=bad,
    )


def freq_shift_scan(
    params: HshParams,
    delta_grid,
    shift_grid,
    reoptimize: bool = False,
    n: int = 2,
    attenuation: float = DEFAULT_ATTENUATION,
    opts: SolverOptions = DEFAULT_OPTIONS,
    optimizer_setup: dict | None = None,
    workers: int = 1,
    backend: str | None = None,
) -> FidelityMap:
    """``F(delta, delta_f)`` with the tone spacing shifted to ``f + delta_f``.

    With ``reoptimize=False`` the profile ``params`` is used for every shift.
    With ``reoptimize=True``, ``optimizer_setup`` holds the keyword arguments
    of :func:`sapkit.optimizer.reoptimize_per_condition` (``bounds``,
    ``fixed``, ``objective`` and optionally ``budget``/``seed``) and each shift
    gets its own optimized profile.  ``metadata`` records band averages
    (band ``n * chirp_span`` of the profile actually used) and the suture
    point fidelity ``F(0)`` per shift.
    """
    g = _check_grid(delta_grid)
    shifts = np.asarray(shift_grid, dtype=float).ravel()
    if shifts.size == 0 or not np.all(np.isfinite(shifts)):
        raise ValidationError("shift grid must be non-empty and finite")
    if reoptimize:
        from .optimizer import reoptimize_per_condition

        setup = dict(optimizer_setup or {})
        setup.setdefault("n", n)
        setup.setdefault("attenuation", attenuation)
        results = reoptimize_per_condition(
            [{"delta_f": float(s)} for s in shifts], opts=opts, workers=workers,
            backend=backend, **setup,
        )
        profiles = [r.best_params for r in results]
    else:
        profiles = [params] * shifts.size
    rows = np.empty((shifts.size, g.size))
    bad = 0
    used = []
    for i, (s, p) in enumerate(zip(shifts, profiles)):
        rows[i], nb = fidelities(build_sap(p, n, attenuation, delta_f=float(s)), g, opts,
                                 workers=workers, backend=backend)
        bad += nb
        used.append(p.to_dict())
    avgs = [band_average(g, r, n * chirp_span(p)) for r, p in zip(rows, profiles)]
    i0 = _zero_index(g)
    return FidelityMap(
        g, rows, "shift", shifts,
        metadata={
            "n": int(n),
            "attenuation": attenuation,
            "reoptimize": bool(reoptimize),
            "profiles": used,
            "band_average": [a for a, _ in avgs],
            "band_missing": [m for _, m in avgs],
            "suture_fidelity": [float(r[i0]) for r in rows],
        },
        failures=bad,
    )


@dataclass(frozen=True)
class ChirpComparison:
    """Opposite- versus same-direction chirps of a two-tone pulse.

    ``central_*`` averages cover the middle quarter of the band
    (``|delta| <= band/8``) and ``outer_*`` the rest of ``[-band/2, band/2]``.
    """

    opposite: FidelityMap
    same: FidelityMap
    band: float
    average_opposite: float
    average_same: float
    central_opposite: float
    central_same: float
    outer_opposite: float
    outer_same: float

    @property
    def deficit(self) -> float:
        return self.average_opposite - self.average_same

    @property
    def central_deficit(self) -> float:
        return self.central_opposite - self.central_same

    @property
    def outer_deficit(self) -> float:
        return self.outer_opposite - self.outer_same

    def summary(self) -> dict:
        return {
            "band": self.band,
            "average_opposite": self.average_opposite,
            "average_same": self.average_same,
            "central_opposite": self.central_opposite,
            "central_same": self.central_same,
            "outer_opposite": self.outer_opposite,
            "outer_same": self.outer_same,
        }


def _masked_mean(grid, row, mask) -> float:
    vals = np.asarray(row)[mask]
    vals = vals[np.isfinite(vals)]
    return float(vals.mean()) if vals.size else float("nan")


def chirp_direction_comparison(
    params: HshParams,
    delta_grid,
    opts: SolverOptions = DEFAULT_OPTIONS,
    attenuation: float = DEFAULT_ATTENUATION,
    workers: int = 1,
    backend: str | None = None,
) -> ChirpComparison:
    g = _check_grid(delta_grid)
    opp = build_sap(params, 2, attenuation)
    same = build_sap(params, 2, attenuation, same_chirp=True)
    m_opp = detuning_sweep(opp, g, opts, workers, backend)
    m_same = detuning_sweep(same, g, opts, workers, backend)
    band = nominal_band(opp)
    central = np.abs(g) <= band / 8.0 * (1 + 1e-12)
    outer = (~central) & (np.abs(g) <= band / 2.0 * (1 + 1e-12))
    return ChirpComparison(
        opposite=m_opp,
        same=m_same,
        band=band,
        average_opposite=band_average(g, m_opp.values[0], band)[0],
        average_same=band_average(g, m_same.values[0], band)[0],
        central_opposite=_masked_mean(g, m_opp.values[0], central),
        central_same=_masked_mean(g, m_same.values[0], central),
        outer_opposite=_masked_mean(g, m_opp.values[0], outer),
        outer_same=_masked_mean(g, m_same.values[0], outer),
    )


# ---------------------------------------------------------------- boundary


@dataclass(frozen=True)
class Boundary:
    """Threshold level set of band-averaged fidelity.

    ``points[i]`` is ``(axis1_grid[i], axis2 crossing or None)``; ``grid``
    holds the averaged fidelity of every cell.
    """

    axis1_name: str
    axis2_name: str
    axis1_grid: tuple[float, ...]
    axis2_grid: tuple[float, ...]
    grid: np.ndarray
    threshold: float
    points: tuple[tuple[float, float | None], ...]

    def crossing(self, a1: float) -> float | None:
        for x, y in self.points:
            if x == a1:
                return y
        raise KeyError(a1)


def level_crossing(xs, fs, threshold: float) -> float | None:
    """First ``x`` where ``f`` crosses ``threshold``, linearly interpolated.

    A node sitting exactly at threshold counts when its neighbour lies on
    the other side.  Missing cells are skipped.
    """
    xs = np.asarray(xs, dtype=float)
    fs = np.asarray(fs, dtype=float)
    keep = np.isfinite(fs)
    xs, fs = xs[keep], fs[keep]
    for i in range(len(xs) - 1):
        a, b = fs[i] - threshold, fs[i + 1] - threshold
        if a == 0.0 and b != 0.0:
            return float(xs[i])
        if a * b < 0.0:
            return float(_edge(xs[i], fs[i], xs[i + 1], fs[i + 1], threshold))
    return None


def threshold_boundary(
    axis1_grid: Sequence[float],
    axis2_grid: Sequence[float],
    cell: Callable[[float, float], tuple[SapPulse, np.ndarray]],
    threshold: float = DEFAULT_THRESHOLD,
    opts: SolverOptions = DEFAULT_OPTIONS,
    axis_names: tuple[str, str] = ("duration", "bandwidth"),
    workers: int = 1,
    backend: str | None = None,
) -> Boundary:
    """Locate, for each ``axis1`` value, where band-averaged ``F`` crosses ``threshold``.

    Parameters
    ----------
    cell : callable
        ``cell(a1, a2) -> (pulse, delta_grid)``; typically builds an optimized
        pulse for that cell.  The band average runs over ``pulse.band_width``.
    """
    a1 = np.asarray(axis1_grid, dtype=float)
    a2 = np.asarray(axis2_grid, dtype=float)
    grid = np.full((a1.size, a2.size), np.nan)
    for i, x in enumerate(a1):
        for j, y in enumerate(a2):
            pulse, dg = cell(float(x), float(y))
            row, _ = fidelities(pulse, _check_grid(dg), opts, workers=workers, backend=backend)
            grid[i, j] = band_average(dg, row, nominal_band(pulse))[0]
    points = tuple((float(x), level_crossing(a2, grid[i], threshold)) for i, x in enumerate(a1))
    return Boundary(axis_names[0], axis_names[1], tuple(a1.tolist()), tuple(a2.tolist()), grid,
                    threshold, points)


__all__ = [
    "Boundary",
    "ChirpComparison",
    "FidelityMap",
    "ScalingFit",
    "band_average",
    "bandwidth_at_threshold",
    "bandwidth_from_row",
    "bandwidths",
    "chirp_direction_comparison",
    "detuning_grid",
    "detuning_sweep",
    "fidelities",
    "fit_scaling",
    "freq_shift_scan",
    "level_crossing",
    "params_on_axis",
    "phase_average",
    "phase_vectors",
    "rabi_error_scan",
    "scaling_study",
    "threshold_boundary",
]
