"""Analytic treatment of the two-tone suture point (atom exactly between windows).

At zero detuning the two-tone Hamiltonian reduces to
``Omega(t) cos(theta(t)) sigma_x`` with ``theta(t) = f t/2 + chirp_phase(t)``.
That Hamiltonian commutes with itself at all times, so the transfer fidelity
is ``sin^2(phi(tau))`` with ``phi(t)`` the running integral of the coupling.
Past the edge, ``phi`` oscillates about a limit; approximating each lobe of
the coupling by a triangle turns it into an alternating series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import SapError, SolverError
from .pulse import HshParams, _check_domain, chirp_phase, chirp_span, hsh_chirp, hsh_envelope


class NoCrossingError(SapError):
    """The coupling never changes sign after the edge, so no series exists."""


def theta(params: HshParams, t, f: float | None = None):
    """Phase of the beat between the two tones, rad."""
    f = chirp_span(params) if f is None else f
    tt = np.asarray(t, dtype=float) if np.ndim(t) else float(t)
    return 0.5 * f * tt + chirp_phase(params, t)


def theta_rate(params: HshParams, t, f: float | None = None):
    f = chirp_span(params) if f is None else f
    return 0.5 * f + hsh_chirp(params, t)


def crossing_times(params: HshParams, k_max: int, f: float | None = None) -> list[float]:
    """Times where ``theta = pi/2 + k pi`` for ``k = 0..k_max``, inside ``[0, tau]``.

    ``theta`` is non-decreasing (its rate ``f/2 + chirp`` is zero only at
    ``t=0``), so each level has at most one root and brentq brackets it.
    """
    if k_max < 0:
        return []
    f = chirp_span(params) if f is None else f
    tau = params.tau
    th_end = theta(params, tau, f)
    roots = []
    lo = 0.0
    for k in range(k_max + 1):
        level = 0.5 * math.pi + k * math.pi
        if level > th_end:
            break
        g = lambda t, lv=level: theta(params, t, f) - lv
        root = brentq(g, lo, tau, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
        roots.append(root)
        lo = root
    return roots


def _lobe_edges(params: HshParams, t_end: float, f: float) -> list[float]:
    th = theta(params, t_end, f)
    k_max = int(math.floor((th - 0.5 * math.pi) / math.pi)) if th >= 0.5 * math.pi else -1
    inner = [c for c in crossing_times(params, k_max, f) if 0.0 < c < t_end]
    return [0.0, *inner, t_end]


def phi_numeric(params: HshParams, t, f: float | None = None,
                epsabs: float = 1e-13, epsrel: float = 1e-12) -> float:
    """Running area ``int_0^t Omega(t') cos(theta(t')) dt'`` by lobe-wise quadrature.

    The integrand is split at every sign change of ``cos(theta)`` so each
    adaptive Gauss-Kronrod call sees a single-signed, smooth lobe; the split
    points at ``t1`` and ``t1 + t2`` are added for the kinks in the profile.
    """
    t = float(_check_domain(params, t))
    f = chirp_span(params) if f is None else f
    if t == 0.0:
        return 0.0
    t1 = params.edge_duration_t1
    t2 = params.center_duration_t2
    edges = sorted(set(_lobe_edges(params, t, f)) | {x for x in (t1, t1 + t2) if 0.0 < x < t})

    def integrand(s):
        return hsh_envelope(params, s) * math.cos(theta(params, s, f))

    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        val, err, *rest = quad(integrand, a, b, epsabs=epsabs, epsrel=epsrel, limit=200,
                               full_output=1)
        if len(rest) > 1 and err > max(1e-9, 1e-8 * abs(val)):
            raise SolverError(f"quadrature did not converge on [{a:.6g}, {b:.6g}]: {rest[1]}")
        total += val
    return total


def suture_fidelity(params: HshParams, f: float | None = None) -> float:
    """``sin^2(phi(tau))``: exact two-tone transfer at the suture point."""
    return math.sin(phi_numeric(params, params.tau, f)) ** 2


@dataclass(frozen=True)
class SutureSeries:
    """Triangle-lobe series for ``phi`` after its first extremum past the edge.

    ``partial_sums[N]`` is ``phi_t0`` plus the first ``N`` terms, so
    ``partial_sums[0] == phi_t0``.
    """

    a: float
    b: float
    t0: float
    phi_t0: float
    terms: tuple[float, ...]
    partial_sums: tuple[float, ...]
    t0_is_maximum: bool = True
    crossings: tuple[float, ...] = field(default=(), repr=False)

    @property
    def estimate(self) -> float:
        return self.partial_sums[-1]

    @property
    def n_terms(self) -> int:
        return len(self.terms)


def phi_series(params: HshParams, n_terms: int | None = None, f: float | None = None) -> SutureSeries:
    """Build the alternating series starting at the first crossing after ``t1``.

    Parameters
    ----------
    n_terms : int, optional
        Number of lobes to append.  Defaults to the number of sign changes
        of the coupling between ``t0`` and ``tau`` (at least 2), which makes
        ``estimate`` an approximation of ``phi(tau)``.

    Raises
    ------
    NoCrossingError
        When ``theta`` never reaches a crossing level after ``t1``.
    """
    f = chirp_span(params) if f is None else f
    tau = params.tau
    t1 = params.edge_duration_t1
    th_end = theta(params, tau, f)
    k_max = int(math.floor((th_end - 0.5 * math.pi) / math.pi)) if th_end >= 0.5 * math.pi else -1
    roots = crossing_times(params, k_max, f)
    after = [(k, c) for k, c in enumerate(roots) if c > t1]
    if not after:
        raise NoCrossingError("no sign change of the coupling after the edge; pulse too short or slow")
    k0, t0 = after[0]
    if n_terms is None:
        n_terms = max(2, len(after) - 1)
    if n_terms < 2:
        raise ValueError("n_terms must be >= 2")

    a = params.linear_rate_r1 / (2.0 * params.edge_shape_T)
    b = (0.5 * f + hsh_chirp(params, t0)) / (2.0 * a)
    is_max = k0 % 2 == 0
    sigma = 1.0 if is_max else -1.0
    half_omega = 0.5 * params.omega_max

    terms = []
    prev = b
    for k in range(1, n_terms + 1):
        cur = math.sqrt(b * b + k * math.pi / a)
        terms.append(sigma * half_omega * (-1.0) ** k * (cur - prev))
        prev = cur
    phi_t0 = phi_numeric(params, t0, f)
    sums = np.concatenate([[phi_t0], phi_t0 + np.cumsum(terms)])
    return SutureSeries(
        a=a,
        b=b,
        t0=t0,
        phi_t0=phi_t0,
        terms=tuple(float(x) for x in terms),
        partial_sums=tuple(float(x) for x in sums),
        t0_is_maximum=is_max,
        crossings=tuple(c for _, c in after),
    )


def leibniz_tail_bound(series: SutureSeries, N: int) -> float:
    """``|term_{N+1}|``, bounding ``|phi_inf - partial_sums[N]|``."""
    if not 0 <= N < series.n_terms:
        raise ValueError(f"N must lie in [0, {series.n_terms - 1}]")
    return abs(series.terms[N])
