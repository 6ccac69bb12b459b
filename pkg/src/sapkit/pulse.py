"""HSH pulse profiles and their assembly into n-tone suture pulses.

Units throughout: angular frequencies in rad/us, times in us.
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels as K
from . import _numpy_kernels as NK
from .errors import DomainError, ValidationError

DEFAULT_ATTENUATION = 0.95


@dataclass(frozen=True)
class HshParams:
    """Hyperbolic-square-hyperbolic profile.

    Attributes
    ----------
    omega_max : float
        Peak Rabi frequency, rad/us.
    edge_shape_T : float
        Hyperbolic shape constant, us.
    edge_rate_r : float
        Edge sweep amplitude, rad/us.
    linear_rate_r1 : float
        Linear-part sweep scale, rad/us; the mid-pulse chirp slope is
        ``linear_rate_r1 / edge_shape_T``.
    edge_duration_t1, center_duration_t2 : float
        Durations of each edge and of the linear centre, us.
    """

    omega_max: float
    edge_shape_T: float
    edge_rate_r: float
    linear_rate_r1: float
    edge_duration_t1: float
    center_duration_t2: float

    kind = K.HSH

    def __post_init__(self):
        for name in (
            "omega_max",
            "edge_shape_T",
            "edge_rate_r",
            "linear_rate_r1",
            "edge_duration_t1",
            "center_duration_t2",
        ):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, numbers.Real):
                raise ValidationError(f"{name} must be a real number, got {value!r}")
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be finite and positive, got {value!r}")
            object.__setattr__(self, name, float(value))

    @classmethod
    def from_duration(cls, omega_max, edge_shape_T, edge_rate_r, linear_rate_r1,
                      edge_duration_t1, tau) -> "HshParams":
        """Build from total duration ``tau``; the centre gets ``tau - 2*t1``."""
        t2 = tau - 2.0 * edge_duration_t1
        if not t2 > 0:
            raise ValidationError(
                f"tau={tau} leaves no linear segment for t1={edge_duration_t1} (need tau > 2*t1)"
            )
        return cls(omega_max, edge_shape_T, edge_rate_r, linear_rate_r1, edge_duration_t1, t2)

    @property
    def tau(self) -> float:
        return 2.0 * self.edge_duration_t1 + self.center_duration_t2

    @property
    def duration(self) -> float:
        return self.tau

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.omega_max,
                self.edge_shape_T,
                self.edge_rate_r,
                self.linear_rate_r1,
                self.edge_duration_t1,
                self.center_duration_t2,
            ],
            dtype=float,
        )

    def to_dict(self) -> dict:
        return {
            "omega_max": self.omega_max,
            "edge_shape_T": self.edge_shape_T,
            "edge_rate_r": self.edge_rate_r,
            "linear_rate_r1": self.linear_rate_r1,
            "edge_duration_t1": self.edge_duration_t1,
            "center_duration_t2": self.center_duration_t2,
        }


@dataclass(frozen=True)
class LinearChirp:
    """Constant-envelope linear sweep ``rate * (t - duration/2)``.

    Not a physical SAP component; it exists so the propagators can be checked
    against the Rabi (``rate=0``) and Landau-Zener limits.  ``omega_max=0``
    is allowed and gives an uncoupled atom.
    """

    omega_max: float
    rate: float
    duration_: float

    kind = K.LINEAR

    def __post_init__(self):
        if not (math.isfinite(self.omega_max) and self.omega_max >= 0):
            raise ValidationError("omega_max must be finite and non-negative")
        if not (math.isfinite(self.rate) and self.rate >= 0):
            raise ValidationError("rate must be finite and non-negative")
        if not (math.isfinite(self.duration_) and self.duration_ > 0):
            raise ValidationError("duration must be positive")

    @property
    def tau(self) -> float:
        return self.duration_

    @property
    def duration(self) -> float:
        return self.duration_

    def as_array(self) -> np.ndarray:
        return np.array([self.omega_max, self.rate, self.duration_], dtype=float)

    def to_dict(self) -> dict:
        return {"omega_max": self.omega_max, "rate": self.rate, "duration": self.duration_}


Profile = HshParams | LinearChirp


def _check_domain(profile: Profile, t) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    tau = profile.tau
    slack = 1e-12 * tau
    if np.any(~np.isfinite(arr)) or np.any(arr < -slack) or np.any(arr > tau + slack):
        raise DomainError(f"t must lie in [0, {tau}]")
    return np.clip(arr, 0.0, tau)


def _scalarize(value, like):
    return float(value) if np.ndim(like) == 0 else value


def hsh_chirp(params: Profile, t):
    """Chirp (instantaneous detuning) of the profile at ``t``, rad/us."""
    tt = _check_domain(params, t)
    return _scalarize(NK.profile_at(params.kind, params.as_array(), tt)[1], t)


def hsh_envelope(params: Profile, t):
    """Rabi envelope of the profile at ``t``, rad/us."""
    tt = _check_domain(params, t)
    return _scalarize(NK.profile_at(params.kind, params.as_array(), tt)[0], t)


def chirp_phase(params: Profile, t):
    """Closed-form running integral of the chirp from 0 to ``t``, rad.

    The hyperbolic edges integrate to log-cosh terms, the centre to a
    quadratic; the result is C1 in ``t`` and vanishes at both ends.
    """
    tt = _check_domain(params, t)
    return _scalarize(NK.profile_at(params.kind, params.as_array(), tt)[2], t)


def chirp_span(params: Profile) -> float:
    """Total frequency excursion ``chirp(tau) - chirp(0)``."""
    if params.kind == K.LINEAR:
        return params.rate * params.duration_
    p = params
    return (
        2.0 * p.edge_rate_r * math.tanh(p.edge_duration_t1 / p.edge_shape_T)
        + p.linear_rate_r1 * p.center_duration_t2 / p.edge_shape_T
    )


@dataclass(frozen=True)
class SapPulse:
    """n simultaneous copies of one profile on adjacent frequency windows.

    Tone ``m`` (1-based) sits at ``((n+1)/2 - m) * window_width_f`` from the
    band centre, its chirp phase multiplied by ``chirp_signs[m-1]``.
    ``window_width_f`` already includes ``delta_f_shift``.
    """

    base: Profile
    n_components: int
    window_width_f: float
    tone_offsets: tuple[float, ...]
    chirp_signs: tuple[int, ...]
    amplitude_scales: tuple[float, ...]
    tone_phases: tuple[float, ...]
    delta_f_shift: float = 0.0

    def __post_init__(self):
        n = self.n_components
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ValidationError(f"n_components must be an integer >= 1, got {n!r}")
        for name in ("tone_offsets", "chirp_signs", "amplitude_scales", "tone_phases"):
            if len(getattr(self, name)) != n:
                raise ValidationError(f"{name} must have length {n}")
        if any(s not in (1, -1) for s in self.chirp_signs):
            raise ValidationError("chirp_signs entries must be +1 or -1")
        scales = self.amplitude_scales
        if any(not (0.0 < a <= 1.0) for a in scales):
            raise ValidationError("amplitude_scales must lie in (0, 1]")
        if any(scales[i + 1] > scales[i] for i in range(n - 1)):
            raise ValidationError("amplitude_scales must be non-increasing")
        if not math.isfinite(self.window_width_f):
            raise ValidationError("window_width_f must be finite")

    @property
    def tau(self) -> float:
        return self.base.tau

    @property
    def band_width(self) -> float:
        """Nominal covered band ``n * chirp_span``."""
        return self.n_components * chirp_span(self.base)

    def arrays(self):
        return (
            np.asarray(self.tone_offsets, dtype=float),
            np.asarray(self.chirp_signs, dtype=float),
            np.asarray(self.amplitude_scales, dtype=float),
            np.asarray(self.tone_phases, dtype=float),
        )

    def to_dict(self) -> dict:
        return {
            "profile": type(self.base).__name__,
            "base": self.base.to_dict(),
            "n_components": int(self.n_components),
            "window_width_f": self.window_width_f,
            "tone_offsets": list(self.tone_offsets),
            "chirp_signs": list(self.chirp_signs),
            "amplitude_scales": list(self.amplitude_scales),
            "tone_phases": list(self.tone_phases),
            "delta_f_shift": self.delta_f_shift,
        }


def tone_phases_from(n: int, phases: Sequence[float] | int | None) -> tuple[float, ...]:
    """Explicit phases, or ``n`` uniform draws on ``[0, 2pi)`` from a PCG64 seed."""
    if phases is None:
        return (0.0,) * n
    if isinstance(phases, (int, np.integer)) and not isinstance(phases, bool):
        rng = np.random.Generator(np.random.PCG64(int(phases)))
        return tuple(float(x) for x in rng.uniform(0.0, 2.0 * math.pi, size=n))
    values = tuple(float(x) for x in phases)
    if len(values) != n:
        raise ValidationError(f"expected {n} tone phases, got {len(values)}")
    return values


def build_sap(
    params: Profile,
    n: int = 1,
    attenuation: float = DEFAULT_ATTENUATION,
    phases: Sequence[float] | int | None = None,
    delta_f: float = 0.0,
    same_chirp: bool = False,
) -> SapPulse:
    """Assemble an n-component suture pulse around ``params``.

    Parameters
    ----------
    params : HshParams or LinearChirp
        Shared profile of every tone.
    n : int
        Number of tones.
    attenuation : float
        Per-pass amplitude factor; tone ``m`` is scaled by ``attenuation**(m-1)``.
    phases : sequence of float, int or None
        Tone phases, an integer seed for uniform random phases, or None for zeros.
    delta_f : float
        Window-shift error added to the seamless spacing ``chirp_span(params)``.
        Negative values overlap adjacent windows, positive values separate them.
    same_chirp : bool
        Chirp every tone in the same direction instead of alternating.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise ValidationError(f"n must be an integer >= 1, got {n!r}")
    if not (0.0 < attenuation <= 1.0):
        raise ValidationError(f"attenuation must lie in (0, 1], got {attenuation!r}")
    if not math.isfinite(delta_f):
        raise ValidationError("delta_f must be finite")
    f = chirp_span(params) + delta_f
    offsets = tuple(((n + 1) / 2.0 - m) * f for m in range(1, n + 1))
    if same_chirp:
        signs = (1,) * n
    else:
        signs = tuple(1 if m % 2 == 1 else -1 for m in range(1, n + 1))
    scales = tuple(float(attenuation) ** (m - 1) for m in range(1, n + 1))
    return SapPulse(
        base=params,
        n_components=int(n),
        window_width_f=f,
        tone_offsets=offsets,
        chirp_signs=signs,
        amplitude_scales=scales,
        tone_phases=tone_phases_from(n, phases),
        delta_f_shift=float(delta_f),
    )
