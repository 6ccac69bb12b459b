"""Compiled scalar kernels: pulse profiles, coupling and two-level propagators.

Every function here works on plain floats and flat float arrays so numba can
compile it in nopython mode.  The vectorized twin lives in ``_numpy_kernels``
and must stay numerically interchangeable with this file.

Profile kinds
-------------
HSH (0)
    ``prof = [omega, T, r, r1, t1, t2]``
LINEAR (1)
    ``prof = [omega, rate, duration]``; constant envelope, chirp
    ``rate * (t - duration / 2)``.  Oracle profile for Rabi and
    Landau-Zener limits.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import njit

HSH = 0
LINEAR = 1

OK = 0
STEP_UNDERFLOW = 1
TOO_MANY_STEPS = 2

LN2 = math.log(2.0)

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
MAX_STEPS = 5_000_000


@njit
def lncosh(x):
    ax = abs(x)
    return ax + math.log1p(math.exp(-2.0 * ax)) - LN2


@njit
def profile_at(kind, prof, t):
    """Return ``(envelope, chirp, chirp_phase)`` at time ``t``."""
    if kind == HSH:
        omega = prof[0]
        T = prof[1]
        r = prof[2]
        r1 = prof[3]
        t1 = prof[4]
        t2 = prof[5]
        c = r1 * t2 / (2.0 * T)
        if t < t1:
            x = (t - t1) / T
            env = omega / math.cosh(x)
            chirp = r * math.tanh(x) - c
            phase = r * T * (lncosh(x) - lncosh(t1 / T)) - c * t
        elif t <= t1 + t2:
            u = t - t1 - 0.5 * t2
            env = omega
            chirp = r1 * u / T
            base = -r * T * lncosh(t1 / T) - c * t1
            phase = base + r1 / (2.0 * T) * (u * u - 0.25 * t2 * t2)
        else:
            x = (t - t1 - t2) / T
            env = omega / math.cosh(x)
            chirp = r * math.tanh(x) + c
            base = -r * T * lncosh(t1 / T) - c * t1
            phase = base + r * T * lncosh(x) + c * (t - t1 - t2)
        return env, chirp, phase
    omega = prof[0]
    v = prof[1]
    dur = prof[2]
    return omega, v * (t - 0.5 * dur), 0.5 * v * t * (t - dur)


@njit
def coupling(t, kind, prof, offsets, signs, scales, phases, amp, compact, fw):
    """Complex ``<e|H|s>`` element in the band-centre rotating frame."""
    env, _, ph = profile_at(kind, prof, t)
    if compact:
        return complex(amp * env * math.cos(0.5 * fw * t + ph), 0.0)
    re = 0.0
    im = 0.0
    for m in range(offsets.shape[0]):
        th = offsets[m] * t + signs[m] * ph + phases[m]
        re += scales[m] * math.cos(th)
        im -= scales[m] * math.sin(th)
    h = 0.5 * amp * env
    return complex(h * re, h * im)


@njit
def _rhs(t, ce, cs, delta, kind, prof, offsets, signs, scales, phases, amp, compact, fw):
    c = coupling(t, kind, prof, offsets, signs, scales, phases, amp, compact, fw)
    hd = 0.5 * delta
    dce = -1j * (hd * ce + c * cs)
    dcs = -1j * (c.conjugate() * ce - hd * cs)
    return dce, dcs


@njit
def dopri_single(
    kind, prof, offsets, signs, scales, phases, amp, compact, fw,
    delta, ce, cs, t_end, rtol, atol, max_step, h_init,
):
    """Adaptive Dormand-Prince 5(4) propagation of one state over ``[0, t_end]``.

    Returns ``(ce, cs, accepted_steps, status)``.
    """
    t = 0.0
    h = min(h_init, max_step, t_end)
    k1e, k1s = _rhs(t, ce, cs, delta, kind, prof, offsets, signs, scales, phases, amp, compact, fw)
    nacc = 0
    ntot = 0
    while t < t_end:
        if ntot >= MAX_STEPS:
            return ce, cs, nacc, TOO_MANY_STEPS
        if h < 16.0 * 2.220446049250313e-16 * max(1.0, abs(t)):
            return ce, cs, nacc, STEP_UNDERFLOW
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        ye = ce + h * A21 * k1e
        ys = cs + h * A21 * k1s
        k2e, k2s = _rhs(t + C2 * h, ye, ys, delta, kind, prof, offsets, signs, scales, phases, amp, compact, fw)
        ye = ce + h * (A31 * k1e + A32 * k2e)
        ys = cs + h * (A31 * k1s + A32 * k2s)
        k3e, k3s = _rhs(t + C3 * h, ye, ys, delta, kind, prof, offsets, signs, scales, phases, amp, compact, fw)
        ye = ce + h * (A41 * k1e + A42 * k2e + A43 * k3e)
        ys = cs + h * (A41 * k1s + A42 * k2s + A43 * k3s)
        k4e, k4s = _rhs(t + C4 * h, ye, ys, delta, kind, prof, offsets, signs, scales, phases, amp, compact, fw)
        ye = ce + h * (A51 * k1e + A52 * k2e + A53 * k3e + A54 * k4e)
        ys = cs + h * (A51 * k1s + A52 * k2s + A53 * k3s + A54 * k4s)
        k5e, k5s = _rhs(t + C5 * h, ye, ys, delta, kind, prof, offsets, signs, scales, phases, amp, compact, fw)
        ye = ce + h * (A61 * k1e + A62 * k2e + A63 * k3e + A64 * k4e + A65 * k5e)
        ys = cs + h * (A61 * k1s + A62 * k2s + A63 * k3s + A64 * k4s + A65 * k5s)
        k6e, k6s = _rhs(t + h, ye, ys, delta, kind, prof, offsets, signs, scales, phases, amp, compact, fw)
        ne = ce + h * (B1 * k1e + B3 * k3e + B4 * k4e + B5 * k5e + B6 * k6e)
        ns = cs + h * (B1 * k1s + B3 * k3s + B4 * k4s + B5 * k5s + B6 * k6s)
        k7e, k7s = _rhs(t + h, ne, ns, delta, kind, prof, offsets, signs, scales, phases, amp, compact, fw)
        ee = h * (E1 * k1e + E3 * k3e + E4 * k4e + E5 * k5e + E6 * k6e + E7 * k7e)
        es = h * (E1 * k1s + E3 * k3s + E4 * k4s + E5 * k5s + E6 * k6s + E7 * k7s)
        sc_e = atol + rtol * max(abs(ce), abs(ne))
        sc_s = atol + rtol * max(abs(cs), abs(ns))
        err = math.sqrt(0.5 * ((abs(ee) / sc_e) ** 2 + (abs(es) / sc_s) ** 2))
        ntot += 1
        if err <= 1.0:
            t = t_end if last else t + h
            ce = ne
            cs = ns
            k1e = k7e
            k1s = k7s
            nacc += 1
            if err == 0.0:
                fac = MAX_FACTOR
            else:
                fac = min(MAX_FACTOR, SAFETY * err ** -0.2)
            h = min(h * fac, max_step)
        else:
            h = h * max(MIN_FACTOR, SAFETY * err ** -0.2)
    return ce, cs, nacc, OK


@njit
def dopri_batch(
    kind, prof, offsets, signs, scales, phases, compact, fw,
    deltas, amps, ce0, cs0, t_end, rtol, atol, max_step, h_init,
):
    n = deltas.shape[0]
    out_e = np.empty(n, dtype=np.complex128)
    out_s = np.empty(n, dtype=np.complex128)
    steps = np.empty(n, dtype=np.int64)
    status = np.empty(n, dtype=np.int64)
    for i in range(n):
        e, s, k, st = dopri_single(
            kind, prof, offsets, signs, scales, phases, amps[i], compact, fw,
            deltas[i], ce0, cs0, t_end, rtol, atol, max_step, h_init,
        )
        out_e[i] = e
        out_s[i] = s
        steps[i] = k
        status[i] = st
    return out_e, out_s, steps, status


@njit
def rk4_batch(
    kind, prof, offsets, signs, scales, phases, compact, fw,
    deltas, amps, ce0, cs0, t_end, nsteps,
):
    """Fixed-step classical Runge-Kutta; the oracle for the adaptive path."""
    n = deltas.shape[0]
    out_e = np.empty(n, dtype=np.complex128)
    out_s = np.empty(n, dtype=np.complex128)
    h = t_end / nsteps
    for i in range(n):
        d = deltas[i]
        a = amps[i]
        ce = ce0
        cs = cs0
        for j in range(nsteps):
            t = j * h
            k1e, k1s = _rhs(t, ce, cs, d, kind, prof, offsets, signs, scales, phases, a, compact, fw)
            k2e, k2s = _rhs(t + 0.5 * h, ce + 0.5 * h * k1e, cs + 0.5 * h * k1s, d,
                            kind, prof, offsets, signs, scales, phases, a, compact, fw)
            k3e, k3s = _rhs(t + 0.5 * h, ce + 0.5 * h * k2e, cs + 0.5 * h * k2s, d,
                            kind, prof, offsets, signs, scales, phases, a, compact, fw)
            tn = t_end if j == nsteps - 1 else t + h
            k4e, k4s = _rhs(tn, ce + h * k3e, cs + h * k3s, d,
                            kind, prof, offsets, signs, scales, phases, a, compact, fw)
            ce = ce + h / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e)
            cs = cs + h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
        out_e[i] = ce
        out_s[i] = cs
    return out_e, out_s


@njit
def coupling_series(kind, prof, offsets, signs, scales, phases, amp, compact, fw, ts):
    out = np.empty(ts.shape[0], dtype=np.complex128)
    for i in range(ts.shape[0]):
        out[i] = coupling(ts[i], kind, prof, offsets, signs, scales, phases, amp, compact, fw)
    return out
