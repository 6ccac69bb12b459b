"""Vectorized numpy counterparts of ``_kernels``.

The batch propagator keeps an independent time and step size per detuning
point, so each point follows the same accept/reject sequence as the scalar
compiled kernel; only the bookkeeping is vectorized.
"""
from __future__ import annotations

import numpy as np

from . import _kernels as K


def lncosh(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - K.LN2


def profile_at(kind, prof, t):
    t = np.asarray(t, dtype=float)
    if kind == K.HSH:
        omega, T, r, r1, t1, t2 = (float(v) for v in prof[:6])
        c = r1 * t2 / (2.0 * T)
        base = -r * T * lncosh(t1 / T) - c * t1
        x_lo = (t - t1) / T
        x_hi = (t - t1 - t2) / T
        u = t - t1 - 0.5 * t2
        lo = t < t1
        hi = t > t1 + t2
        env = np.where(lo, omega / np.cosh(x_lo), np.where(hi, omega / np.cosh(x_hi), omega))
        chirp = np.where(
            lo, r * np.tanh(x_lo) - c, np.where(hi, r * np.tanh(x_hi) + c, r1 * u / T)
        )
        phase = np.where(
            lo,
            r * T * (lncosh(x_lo) - lncosh(t1 / T)) - c * t,
            np.where(
                hi,
                base + r * T * lncosh(x_hi) + c * (t - t1 - t2),
                base + r1 / (2.0 * T) * (u * u - 0.25 * t2 * t2),
            ),
        )
        return env, chirp, phase
    omega, v, dur = (float(x) for x in prof[:3])
    return np.full_like(t, omega), v * (t - 0.5 * dur), 0.5 * v * t * (t - dur)


def coupling(t, kind, prof, offsets, signs, scales, phases, amp, compact, fw):
    t = np.asarray(t, dtype=float)
    env, _, ph = profile_at(kind, prof, t)
    if compact:
        return (amp * env * np.cos(0.5 * fw * t + ph)).astype(complex)
    th = np.multiply.outer(t, offsets) + np.multiply.outer(ph, signs) + phases
    tones = (np.cos(th) - 1j * np.sin(th)) @ scales
    return 0.5 * amp * env * tones


def _rhs(t, ce, cs, delta, amp, tone_args):
    c = coupling(t, *tone_args[:6], amp, *tone_args[6:])
    hd = 0.5 * delta
    return -1j * (hd * ce + c * cs), -1j * (np.conj(c) * ce - hd * cs)


def dopri_batch(
    kind, prof, offsets, signs, scales, phases, compact, fw,
    deltas, amps, ce0, cs0, t_end, rtol, atol, max_step, h_init,
):
    deltas = np.asarray(deltas, dtype=float)
    amps = np.asarray(amps, dtype=float)
    n = deltas.shape[0]
    tone_args = (kind, prof, offsets, signs, scales, phases, compact, fw)
    eps16 = 16.0 * np.finfo(float).eps

    t = np.zeros(n)
    h = np.full(n, min(h_init, max_step, t_end))
    ce = np.full(n, ce0, dtype=complex)
    cs = np.full(n, cs0, dtype=complex)
    k1e, k1s = _rhs(t, ce, cs, deltas, amps, tone_args)
    nacc = np.zeros(n, dtype=np.int64)
    ntot = np.zeros(n, dtype=np.int64)
    status = np.full(n, K.OK, dtype=np.int64)
    active = np.ones(n, dtype=bool)

    while True:
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        over = ntot[idx] >= K.MAX_STEPS
        status[idx[over]] = K.TOO_MANY_STEPS
        tiny = h[idx] < eps16 * np.maximum(1.0, np.abs(t[idx]))
        status[idx[tiny & ~over]] = K.STEP_UNDERFLOW
        stop = over | tiny
        active[idx[stop]] = False
        idx = idx[~stop]
        if idx.size == 0:
            break

        ti, hi = t[idx], h[idx]
        last = ti + hi >= t_end
        hi = np.where(last, t_end - ti, hi)
        d, a = deltas[idx], amps[idx]
        y_e, y_s = ce[idx], cs[idx]
        a1e, a1s = k1e[idx], k1s[idx]

        k2e, k2s = _rhs(ti + K.C2 * hi, y_e + hi * K.A21 * a1e, y_s + hi * K.A21 * a1s, d, a, tone_args)
        k3e, k3s = _rhs(
            ti + K.C3 * hi,
            y_e + hi * (K.A31 * a1e + K.A32 * k2e),
            y_s + hi * (K.A31 * a1s + K.A32 * k2s),
            d, a, tone_args,
        )
        k4e, k4s = _rhs(
            ti + K.C4 * hi,
            y_e + hi * (K.A41 * a1e + K.A42 * k2e + K.A43 * k3e),
            y_s + hi * (K.A41 * a1s + K.A42 * k2s + K.A43 * k3s),
            d, a, tone_args,
        )
        k5e, k5s = _rhs(
            ti + K.C5 * hi,
            y_e + hi * (K.A51 * a1e + K.A52 * k2e + K.A53 * k3e + K.A54 * k4e),
            y_s + hi * (K.A51 * a1s + K.A52 * k2s + K.A53 * k3s + K.A54 * k4s),
            d, a, tone_args,
        )
        k6e, k6s = _rhs(
            ti + hi,
            y_e + hi * (K.A61 * a1e + K.A62 * k2e + K.A63 * k3e + K.A64 * k4e + K.A65 * k5e),
            y_s + hi * (K.A61 * a1s + K.A62 * k2s + K.A63 * k3s + K.A64 * k4s + K.A65 * k5s),
            d, a, tone_args,
        )
        ne = y_e + hi * (K.B1 * a1e + K.B3 * k3e + K.B4 * k4e + K.B5 * k5e + K.B6 * k6e)
        ns = y_s + hi * (K.B1 * a1s + K.B3 * k3s + K.B4 * k4s + K.B5 * k5s + K.B6 * k6s)
        k7e, k7s = _rhs(ti + hi, ne, ns, d, a, tone_args)
        ee = hi * (K.E1 * a1e + K.E3 * k3e + K.E4 * k4e + K.E5 * k5e + K.E6 * k6e + K.E7 * k7e)
        es = hi * (K.E1 * a1s + K.E3 * k3s + K.E4 * k4s + K.E5 * k5s + K.E6 * k6s + K.E7 * k7s)
        sc_e = atol + rtol * np.maximum(np.abs(y_e), np.abs(ne))
        sc_s = atol + rtol * np.maximum(np.abs(y_s), np.abs(ns))
        err = np.sqrt(0.5 * ((np.abs(ee) / sc_e) ** 2 + (np.abs(es) / sc_s) ** 2))
        ntot[idx] += 1

        ok = err <= 1.0
        acc = idx[ok]
        t[acc] = np.where(last[ok], t_end, ti[ok] + hi[ok])
        ce[acc] = ne[ok]
        cs[acc] = ns[ok]
        k1e[acc] = k7e[ok]
        k1s[acc] = k7s[ok]
        nacc[acc] += 1
        with np.errstate(divide="ignore"):
            grow = np.where(err[ok] == 0.0, K.MAX_FACTOR,
                            np.minimum(K.MAX_FACTOR, K.SAFETY * err[ok] ** -0.2))
        h[acc] = np.minimum(hi[ok] * grow, max_step)
        active[acc[last[ok]]] = False

        rej = idx[~ok]
        h[rej] = hi[~ok] * np.maximum(K.MIN_FACTOR, K.SAFETY * err[~ok] ** -0.2)

    return ce, cs, nacc, status


def rk4_batch(
    kind, prof, offsets, signs, scales, phases, compact, fw,
    deltas, amps, ce0, cs0, t_end, nsteps,
):
    deltas = np.asarray(deltas, dtype=float)
    amps = np.asarray(amps, dtype=float)
    n = deltas.shape[0]
    tone_args = (kind, prof, offsets, signs, scales, phases, compact, fw)
    ce = np.full(n, ce0, dtype=complex)
    cs = np.full(n, cs0, dtype=complex)
    h = t_end / nsteps
    for j in range(nsteps):
        t = np.full(n, j * h)
        tn = np.full(n, t_end if j == nsteps - 1 else j * h + h)
        k1e, k1s = _rhs(t, ce, cs, deltas, amps, tone_args)
        k2e, k2s = _rhs(t + 0.5 * h, ce + 0.5 * h * k1e, cs + 0.5 * h * k1s, deltas, amps, tone_args)
        k3e, k3s = _rhs(t + 0.5 * h, ce + 0.5 * h * k2e, cs + 0.5 * h * k2s, deltas, amps, tone_args)
        k4e, k4s = _rhs(tn, ce + h * k3e, cs + h * k3s, deltas, amps, tone_args)
        ce = ce + h / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e)
        cs = cs + h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
    return ce, cs


def coupling_series(kind, prof, offsets, signs, scales, phases, amp, compact, fw, ts):
    return coupling(np.asarray(ts, dtype=float), kind, prof, offsets, signs, scales, phases,
                    amp, compact, fw)
