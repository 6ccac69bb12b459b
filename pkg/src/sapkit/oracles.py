"""Closed-form reference values for the propagators.

``landau_zener_asymptotic`` is the textbook infinite-sweep result.  A sweep
that starts and stops abruptly at finite detuning ``+-D`` differs from it by
an oscillating correction that decays only like ``Omega/D``; at ``D = 10
Omega`` the correction is of order 1e-2.  ``landau_zener_finite`` removes it
by solving the finite-window problem exactly in parabolic cylinder
functions.
"""
from __future__ import annotations

import math

import mpmath as mp

from .errors import ValidationError


def rabi_fidelity(omega: float, tau: float) -> float:
    """``sin^2(Omega tau / 2)``: resonant constant drive."""
    return math.sin(0.5 * omega * tau) ** 2


def landau_zener_asymptotic(omega: float, rate: float) -> float:
    """``1 - exp(-pi Omega^2 / (2 v))``: transfer for an infinite linear sweep."""
    if not rate > 0:
        raise ValidationError("sweep rate must be positive")
    return 1.0 - math.exp(-math.pi * omega * omega / (2.0 * rate))


def landau_zener_finite(omega: float, rate: float, duration: float, dps: int = 40) -> float:
    """Exact transfer for ``H = (v s/2) sz + (Omega/2) sx``, ``s`` in ``[-duration/2, duration/2]``.

    With ``g = Omega/2`` the upper amplitude obeys the Weber equation
    ``a'' + (g^2 + i v/2 + v^2 s^2/4) a = 0``, solved by ``D_nu(+-kappa s)``
    with ``kappa = sqrt(i v)`` and ``nu = -i g^2 / v``.  The lower amplitude
    follows from ``b = (i a' - (v s/2) a) / g``.  Starting from ``a = 1``,
    ``b = 0`` the result is ``|b(duration/2)|^2``.
    """
    if not (rate > 0 and omega > 0 and duration > 0):
        raise ValidationError("omega, rate and duration must be positive")
    with mp.workdps(dps):
        g = mp.mpf(omega) / 2
        v = mp.mpf(rate)
        s0 = mp.mpf(duration) / 2
        kappa = mp.sqrt(1j * v)
        nu = -1j * g * g / v

        def basis(s):
            # (a, a') for D_nu(kappa s) and D_nu(-kappa s)
            out = []
            for sign in (1, -1):
                z = sign * kappa * s
                d0 = mp.pcfd(nu, z)
                dprime = z / 2 * d0 - mp.pcfd(nu + 1, z)
                out.append((d0, sign * kappa * dprime))
            return out

        (u1, du1), (u2, du2) = basis(-s0)
        a0 = mp.mpc(1)
        da0 = -1j * (v * (-s0) / 2) * a0
        det = u1 * du2 - u2 * du1
        c1 = (a0 * du2 - u2 * da0) / det
        c2 = (u1 * da0 - a0 * du1) / det
        (w1, dw1), (w2, dw2) = basis(s0)
        a = c1 * w1 + c2 * w2
        da = c1 * dw1 + c2 * dw2
        b = (1j * da - (v * s0 / 2) * a) / g
        return float(abs(b) ** 2)
