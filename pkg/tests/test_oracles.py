import math

import pytest

from sapkit.errors import ValidationError
from sapkit.oracles import landau_zener_asymptotic, landau_zener_finite, rabi_fidelity


def test_rabi_formula():
    assert rabi_fidelity(math.pi, 1.0) == pytest.approx(1.0)
    assert rabi_fidelity(2 * math.pi, 1.0) == pytest.approx(0.0, abs=1e-30)


def test_asymptotic_value():
    # 1 - exp(-pi * 4 / 8)
    assert landau_zener_asymptotic(2.0, 4.0) == pytest.approx(0.79212042364923809, rel=1e-15)


def test_finite_window_tends_to_asymptotic():
    target = landau_zener_asymptotic(2.0, 4.0)
    gaps = [abs(landau_zener_finite(2.0, 4.0, 2 * d / 4.0) - target) for d in (20, 80, 320)]
    assert gaps[-1] < 2e-3
    assert gaps[-1] < gaps[0]


def test_finite_window_sweep_symmetry():
    # exchanging the sweep direction cannot change the transfer probability
    assert landau_zener_finite(1.5, 3.0, 6.0) == pytest.approx(landau_zener_finite(1.5, 3.0, 6.0, dps=60), abs=1e-15)


def test_finite_window_precision_stable():
    a = landau_zener_finite(2.0, 4.0, 10.0, dps=30)
    b = landau_zener_finite(2.0, 4.0, 10.0, dps=60)
    assert a == pytest.approx(b, abs=1e-14)
    assert a == pytest.approx(0.81204151700084, abs=1e-12)


def test_rejects_bad_input():
    with pytest.raises(ValidationError):
        landau_zener_asymptotic(1.0, 0.0)
    with pytest.raises(ValidationError):
        landau_zener_finite(1.0, 1.0, -1.0)
