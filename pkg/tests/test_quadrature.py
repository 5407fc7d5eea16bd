import math

import numpy as np
import pytest
from scipy.integrate import quad

from firstloss import QuadratureError, integrate


def test_gaussian_mass():
    f = lambda w: np.exp(-0.5 * w * w) / math.sqrt(2 * math.pi)
    assert integrate(f, -10.0, 10.0) == pytest.approx(1.0, abs=1e-13)


def test_polynomial_exact():
    f = lambda x: 3 * x**2 + 2 * x + 1
    assert integrate(f, -1.0, 2.0) == pytest.approx(9.0 + 3.0 + 3.0, rel=1e-14)


def test_empty_interval():
    assert integrate(lambda x: x, 1.0, 1.0) == 0.0
    assert integrate(lambda x: x, 2.0, 1.0) == 0.0


def test_kinked_integrand_with_breakpoints():
    f = lambda x: np.abs(x - 0.3) ** 1.5
    mine = integrate(f, -1.0, 1.0, breakpoints=[0.3])
    exact = (1.3**2.5 + 0.7**2.5) / 2.5
    assert mine == pytest.approx(exact, abs=1e-10)
    ref, _ = quad(lambda x: abs(x - 0.3) ** 1.5, -1.0, 1.0, points=[0.3], epsabs=1e-14)
    assert mine == pytest.approx(ref, abs=1e-9)


def test_rough_integrand_converges_or_raises():
    # an integrable singularity defeats fixed-order panels
    f = lambda x: 1.0 / np.sqrt(np.abs(x) + 1e-300)
    with pytest.raises(QuadratureError):
        integrate(f, -1.0, 1.0, rel_tol=1e-13, abs_tol=1e-15)
