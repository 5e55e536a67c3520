import math
from pathlib import Path

import numpy as np
import pytest
from scipy.special import erfc
from scipy.integrate import quad

from fracwalk import MlParams, mittag_leffler, ml_density, ml_survival, ml_tail_asymptote
from fracwalk.mlf import _SERIES_ABS_CAP, _SERIES_EXPONENT_CAP, _ml_integral, _ml_series

ORACLE = np.load(Path(__file__).parent / "data" / "ml_oracle.npy")


def test_against_quadrature_oracle():
    # 40-digit reference values of the real integral representation
    # (see tests/data/make_ml_oracle.py), cross-checked against an
    # extended-precision Taylor series and E_{1/2}(-x) = e^{x^2} erfc(x).
    worst = 0.0
    for alpha, beta, z, ref in ORACLE:
        got = mittag_leffler(MlParams(alpha, beta), z)
        worst = max(worst, abs(got - ref) / abs(ref))
    assert worst <= 1e-8


def test_exponential_case():
    for z in np.linspace(-50.0, 0.0, 100):
        assert mittag_leffler(MlParams(1.0), z) == pytest.approx(math.exp(z), rel=1e-12)


def test_trivial_values():
    assert mittag_leffler(MlParams(0.7), 0.0) == 1.0
    assert mittag_leffler(MlParams(0.4, 2.5), 0.0) == pytest.approx(1.0 / math.gamma(2.5), rel=1e-14)
    assert mittag_leffler(MlParams(1.0), -2.0) == pytest.approx(math.exp(-2.0), rel=1e-14)


def test_half_order_erfc_identity():
    # E_{1/2}(-x) = exp(x^2) erfc(x)
    for x in (0.3, 1.0, 2.0, 3.5):
        assert mittag_leffler(MlParams(0.5), -x) == pytest.approx(
            math.exp(x * x) * erfc(x), rel=1e-10
        )
    assert mittag_leffler(MlParams(0.5), -1.0) == pytest.approx(0.42758357615580700, rel=1e-10)


def test_monotone_decreasing_on_negative_axis():
    for alpha in (0.3, 0.5, 0.8, 1.0):
        vals = [mittag_leffler(MlParams(alpha), -x) for x in np.linspace(0.0, 40.0, 200)]
        assert all(a > b > 0.0 for a, b in zip(vals, vals[1:]))


def test_series_integral_crossover_continuity():
    # the two evaluation branches must agree near the hand-off region
    for alpha in (0.4, 0.6, 0.9):
        for beta in (1.0, alpha):
            zc = -min(_SERIES_ABS_CAP, _SERIES_EXPONENT_CAP**alpha)
            for z in (zc * 0.98, zc * 0.9):
                assert _ml_series(alpha, beta, z) == pytest.approx(
                    _ml_integral(alpha, beta, z), abs=1e-7
                )


def test_survival_values():
    assert ml_survival(1.0, 2.0, 1.0) == pytest.approx(math.exp(-2.0), rel=1e-14)
    assert ml_survival(0.7, 3.0, 0.0) == 1.0
    # E_{1/2}(-2) = exp(4) erfc(2)
    assert ml_survival(0.5, 1.0, 4.0) == pytest.approx(0.25539567631050574, rel=1e-9)


def test_density_values_and_derivative():
    assert ml_density(1.0, 3.0, 0.5) == pytest.approx(3.0 * math.exp(-1.5), rel=1e-14)
    # density = -d/dt survival (central difference + Richardson)
    t, h = 1.0, 1e-4
    d1 = (ml_survival(0.5, 1.0, t - h) - ml_survival(0.5, 1.0, t + h)) / (2 * h)
    d2 = (ml_survival(0.5, 1.0, t - h / 2) - ml_survival(0.5, 1.0, t + h / 2)) / h
    richardson = (4 * d2 - d1) / 3
    assert ml_density(0.5, 1.0, t) == pytest.approx(richardson, rel=1e-6)


def test_density_integrates_to_survival_complement():
    for alpha, lam in ((0.5, 1.0), (0.8, 2.0)):
        T = 5.0
        val, _ = quad(lambda t: ml_density(alpha, lam, t), 0.0, T, points=[0.0], limit=200)
        assert val == pytest.approx(1.0 - ml_survival(alpha, lam, T), abs=1e-6)


def test_density_laplace_transform():
    # int_0^inf e^{-st} density dt = lam / (lam + s^alpha)
    alpha, lam, s = 0.5, 1.0, 1.0
    val, _ = quad(lambda t: math.exp(-s * t) * ml_density(alpha, lam, t), 0.0, np.inf, limit=400)
    assert val == pytest.approx(lam / (lam + s**alpha), abs=1e-6)


def test_tail_asymptote_values_and_ratio():
    assert ml_tail_asymptote(0.5, 1.0, 100.0) == pytest.approx(
        100.0**-0.5 / math.sqrt(math.pi), rel=1e-14
    )
    assert ml_tail_asymptote(0.9, 2.0, 1e4) == pytest.approx(
        1e4**-0.9 / (2.0 * math.gamma(0.1)), rel=1e-14
    )
    for alpha, lam in ((0.5, 1.0), (0.3, 1.0), (0.8, 2.0)):
        ratio = ml_survival(alpha, lam, 1e6) / ml_tail_asymptote(alpha, lam, 1e6)
        assert 0.99 <= ratio <= 1.01
    # 1% agreement already at t = 1e4 for alpha = 0.6
    ratio = ml_survival(0.6, 1.0, 1e4) / ml_tail_asymptote(0.6, 1.0, 1e4)
    assert 0.99 <= ratio <= 1.01


def test_domain_errors():
    with pytest.raises(ValueError):
        mittag_leffler(MlParams(0.5), 0.1)
    with pytest.raises(ValueError):
        MlParams(0.0)
    with pytest.raises(ValueError):
        MlParams(1.2)
    with pytest.raises(ValueError):
        MlParams(0.5, 0.0)
    with pytest.raises(ValueError):
        ml_survival(0.5, -1.0, 1.0)
    with pytest.raises(ValueError):
        ml_survival(0.5, 1.0, -1.0)
    with pytest.raises(ValueError):
        ml_density(0.5, 1.0, 0.0)
    with pytest.raises(ValueError):
        ml_tail_asymptote(1.0, 1.0, 10.0)
