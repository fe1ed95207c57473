import numpy as np
import pytest
import scipy.special as ss

from blochsurf.errors import DomainError, SingularPoint
from blochsurf.special import FundamentalSolution, bessel_JY, hankel1


def test_frozen_reference_values():
    j0, y0 = bessel_JY(0, 1.0)
    assert abs(j0 - 0.7651976866) < 1e-9
    assert abs(y0 - 0.0882569642) < 1e-9


def test_small_argument_leading_term():
    x = 1e-5
    j1, _ = bessel_JY(1, x)
    assert abs(j1 - x / 2) < x ** 3  # remainder is x^3/16 + O(x^5)


def test_large_argument_against_oracle():
    x = 50.0
    for order in (0, 1):
        j, y = bessel_JY(order, x)
        assert abs(j - ss.jv(order, x)) < 1e-9
        assert abs(y - ss.yv(order, x)) < 1e-9


@pytest.mark.parametrize("order", [0, 1])
def test_dense_accuracy_sweep(order):
    x = np.concatenate([np.geomspace(1e-5, 0.5, 101),
                        np.linspace(0.5, 12.99, 4001),
                        np.linspace(13.01, 200.0, 4001)])
    j, y = bessel_JY(order, x)
    jr, yr = ss.jv(order, x), ss.yv(order, x)
    for f, fr in ((j, jr), (y, yr)):
        mask = np.abs(fr) > 1e-2  # relative accuracy away from the zeros
        assert np.max(np.abs(f - fr)[mask] / np.abs(fr)[mask]) < 1e-10


def test_domain_errors():
    with pytest.raises(DomainError):
        bessel_JY(0, 0.0)
    with pytest.raises(DomainError):
        bessel_JY(0, np.array([1.0, -2.0]))
    with pytest.raises(DomainError):
        bessel_JY(2, 1.0)


def test_fundamental_solution_value():
    # k |x - y| = 1 gives (i/4) (J0(1) + i Y0(1))
    phi = FundamentalSolution(1.0)
    v = phi.value(1.0, 0.0, 0.0, 0.0)
    assert abs(v - (-0.0220642 + 0.1912994j)) < 1e-6


def test_fundamental_solution_singular_point():
    phi = FundamentalSolution(2.0)
    with pytest.raises(SingularPoint):
        phi.value(0.3, 0.4, 0.3, 0.4)


def test_fundamental_gradient_matches_finite_differences():
    phi = FundamentalSolution(3.0)
    rng = np.random.default_rng(7)
    pts = rng.uniform(1.0, 2.0, size=(20, 2))
    y1, y2 = -0.5, 0.25
    d1, d2 = phi.gradient_x(pts[:, 0], pts[:, 1], y1, y2)
    eps = 1e-6
    fd1 = (phi.value(pts[:, 0] + eps, pts[:, 1], y1, y2)
           - phi.value(pts[:, 0] - eps, pts[:, 1], y1, y2)) / (2 * eps)
    fd2 = (phi.value(pts[:, 0], pts[:, 1] + eps, y1, y2)
           - phi.value(pts[:, 0], pts[:, 1] - eps, y1, y2)) / (2 * eps)
    assert np.max(np.abs(d1 - fd1)) < 1e-7
    assert np.max(np.abs(d2 - fd2)) < 1e-7


def test_hankel_shape_passthrough():
    x = np.linspace(0.5, 20.0, 64).reshape(8, 8)
    h = hankel1(0, x)
    assert h.shape == x.shape
    assert np.allclose(h, ss.hankel1(0, x), atol=1e-10)
