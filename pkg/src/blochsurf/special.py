"""Bessel functions of orders 0 and 1 and the 2-D Helmholtz fundamental solution.

The Bessel pair (J_n, Y_n) is evaluated from the ascending power series for
small arguments and from the Hankel asymptotic expansion for large arguments.
The crossover sits at x = 13: below it the series round-off stays near 1e-12
relative, above it the optimally truncated asymptotic tail is below 1e-11.
"""

import numpy as np

from .errors import DomainError, SingularPoint

EULER_GAMMA = 0.57721566490153286061
_CROSSOVER = 13.0
_TINY = 1e-300


def _harmonic_numbers(n):
    h = np.zeros(n + 1)
    h[1:] = np.cumsum(1.0 / np.arange(1, n + 1))
    return h


_HARMONIC = _harmonic_numbers(40)


def _asymptotic_coeffs(nu, m_max=24):
    """Coefficients a_m = prod_{l=1..m} (4 nu^2 - (2l-1)^2) / (m! 8^m)."""
    a = np.empty(m_max + 1)
    a[0] = 1.0
    for m in range(1, m_max + 1):
        a[m] = a[m - 1] * (4.0 * nu * nu - (2 * m - 1) ** 2) / (m * 8.0)
    return a


_ASYM = {0: _asymptotic_coeffs(0), 1: _asymptotic_coeffs(1)}


def _kahan(sum_, comp, term):
    t = term - comp
    new = sum_ + t
    comp = (new - sum_) - t
    return new, comp


def _series_small(order, x):
    """Power-series J and Y for 0 < x <= crossover (x is an array).

    Sums are compensated: near the crossover the largest term is ~1e4, and
    plain accumulation would cost ~1e-12 absolute, visible relative to Y
    near its zeros.
    """
    xw = x.astype(np.longdouble)
    q = 0.25 * xw * xw
    if order == 0:
        term = np.ones_like(xw)
        j, jc = term.copy(), np.zeros_like(xw)
        ysum, yc = np.zeros_like(xw), np.zeros_like(xw)
        for n in range(1, 36):
            term = term * (-q) / (n * n)
            j, jc = _kahan(j, jc, term)
            ysum, yc = _kahan(ysum, yc, -term * _HARMONIC[n])
        y = (2.0 / np.pi) * ((np.log(0.5 * xw) + EULER_GAMMA) * j + ysum)
        return j.astype(float), y.astype(float)
    # order 1
    term = 0.5 * xw.copy()  # n = 0 term of J1
    j, jc = term.copy(), np.zeros_like(xw)
    s_term = np.ones_like(xw)  # q^n / (n! (n+1)!), n = 0
    ysum = s_term * (_HARMONIC[0] + _HARMONIC[1])
    yc = np.zeros_like(xw)
    for n in range(1, 36):
        term = term * (-q) / (n * (n + 1))
        j, jc = _kahan(j, jc, term)
        s_term = s_term * (-q) / (n * (n + 1))
        ysum, yc = _kahan(ysum, yc, s_term * (_HARMONIC[n] + _HARMONIC[n + 1]))
    y = (2.0 / np.pi) * (np.log(0.5 * xw) + EULER_GAMMA) * j \
        - 2.0 / (np.pi * xw) - (xw / (2.0 * np.pi)) * ysum
    return j.astype(float), y.astype(float)


def _asymptotic_large(order, x):
    """Hankel asymptotic J and Y for x > crossover.

    Ten terms of each of P and Q leave a tail below 2e-12 at the crossover.
    """
    a = _ASYM[order]
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    sign = 1.0
    for m in range(11):
        xp = x ** (2 * m)
        p += sign * a[2 * m] / xp
        q += sign * a[2 * m + 1] / (xp * x)
        sign = -sign
    chi = x - (2 * order + 1) * np.pi / 4.0
    amp = np.sqrt(2.0 / (np.pi * x))
    c, s = np.cos(chi), np.sin(chi)
    return amp * (p * c - q * s), amp * (p * s + q * c)


def bessel_JY(order, x):
    """Return (J_n(x), Y_n(x)) for order n in {0, 1} and x > 0.

    Accepts scalars or arrays; raises DomainError for any x <= 0.
    """
    if order not in (0, 1):
        raise DomainError(f"order must be 0 or 1, got {order}")
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr)
    if np.any(x_arr <= 0.0) or np.any(~np.isfinite(x_arr)):
        raise DomainError("bessel_JY requires strictly positive finite arguments")
    j = np.empty_like(x_arr)
    y = np.empty_like(x_arr)
    small = x_arr <= _CROSSOVER
    if np.any(small):
        js, ys = _series_small(order, x_arr[small])
        j[small], y[small] = js, ys
    if np.any(~small):
        jl, yl = _asymptotic_large(order, x_arr[~small])
        j[~small], y[~small] = jl, yl
    if scalar:
        return float(j[0]), float(y[0])
    return j, y


def hankel1(order, x):
    """H^(1)_n(x) = J_n(x) + i Y_n(x) for n in {0, 1}."""
    j, y = bessel_JY(order, x)
    return j + 1j * y


class FundamentalSolution:
    """Outgoing 2-D Helmholtz fundamental solution (i/4) H0^(1)(k |x - y|)."""

    def __init__(self, wavenumber):
        if wavenumber <= 0:
            raise DomainError("wavenumber must be positive")
        self.wavenumber = float(wavenumber)

    def _radius(self, x1, x2, y1, y2):
        r = np.hypot(np.asarray(x1, float) - y1, np.asarray(x2, float) - y2)
        if np.any(r == 0.0):
            raise SingularPoint("fundamental solution evaluated at its source point")
        return r

    def value(self, x1, x2, y1, y2):
        r = self._radius(x1, x2, y1, y2)
        return 0.25j * hankel1(0, self.wavenumber * r)

    def gradient_x(self, x1, x2, y1, y2):
        """Gradient with respect to the observation point x; returns (d1, d2)."""
        k = self.wavenumber
        r = self._radius(x1, x2, y1, y2)
        scale = -0.25j * k * hankel1(1, k * r) / r
        return scale * (np.asarray(x1, float) - y1), scale * (np.asarray(x2, float) - y2)

    def d_x2(self, x1, x2, y1, y2):
        """Vertical derivative at x, i.e. the (0,1)-normal derivative on a horizontal line."""
        k = self.wavenumber
        r = self._radius(x1, x2, y1, y2)
        return -0.25j * k * hankel1(1, k * r) * (np.asarray(x2, float) - y2) / r
