"""Incident fields, the DtN symbol on the artificial top line, and boundary data.

Incident kinds: downward plane waves, Herglotz superpositions of downward
plane waves (Gauss-Legendre in the angle), and point sources.  The scattered
field is closed upward through the line Dirichlet-to-Neumann symbol
i sqrt(k^2 - xi^2) with the branch of non-negative imaginary part.
"""

import numpy as np

from .errors import DomainError, SingularPoint
from .special import FundamentalSolution


def sqrt_upward(s):
    """sqrt with branch Im >= 0 (outgoing / decaying modes)."""
    return np.sqrt(np.asarray(s, dtype=complex))


def dtn_symbol(xi, k):
    """Multiplier i sqrt(k^2 - xi^2) of the upward DtN map."""
    return 1j * sqrt_upward(k * k - np.asarray(xi, dtype=float) ** 2)


def dtn_symbol_apply(coeffs, orders, alpha, k):
    """Apply the quasi-periodic DtN symbol to Fourier coefficients.

    Coefficient j (of the mode exp(i (j - alpha) x1)) is multiplied by
    i sqrt(k^2 - (j - alpha)^2); Rayleigh frequencies give a zero factor.
    """
    coeffs = np.asarray(coeffs)
    orders = np.asarray(orders)
    return coeffs * dtn_symbol(orders - alpha, k)


class PlaneWave:
    """Downward plane wave exp(i k (x1 sin(angle) - x2 cos(angle)))."""

    def __init__(self, wavenumber, angle, shift=0.0):
        if wavenumber <= 0:
            raise DomainError("wavenumber must be positive")
        if not -np.pi / 2 < angle < np.pi / 2:
            raise DomainError("plane-wave angle must lie in (-pi/2, pi/2)")
        self.wavenumber = float(wavenumber)
        self.angle = float(angle)
        self.shift = float(shift)

    def value(self, x1, x2):
        k, th = self.wavenumber, self.angle
        x1 = np.asarray(x1, dtype=float) + self.shift
        return np.exp(1j * k * (x1 * np.sin(th) - np.asarray(x2, float) * np.cos(th)))

    def gradient(self, x1, x2):
        k, th = self.wavenumber, self.angle
        v = self.value(x1, x2)
        return 1j * k * np.sin(th) * v, -1j * k * np.cos(th) * v

    def top_data(self, x1, height):
        """f = du/dx2 - T+ u on the line x2 = height; single-mode closed form."""
        return -2j * self.wavenumber * np.cos(self.angle) * self.value(x1, height)


def beam_density(t):
    """Angular density 2^12 t^6 (1-t)^6 on [0, 1], zero elsewhere."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = (t >= 0.0) & (t <= 1.0)
    ti = t[inside]
    out[inside] = 4096.0 * ti ** 6 * (1.0 - ti) ** 6
    return out


class Herglotz:
    """Herglotz superposition int g(t) exp(i k (x1 sin t - x2 cos t)) dt.

    The density support must sit inside (-pi/2, pi/2); the angular integral
    uses Gauss-Legendre nodes on the given interval.
    """

    def __init__(self, wavenumber, density=beam_density, interval=(0.0, 1.0),
                 n_quad=64, shift=0.0):
        if wavenumber <= 0:
            raise DomainError("wavenumber must be positive")
        a, b = interval
        if not (-np.pi / 2 < a < b < np.pi / 2):
            raise DomainError("density support must sit inside (-pi/2, pi/2)")
        self.wavenumber = float(wavenumber)
        self.shift = float(shift)
        nodes, weights = np.polynomial.legendre.leggauss(int(n_quad))
        self.nodes = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        self.weights = 0.5 * (b - a) * weights * density(self.nodes)
        self.sin_t = np.sin(self.nodes)
        self.cos_t = np.cos(self.nodes)

    def _phases(self, x1, x2):
        x1 = np.asarray(x1, dtype=float) + self.shift
        x2 = np.asarray(x2, dtype=float)
        k = self.wavenumber
        return np.exp(1j * k * (np.multiply.outer(x1, self.sin_t)
                                - np.multiply.outer(x2, self.cos_t)))

    def value(self, x1, x2):
        return self._phases(x1, x2) @ self.weights

    def gradient(self, x1, x2):
        ph = self._phases(x1, x2)
        k = self.wavenumber
        d1 = ph @ (self.weights * 1j * k * self.sin_t)
        d2 = ph @ (self.weights * (-1j) * k * self.cos_t)
        return d1, d2

    def top_data(self, x1, height):
        """f on x2 = height: per-angle -2ik cos(t) plane-wave data, superposed."""
        ph = self._phases(x1, height)
        return ph @ (self.weights * (-2j) * self.wavenumber * self.cos_t)


class PointSource:
    """Free-space point source (i/4) H0^(1)(k |x - y|)."""

    def __init__(self, wavenumber, location, shift=0.0):
        self.wavenumber = float(wavenumber)
        self.location = (float(location[0]), float(location[1]))
        self.shift = float(shift)
        self._phi = FundamentalSolution(self.wavenumber)

    def _src(self):
        # shifting the field left by `shift` equals moving the source right
        return self.location[0] - self.shift, self.location[1]

    def value(self, x1, x2):
        y1, y2 = self._src()
        return self._phi.value(x1, x2, y1, y2)

    def gradient(self, x1, x2):
        y1, y2 = self._src()
        return self._phi.gradient_x(x1, x2, y1, y2)

    def top_data(self, x1, height):
        raise SingularPoint(
            "point sources go through the Green's-function split, not raw top data")


class GreensSplit:
    """Half-plane split G(x, y) = Phi(x, y) - Phi(x, y*) about the plane x2 = c.

    The image y* = (y1, 2c - y2) lies below the surface, G vanishes on x2 = c,
    and G decays like |x1|^{-3/2} through the strip, which restores the decay
    the cell-truncated solver needs.  The image term is purely upward-going on
    any line above y*, so it contributes nothing to the top data.
    """

    def __init__(self, wavenumber, source, reference_height):
        self.wavenumber = float(wavenumber)
        self.source = (float(source[0]), float(source[1]))
        self.reference_height = float(reference_height)
        if self.source[1] <= self.reference_height:
            raise DomainError("point source must sit above the reference plane")
        self._phi = FundamentalSolution(self.wavenumber)

    @property
    def image(self):
        y1, y2 = self.source
        return (y1, 2.0 * self.reference_height - y2)

    def value(self, x1, x2):
        y1, y2 = self.source
        i1, i2 = self.image
        return (self._phi.value(x1, x2, y1, y2)
                - self._phi.value(x1, x2, i1, i2))

    def floor_data(self, x1, surface_height):
        """Dirichlet data -G on the surface graph, for the correction solve."""
        return -self.value(np.asarray(x1, float), np.asarray(surface_height, float))

    def image_trace(self, x1, x2):
        i1, i2 = self.image
        return self._phi.value(x1, x2, i1, i2)

    def image_d2(self, x1, x2):
        i1, i2 = self.image
        return self._phi.d_x2(x1, x2, i1, i2)


def boundary_data_f(field, height, x1):
    """Top data f = du^i/dx2 - T+(u^i) on x2 = height for smooth incident fields."""
    return field.top_data(x1, height)


def line_dtn_apply(values, spacing, k, taper=0.125):
    """Windowed-FFT application of the line DtN map T+ to sampled trace data.

    The signal is cosine-tapered over the given end fraction to suppress the
    wrap-around of the periodized FFT; accurate in the interior of the window
    for traces that decay toward the ends.
    """
    values = np.asarray(values, dtype=complex)
    n = values.size
    window = np.ones(n)
    m = max(1, int(taper * n))
    ramp = 0.5 * (1.0 - np.cos(np.pi * np.arange(m) / m))
    window[:m] = ramp
    window[-m:] = ramp[::-1]
    xi = 2.0 * np.pi * np.fft.fftfreq(n, d=spacing)
    return np.fft.ifft(dtn_symbol(xi, k) * np.fft.fft(values * window))
