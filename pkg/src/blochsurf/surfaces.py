"""Periodic surfaces, compactly supported perturbations, and flattening maps.

A surface is the graph of zeta_p = zeta + p where zeta is 2*pi-periodic and p
lives in a single period cell (-pi, pi] + 2*pi*J.  The strip (h, H) above the
surface floor is flattened onto a rectangle by a cubic blend that is the
identity above the blending height H0; the transformed Helmholtz problem then
carries the surface information in matrix/scalar coefficient fields.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateMap

TWO_PI = 2.0 * np.pi
DET_FLOOR = 1e-6  # minimal admissible Jacobian determinant


# ----------------------------------------------------------------------------
# periodic part: real trigonometric polynomials
# ----------------------------------------------------------------------------

class TrigPolynomial:
    """Real trigonometric polynomial c0 + sum_m (a_m cos(mt) + b_m sin(mt)).

    Coefficients are ordered [1, cos t, sin t, cos 2t, sin 2t, ...]; an
    arbitrary odd or even length is accepted.
    """

    def __init__(self, coeffs):
        self.coeffs = np.asarray(coeffs, dtype=float).copy()
        if self.coeffs.ndim != 1 or self.coeffs.size == 0:
            raise ValueError("coefficient vector must be 1-D and non-empty")

    @property
    def size(self):
        return self.coeffs.size

    def _terms(self, t, derivative=False):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        if not derivative:
            out = out + self.coeffs[0]
        for idx in range(1, self.coeffs.size):
            m = (idx + 1) // 2
            c = self.coeffs[idx]
            if c == 0.0:
                continue
            if idx % 2 == 1:  # cos(mt)
                out = out + (-c * m * np.sin(m * t) if derivative else c * np.cos(m * t))
            else:  # sin(mt)
                out = out + (c * m * np.cos(m * t) if derivative else c * np.sin(m * t))
        return out

    def value(self, t):
        return self._terms(t)

    def derivative(self, t):
        return self._terms(t, derivative=True)

    @staticmethod
    def basis_matrix(n_coeffs, t):
        """Matrix B with B[i, m] = phi_m(t_i) for the trig basis."""
        t = np.asarray(t, dtype=float)
        cols = [np.ones_like(t)]
        for idx in range(1, n_coeffs):
            m = (idx + 1) // 2
            cols.append(np.cos(m * t) if idx % 2 == 1 else np.sin(m * t))
        return np.stack(cols, axis=-1)


# ----------------------------------------------------------------------------
# perturbation part
# ----------------------------------------------------------------------------

def _bump(s):
    """C-infinity bump exp(-1/(1-s^2)) on |s| < 1, zero outside."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(-1.0 / (1.0 - si * si))
    return out


def _bump_derivative(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    d = 1.0 - si * si
    out[inside] = np.exp(-1.0 / d) * (-2.0 * si / (d * d))
    return out


class BumpBasis:
    """N scaled bump functions with uniform centers in (-pi + w, pi - w)."""

    def __init__(self, n_funcs, width=0.7):
        if n_funcs < 1:
            raise ValueError("need at least one basis function")
        if not 0 < width < np.pi:
            raise ValueError("width must lie in (0, pi)")
        self.n_funcs = int(n_funcs)
        self.width = float(width)
        if n_funcs == 1:
            self.centers = np.array([0.0])
        else:
            self.centers = np.linspace(-np.pi + width, np.pi - width, n_funcs)

    def design_matrix(self, t, derivative=False):
        """Matrix B with B[i, n] = psi_n(t_i) (or psi_n'(t_i))."""
        t = np.asarray(t, dtype=float)
        s = (t[..., None] - self.centers) / self.width
        if derivative:
            return _bump_derivative(s) / self.width
        return _bump(s)

    def value(self, coeffs, t):
        return self.design_matrix(t) @ np.asarray(coeffs, dtype=float)

    def derivative(self, coeffs, t):
        return self.design_matrix(t, derivative=True) @ np.asarray(coeffs, dtype=float)


class PerturbationProfile:
    """Local perturbation supported in (-pi, pi) + 2*pi*cell_index.

    Either coefficient-backed (bump basis; smooth with two vanishing
    derivatives at the support ends) or formula-backed for synthetic truths.
    """

    def __init__(self, coeffs=None, basis=None, cell_index=0,
                 func=None, dfunc=None, support=(-np.pi, np.pi)):
        self.cell_index = int(cell_index)
        self.support = (float(support[0]), float(support[1]))
        if func is not None:
            if dfunc is None:
                raise ValueError("formula-backed profile needs an explicit derivative")
            self.func, self.dfunc = func, dfunc
            self.coeffs, self.basis = None, None
        else:
            self.basis = basis if basis is not None else BumpBasis(12)
            self.coeffs = (np.zeros(self.basis.n_funcs) if coeffs is None
                           else np.asarray(coeffs, dtype=float).copy())
            if self.coeffs.size != self.basis.n_funcs:
                raise ValueError("coefficient count does not match basis size")
            self.func, self.dfunc = None, None

    @property
    def is_zero(self):
        return self.func is None and not np.any(self.coeffs)

    def _local(self, t):
        return np.asarray(t, dtype=float) - TWO_PI * self.cell_index

    def value(self, t):
        s = self._local(t)
        if self.func is not None:
            lo, hi = self.support
            out = np.zeros_like(s)
            inside = (s >= lo) & (s <= hi)
            out[inside] = self.func(s[inside])
            return out
        return self.basis.value(self.coeffs, s)

    def derivative(self, t):
        s = self._local(t)
        if self.func is not None:
            lo, hi = self.support
            out = np.zeros_like(s)
            inside = (s >= lo) & (s <= hi)
            out[inside] = self.dfunc(s[inside])
            return out
        return self.basis.derivative(self.coeffs, s)

    def translated(self, shift):
        """Profile for the substitution t -> t + 2*pi*shift (cell J -> J - shift)."""
        if self.func is not None:
            return PerturbationProfile(func=self.func, dfunc=self.dfunc,
                                       support=self.support,
                                       cell_index=self.cell_index - shift)
        return PerturbationProfile(coeffs=self.coeffs, basis=self.basis,
                                   cell_index=self.cell_index - shift)


# ----------------------------------------------------------------------------
# the surface model and its flattening
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class SurfaceModel:
    """Perturbed periodic surface between a strip floor and ceiling.

    Invariant: floor < min zeta_p <= max zeta_p < flatten_height < ceiling,
    and the cubic flattening map stays a diffeomorphism (checked on a sample
    grid at construction).
    """

    periodic: TrigPolynomial
    perturbation: PerturbationProfile
    floor: float
    ceiling: float
    flatten_height: float
    _span: tuple = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        t = np.linspace(-np.pi, np.pi, 2049) + TWO_PI * self.perturbation.cell_index
        z = self.height(t)
        zmin = min(float(np.min(z)), float(np.min(self.periodic.value(t))))
        zmax = max(float(np.max(z)), float(np.max(self.periodic.value(t))))
        object.__setattr__(self, "_span", (zmin, zmax))
        if not (self.floor < zmin and zmax < self.flatten_height < self.ceiling):
            raise ValueError(
                f"heights violate floor < surface < H0 < ceiling: "
                f"floor={self.floor}, surface=[{zmin:.4f},{zmax:.4f}], "
                f"H0={self.flatten_height}, ceiling={self.ceiling}")
        # worst-case Jacobian determinant sits on the strip floor
        det_floor = 1.0 - 3.0 * (zmax - self.floor) / (self.flatten_height - self.floor)
        if det_floor <= DET_FLOOR:
            raise DegenerateMap(
                f"flattening determinant {det_floor:.3e} <= {DET_FLOOR} "
                f"(raise H0 or the floor)")

    # -- geometry ------------------------------------------------------------

    def zeta(self, t):
        return self.periodic.value(t)

    def height(self, t):
        """zeta_p(t) = zeta(t) + p(t)."""
        return self.periodic.value(t) + self.perturbation.value(t)

    def height_derivative(self, t):
        return self.periodic.derivative(t) + self.perturbation.derivative(t)

    def surface_span(self):
        return self._span

    # -- cubic blend ----------------------------------------------------------

    def _eta(self, x2):
        x2 = np.asarray(x2, dtype=float)
        h, h0 = self.floor, self.flatten_height
        out = np.zeros_like(x2)
        below = x2 < h0
        out[below] = (x2[below] - h0) ** 3 / (h - h0) ** 3
        return out

    def _eta_prime(self, x2):
        x2 = np.asarray(x2, dtype=float)
        h, h0 = self.floor, self.flatten_height
        out = np.zeros_like(x2)
        below = x2 < h0
        out[below] = 3.0 * (x2[below] - h0) ** 2 / (h - h0) ** 3
        return out

    def flatten(self, x1, x2, perturbed=True):
        """Map a strip point to the physical domain; identity for x2 >= H0."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        f = self.height(x1) if perturbed else self.zeta(x1)
        return x1, x2 + self._eta(x2) * (f - self.floor)

    def jacobian(self, x1, x2, perturbed=True):
        """Entries (d21, d22) of grad Phi; d11 = 1 and d12 = 0 always."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        if perturbed:
            f, fp = self.height(x1), self.height_derivative(x1)
        else:
            f, fp = self.zeta(x1), self.periodic.derivative(x1)
        d21 = self._eta(x2) * fp
        d22 = 1.0 + self._eta_prime(x2) * (f - self.floor)
        return d21, d22

    def coefficient_fields(self, perturbed=True):
        return CoefficientFields(self, perturbed)

    # -- rebuilding -----------------------------------------------------------

    def translated(self, shift):
        """Apply x1 -> x1 - 2*pi*shift; periodic coefficients are invariant."""
        return replace(self, perturbation=self.perturbation.translated(shift),
                       _span=None)

    def with_periodic(self, coeffs):
        return replace(self, periodic=TrigPolynomial(coeffs), _span=None)

    def with_perturbation(self, coeffs, basis=None):
        basis = basis if basis is not None else (
            self.perturbation.basis if self.perturbation.basis is not None else BumpBasis(len(coeffs)))
        pert = PerturbationProfile(coeffs=coeffs, basis=basis,
                                   cell_index=self.perturbation.cell_index)
        return replace(self, perturbation=pert, _span=None)


class CoefficientFields:
    """Transformed Helmholtz coefficients A = |det|(grad Phi)^-1 (grad Phi)^-T, c = |det|."""

    def __init__(self, model, perturbed=True):
        self.model = model
        self.perturbed = bool(perturbed)

    def evaluate(self, x1, x2):
        """Return (a11, a12, a22, c) at the given strip points."""
        d21, d22 = self.model.jacobian(x1, x2, perturbed=self.perturbed)
        if np.any(d22 <= DET_FLOOR):
            raise DegenerateMap("Jacobian determinant fell below the admissible floor")
        a11 = d22
        a12 = -d21
        a22 = (1.0 + d21 * d21) / d22
        return a11, a12, a22, d22.copy()


def eval_surface(model, t):
    """Surface height zeta_p(t); the perturbation vanishes outside its cell."""
    return model.height(t)


def flatten_map(model, t_or_point, x2=None, perturbed=True):
    """Functional wrapper around SurfaceModel.flatten accepting (x1, x2)."""
    if x2 is None:
        x1, x2 = t_or_point
    else:
        x1 = t_or_point
    return model.flatten(x1, x2, perturbed=perturbed)


def translate_model(model, shift):
    return model.translated(shift)


def default_heights(zmin, zmax, ceiling, floor_margin=0.12):
    """Pick (floor, H0) so the cubic blend is safely a diffeomorphism.

    The determinant at the strip floor is 1 - 3 (zmax - h)/(H0 - h), so H0
    must exceed h + 3 (zmax - h); we centre H0 in the feasible interval.
    """
    h = zmin - floor_margin
    h0_min = h + 3.0 * (zmax - h)
    if h0_min >= ceiling:
        raise DegenerateMap(
            f"no admissible H0: need H0 > {h0_min:.3f} but ceiling = {ceiling}")
    h0 = 0.5 * (h0_min + ceiling)
    return h, h0


# ----------------------------------------------------------------------------
# built-in benchmark surfaces
# ----------------------------------------------------------------------------

def _case1_pfunc(s):
    # support (-3, 3) local to the cell; original variable t = s - 6*pi
    t = s - 6.0 * np.pi
    return 0.00025 * ((t + 6.0 * np.pi) ** 2 - 9.0) ** 3 * np.sin(np.pi * (t + 3.0) / 3.0)


def _case1_dpfunc(s):
    t = s - 6.0 * np.pi
    u = (t + 6.0 * np.pi)
    bump = (u * u - 9.0)
    phase = np.pi * (t + 3.0) / 3.0
    return 0.00025 * (3.0 * bump ** 2 * 2.0 * u * np.sin(phase)
                      + bump ** 3 * (np.pi / 3.0) * np.cos(phase))


def _case2_pfunc(s):
    t = s + 4.0 * np.pi
    return -(1.0 + np.cos(t)) / 8.0


def _case2_dpfunc(s):
    t = s + 4.0 * np.pi
    return np.sin(t) / 8.0


def preset_truth(name, ceiling=3.0, floor=None, flatten_height=None):
    """Benchmark surfaces: 'case1' (J = -3) and 'case2' (J = 2).

    case1: zeta = 1.5 + sin(t)/24 - cos(2t)/16 with a smooth wiggle bump;
    case2: zeta = 1.5 + cos(t)/8 with p = -(1 + cos t)/8 on its cell (this one
    carries a ~1.25e-3 jump at the support ends, reproduced verbatim).
    """
    if name == "case1":
        zeta = TrigPolynomial([1.5, 0.0, 1.0 / 24.0, -1.0 / 16.0, 0.0,
                               0.0, 0.0, 0.0, 0.0])
        pert = PerturbationProfile(func=_case1_pfunc, dfunc=_case1_dpfunc,
                                   support=(-3.0, 3.0), cell_index=-3)
    elif name == "case2":
        zeta = TrigPolynomial([1.5, 1.0 / 8.0, 0.0, 0.0, 0.0,
                               0.0, 0.0, 0.0, 0.0])
        pert = PerturbationProfile(func=_case2_pfunc, dfunc=_case2_dpfunc,
                                   support=(-3.0, 3.0), cell_index=2)
    else:
        raise ValueError(f"unknown preset {name!r}")
    t = np.linspace(-np.pi, np.pi, 4097) + TWO_PI * pert.cell_index
    z = zeta.value(t) + pert.value(t)
    zmin = min(float(np.min(z)), float(np.min(zeta.value(t))))
    zmax = max(float(np.max(z)), float(np.max(zeta.value(t))))
    if floor is None or flatten_height is None:
        h, h0 = default_heights(zmin, zmax, ceiling)
        floor = floor if floor is not None else h
        flatten_height = flatten_height if flatten_height is not None else h0
    return SurfaceModel(periodic=zeta, perturbation=pert, floor=floor,
                        ceiling=ceiling, flatten_height=flatten_height)
