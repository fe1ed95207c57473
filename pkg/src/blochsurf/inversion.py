"""CGNE inner solver and the two-stage Newton iteration on surface coefficients.

Stage I fits the periodic coefficients against data from translated incidence
(the perturbation is invisible there up to the translation decay estimate);
stage II fixes the periodic part and fits the perturbation coefficients
against the untranslated data.  CGNE with early stopping regularizes each
linearized step; the outer loop takes damped steps whenever a full Newton
update fails to decrease the residual.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMap, MaxOuterIterations, NonConvergence, Stagnation
from .shape_calculus import ScatterContext


@dataclass(frozen=True)
class CgneConfig:
    max_iterations: int = 20
    normal_tolerance: float = 1e-3
    discrepancy_factor: float = 1.05


@dataclass(frozen=True)
class NewtonSettings:
    outer_tolerance: float = 0.06
    outer_cap: int = 25
    max_halvings: int = 5
    cgne: CgneConfig = field(default_factory=CgneConfig)
    noise_level: float = 0.05


@dataclass
class StageResult:
    coeffs: np.ndarray
    residuals: list
    step_norms: list
    status: str
    logs: list


def weighted_norm(values, weights):
    return float(np.sqrt(np.sum(weights * np.abs(values) ** 2)))


def cgne_solve(apply_M, apply_Mstar, rhs, weights=None, cfg=CgneConfig(),
               noise_target=None):
    """Conjugate gradient on the normal equations M* M x = M* rhs.

    apply_M maps real coefficient vectors to complex trace vectors;
    apply_Mstar is its adjoint under the weighted real trace pairing
    Re sum w a conj(b).  Early stopping (iteration cap, relative normal
    residual, discrepancy target) is the regularization.
    """
    w = np.ones(np.asarray(rhs).size) if weights is None else np.asarray(weights)
    r = np.asarray(rhs, dtype=complex).copy()
    s = apply_Mstar(r)
    x = np.zeros_like(s)
    p = s.copy()
    gamma = float(np.dot(s, s))
    gamma0 = gamma
    residuals = [weighted_norm(r, w)]
    if gamma0 == 0.0:
        return x, {"iterations": 0, "residuals": residuals, "stop": "zero gradient"}
    stop = "iteration cap"
    for it in range(cfg.max_iterations):
        if np.sqrt(float(np.dot(p, p))) < 1e-14:
            raise Stagnation("CGNE search direction collapsed")
        q = apply_M(p)
        qq = float(np.sum(w * np.abs(q) ** 2))
        if qq <= 0.0 or not np.isfinite(qq):
            raise Stagnation("CGNE curvature vanished")
        a = gamma / qq
        x = x + a * p
        r = r - a * q
        residuals.append(weighted_norm(r, w))
        if noise_target is not None and residuals[-1] <= noise_target:
            stop = "discrepancy"
            break
        s = apply_Mstar(r)
        gamma_new = float(np.dot(s, s))
        if np.sqrt(gamma_new / gamma0) < cfg.normal_tolerance:
            stop = "normal residual"
            break
        p = s + (gamma_new / gamma) * p
        gamma = gamma_new
    return x, {"iterations": len(residuals) - 1, "residuals": residuals,
               "stop": stop}


class InversionProblem:
    """Builds scattering contexts for coefficient iterates of one scenario."""

    def __init__(self, template_model, k, half_cells, n1, n2, n_modes,
                 incident, receivers, weights=None, order=2):
        self.template = template_model
        self.k = float(k)
        self.half_cells = int(half_cells)
        self.n1, self.n2 = int(n1), int(n2)
        self.n_modes = int(n_modes)
        self.incident = incident
        self.receivers = np.asarray(receivers, dtype=float)
        self.order = order
        if weights is None:
            h = self.receivers[1] - self.receivers[0]
            weights = np.full(self.receivers.size, h)
            weights[0] *= 0.5
            weights[-1] *= 0.5
        self.weights = np.asarray(weights, dtype=float)

    def context(self, C, D):
        model = self.template.with_periodic(C).with_perturbation(D)
        return ScatterContext(model, self.k, self.half_cells, self.n1, self.n2,
                              self.n_modes, self.incident, self.receivers,
                              order=self.order)


def _newton_loop(problem, C, D, data, settings, vary):
    """Shared outer loop; `vary` is 'periodic' or 'perturbation'."""
    U = np.asarray(data, dtype=complex)
    w = problem.weights
    norm_U = weighted_norm(U, w)
    eps = settings.outer_tolerance
    target = settings.cgne.discrepancy_factor * settings.noise_level * norm_U

    coeffs = np.asarray(C if vary == "periodic" else D, dtype=float).copy()
    residuals = []
    step_norms = []
    logs = []
    status = "max outer iterations"

    ctx = problem.context(C, D)
    trace = ctx.apply_S()
    for outer in range(settings.outer_cap):
        r = U - trace
        res = weighted_norm(r, w) / norm_U
        residuals.append(res)
        logs.append({"iteration": outer, "residual": res,
                     "step_norm": step_norms[-1] if step_norms else 0.0})
        if res <= eps:
            status = "converged"
            break
        if vary == "periodic":
            apply_M = ctx.apply_MA
            apply_Mstar = lambda phi: ctx.apply_MA_star(phi, w, coeffs.size)
        else:
            apply_M = ctx.apply_MB
            apply_Mstar = lambda phi: ctx.apply_MB_star(phi, w)
        try:
            H, info = cgne_solve(apply_M, apply_Mstar, r, weights=w,
                                 cfg=settings.cgne, noise_target=target)
        except Stagnation:
            status = "stalled (CGNE stagnation)"
            break
        accepted = False
        scale = 1.0
        for _ in range(settings.max_halvings + 1):
            trial = coeffs + scale * H
            if vary == "periodic":
                C_try, D_try = trial, D
            else:
                C_try, D_try = C, trial
            try:
                ctx_try = problem.context(C_try, D_try)
                trace_try = ctx_try.apply_S()
            except (DegenerateMap, ValueError, NonConvergence):
                scale *= 0.5
                continue
            res_try = weighted_norm(U - trace_try, w) / norm_U
            if res_try < res:
                coeffs = trial
                ctx, trace = ctx_try, trace_try
                step_norms.append(scale * float(np.linalg.norm(H)))
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            status = "stalled (no descent)"
            break
    else:
        # cap reached; record the final residual
        r = U - trace
        residuals.append(weighted_norm(r, w) / norm_U)

    if status != "converged" and not step_norms:
        raise MaxOuterIterations(
            f"no accepted Newton step (initial residual {residuals[0]:.4f})")
    return StageResult(coeffs=coeffs, residuals=residuals,
                       step_norms=step_norms, status=status, logs=logs)


def newton_periodic_stage(problem, C0, D_fixed, data, settings):
    """Fit the periodic coefficients against translated-incidence data."""
    return _newton_loop(problem, np.asarray(C0, float), np.asarray(D_fixed, float),
                        data, settings, vary="periodic")


def newton_perturbation_stage(problem, C_fixed, D0, data, settings):
    """Fit the perturbation coefficients against untranslated data."""
    return _newton_loop(problem, np.asarray(C_fixed, float), np.asarray(D0, float),
                        data, settings, vary="perturbation")
