"""Forward scattering runs: scattered Cauchy data on the measurement line.

Smooth incident fields (plane waves, Herglotz beams) drive the total-field
problem through the top data f = du/dx2 - T+ u.  Point sources are split
against the mean-height plane first: the correction field v then solves the
homogeneous-top problem with lifted floor data -G on the surface, and the
scattered data is reassembled as u_s = v - Phi(., y*).
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import TruncationWarning
from .mesh import CellMesh
from .solver import CellSolver
from .special import FundamentalSolution
from .waves import GreensSplit, Herglotz, PlaneWave, PointSource

TWO_PI = 2.0 * np.pi


@dataclass
class CauchyData:
    """Scattered trace and its (0,1)-normal derivative on the measurement line."""

    points: np.ndarray
    values: np.ndarray
    normals: np.ndarray
    line_height: float = 3.0

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        self.normals = np.asarray(self.normals, dtype=complex)
        if not (self.points.size == self.values.size == self.normals.size):
            raise ValueError("point/value/normal arrays must share a length")

    @property
    def spacing(self):
        return float(self.points[1] - self.points[0])

    def weights(self):
        """Trapezoid quadrature weights on the truncated line."""
        w = np.full(self.points.size, self.spacing)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w


def incident_dtn_trace(incident, x, height):
    """T+ of the incident trace; closed form for downward superpositions."""
    if isinstance(incident, PlaneWave):
        return (1j * incident.wavenumber * np.cos(incident.angle)
                * incident.value(x, height))
    if isinstance(incident, Herglotz):
        ph = incident._phases(x, height)
        return ph @ (incident.weights * 1j * incident.wavenumber
                     * incident.cos_t)
    raise TypeError(f"no closed-form T+ trace for {type(incident).__name__}")


def check_truncation(solver, W, threshold=1e-3):
    """Warn when the outermost strip cells still carry trace energy."""
    cells = solver.cells_from_alpha_nodal(solver.top_nodal(W))
    energy = np.sum(np.abs(cells) ** 2, axis=1)
    total = float(np.sum(energy))
    if total > 0 and (energy[0] + energy[-1]) > threshold * total:
        warnings.warn("boundary-cell trace energy exceeds 1e-3 of the total; "
                      "increase the cell truncation", TruncationWarning)


def herglotz_cauchy(solver, incident, x_receivers):
    """Cauchy data of the scattered field for a smooth incident beam."""
    height = solver.mesh.ceiling
    loads = solver.top_loads_from_line(lambda x: incident.top_data(x, height))
    W = solver.solve(top_loads=loads)
    check_truncation(solver, W)
    x = np.asarray(x_receivers, dtype=float)
    us = solver.receiver_values(W, x) - incident.value(x, height)
    dnus = solver.receiver_dtn_values(W, x) - incident_dtn_trace(incident, x, height)
    return CauchyData(points=x, values=us, normals=dnus, line_height=height), W


def point_source_cauchy(solver, source_location, x_receivers, reference_height=None):
    """Cauchy data of the scattered field for a free-space point source.

    The scattered field is taken relative to the free-space point source,
    u_s = u - Phi(., y); with the split incident field G this becomes
    v - Phi(., y*) where v is the solver unknown.
    """
    model = solver.model
    c_ref = (reference_height if reference_height is not None
             else float(model.periodic.coeffs[0]))
    split = GreensSplit(solver.k, source_location, c_ref)
    g = lambda x: split.floor_data(x, model.height(x))
    floor_vals = solver.floor_values_from_line(g)
    W = solver.solve(floor_values=floor_vals)
    check_truncation(solver, W)
    x = np.asarray(x_receivers, dtype=float)
    height = solver.mesh.ceiling
    us = solver.receiver_values(W, x) - split.image_trace(x, np.full_like(x, height))
    dnus = (solver.receiver_dtn_values(W, x)
            - split.image_d2(x, np.full_like(x, height)))
    return CauchyData(points=x, values=us, normals=dnus, line_height=height), W


def build_solver(model, n1, n2, k, half_cells, n_modes=24, order=2, **kw):
    mesh = CellMesh(n1, n2, model.floor, model.ceiling, order=order)
    return CellSolver(model, mesh, k, half_cells, n_modes=n_modes, **kw)


def solve_cell_alpha(solver, alpha, f_line=None, top_loads_single=None):
    """Single quasi-periodicity solve at an arbitrary alpha (validation path).

    Returns the physical quasi-periodic nodal field w = W e^{-i alpha x}.
    """
    import scipy.sparse.linalg as spla

    from .errors import SingularSystem

    mesh = solver.mesh
    K = solver.matrix_at(alpha)
    if f_line is not None:
        xg, wg, vals = mesh.gauss_1d(12)
        fper = (np.asarray(f_line(xg.ravel()), dtype=complex).reshape(xg.shape)
                * np.exp(1j * alpha * xg))
        contrib = np.einsum("eg,g,ga->ea", fper, wg, vals)
        load = np.zeros(mesh.nx, dtype=complex)
        for a in range(mesh.order + 1):
            np.add.at(load, mesh.edge_dofs_1d[:, a], contrib[:, a])
    else:
        load = np.asarray(top_loads_single, dtype=complex)
    rhs = np.zeros(mesh.ndof, dtype=complex)
    rhs[mesh.top_dofs] = load
    free = mesh.free_dofs
    try:
        lu = spla.splu(K[free][:, free].tocsc())
    except RuntimeError as exc:
        raise SingularSystem(alpha, str(exc)) from exc
    W = np.zeros(mesh.ndof, dtype=complex)
    W[free] = lu.solve(rhs[free])
    x1, _ = mesh.node_coords
    return W * np.exp(-1j * alpha * x1), W


def rayleigh_efficiencies(solver, W_top_single, alpha, incident_order=None,
                          incident_coeff=None):
    """Reflection efficiencies (beta_j / beta_0) |R_j|^2 of a quasi-periodic trace.

    W_top_single: nodal periodic-representation trace on the top edge.
    R_j are read off by Fourier analysis; evanescent orders are excluded.
    """
    k = solver.k
    coeffs = solver.E @ np.asarray(W_top_single, dtype=complex)
    orders = solver.orders
    if incident_coeff is not None and incident_order is not None:
        coeffs = coeffs.copy()
        coeffs[list(orders).index(incident_order)] -= incident_coeff
    beta = np.sqrt((k * k - (orders - alpha) ** 2).astype(complex))
    if incident_order is not None:
        beta0 = float(beta[list(orders).index(incident_order)].real)
    else:
        beta0 = k
    prop = beta.real > 1e-9
    eff = (beta[prop].real / beta0) * np.abs(coeffs[prop]) ** 2
    return list(zip(orders[prop].tolist(), eff.tolist()))


def h1_cell_norms(solver, W):
    """Squared H1 norms of the reconstructed field, one value per strip cell."""
    from .assembly import identity_matrices

    S, M = identity_matrices(solver.mesh)
    x1, _ = solver.mesh.node_coords
    phases = np.exp(-1j * np.multiply.outer(
        solver.alphas, np.add.outer(TWO_PI * solver.cell_offsets, x1)))
    out = np.zeros(solver.cell_offsets.size)
    for jdx in range(solver.cell_offsets.size):
        u = np.einsum("qm,qm->m", phases[:, jdx, :], W) / solver.n_alpha
        out[jdx] = float(np.real(np.vdot(u, S @ u) + np.vdot(u, M @ u)))
    return out
