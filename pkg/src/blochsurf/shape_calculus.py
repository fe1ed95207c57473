"""Derivative and adjoint of the surface-to-trace scattering operator.

The derivative solve reuses the factorized forward systems: the direction h
enters as lifted floor data -(du/dx2) h on the surface, and the derivative
trace is read on the measurement line.  The adjoint is the exact bilinear
transpose of that discrete pipeline; its solve stage is the impedance-type
adjoint problem (top data = conjugated residual) realized through the alpha
reflection K(alpha)^T = K(-alpha), and the surface factor is applied through
the discrete reaction terms.  Coefficient-space maps pair with the plain
parameter measure dt on the surface, under which the normal and metric
factors of the pointwise adjoint formula cancel.
"""

import numpy as np

from .forward import CauchyData, incident_dtn_trace
from .mesh import CellMesh
from .solver import CellSolver
from .surfaces import TrigPolynomial

TWO_PI = 2.0 * np.pi


class ScatterContext:
    """Forward cache + derivative/adjoint machinery at one surface iterate."""

    def __init__(self, model, k, half_cells, n1, n2, n_modes, incident,
                 receivers, order=2, gmres_tol=1e-10):
        self.model = model
        self.k = float(k)
        self.incident = incident
        self.receivers = np.asarray(receivers, dtype=float)
        mesh = CellMesh(n1, n2, model.floor, model.ceiling, order=order)
        self.solver = CellSolver(model, mesh, k, half_cells, n_modes=n_modes,
                                 gmres_tol=gmres_tol)
        self.mesh = mesh
        self._dy_matrix = mesh.floor_derivative_matrix()
        self._trace_matrix = mesh.trace_interpolation(self.receivers)
        x = mesh.x_nodes
        shifts = TWO_PI * self.solver.cell_offsets
        self._t_cells = shifts[:, None] + x[None, :]
        self._W = None
        self._trace = None
        self._dphys = None

    # -- forward -----------------------------------------------------------------

    def _ensure_forward(self):
        if self._W is not None:
            return
        height = self.mesh.ceiling
        loads = self.solver.top_loads_from_line(
            lambda x: self.incident.top_data(x, height))
        self._W = self.solver.solve(top_loads=loads)
        us = (self.solver.receiver_values(self._W, self.receivers)
              - self.incident.value(self.receivers, height))
        self._trace = us

    def apply_S(self):
        """Scattered trace u_s on the measurement line (cached)."""
        self._ensure_forward()
        return self._trace.copy()

    def cauchy_data(self):
        self._ensure_forward()
        height = self.mesh.ceiling
        dnus = (self.solver.receiver_dtn_values(self._W, self.receivers)
                - incident_dtn_trace(self.incident, self.receivers, height))
        return CauchyData(points=self.receivers, values=self._trace.copy(),
                          normals=dnus)

    def floor_slope_cells(self):
        """Physical du/dx2 of the total field on the surface, cellwise."""
        if self._dphys is None:
            self._ensure_forward()
            raw = self.solver.floor_dy_cells(self._W, self._dy_matrix)
            _, det = self.model.jacobian(
                self._t_cells, np.full_like(self._t_cells, self.model.floor),
                perturbed=True)
            self._dphys = raw / det
        return self._dphys

    # -- derivative -----------------------------------------------------------------

    def apply_DS(self, h_cells):
        """Derivative trace for a surface direction sampled on the floor grid.

        h_cells: (n_cells, nx) real samples h(x_m + 2 pi j).
        """
        d = self.floor_slope_cells()
        g_cells = -d * np.asarray(h_cells)
        G = self.solver.floor_values_from_cells(g_cells)
        W = self.solver.solve(floor_values=G)
        return self.solver.receiver_values(W, self.receivers)

    def _transpose_dual(self, y):
        """Bilinear transpose of apply_DS applied to a receiver dual vector."""
        sol = self.solver
        na = sol.n_alpha
        nfree = sol.free.size
        loads_free = np.zeros((na, nfree), dtype=complex)
        full = np.zeros(self.mesh.ndof, dtype=complex)
        for q in range(na):
            phased = y * np.exp(-1j * sol.alphas[q] * self.receivers)
            full[:] = 0.0
            full[self.mesh.top_dofs] = (self._trace_matrix.T @ phased) / na
            loads_free[q] = full[sol.free]
        Z = sol.solve_transpose_free(loads_free)
        G_star = np.zeros((na, self.mesh.nx), dtype=complex)
        for q in range(na):
            G_star[q] = -(sol.K_fc[q].T @ Z[q])
        if sol.has_delta:
            ztilde = np.einsum("qm,qm->m", np.conj(sol.phi[:, sol.free]), Z) / na
            delta_cf = sol.delta[self.mesh.floor_dofs][:, sol.free]
            reaction = delta_cf @ ztilde
            G_star -= sol.phi[:, self.mesh.floor_dofs] * reaction[None, :]
        rho = sol.cells_transpose_nodal(G_star)
        return -self.floor_slope_cells() * rho

    def apply_DS_star(self, phi, weights):
        """Adjoint of DS against the weighted line pairing; returns a real
        surface function on the floor grid, in the parameter-dt pairing."""
        y = np.asarray(weights) * np.conj(np.asarray(phi, dtype=complex))
        rho = self._transpose_dual(y)
        dx = TWO_PI / self.mesh.nx
        return np.real(rho) / dx

    # -- coefficient-space maps --------------------------------------------------------

    def trig_design(self, n_coeffs):
        flat = self._t_cells.ravel()
        return TrigPolynomial.basis_matrix(n_coeffs, flat)

    def bump_design(self, basis, cell_index):
        flat = self._t_cells.ravel() - TWO_PI * cell_index
        return basis.design_matrix(flat)

    def apply_MA(self, delta_c):
        design = self.trig_design(np.asarray(delta_c).size)
        h = (design @ np.asarray(delta_c, dtype=float)).reshape(self._t_cells.shape)
        return self.apply_DS(h)

    def apply_MB(self, delta_d):
        pert = self.model.perturbation
        design = self.bump_design(pert.basis, pert.cell_index)
        h = (design @ np.asarray(delta_d, dtype=float)).reshape(self._t_cells.shape)
        return self.apply_DS(h)

    def apply_MA_star(self, phi, weights, n_coeffs):
        y = np.asarray(weights) * np.conj(np.asarray(phi, dtype=complex))
        rho = np.real(self._transpose_dual(y)).ravel()
        return self.trig_design(n_coeffs).T @ rho

    def apply_MB_star(self, phi, weights):
        pert = self.model.perturbation
        y = np.asarray(weights) * np.conj(np.asarray(phi, dtype=complex))
        rho = np.real(self._transpose_dual(y)).ravel()
        return self.bump_design(pert.basis, pert.cell_index).T @ rho
