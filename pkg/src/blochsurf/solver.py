"""Quasi-periodic cell systems and the coupled solve for perturbed surfaces.

Per quasi-periodicity node alpha the periodic-representation system matrix is

    K(alpha) = S + i alpha (C1 - C1^T) + alpha^2 M1 - k^2 Mc - B_dtn(alpha)

with a homogeneous or lifted Dirichlet condition on the strip floor.  A local
perturbation couples the alpha nodes only through the restriction of the field
to the perturbed cell; the coupled system is solved by eliminating the
per-alpha blocks (precomputed LU factors) and running GMRES on the restriction
vector, i.e. a Schur complement on the perturbed-cell unknowns.

Bilinear transposes of all solves come for free from the grid symmetry
K(alpha)^T = K(-alpha): transposing permutes the alpha blocks q -> -q.
"""

import os
import warnings

import numpy as np
import scipy.sparse.linalg as spla

from . import assembly
from .bloch import alpha_grid
from .errors import NonConvergence, SingularSystem

TWO_PI = 2.0 * np.pi


def worker_count():
    """Thread cap from BLOCHSURF_THREADS (default 1: deterministic runs)."""
    try:
        return max(1, int(os.environ.get("BLOCHSURF_THREADS", "1")))
    except ValueError:
        return 1


class CellSolver:
    """Factorized per-alpha systems for one surface model on one mesh."""

    def __init__(self, model, mesh, k, half_cells, n_modes=24,
                 gmres_tol=1e-10, gmres_maxiter=400):
        self.model = model
        self.mesh = mesh
        self.k = float(k)
        self.half_cells = int(half_cells)
        self.n_alpha = 2 * self.half_cells + 1
        self.alphas = alpha_grid(self.half_cells)
        self.cell_offsets = np.arange(-self.half_cells, self.half_cells + 1)
        self.gmres_tol = float(gmres_tol)
        self.gmres_maxiter = int(gmres_maxiter)

        self.mats = assembly.volume_matrices(mesh, model.coefficient_fields(False))
        self.orders, self.E = assembly.trace_fourier_matrix(mesh, n_modes)
        self.free = mesh.free_dofs
        self.floor = mesh.floor_dofs
        self.top = mesh.top_dofs
        self._base = (self.mats["S"] - (self.k * self.k) * self.mats["Mc"]
                      ).astype(complex).tocsr()
        self._casym = (self.mats["C1"] - self.mats["C1"].T).astype(complex).tocsr()
        self._m1 = self.mats["M1"].astype(complex).tocsr()
        ntop = self.top.size
        self._dtn_rows = np.repeat(self.top, ntop)
        self._dtn_cols = np.tile(self.top, ntop)

        self.has_delta = not model.perturbation.is_zero
        if self.has_delta:
            Sd, Md = assembly.difference_matrices(mesh, model)
            self.delta = (Sd - (k * k) * Md).tocsr()
            self.delta_cols = np.unique(self.delta.tocsc().indices)
            self.delta_cols_mat = self.delta[:, self.delta_cols].tocsc()
        else:
            self.delta = None
            self.delta_cols = np.array([], dtype=int)

        pert_cell = model.perturbation.cell_index
        x1, _ = mesh.node_coords
        # e^{-i alpha (x + 2 pi J)}: in-cell representation phase and cell index
        self.phi = np.exp(-1j * np.outer(self.alphas, x1 + TWO_PI * pert_cell))

        self._lu = []
        self.K_fc = []
        self.nudged = np.zeros(self.n_alpha, dtype=bool)
        for q, a in enumerate(self.alphas):
            lu, kfc, used = self._factorize(a)
            if used != a:
                self.alphas[q] = used
                self.nudged[q] = True
                warnings.warn(f"alpha node {a:.6f} nudged to {used:.6f} "
                              f"(Rayleigh-singular system)", RuntimeWarning)
            self._lu.append(lu)
            self.K_fc.append(kfc)

    # -- assembly and factorization -------------------------------------------

    def matrix_at(self, alpha):
        import scipy.sparse as sp

        K = (self._base + (1j * alpha) * self._casym
             + (alpha * alpha) * self._m1)
        block = assembly.dtn_block(self.E, self.orders, alpha, self.k)
        dtn = sp.csr_matrix((-block.ravel(), (self._dtn_rows, self._dtn_cols)),
                            shape=K.shape)
        return (K + dtn).tocsr()

    def _factorize(self, alpha):
        for candidate in (alpha, alpha + 0.5 / self.n_alpha):
            K = self.matrix_at(candidate)
            kff = K[self.free][:, self.free].tocsc()
            kfc = K[self.free][:, self.floor].tocsc()
            try:
                lu = spla.splu(kff, permc_spec="MMD_AT_PLUS_A")
            except RuntimeError:
                continue
            return lu, kfc, candidate
        raise SingularSystem(alpha)

    # -- load construction ------------------------------------------------------

    def top_loads_from_line(self, f_line, n_gauss=12):
        """Per-alpha top loads from a callable f(x) on the physical top line."""
        xg, _, _ = self.mesh.gauss_1d(n_gauss)
        shifts = TWO_PI * self.cell_offsets
        pts = shifts[:, None, None] + xg[None, :, :]
        vals = np.asarray(f_line(pts.ravel()), dtype=complex).reshape(pts.shape)
        return assembly.top_load_vectors(self.mesh, vals, self.alphas,
                                         n_gauss=n_gauss)

    def floor_values_from_line(self, g_line):
        """Per-alpha lifted Dirichlet values from a callable g(x) on the floor."""
        x = self.mesh.x_nodes
        shifts = TWO_PI * self.cell_offsets
        pts = shifts[:, None] + x[None, :]
        vals = np.asarray(g_line(pts.ravel()), dtype=complex).reshape(pts.shape)
        return assembly.floor_value_vectors(self.mesh, vals, self.alphas)

    def floor_values_from_cells(self, cell_values):
        return assembly.floor_value_vectors(self.mesh, cell_values, self.alphas)

    # -- representation helpers ---------------------------------------------------

    def cells_from_alpha_nodal(self, values):
        """Physical cellwise line arrays from per-alpha nodal values (na, nx)."""
        x = self.mesh.x_nodes
        phase = np.exp(-1j * np.multiply.outer(
            self.alphas, np.add.outer(TWO_PI * self.cell_offsets, x)))
        return np.einsum("qjm,qm->jm", phase, values) / self.n_alpha

    def cells_transpose_nodal(self, duals):
        """Bilinear transpose of floor_values_from_cells: per-alpha duals -> cells."""
        x = self.mesh.x_nodes
        phase = np.exp(1j * np.multiply.outer(
            self.alphas, np.add.outer(TWO_PI * self.cell_offsets, x)))
        return np.einsum("qjm,qm->jm", phase, duals)

    def perturbed_cell_restriction(self, W):
        """u_J = (1/N) sum_q phi_q * W_q over full dofs (complex, ndof)."""
        return np.einsum("qm,qm->m", self.phi, W) / self.n_alpha

    # -- solves -------------------------------------------------------------------

    def _coupling_term(self, q, delta_v):
        """Free-row coupling load conj(phi_q) * (Delta u_J) for one block."""
        return np.conj(self.phi[q, self.free]) * delta_v[self.free]

    def solve(self, top_loads=None, floor_values=None, transpose=False):
        """Solve the (possibly coupled) system; returns W as (na, ndof).

        top_loads: (na, nx) load functionals on the top-edge dofs.
        floor_values: (na, nx) lifted Dirichlet values (forward mode only).
        transpose: bilinear transpose solve (loads only), alpha blocks flipped.
        """
        if transpose:
            if floor_values is not None:
                raise ValueError("transpose solves take loads only")
            return self.solve(top_loads=top_loads[::-1])[::-1]

        na, nf = self.n_alpha, self.free.size
        rhs = np.zeros((na, nf), dtype=complex)
        if top_loads is not None:
            full = np.zeros(self.mesh.ndof, dtype=complex)
            for q in range(na):
                full[:] = 0.0
                full[self.top] = top_loads[q]
                rhs[q] += full[self.free]
        if floor_values is not None:
            for q in range(na):
                rhs[q] -= self.K_fc[q] @ floor_values[q]

        W = np.zeros((na, self.mesh.ndof), dtype=complex)
        if floor_values is not None:
            W[:, self.floor] = floor_values

        if not self.has_delta:
            for q in range(na):
                W[q, self.free] = self._lu[q].solve(rhs[q])
            return W

        cols = self.delta_cols
        base = np.zeros((na, nf), dtype=complex)
        for q in range(na):
            base[q] = self._lu[q].solve(rhs[q])
        base_full = W.copy()
        base_full[:, self.free] += base
        b = self.perturbed_cell_restriction(base_full)[cols]

        def apply_schur(v):
            delta_v = self.delta_cols_mat @ v
            out = np.zeros(self.mesh.ndof, dtype=complex)
            acc = np.zeros_like(out)
            for q in range(na):
                sol = self._lu[q].solve(self._coupling_term(q, delta_v))
                acc[self.free] = sol
                out += self.phi[q] * acc
                acc[self.free] = 0.0
            return v + out[cols] / self.n_alpha

        op = spla.LinearOperator((cols.size, cols.size), matvec=apply_schur,
                                 dtype=complex)
        v, info = spla.gmres(op, b, rtol=self.gmres_tol, atol=0.0,
                             restart=min(200, cols.size),
                             maxiter=self.gmres_maxiter)
        if info != 0:
            raise NonConvergence(f"Schur GMRES failed to converge (info={info})")
        delta_v = self.delta_cols_mat @ v
        for q in range(na):
            W[q, self.free] = self._lu[q].solve(rhs[q]
                                                - self._coupling_term(q, delta_v))
        return W

    def solve_transpose_free(self, loads_free):
        """Transpose solve of the free-dof coupled operator for (na, nfree) loads."""
        na = self.n_alpha
        flipped = loads_free[::-1]
        if not self.has_delta:
            out = np.zeros_like(flipped)
            for q in range(na):
                out[q] = self._lu[q].solve(flipped[q])
            return out[::-1]
        W = np.zeros((na, self.mesh.ndof), dtype=complex)
        base = np.zeros_like(flipped)
        for q in range(na):
            base[q] = self._lu[q].solve(flipped[q])
        full = W.copy()
        full[:, self.free] = base
        cols = self.delta_cols
        b = self.perturbed_cell_restriction(full)[cols]

        def apply_schur(v):
            delta_v = self.delta_cols_mat @ v
            out = np.zeros(self.mesh.ndof, dtype=complex)
            acc = np.zeros_like(out)
            for q in range(na):
                sol = self._lu[q].solve(self._coupling_term(q, delta_v))
                acc[self.free] = sol
                out += self.phi[q] * acc
                acc[self.free] = 0.0
            return v + out[cols] / self.n_alpha

        op = spla.LinearOperator((cols.size, cols.size), matvec=apply_schur,
                                 dtype=complex)
        v, info = spla.gmres(op, b, rtol=self.gmres_tol, atol=0.0,
                             restart=min(200, cols.size),
                             maxiter=self.gmres_maxiter)
        if info != 0:
            raise NonConvergence(f"Schur GMRES failed to converge (info={info})")
        delta_v = self.delta_cols_mat @ v
        out = np.zeros_like(flipped)
        for q in range(na):
            out[q] = self._lu[q].solve(flipped[q] - self._coupling_term(q, delta_v))
        return out[::-1]

    # -- traces ---------------------------------------------------------------------

    def top_nodal(self, W):
        return W[:, self.top]

    def receiver_values(self, W, x_receivers):
        """Field values at points (x_r, ceiling) by trace interpolation."""
        tr = self.mesh.trace_interpolation(x_receivers)
        vals = np.zeros(np.asarray(x_receivers).size, dtype=complex)
        for q in range(self.n_alpha):
            vals += (tr @ W[q, self.top]) * np.exp(-1j * self.alphas[q]
                                                   * np.asarray(x_receivers))
        return vals / self.n_alpha

    def receiver_dtn_values(self, W, x_receivers):
        """Modal T+ of the top trace, evaluated at receiver abscissae."""
        x = np.asarray(x_receivers, dtype=float)
        xhat = np.mod(x + np.pi, TWO_PI) - np.pi
        synth = np.exp(1j * np.outer(xhat, self.orders))
        vals = np.zeros(x.size, dtype=complex)
        for q in range(self.n_alpha):
            beta = 1j * np.sqrt((self.k ** 2
                                 - (self.orders - self.alphas[q]) ** 2
                                 ).astype(complex))
            coeffs = beta * (self.E @ W[q, self.top])
            vals += (synth @ coeffs) * np.exp(-1j * self.alphas[q] * x)
        return vals / self.n_alpha

    def floor_dy_cells(self, W, dy_matrix):
        """Cellwise d/dx2 of the flattened field at the floor nodes."""
        raw = np.stack([dy_matrix @ W[q] for q in range(self.n_alpha)])
        return self.cells_from_alpha_nodal(raw)
