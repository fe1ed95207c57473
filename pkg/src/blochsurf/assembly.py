"""Galerkin assembly of the transformed Helmholtz forms on the reference cell.

Volume matrices (real):
    S[m,n]  = int A grad(phi_n) . grad(phi_m)
    C1[m,n] = int (A grad(phi_n)) . e1 phi_m
    M1[m,n] = int A11 phi_n phi_m
    Mc[m,n] = int c phi_n phi_m

The quasi-periodic system in the periodic representation (u = e^{-i a x1} U) is
    K(a) = S + i a (C1 - C1^T) + a^2 M1 - k^2 Mc - B_dtn(a).
"""

import numpy as np
import scipy.sparse as sp

TWO_PI = 2.0 * np.pi


def _scatter(mesh, local):
    """Accumulate (nel, L, L) element blocks into a CSR matrix."""
    dofs = mesh.element_dofs
    n_loc = dofs.shape[1]
    rows = np.repeat(dofs, n_loc, axis=1).ravel()
    cols = np.tile(dofs, (1, n_loc)).ravel()
    mat = sp.coo_matrix((local.ravel(), (rows, cols)),
                        shape=(mesh.ndof, mesh.ndof))
    return mat.tocsr()


def _coefficients_at_gauss(mesh, fields, offset=0.0, pts=None):
    pts = pts if pts is not None else mesh.gauss_2d()[0]
    gx, gy = mesh.gauss_points_global(pts)
    a11, a12, a22, c = fields.evaluate(gx + offset, gy)
    return a11, a12, a22, c


def volume_matrices(mesh, fields, offset=0.0):
    """Assemble S, C1, M1, Mc for coefficient fields sampled at x1 + offset."""
    pts, wts, N, Nx, Ny = mesh.gauss_2d()
    jac = mesh.dx_elem * mesh.dy_elem / 4.0
    a11, a12, a22, c = _coefficients_at_gauss(mesh, fields, offset, pts)
    w = wts * jac
    S = (np.einsum("g,eg,gm,gn->emn", w, a11, Nx, Nx)
         + np.einsum("g,eg,gm,gn->emn", w, a12, Nx, Ny)
         + np.einsum("g,eg,gm,gn->emn", w, a12, Ny, Nx)
         + np.einsum("g,eg,gm,gn->emn", w, a22, Ny, Ny))
    C1 = (np.einsum("g,eg,gm,gn->emn", w, a11, N, Nx)
          + np.einsum("g,eg,gm,gn->emn", w, a12, N, Ny))
    M1 = np.einsum("g,eg,gm,gn->emn", w, a11, N, N)
    Mc = np.einsum("g,eg,gm,gn->emn", w, c, N, N)
    return {name: _scatter(mesh, loc)
            for name, loc in (("S", S), ("C1", C1), ("M1", M1), ("Mc", Mc))}


def difference_matrices(mesh, model, pert_cell=None):
    """(S_d, M_d) assembled from the perturbed-minus-periodic coefficient gap.

    Evaluated on the perturbed cell (offset 2*pi*J); zero outside the
    perturbation support by construction.
    """
    cell = pert_cell if pert_cell is not None else model.perturbation.cell_index
    offset = TWO_PI * cell
    pts, wts, N, Nx, Ny = mesh.gauss_2d()
    jac = mesh.dx_elem * mesh.dy_elem / 4.0
    gx, gy = mesh.gauss_points_global(pts)
    a11p, a12p, a22p, cp = model.coefficient_fields(True).evaluate(gx + offset, gy)
    a11, a12, a22, c0 = model.coefficient_fields(False).evaluate(gx + offset, gy)
    d11, d12, d22, dc = a11p - a11, a12p - a12, a22p - a22, cp - c0
    w = wts * jac
    S = (np.einsum("g,eg,gm,gn->emn", w, d11, Nx, Nx)
         + np.einsum("g,eg,gm,gn->emn", w, d12, Nx, Ny)
         + np.einsum("g,eg,gm,gn->emn", w, d12, Ny, Nx)
         + np.einsum("g,eg,gm,gn->emn", w, d22, Ny, Ny))
    M = np.einsum("g,eg,gm,gn->emn", w, dc, N, N)
    S, M = _scatter(mesh, S), _scatter(mesh, M)
    for mat in (S, M):
        mat.eliminate_zeros()
    return S, M


def identity_matrices(mesh):
    """Stiffness/mass pair with A = I, c = 1 (H1 norms, validation)."""

    class _Identity:
        @staticmethod
        def evaluate(x1, x2):
            one = np.ones_like(np.asarray(x1, dtype=float))
            return one, 0.0 * one, one.copy(), one.copy()

    mats = volume_matrices(mesh, _Identity())
    return mats["S"], mats["Mc"]


def trace_fourier_matrix(mesh, n_modes, n_gauss=12):
    """Dense E with E[j, m] = (1/2 pi) int phi_m(x) exp(-i j x) dx on the edge.

    Rows run over j = -n_modes..n_modes.  Gauss order 12 resolves the
    oscillation exp(-i j x) per element for j dx / 2 up to ~3.
    """
    xg, wg, vals = mesh.gauss_1d(n_gauss)
    orders = np.arange(-n_modes, n_modes + 1)
    phases = np.exp(-1j * orders[:, None, None] * xg[None, :, :])
    contrib = np.einsum("jeg,g,ga->jea", phases, wg, vals) / TWO_PI
    E = np.zeros((orders.size, mesh.nx), dtype=complex)
    for a in range(mesh.order + 1):
        np.add.at(E.T, mesh.edge_dofs_1d[:, a], contrib[:, :, a].T)
    return orders, E


def dtn_block(E, orders, alpha, k):
    """Dense boundary form 2 pi E^H diag(i beta_j(alpha)) E on the top edge."""
    beta = 1j * np.sqrt((k * k - (orders - alpha) ** 2).astype(complex))
    return TWO_PI * (E.conj().T * beta) @ E


def top_load_vectors(mesh, cell_gauss_values, alphas, pert_cell=0, n_gauss=12):
    """Per-alpha top load vectors from line data sampled cellwise at Gauss points.

    cell_gauss_values: (n_cells, n1, n_gauss) samples of the physical line
    data f(x + 2 pi j); the returned loads are in the periodic representation,
    i.e. rows of int F(alpha, x) e^{i alpha x} phi_m(x) dx.
    """
    xg, wg, vals = mesh.gauss_1d(n_gauss)
    data = np.asarray(cell_gauss_values, dtype=complex)
    n_cells = data.shape[0]
    K = (n_cells - 1) // 2
    offsets = np.arange(-K, K + 1)
    alphas = np.asarray(alphas, dtype=float)
    cell_phase = np.exp(2j * np.pi * np.outer(alphas, offsets))
    f_alpha = np.tensordot(cell_phase, data, axes=(1, 0))  # (na, n1, g)
    f_alpha = f_alpha * np.exp(1j * alphas[:, None, None] * xg[None])
    contrib = np.einsum("qeg,g,ga->qea", f_alpha, wg, vals)
    loads = np.zeros((alphas.size, mesh.nx), dtype=complex)
    for a in range(mesh.order + 1):
        np.add.at(loads.T, mesh.edge_dofs_1d[:, a], contrib[:, :, a].T)
    return loads


def floor_value_vectors(mesh, cell_node_values, alphas):
    """Per-alpha periodic-representation Dirichlet values on the floor nodes.

    cell_node_values: (n_cells, nx) samples g(x_m + 2 pi j) at the floor
    x-nodes; returns sums g_j exp(i alpha (x_m + 2 pi j)).
    """
    data = np.asarray(cell_node_values, dtype=complex)
    n_cells = data.shape[0]
    K = (n_cells - 1) // 2
    offsets = np.arange(-K, K + 1)
    alphas = np.asarray(alphas, dtype=float)
    x = mesh.x_nodes
    phase = np.exp(1j * np.multiply.outer(alphas, np.add.outer(TWO_PI * offsets, x)))
    return np.einsum("qjm,jm->qm", phase, data)
