"""Tensor-product finite-element mesh on the periodic reference cell.

The cell is (-pi, pi] x (floor, ceiling), periodic in x1, with Lagrange
elements of order 1 or 2 on a uniform n1 x n2 element grid.  Degrees of
freedom are nodal; node (ix, iy) has id ix * ny + iy with ix periodic.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

TWO_PI = 2.0 * np.pi


def shape_functions(order, xi):
    """1-D nodal shape values and derivatives at reference points xi in [-1, 1]."""
    xi = np.asarray(xi, dtype=float)
    if order == 1:
        vals = np.stack([(1 - xi) / 2, (1 + xi) / 2], axis=-1)
        ders = np.stack([-0.5 * np.ones_like(xi), 0.5 * np.ones_like(xi)], axis=-1)
    elif order == 2:
        vals = np.stack([0.5 * xi * (xi - 1), 1 - xi * xi, 0.5 * xi * (xi + 1)],
                        axis=-1)
        ders = np.stack([xi - 0.5, -2 * xi, xi + 0.5], axis=-1)
    else:
        raise ValueError("element order must be 1 or 2")
    return vals, ders


@dataclass(frozen=True)
class CellMesh:
    n1: int
    n2: int
    floor: float
    ceiling: float
    order: int = 2

    def __post_init__(self):
        if self.n1 < 2 or self.n2 < 1:
            raise ValueError("mesh needs at least 2 x 1 elements")
        if self.order not in (1, 2):
            raise ValueError("element order must be 1 or 2")
        if self.ceiling <= self.floor:
            raise ValueError("ceiling must exceed floor")

    # -- geometry -------------------------------------------------------------

    @property
    def nx(self):
        return self.order * self.n1  # periodic in x1

    @property
    def ny(self):
        return self.order * self.n2 + 1

    @property
    def ndof(self):
        return self.nx * self.ny

    @property
    def dx_elem(self):
        return TWO_PI / self.n1

    @property
    def dy_elem(self):
        return (self.ceiling - self.floor) / self.n2

    @cached_property
    def x_nodes(self):
        return -np.pi + np.arange(self.nx) * (TWO_PI / self.nx)

    @cached_property
    def y_nodes(self):
        return self.floor + np.arange(self.ny) * ((self.ceiling - self.floor)
                                                  / (self.ny - 1))

    @cached_property
    def node_coords(self):
        x1 = np.repeat(self.x_nodes, self.ny)
        x2 = np.tile(self.y_nodes, self.nx)
        return x1, x2

    # -- dof sets --------------------------------------------------------------

    @cached_property
    def floor_dofs(self):
        return np.arange(self.nx) * self.ny

    @cached_property
    def top_dofs(self):
        return np.arange(self.nx) * self.ny + (self.ny - 1)

    @cached_property
    def free_dofs(self):
        mask = np.ones(self.ndof, dtype=bool)
        mask[self.floor_dofs] = False
        return np.nonzero(mask)[0]

    # -- element connectivity ---------------------------------------------------

    @cached_property
    def element_dofs(self):
        """(n_elements, (order+1)^2) dof ids; local index l = a*(order+1)+b."""
        p = self.order
        ex, ey = np.meshgrid(np.arange(self.n1), np.arange(self.n2),
                             indexing="ij")
        ex = ex.ravel()
        ey = ey.ravel()
        dofs = np.empty((ex.size, (p + 1) ** 2), dtype=np.int64)
        for a in range(p + 1):
            ix = (p * ex + a) % self.nx
            for b in range(p + 1):
                iy = p * ey + b
                dofs[:, a * (p + 1) + b] = ix * self.ny + iy
        return dofs

    @cached_property
    def element_origins(self):
        ex, ey = np.meshgrid(np.arange(self.n1), np.arange(self.n2),
                             indexing="ij")
        x0 = -np.pi + ex.ravel() * self.dx_elem
        y0 = self.floor + ey.ravel() * self.dy_elem
        return x0, y0

    def gauss_2d(self, npts=None):
        """Reference Gauss rule and tabulated tensor shapes: (pts, wts, N, Nx, Ny)."""
        npts = npts if npts is not None else self.order + 1
        g, w = np.polynomial.legendre.leggauss(npts)
        gx, gy = np.meshgrid(g, g, indexing="ij")
        wx, wy = np.meshgrid(w, w, indexing="ij")
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        wts = (wx * wy).ravel()
        vx, dx = shape_functions(self.order, pts[:, 0])
        vy, dy = shape_functions(self.order, pts[:, 1])
        p1 = self.order + 1
        n_loc = p1 * p1
        N = np.empty((pts.shape[0], n_loc))
        Nx = np.empty_like(N)
        Ny = np.empty_like(N)
        for a in range(p1):
            for b in range(p1):
                l = a * p1 + b
                N[:, l] = vx[:, a] * vy[:, b]
                Nx[:, l] = dx[:, a] * vy[:, b] * (2.0 / self.dx_elem)
                Ny[:, l] = vx[:, a] * dy[:, b] * (2.0 / self.dy_elem)
        return pts, wts, N, Nx, Ny

    def gauss_points_global(self, pts):
        """Global coordinates of reference points for every element: (nel, G, 2)."""
        x0, y0 = self.element_origins
        gx = x0[:, None] + 0.5 * (pts[:, 0] + 1.0) * self.dx_elem
        gy = y0[:, None] + 0.5 * (pts[:, 1] + 1.0) * self.dy_elem
        return gx, gy

    # -- 1-D trace machinery on the top/floor edge ------------------------------

    @cached_property
    def edge_dofs_1d(self):
        """(n1, order+1) x-node indices per edge element."""
        p = self.order
        e = np.arange(self.n1)
        return np.stack([(p * e + a) % self.nx for a in range(p + 1)], axis=1)

    def gauss_1d(self, npts=12):
        g, w = np.polynomial.legendre.leggauss(npts)
        vals, _ = shape_functions(self.order, g)
        x0 = -np.pi + np.arange(self.n1) * self.dx_elem
        xg = x0[:, None] + 0.5 * (g + 1.0) * self.dx_elem
        return xg, w * (self.dx_elem / 2.0), vals

    def trace_interpolation(self, x_points):
        """Sparse (npts, nx) matrix evaluating an edge function at folded points."""
        x = np.mod(np.asarray(x_points, dtype=float) + np.pi, TWO_PI) - np.pi
        e = np.clip(((x + np.pi) / self.dx_elem).astype(int), 0, self.n1 - 1)
        xi = 2.0 * (x + np.pi - e * self.dx_elem) / self.dx_elem - 1.0
        vals, _ = shape_functions(self.order, xi)
        rows = np.repeat(np.arange(x.size), self.order + 1)
        cols = self.edge_dofs_1d[e].ravel()
        return sp.csr_matrix((vals.ravel(), (rows, cols)),
                             shape=(x.size, self.nx))

    def floor_derivative_matrix(self):
        """Sparse (nx, ndof): d/dx2 at the floor nodes of a cell function.

        The vertical derivative is sampled at the two lowest Gauss depths of
        the first element row and extrapolated linearly to the floor; nodal
        one-sided derivatives at Dirichlet nodes are noisier.
        """
        g2, _ = np.polynomial.legendre.leggauss(2)
        depths = 0.5 * (g2 + 1.0)  # fractions of the first element height
        w1 = depths[1] / (depths[1] - depths[0])
        w2 = -depths[0] / (depths[1] - depths[0])
        p = self.order
        rows, cols, vals = [], [], []
        for ix in range(self.nx):
            e = min(ix // p, self.n1 - 1)
            a = ix - p * e
            xi = -1.0 + 2.0 * a / p
            vx, _ = shape_functions(p, np.array([xi]))
            for depth, wd in zip(depths, (w1, w2)):
                eta = 2.0 * depth - 1.0
                _, dy = shape_functions(p, np.array([eta]))
                vy, _ = shape_functions(p, np.array([eta]))
                for aa in range(p + 1):
                    ixx = (p * e + aa) % self.nx
                    for bb in range(p + 1):
                        dof = ixx * self.ny + bb
                        val = wd * vx[0, aa] * dy[0, bb] * (2.0 / self.dy_elem)
                        if val != 0.0:
                            rows.append(ix)
                            cols.append(dof)
                            vals.append(val)
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.nx, self.ndof))
