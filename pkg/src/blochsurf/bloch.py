"""Discrete Floquet-Bloch transform between strip cells and quasi-periodicity nodes.

A strip function truncated to cells j = -K..K is mapped onto 2K+1 uniform
nodes alpha_q = q / (2K+1) in the dual cell (-1/2, 1/2]:

    w(alpha_q, x) = sum_j u(x + (2 pi j, 0)) exp(+2 i pi j alpha_q).

With this forward phase the exact discrete inverse carries the conjugate
phase exp(-2 i pi j alpha_q); the pair is then an isometry:
(1/N) sum_q |w_q|^2 = sum_j |u_j|^2.
"""

from dataclasses import dataclass

import numpy as np

from .errors import MeshMismatch


def alpha_grid(n_cells_half):
    """Uniform quasi-periodicity nodes q/(2K+1), q = -K..K."""
    K = int(n_cells_half)
    n = 2 * K + 1
    return np.arange(-K, K + 1) / n


def _phase_matrix(alphas, cell_offsets):
    return np.exp(2j * np.pi * np.outer(alphas, cell_offsets))


@dataclass
class StripField:
    """Cellwise values for cells j = -K..K; axis 0 runs over cells."""

    cells: np.ndarray
    mesh: object = None

    def __post_init__(self):
        self.cells = np.asarray(self.cells)
        if self.cells.shape[0] % 2 == 0:
            raise ValueError("cell count must be odd (j = -K..K)")

    @property
    def half_width(self):
        return (self.cells.shape[0] - 1) // 2

    def cell(self, j):
        return self.cells[j + self.half_width]


@dataclass
class BlochField:
    """Per-alpha fields; axis 0 runs over the alpha nodes."""

    alphas: np.ndarray
    fields: np.ndarray
    mesh: object = None

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=float)
        self.fields = np.asarray(self.fields)
        if self.alphas.shape[0] != self.fields.shape[0]:
            raise ValueError("alpha node count does not match field count")


def bloch_forward(strip):
    """Forward transform; cells must share one mesh."""
    if isinstance(strip, StripField):
        cells, mesh = strip.cells, strip.mesh
        if isinstance(mesh, (list, tuple)):
            ref = mesh[0]
            if any(m is not ref and m != ref for m in mesh):
                raise MeshMismatch("strip cells disagree on the shared mesh")
            mesh = ref
    else:
        cells, mesh = np.asarray(strip), None
    n = cells.shape[0]
    if n % 2 == 0:
        raise ValueError("cell count must be odd (j = -K..K)")
    K = (n - 1) // 2
    alphas = alpha_grid(K)
    offsets = np.arange(-K, K + 1)
    phases = _phase_matrix(alphas, offsets)
    fields = np.tensordot(phases, cells.astype(complex), axes=(1, 0))
    return BlochField(alphas=alphas, fields=fields, mesh=mesh)


def bloch_inverse(bloch):
    """Inverse transform back to cellwise values (exact for the node grid)."""
    fields = bloch.fields
    n = fields.shape[0]
    K = (n - 1) // 2
    offsets = np.arange(-K, K + 1)
    phases = np.exp(-2j * np.pi * np.outer(offsets, bloch.alphas)) / n
    cells = np.tensordot(phases, fields, axes=(1, 0))
    return StripField(cells=cells, mesh=bloch.mesh)


def central_cell_restriction(bloch):
    """Cell j = 0 of the inverse transform: the plain alpha-average."""
    return np.mean(bloch.fields, axis=0)
