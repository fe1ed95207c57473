import numpy as np
import pytest

from blochsurf.bloch import (BlochField, StripField, alpha_grid, bloch_forward,
                             bloch_inverse, central_cell_restriction)
from blochsurf.errors import MeshMismatch


def random_strip(rng, K, shape=(9, 7)):
    return (rng.standard_normal((2 * K + 1,) + shape)
            + 1j * rng.standard_normal((2 * K + 1,) + shape))


def test_single_cell_support_gives_constant_family():
    rng = np.random.default_rng(0)
    K = 3
    cells = np.zeros((2 * K + 1, 5), dtype=complex)
    psi = rng.standard_normal(5)
    cells[K] = psi  # cell j = 0
    w = bloch_forward(StripField(cells=cells))
    for q in range(2 * K + 1):
        assert np.allclose(w.fields[q], psi)


def test_cell_one_supports_pure_phase():
    K = 2
    cells = np.zeros((2 * K + 1, 4), dtype=complex)
    psi = np.array([1.0, 2.0, -1.0, 0.5])
    cells[K + 1] = psi  # cell j = 1
    w = bloch_forward(StripField(cells=cells))
    for q, a in enumerate(w.alphas):
        assert np.allclose(w.fields[q], psi * np.exp(2j * np.pi * a))


@pytest.mark.parametrize("K", [2, 4, 8])
def test_round_trip_identity(K):
    rng = np.random.default_rng(K)
    cells = random_strip(rng, K)
    back = bloch_inverse(bloch_forward(StripField(cells=cells)))
    assert np.max(np.abs(back.cells - cells)) < 1e-12


@pytest.mark.parametrize("K", [2, 4, 8])
def test_discrete_parseval(K):
    rng = np.random.default_rng(10 + K)
    cells = random_strip(rng, K)
    w = bloch_forward(StripField(cells=cells))
    lhs = np.sum(np.abs(w.fields) ** 2) / (2 * K + 1)
    rhs = np.sum(np.abs(cells) ** 2)
    assert abs(lhs - rhs) / rhs < 1e-12


def test_linearity():
    rng = np.random.default_rng(5)
    K = 4
    u, v = random_strip(rng, K), random_strip(rng, K)
    a, b = 1.3 - 0.2j, -0.7 + 2.0j
    w1 = bloch_forward(StripField(cells=a * u + b * v)).fields
    w2 = (a * bloch_forward(StripField(cells=u)).fields
          + b * bloch_forward(StripField(cells=v)).fields)
    assert np.max(np.abs(w1 - w2)) < 1e-12


def test_constant_in_alpha_inverts_to_central_cell():
    rng = np.random.default_rng(8)
    K = 3
    psi = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    w = BlochField(alphas=alpha_grid(K), fields=np.tile(psi, (2 * K + 1, 1)))
    u = bloch_inverse(w)
    assert np.allclose(u.cell(0), psi)
    for j in list(range(-K, 0)) + list(range(1, K + 1)):
        assert np.max(np.abs(u.cell(j))) < 1e-13


def test_central_cell_restriction_matches_geometric_sum():
    K = 3
    n = 2 * K + 1
    alphas = alpha_grid(K)
    psi = np.array([2.0, -1.0])
    fields = np.exp(2j * np.pi * alphas)[:, None] * psi
    got = central_cell_restriction(BlochField(alphas=alphas, fields=fields))
    expected = np.sum(np.exp(2j * np.pi * alphas)) / n * psi
    assert np.allclose(got, expected)
    assert np.max(np.abs(central_cell_restriction(
        BlochField(alphas=alphas, fields=0 * fields)))) == 0.0


def test_central_cell_equals_alpha_average_of_roundtrip():
    rng = np.random.default_rng(2)
    K = 5
    cells = random_strip(rng, K, shape=(3,))
    w = bloch_forward(StripField(cells=cells))
    assert np.allclose(central_cell_restriction(w), cells[K], atol=1e-13)


def test_mesh_mismatch_raises():
    cells = np.zeros((3, 4))
    with pytest.raises(MeshMismatch):
        bloch_forward(StripField(cells=cells, mesh=["a", "b", "a"]))


def test_alpha_grid_inside_dual_cell():
    for K in (1, 4, 16):
        a = alpha_grid(K)
        assert a.size == 2 * K + 1
        assert a.min() > -0.5 and a.max() < 0.5
        assert np.allclose(np.diff(a), 1.0 / (2 * K + 1))
