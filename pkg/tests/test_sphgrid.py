import numpy as np
import pytest

from photonkin import build_grid, sphgrid

# frozen oracles, scipy.integrate.quad at epsabs=epsrel=1e-14:
#   4*pi * int_1^9 k^2 exp(-(k-3)^2) sin(k)^2 dk
ORACLE_WINDOWED = 65.47275719429095
#   2*pi * int_1^7 k exp(-(k-4)^2) dk
ORACLE_INVARIANT = 44.54563991759045
#   4*pi * int_0.1^50 k^2 exp(-k) dk
ORACLE_LOG = 25.128854373123154


def test_gaussian_full_space_norm():
    # k^2 exp(-k^2) over a generous shell: int d^3p = (3/2) pi^(3/2);
    # the k^2 factor keeps the k < k_min truncation below rounding
    grid = build_grid(48, 16, 8, 1e-3, 12.0)
    val = sphgrid.integrate_flat(grid, grid.k_flat**2 * np.exp(-grid.k_flat**2))
    assert abs(val - 1.5 * np.pi**1.5) < 1e-12


def test_shell_volume_exact():
    grid = build_grid(2, 2, 4, 2.0, 5.0)
    expected = 4.0 * np.pi / 3.0 * (5.0**3 - 2.0**3)
    # k^2 is integrated exactly by 2-point Gauss-Legendre
    assert abs(sphgrid.shell_volume(grid) - expected) < 1e-10 * expected


def test_windowed_radial_oracle():
    grid = build_grid(48, 8, 8, 1.0, 9.0)
    f = np.exp(-(grid.k_flat - 3.0) ** 2) * np.sin(grid.k_flat) ** 2
    val = sphgrid.integrate_flat(grid, f)
    assert abs(val - ORACLE_WINDOWED) < 1e-10 * ORACLE_WINDOWED


def test_invariant_measure_oracle():
    grid = build_grid(40, 8, 8, 1.0, 7.0)
    f = np.exp(-(grid.k_flat - 4.0) ** 2)
    val = sphgrid.integrate_invariant(grid, f)
    assert abs(val - ORACLE_INVARIANT) < 1e-12 * ORACLE_INVARIANT


def test_log_map_oracle():
    grid = build_grid(64, 4, 4, 0.1, 50.0, radial_map="log")
    val = sphgrid.integrate_flat(grid, np.exp(-grid.k_flat))
    assert abs(val - ORACLE_LOG) < 1e-12 * ORACLE_LOG


def test_angular_weights():
    grid = build_grid(8, 12, 16, 1.0, 2.0, ct_window=(-0.25, 0.75))
    assert abs(grid.ct_weights.sum() - 1.0) < 1e-14
    assert abs(grid.phi_weights.sum() - 2.0 * np.pi) < 1e-13
    assert np.all(grid.ct_nodes > -0.25) and np.all(grid.ct_nodes < 0.75)


def test_node_layout():
    grid = build_grid(3, 4, 5, 1.0, 2.0)
    p = grid.p_vecs.reshape(grid.shape + (3,))
    k = np.linalg.norm(p, axis=-1)
    # C-order: axis 0 radial, axis 1 polar, axis 2 azimuthal
    assert np.allclose(k, grid.k_nodes[:, None, None])
    assert np.allclose(p[..., 2] / k, grid.ct_nodes[None, :, None])
    phi = np.arctan2(p[..., 1], p[..., 0]) % (2.0 * np.pi)
    assert np.allclose(phi, grid.phi_nodes[None, None, :], atol=1e-12)
    assert np.allclose(grid.w_inv, grid.w_flat / (2.0 * grid.k_flat))


def test_integrate_shapes():
    grid = build_grid(6, 4, 4, 1.0, 3.0)
    vals = np.ones((2,) + grid.shape)
    out = sphgrid.integrate_flat(grid, vals)
    assert out.shape == (2,)
    assert np.allclose(out, sphgrid.shell_volume(grid))


def test_grid_immutable():
    grid = build_grid(4, 4, 4, 1.0, 3.0)
    with pytest.raises(ValueError):
        grid.k_nodes[0] = 99.0


@pytest.mark.parametrize("bad", [
    dict(n_k=1), dict(n_theta=1), dict(n_phi=3),
    dict(k_min=0.0), dict(k_min=5.0, k_max=2.0),
    dict(ct_window=(0.5, 0.5)), dict(ct_window=(-2.0, 1.0)),
    dict(radial_map="cubic"),
])
def test_build_grid_validation(bad):
    kwargs = dict(n_k=8, n_theta=8, n_phi=8, k_min=1.0, k_max=4.0)
    kwargs.update(bad)
    with pytest.raises(ValueError):
        build_grid(**kwargs)
