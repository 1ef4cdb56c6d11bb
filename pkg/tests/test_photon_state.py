import numpy as np
import pytest

import photonkin as pk
from photonkin import photon_state, sphgrid
from conftest import BEAM_SPEC

# frozen oracle, scipy.integrate.quad at epsabs=epsrel=1e-14:
#   (1/(2 pi^2)) int_2^10 k^2 j0(0.7 k) dk
ORACLE_OVERLAP_07 = -0.792819786631782


def random_state(grid, seed):
    rng = np.random.default_rng(seed)
    vals = rng.normal(size=(2,) + grid.shape) + 1j * rng.normal(size=(2,) + grid.shape)
    return pk.HelicityAmplitude(grid=grid, values=vals)


def test_from_spec_normalized(beam_state):
    assert abs(pk.norm(beam_state) - 1.0) < 1e-12
    assert abs(beam_state.captured - 1.0) < 1e-6


def test_norm_leak_raises():
    # shell too narrow for the packet
    grid = pk.build_grid(16, 8, 8, 9.0, 11.0, ct_window=(0.94, 1.0))
    with pytest.raises(pk.NormLeakError):
        pk.from_spec(BEAM_SPEC, grid)


def test_vector_round_trip_isometry(beam_state, broad_state):
    for state in (beam_state, broad_state):
        vec = pk.to_vector(state)
        back = pk.from_vector(vec)
        assert np.abs(back.values - state.values).max() < 1e-12
        # helicity norm == invariant-measure norm of the vector amplitude
        n_hel = float(np.sum((np.abs(state.flat) ** 2) @ state.grid.w_flat))
        n_vec = float(np.sum((np.abs(vec.values) ** 2 @ np.ones(3)) * state.grid.w_inv))
        assert abs(n_hel - n_vec) < 1e-12 * n_hel


def test_vector_transversality(beam_state):
    vec = pk.to_vector(beam_state)
    longitudinal = np.abs(np.einsum("ni,ni->n", beam_state.grid.n_hat, vec.values))
    assert longitudinal.max() < 1e-13 * np.abs(vec.values).max()


def test_from_vector_rejects_longitudinal(beam_grid):
    vals = np.zeros((beam_grid.n_nodes, 3), dtype=complex)
    vals[:, :] = beam_grid.n_hat  # purely longitudinal
    with pytest.raises(pk.TransversalityError):
        pk.from_vector(pk.VectorAmplitude(grid=beam_grid, values=vals))


def test_localized_overlap_oracle():
    # n_phi must outrun the azimuthal carrier (k |d_xy| up to ~5 rad)
    grid = pk.build_grid(48, 32, 24, 2.0, 10.0)
    x1 = np.array([0.1, -0.2, 0.3])
    d = 0.7 * np.array([2.0, -1.0, 2.0]) / 3.0
    a = pk.localized_state(grid, x1, 1)
    b = pk.localized_state(grid, x1 + d, 1)
    val = pk.inner(a, b)
    assert abs(val.imag) < 1e-14
    assert abs(val.real - ORACLE_OVERLAP_07) < 1e-9
    # opposite helicities never overlap
    c = pk.localized_state(grid, x1 + d, -1)
    assert abs(pk.inner(a, c)) < 1e-30


def test_position_rep_is_localized_overlap(beam_state):
    pts = np.array([[0.0, 0.0, -5.0], [0.5, -0.25, -4.0]])
    samples = pk.to_position_rep(beam_state, pts)
    for i, x in enumerate(pts):
        for j, lam in enumerate(pk.HELICITIES):
            loc = pk.localized_state(beam_state.grid, x, lam)
            direct = pk.inner(loc, beam_state)
            assert abs(samples.values[j, i] - direct) < 1e-13


def test_beam_position_density(beam_state):
    # density peaks at the launch point and integrates to 1 over a box
    z = np.linspace(-9.0, -1.0, 81)
    pts = np.stack([np.zeros_like(z), np.zeros_like(z), z], axis=1)
    dens = np.abs(pk.to_position_rep(beam_state, pts).values).sum(axis=0) ** 2
    assert abs(z[np.argmax(dens)] - (-5.0)) < 0.11
    prob = pk.probability_in_region(
        beam_state, np.array([-4.0, -4.0, -9.0]), np.array([4.0, 4.0, -1.0]),
        n_q=(14, 14, 14),
    )
    assert abs(prob - 1.0) < 1e-3


def test_half_space_split(beam_state):
    # Gaussian centered on the plane z = -5 splits its mass evenly
    lo = np.array([-4.0, -4.0, -9.0])
    mid_hi = np.array([4.0, 4.0, -5.0])
    mid_lo = np.array([-4.0, -4.0, -5.0])
    hi = np.array([4.0, 4.0, -1.0])
    left = pk.probability_in_region(beam_state, lo, mid_hi, n_q=(12, 12, 12))
    right = pk.probability_in_region(beam_state, mid_lo, hi, n_q=(12, 12, 12))
    assert abs(left - 0.5) < 1e-3
    assert abs(right - 0.5) < 1e-3
    assert abs(left + right - 1.0) < 1e-3


def test_probability_region_validation(beam_state):
    with pytest.raises(ValueError):
        pk.probability_in_region(beam_state, np.ones(3), np.zeros(3))
    flat = pk.probability_in_region(beam_state, np.zeros(3), np.array([0.0, 1.0, 1.0]))
    assert flat == 0.0


def test_amplitude_gradient_matches_fd(beam_state):
    from photonkin.position_op import gaussian_analytic

    grad = photon_state.amplitude_gradient(beam_state)
    analytic = gaussian_analytic(beam_state.spec)
    h = 1e-6
    p = beam_state.grid.p_vecs
    scale = np.abs(beam_state.flat).max()
    for a in range(3):
        dp = np.zeros_like(p)
        dp[:, a] = h
        fd = (analytic.amp(p + dp) - analytic.amp(p - dp)).T / (2 * h)
        # from_spec rescales by 1/sqrt(captured * whole_space_norm)
        ratio = beam_state.flat[0] / analytic.amp(p).T[0]
        dev = np.abs(grad[..., a] - fd * ratio[None, :]).max()
        assert dev < 1e-8 * scale


def test_evolved_gradient_has_time_term(beam_state):
    from photonkin.dynamics import evolve

    st = evolve(beam_state, 2.0)
    grad0 = photon_state.amplitude_gradient(beam_state)
    grad_t = photon_state.amplitude_gradient(st)
    phase = np.exp(-1j * st.grid.k_flat * 2.0)
    extra = -1j * 2.0 * st.grid.n_hat  # d/dp^a of -i|p|t
    expected = (grad0 + beam_state.flat[..., None] * extra[None, :, :]) * phase[None, :, None]
    assert np.abs(grad_t - expected).max() < 1e-12


def test_save_load_amplitudes(tmp_path, beam_state):
    stem = str(tmp_path / "state")
    files = pk.save_state(beam_state, stem, format="amplitudes")
    assert len(files) == 2
    loaded = pk.load_state(files[0] if files[0].endswith(".json") else files[1])
    assert np.array_equal(loaded.values, beam_state.values)
    assert loaded.grid.shape == beam_state.grid.shape
    assert abs(pk.norm(loaded) - pk.norm(beam_state)) < 1e-13
    assert loaded.t_evolved == beam_state.t_evolved


def test_save_load_spec(tmp_path, beam_state):
    stem = str(tmp_path / "spec_state")
    files = pk.save_state(beam_state, stem, format="spec")
    path = [f for f in files if f.endswith(".json")][0]
    loaded = pk.load_state(path)
    assert np.abs(loaded.values - beam_state.values).max() < 1e-13
    assert loaded.spec == beam_state.spec


def test_random_state_norm_definition(broad_grid):
    state = random_state(broad_grid, 3)
    direct = sphgrid.integrate_flat(broad_grid, np.abs(state.values) ** 2).sum()
    assert abs(pk.norm(state) ** 2 - direct) < 1e-10 * direct
