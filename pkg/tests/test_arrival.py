import numpy as np
import pytest

import photonkin as pk
from photonkin import arrival

# closed form for the broad packet (center_p = 4 z_hat, sigma = 1,
# center_x = -z_hat) projected onto a detector at z = 0.5 z_hat: the
# angular integral of a Gaussian times a plane wave gives
#   Phi(k) = (2 pi)^{-3/4} e^{-(k^2+16)/4} sinh(k a) / (k a),  a = 2 + 1.5i
DET_Z = np.array([0.0, 0.0, 0.5])
_A = 2.0 + 1.5j


def phi_closed(k):
    k = np.asarray(k, dtype=complex)
    return (2.0 * np.pi) ** -0.75 * np.exp(-(k * k + 16.0) / 4.0) * np.sinh(k * _A) / (k * _A)


# frozen oracles, scipy.integrate.quad on phi_closed over [0.05, 10]
ORACLE_NORM_SQ = 0.07999969063489533
ORACLE_AMP = {
    0.0: 0.015636199922030514 - 0.020344738787836988j,
    1.5: 0.20164142935295998 - 0.15086567680104734j,
    4.0: -0.0005150014506369828 + 0.0005945242843656436j,
}


@pytest.fixture(scope="module")
def broad_det(broad_state):
    return pk.project_detected(broad_state, DET_Z)


def test_projection_matches_closed_form(broad_state, broad_det):
    scale = np.sqrt(broad_state.captured)  # undo from_spec's renormalization
    got = broad_det.values[0] * scale
    want = phi_closed(broad_det.grid.k_nodes)
    assert np.abs(got - want).max() < 1e-12
    assert np.abs(broad_det.values[1]).max() == 0.0


def test_detected_norm_oracle(broad_state, broad_det):
    got = pk.detected_norm_sq(broad_det) * broad_state.captured
    assert abs(got - ORACLE_NORM_SQ) < 1e-10


def test_time_amplitude_oracle(broad_state, broad_det):
    times = np.array(sorted(ORACLE_AMP))
    got = pk.time_amplitude(broad_det, times)[0] * np.sqrt(broad_state.captured)
    for i, t in enumerate(times):
        assert abs(got[i] - ORACLE_AMP[t]) < 1e-10


def test_embed_project_round_trip(broad_det):
    emb = pk.embed_detected(broad_det)
    again = pk.project_detected(emb, broad_det.z)
    assert np.abs(again.values - broad_det.values).max() < 1e-14
    assert pk.constraint_residual(broad_det) < 1e-12
    # the embedded state's norm is the detected norm
    n_sq = pk.detected_norm_sq(broad_det)
    assert abs(pk.norm(emb) ** 2 - n_sq) < 1e-12 * n_sq


def test_constraint_large_for_generic_state(beam_state):
    res = pk.constraint_residual(beam_state, np.zeros(3))
    assert res > 0.5  # a focused beam is nowhere near angularly flat


def test_completeness(beam_state):
    det = pk.project_detected(beam_state, np.zeros(3))
    dens = pk.arrival_density(det, 0.0, 10.0, n_t=400)
    assert dens.completeness_error < 1e-3
    assert dens.window_ok


def test_positivity(broad_det):
    dens = pk.arrival_density(broad_det, -6.0, 10.0, n_t=600)
    assert dens.density.min() >= 0.0
    assert np.all(dens.per_helicity >= 0.0)


def test_null_state_gives_no_arrivals():
    # odd-in-cos(theta) profile: every angular shell average vanishes
    grid = pk.build_grid(24, 16, 8, 0.5, 8.0)
    vals = np.zeros((2,) + grid.shape, dtype=complex)
    vals[0] = (np.exp(-(grid.k_nodes[:, None, None] - 3.0) ** 2)
               * grid.ct_nodes[None, :, None])
    state = pk.HelicityAmplitude(grid=grid, values=vals)
    det = pk.project_detected(state, np.zeros(3))
    amps = pk.time_amplitude(det, np.linspace(-5.0, 5.0, 21))
    assert np.abs(amps).max() < 1e-8 * pk.norm(state)


def test_translation_invariance(beam_state, beam_grid):
    d = np.array([0.3, -0.4, 2.0])
    times = np.linspace(2.0, 8.0, 13)
    a0 = pk.time_amplitude(pk.project_detected(beam_state, np.zeros(3)), times)
    spec = pk.StateSpec(
        center_p=(0.0, 0.0, 10.0), sigma_p=0.5,
        center_x=tuple(np.array([0.0, 0.0, -5.0]) + d),
    )
    moved = pk.from_spec(spec, beam_grid)
    a1 = pk.time_amplitude(pk.project_detected(moved, d), times)
    assert np.abs(a0 - a1).max() < 1e-10 * np.abs(a0).max()


def test_time_shift_covariance(beam_state):
    t0 = 1.5
    times = np.linspace(2.0, 7.0, 11)
    det_now = pk.project_detected(beam_state, np.zeros(3))
    det_later = pk.project_detected(pk.evolve(beam_state, t0), np.zeros(3))
    a_now = pk.time_amplitude(det_now, times + t0)
    a_later = pk.time_amplitude(det_later, times)
    assert np.abs(a_now - a_later).max() < 1e-13 * np.abs(a_now).max()


def test_kernel_reference_value():
    got = pk.kernel_overlap(0.0, 0.1, 400.0)
    ref = 5.0 / np.pi**2
    assert abs(got - ref) / ref < 1e-6
    closed = pk.kernel_overlap_closed(0.0, 0.1, 400.0)
    assert abs(got - closed) / abs(closed) < 1e-10


@pytest.mark.parametrize("delta_t,eps", [(0.0, 0.1), (0.3, 0.05), (-1.2, 0.2), (0.4, 0.0)])
def test_kernel_quadrature_vs_closed(delta_t, eps):
    k_max = 300.0
    got = pk.kernel_overlap(delta_t, eps, k_max)
    closed = pk.kernel_overlap_closed(delta_t, eps, k_max)
    assert abs(got - closed) / abs(closed) < 1e-10


def test_kernel_untruncated_limit():
    # truncated kernel approaches i / (2 pi^2 (dt + i eps)) as k_max grows
    val = pk.kernel_overlap_closed(0.7, 0.1, 2000.0)
    lim = pk.kernel_overlap_closed(0.7, 0.1, None)
    assert abs(val - lim) / abs(lim) < 1e-10
    with pytest.raises(ValueError):
        pk.kernel_overlap_closed(0.7, 0.0, None)
    with pytest.raises(ValueError):
        pk.kernel_overlap(0.0, -0.1, 10.0)


def test_time_operator_eigenprofile():
    # k Phi = e^{i k t0} gamma(k) with gamma real: <t_op> = t0 exactly and
    # t_op Phi = (t0 gamma - i gamma') e^{i k t0} / k pointwise
    grid = pk.build_grid(48, 2, 4, 1.0, 9.0)
    t0 = 2.0

    def gamma(k):
        return np.exp(-((k - 5.0) ** 2) / 2.0)

    def dgamma(k):
        return -(k - 5.0) * gamma(k)

    def radial(k, li):
        if li != 0:
            return np.zeros_like(k, dtype=complex)
        return np.exp(1j * k * t0) * gamma(k) / k

    vals = np.stack([radial(grid.k_nodes, 0), radial(grid.k_nodes, 1)])
    det = arrival.DetectedState(grid=grid, z=np.zeros(3), values=vals,
                                radial_fn=radial)
    tphi = pk.apply_time_operator(det)
    k = grid.k_nodes
    want = (t0 * gamma(k) - 1j * dgamma(k)) * np.exp(1j * k * t0) / k
    assert np.abs(tphi.values[0] - want).max() < 1e-8 * np.abs(want).max()

    mean = pk.mean_arrival_time(det)
    assert abs(mean.real - t0) < 1e-8
    assert abs(mean.imag) < 1e-8

    # gridded route (natural cubic spline) approximates the same operator
    det_grid = arrival.DetectedState(grid=grid, z=np.zeros(3), values=vals)
    mean_spline = pk.mean_arrival_time(det_grid)
    assert abs(mean_spline.real - t0) < 5e-3


def test_operator_mean_matches_density_mean(beam_state):
    # spline-differentiation truncation limits the agreement at this n_k
    det = pk.project_detected(beam_state, np.zeros(3))
    dens = pk.arrival_density(det, 0.0, 10.0, n_t=400)
    mean_op = pk.mean_arrival_time(det)
    assert abs(mean_op.real - dens.mean_time) < 2e-2 * dens.mean_time
    assert abs(mean_op.imag) < 1e-6


def test_window_clipping_flagged(broad_det):
    with pytest.warns(UserWarning):
        dens = pk.arrival_density(broad_det, 1.0, 2.0, n_t=64)
    assert not dens.window_ok


def test_detected_state_validation(beam_grid):
    with pytest.raises(ValueError):
        arrival.DetectedState(grid=beam_grid, z=np.zeros(3),
                              values=np.zeros((2, 3), dtype=complex))
