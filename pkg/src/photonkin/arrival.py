"""Time-of-arrival POVM at a point detector.

For a detector at z, the detected subspace consists of the momentum
amplitudes of the form exp(-i p . z) Phi(|p|, lam): states whose angular
dependence at fixed |p| is a pure plane-wave phase toward z.  Projection,
the arrival-time amplitude and the time operator all act on the radial
profile Phi(k, lam):

    Phi(k, lam)  = (1/4pi) integral dOmega e^{i k n . z} psi_lam(k n)
    g(k, lam)    = 4 pi k Phi(k, lam)
    A_lam(t; z)  = sqrt(pi) (2 pi)^{-3/2} integral_0^inf dk e^{-i k t} g
    P_psi(t; z)  = sum_lam |A_lam(t; z)|^2
    t_op Phi     = -i (1/k) d(k Phi)/dk

Normalization: the sqrt(pi) factor in A makes the POVM complete on the
detected subspace, integral dt P = ||P_z psi||^2 exactly (the raw
arrival kets resolve only (1/pi) x identity there).  `kernel_overlap`
keeps the raw-kets convention 1/(2 pi^2) integral dk e^{i k dt - eps k},
whose closed form is i / (2 pi^2 (dt + i eps)); at dt = 0, eps = 0.1 it
equals 5/pi^2.

All k-integrals run over the grid's radial shell; profiles must decay
inside it (the boundary terms of the time operator are otherwise biased,
and the first moment picks up an imaginary residue).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline

from .photon_state import HelicityAmplitude
from .sphgrid import MomentumGrid

# arrival-time amplitude prefactor; see module docstring
_AMP_NORM = np.sqrt(np.pi) * (2.0 * np.pi) ** -1.5
# density at the window edge above this fraction of the peak is flagged
WINDOW_EDGE_FRACTION = 1e-3


@dataclass(frozen=True, eq=False)
class DetectedState:
    """Radial profile Phi(k, lam) of a state projected onto detector z.

    values has shape (2, n_k) on the grid's radial nodes.  radial_fn,
    when provided, is a closed form (k_array, lam_index) -> complex used
    for high-accuracy differentiation in `apply_time_operator`.
    """

    grid: MomentumGrid
    z: np.ndarray
    values: np.ndarray
    radial_fn: object | None = None

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float).reshape(3)
        v = np.ascontiguousarray(self.values, dtype=complex)
        if v.shape != (2, self.grid.n_k):
            raise ValueError(
                f"values shape {v.shape} does not match (2, n_k) = (2, {self.grid.n_k})"
            )
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "values", v)


def project_detected(state: HelicityAmplitude, z) -> DetectedState:
    """Orthogonal projection onto the detector-z subspace.

    Phi(k, lam) = (1/4pi) integral dOmega e^{i k n . z} psi_lam(k n);
    the angular integral uses the grid's angular rule (for a windowed
    grid this is the integral over the window, consistent with states
    supported there).
    """
    grid = state.grid
    z = np.asarray(z, dtype=float).reshape(3)
    phase = np.exp(1j * (grid.p_vecs @ z)).reshape(grid.shape)
    w_ang = np.multiply.outer(grid.ct_weights, grid.phi_weights)
    phi = np.einsum("lktp,ktp,tp->lk", state.values, phase, w_ang) / (4.0 * np.pi)
    return DetectedState(grid=grid, z=z, values=phi)


def detected_norm_sq(det: DetectedState) -> float:
    """||P_z psi||^2 = 4 pi sum_lam integral k^2 dk |Phi|^2."""
    g = det.grid
    dens = np.sum(np.abs(det.values) ** 2, axis=0)
    return float(4.0 * np.pi * np.sum(g.k_weights * g.k_nodes**2 * dens))


def embed_detected(det: DetectedState) -> HelicityAmplitude:
    """Expand a detected state back to full grid amplitudes e^{-i p.z} Phi."""
    grid = det.grid
    phase = np.exp(-1j * (grid.p_vecs @ det.z)).reshape(grid.shape)
    vals = det.values[:, :, None, None] * phase[None, :, :, :]
    return HelicityAmplitude(grid=grid, values=vals)


def constraint_residual(state, z=None) -> float:
    """Angular-flatness residual of e^{i p . z} psi at fixed |p|.

    Zero exactly on the detected subspace (the defining constraint
    L(z) psi = 0); order one for generic states.  Accepts either a
    `DetectedState` (z is taken from it) or a `HelicityAmplitude` with
    an explicit z.  Returns ||psi - P_z psi|| / ||psi|| measured with
    the grid's angular rule.
    """
    if isinstance(state, DetectedState):
        psi = embed_detected(state)
        z = state.z
    else:
        if z is None:
            raise ValueError("z is required for a full amplitude")
        psi = state
    grid = psi.grid
    z = np.asarray(z, dtype=float).reshape(3)
    phase = np.exp(1j * (grid.p_vecs @ z)).reshape(grid.shape)
    g = psi.values * phase[None, :, :, :]
    w_ang = np.multiply.outer(grid.ct_weights, grid.phi_weights)
    mean = np.einsum("lktp,tp->lk", g, w_ang) / np.sum(w_ang)
    dev = g - mean[:, :, None, None]
    dev_sq = np.einsum("lktp,tp->lk", np.abs(dev) ** 2, w_ang)
    num_sq = np.sum(grid.k_weights * grid.k_nodes**2 * dev_sq)
    den_sq = np.sum((np.abs(psi.flat) ** 2) @ grid.w_flat)
    if den_sq == 0.0:
        raise ValueError("cannot measure the constraint on a null state")
    return float(np.sqrt(num_sq / den_sq))


def radial_detected_amplitude(det: DetectedState) -> np.ndarray:
    """g(k, lam) = 4 pi k Phi(k, lam), shape (2, n_k)."""
    return 4.0 * np.pi * det.grid.k_nodes[None, :] * det.values


def time_amplitude(det: DetectedState, times) -> np.ndarray:
    """Arrival amplitudes A_lam(t; z), shape (2, n_t).

    A = sqrt(pi) (2 pi)^{-3/2} integral dk e^{-i k t} g(k) over the radial
    shell.  The radial rule must resolve e^{-i k t} at the largest |t|
    requested: roughly n_k > |t| (k_max - k_min) / pi.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    g = radial_detected_amplitude(det)
    kernel = np.exp(-1j * np.multiply.outer(det.grid.k_nodes, times))
    return _AMP_NORM * np.einsum("k,lk,kt->lt", det.grid.k_weights, g, kernel)


@dataclass(frozen=True, eq=False)
class ArrivalDensity:
    """Sampled arrival-time density and its summary moments."""

    z: np.ndarray
    times: np.ndarray
    per_helicity: np.ndarray     # (2, n_t) |A_lam|^2
    density: np.ndarray          # (n_t,)
    total_probability: float
    mean_time: float
    norm_sq_detected: float
    window_ok: bool

    @property
    def completeness_error(self) -> float:
        """|integral dt P - ||P_z psi||^2| / ||P_z psi||^2."""
        if self.norm_sq_detected == 0.0:
            return abs(self.total_probability)
        return abs(self.total_probability - self.norm_sq_detected) / self.norm_sq_detected

    def to_dict(self) -> dict:
        return {
            "z": self.z.tolist(),
            "t_min": float(self.times[0]),
            "t_max": float(self.times[-1]),
            "n_t": int(self.times.size),
            "total_probability": self.total_probability,
            "mean_time": self.mean_time,
            "norm_sq_detected": self.norm_sq_detected,
            "completeness_error": self.completeness_error,
            "window_ok": self.window_ok,
        }


def arrival_density(
    det: DetectedState,
    t_min: float,
    t_max: float,
    n_t: int = 400,
) -> ArrivalDensity:
    """Sample P(t; z) = sum_lam |A_lam|^2 on a uniform window.

    total_probability and mean_time use the trapezoid rule; the window
    should contain the density's support (edges above
    WINDOW_EDGE_FRACTION of the peak raise a warning and clear
    `window_ok`).  Completeness: total_probability equals
    `detected_norm_sq` up to window tails and quadrature error.
    """
    if not (t_max > t_min):
        raise ValueError(f"need t_max > t_min, got [{t_min}, {t_max}]")
    if n_t < 8:
        raise ValueError(f"n_t too small for stable moments: {n_t}")
    times = np.linspace(float(t_min), float(t_max), int(n_t))
    amps = time_amplitude(det, times)
    per = np.abs(amps) ** 2
    dens = per.sum(axis=0)
    total = float(np.trapezoid(dens, times))
    mean = float(np.trapezoid(times * dens, times) / total) if total > 0 else np.nan
    peak = float(dens.max())
    window_ok = True
    if peak > 0.0 and max(dens[0], dens[-1]) > WINDOW_EDGE_FRACTION * peak:
        window_ok = False
        warnings.warn(
            "arrival window clips the density; moments are biased",
            stacklevel=2,
        )
    return ArrivalDensity(
        z=det.z, times=times, per_helicity=per, density=dens,
        total_probability=total, mean_time=mean,
        norm_sq_detected=detected_norm_sq(det), window_ok=window_ok,
    )


def apply_time_operator(det: DetectedState) -> DetectedState:
    """t_op Phi = -i (1/k) d(k Phi)/dk on the radial nodes.

    With a closed-form radial profile attached, differentiation is a
    Richardson-extrapolated central difference (error ~ h^4).  Otherwise
    u = k Phi is interpolated by a natural cubic spline over the radial
    nodes; the profile must decay near the shell edges, where the
    natural boundary condition biases the derivative.
    """
    grid = det.grid
    k = grid.k_nodes
    if det.radial_fn is not None:
        h = np.finfo(float).eps ** 0.2 * k

        def u(kk, li):
            return kk * det.radial_fn(kk, li)

        du = np.empty((2, grid.n_k), dtype=complex)
        for li in range(2):
            d1 = (u(k + h, li) - u(k - h, li)) / (2 * h)
            d2 = (u(k + h / 2, li) - u(k - h / 2, li)) / h
            du[li] = (4.0 * d2 - d1) / 3.0
    else:
        u_vals = k[None, :] * det.values
        du = np.empty((2, grid.n_k), dtype=complex)
        for li in range(2):
            spline = CubicSpline(k, u_vals[li], bc_type="natural")
            du[li] = spline(k, 1)
    out = -1j * du / k[None, :]
    return DetectedState(grid=grid, z=det.z, values=out)


def mean_arrival_time(det: DetectedState) -> complex:
    """<Phi| t_op |Phi> / <Phi|Phi> on the detected subspace.

    The imaginary part is a boundary-leak diagnostic: it vanishes when
    k Phi decays at the shell edges.
    """
    tphi = apply_time_operator(det)
    g = det.grid
    w = 4.0 * np.pi * g.k_weights * g.k_nodes**2
    num = complex(np.sum(w * np.sum(det.values.conj() * tphi.values, axis=0)))
    den = detected_norm_sq(det)
    if den == 0.0:
        raise ValueError("mean arrival time of a null detected state")
    return num / den


def kernel_overlap(delta_t: float, eps: float, k_max: float, n_panel: int = 16) -> complex:
    """Quadrature of the raw arrival-kets overlap kernel.

    (1/2 pi^2) integral_0^{k_max} dk e^{i k delta_t - eps k}, evaluated
    with composite Gauss-Legendre panels sized to the oscillation.
    """
    if k_max <= 0.0 or not np.isfinite(k_max):
        raise ValueError(f"k_max must be finite and positive, got {k_max}")
    if eps < 0.0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    cycles = abs(delta_t) * k_max / (2.0 * np.pi)
    panels = max(8, int(np.ceil(4.0 * cycles)))
    edges = np.linspace(0.0, k_max, panels + 1)
    x, w = leggauss(n_panel)
    half = 0.5 * (edges[1] - edges[0])
    nodes = (edges[:-1, None] + half * (x[None, :] + 1.0)).ravel()
    weights = np.tile(w * half, panels)
    vals = np.exp((1j * delta_t - eps) * nodes)
    return complex(np.sum(weights * vals) / (2.0 * np.pi**2))


def kernel_overlap_closed(delta_t: float, eps: float, k_max: float | None = None) -> complex:
    """Closed form of the raw overlap kernel.

    k_max = None gives the untruncated i / (2 pi^2 (delta_t + i eps))
    (requires eps > 0); finite k_max gives the truncated analog, valid
    for any eps >= 0 (at delta_t = eps = 0 the integral is just k_max).
    """
    a = 1j * delta_t - eps
    if k_max is None:
        if eps <= 0.0:
            raise ValueError("untruncated kernel requires eps > 0")
        return complex(-1.0 / (2.0 * np.pi**2 * a))
    if a == 0.0:
        return complex(k_max / (2.0 * np.pi**2))
    return complex((np.expm1(a * k_max)) / (2.0 * np.pi**2 * a))
