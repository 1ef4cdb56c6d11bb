"""Free photon dynamics: H = |p| evolution and its consistency checks.

Evolution multiplies helicity amplitudes by exp(-i |p| t) node by node
(hbar = c = 1), which is exactly unitary on the grid.  The checks here
verify the physics that phase encodes:

* Ehrenfest: <q>(t) = <q>(0) + t <p/|p|>, exact for this Hamiltonian.
* Maxwell: the sampled Riemann-Silberstein fields satisfy
  i dF/dt = lam curl F and div F = 0.  The sampled field is a finite sum
  of exactly transverse plane waves, so the measured residuals are pure
  central-difference truncation and must fall second order under
  refinement.
* Helicity transport: (S . p) F_hat = lam |p| F_hat node by node.

Residuals are reported relative to k_char * rms(F) with
k_char = sqrt(<k^2>), which makes both the divergence and the curl
defects dimensionless on the same footing.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import photon_state
from .photon_state import HelicityAmplitude, amplitude_gradient, rs_momentum_field


def evolve(state: HelicityAmplitude, t: float) -> HelicityAmplitude:
    """Advance a state by t: psi -> exp(-i |p| t) psi."""
    phase = np.exp(-1j * state.grid.k_flat * float(t)).reshape(state.grid.shape)
    return replace(
        state,
        values=state.values * phase[None, :, :, :],
        t_evolved=state.t_evolved + float(t),
    )


def energy_mean(state: HelicityAmplitude) -> float:
    """<H> = <|p|> for the normalized state."""
    dens = np.abs(state.flat) ** 2
    num = float(np.sum(dens @ (state.grid.w_flat * state.grid.k_flat)))
    den = float(np.sum(dens @ state.grid.w_flat))
    return num / den


def k_char(state: HelicityAmplitude) -> float:
    """sqrt(<k^2>), the characteristic wavenumber of the state."""
    dens = np.abs(state.flat) ** 2
    num = float(np.sum(dens @ (state.grid.w_flat * state.grid.k_flat**2)))
    den = float(np.sum(dens @ state.grid.w_flat))
    return float(np.sqrt(num / den))


def mean_direction(state: HelicityAmplitude) -> np.ndarray:
    """<p/|p|> for the normalized state, shape (3,)."""
    dens = np.sum(np.abs(state.flat) ** 2, axis=0)
    vec = (dens * state.grid.w_flat) @ state.grid.n_hat
    return vec / float(np.sum(dens @ state.grid.w_flat))


@dataclass(frozen=True)
class EhrenfestReport:
    times: np.ndarray
    positions: np.ndarray        # (n_t, 3) measured <q>(t)
    predicted: np.ndarray        # (n_t, 3) <q>(0) + t <p/|p|>
    residual_max: float

    def to_dict(self) -> dict:
        return {
            "times": self.times.tolist(),
            "positions": self.positions.tolist(),
            "predicted": self.predicted.tolist(),
            "residual_max": self.residual_max,
        }


def ehrenfest_check(state: HelicityAmplitude, times) -> EhrenfestReport:
    """Compare <q>(t) against straight-line transport at the light speed.

    Requires a spec-backed state (exact gradients).  The identity is exact
    for H = |p|, so the residual is a rounding-level consistency check of
    the gradient and quadrature plumbing.
    """
    from .position_op import expectation_position

    times = np.asarray(times, dtype=float)
    q0 = expectation_position(state)
    v = mean_direction(state)
    measured = np.empty((times.size, 3))
    for i, t in enumerate(times):
        measured[i] = expectation_position(evolve(state, t))
    predicted = q0[None, :] + times[:, None] * v[None, :]
    residual = float(np.abs(measured - predicted).max())
    return EhrenfestReport(times=times, positions=measured,
                           predicted=predicted, residual_max=residual)


def unitarity_energy_drift(state: HelicityAmplitude, times) -> dict:
    """Max |norm(t) - norm(0)| and |<H>(t) - <H>(0)| over the times."""
    n0 = photon_state.norm(state)
    e0 = energy_mean(state)
    dn = 0.0
    de = 0.0
    for t in np.asarray(times, dtype=float):
        st = evolve(state, t)
        dn = max(dn, abs(photon_state.norm(st) - n0))
        de = max(de, abs(energy_mean(st) - e0))
    return {"norm_drift": dn, "energy_drift": de,
            "norm": n0, "energy_mean": e0}


def helicity_transport_residual(state: HelicityAmplitude) -> float:
    """max_nodes |(S.p) F_hat - lam |p| F_hat| / (|p| |F_hat|).

    Algebraic identity of the polarization vectors; machine-level always.
    """
    f = rs_momentum_field(state)  # (2, n, 3)
    n_hat = state.grid.n_hat
    lam = np.array([1.0, -1.0])
    # (S . p_hat) F = i (p_hat x F)
    sp = 1j * np.cross(n_hat[None, :, :], f)
    num = np.linalg.norm(sp - lam[:, None, None] * f, axis=-1)
    den = np.linalg.norm(f, axis=-1)
    mask = den > den.max() * 1e-30
    return float((num[mask] / den[mask]).max())


@dataclass(frozen=True)
class MaxwellReport:
    """FD residuals of i dF/dt = lam curl F and div F = 0 on an x-lattice."""

    dx: float
    dt: float
    center: np.ndarray
    k_char: float
    n_interior: int
    div_residual: np.ndarray     # (2,) per helicity
    curl_residual: np.ndarray    # (2,)

    def to_dict(self) -> dict:
        return {
            "dx": self.dx, "dt": self.dt,
            "center": self.center.tolist(),
            "k_char": self.k_char,
            "n_interior": self.n_interior,
            "div_residual": self.div_residual.tolist(),
            "curl_residual": self.curl_residual.tolist(),
        }


def _lattice(center: np.ndarray, n: int, dx: float) -> np.ndarray:
    offsets = (np.arange(n) - (n - 1) / 2.0) * dx
    X, Y, Z = np.meshgrid(*([offsets] * 3), indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    return pts + center


def maxwell_residual(
    state: HelicityAmplitude,
    dx: float | None = None,
    dt: float | None = None,
    n_interior: int = 3,
    center: np.ndarray | None = None,
) -> MaxwellReport:
    """Measure the Maxwell residuals of the sampled fields near the packet.

    The lattice must satisfy the Nyquist bound dx <= pi / k_max; the
    default goes far below it (dx = dt = 0.02 / k_char) so that the
    second-order truncation ~ (dx * k_char)^2 / 6 sits beneath 1e-3.
    Halving dx and dt cuts the residuals about fourfold.
    """
    kc = k_char(state)
    if dx is None:
        dx = 0.02 / kc
    if dt is None:
        dt = 0.02 / kc
    if dx > np.pi / state.grid.k_max:
        raise ValueError(
            f"lattice spacing {dx:.4g} exceeds the Nyquist bound "
            f"pi/k_max = {np.pi / state.grid.k_max:.4g}"
        )
    if center is None:
        if state.spec is not None:
            p0 = np.asarray(state.spec.center_p)
            center = np.asarray(state.spec.center_x) + state.t_evolved * p0 / np.linalg.norm(p0)
        else:
            center = np.zeros(3)
    center = np.asarray(center, dtype=float)

    n = n_interior + 2
    pts = _lattice(center, n, dx)
    shape = (2, n, n, n, 3)
    f_mid = photon_state.riemann_silberstein(state, pts).values.reshape(shape)
    f_lo = photon_state.riemann_silberstein(evolve(state, -dt), pts).values.reshape(shape)
    f_hi = photon_state.riemann_silberstein(evolve(state, +dt), pts).values.reshape(shape)

    c = slice(1, -1)
    # central differences of F_mid along the three axes, interior only
    d = [
        (f_mid[:, 2:, c, c] - f_mid[:, :-2, c, c]) / (2 * dx),
        (f_mid[:, c, 2:, c] - f_mid[:, c, :-2, c]) / (2 * dx),
        (f_mid[:, c, c, 2:] - f_mid[:, c, c, :-2]) / (2 * dx),
    ]
    div = d[0][..., 0] + d[1][..., 1] + d[2][..., 2]
    curl = np.stack([
        d[1][..., 2] - d[2][..., 1],
        d[2][..., 0] - d[0][..., 2],
        d[0][..., 1] - d[1][..., 0],
    ], axis=-1)
    dfdt = (f_hi[:, c, c, c] - f_lo[:, c, c, c]) / (2 * dt)
    lam = np.array([1.0, -1.0]).reshape(2, 1, 1, 1, 1)
    defect = 1j * dfdt - lam * curl

    f_int = f_mid[:, c, c, c]
    scale = kc * np.sqrt(np.mean(np.abs(f_int) ** 2, axis=(1, 2, 3, 4)))
    # a helicity with no amplitude satisfies the equations identically
    safe = np.where(scale > 0.0, scale, 1.0)
    div_res = np.sqrt(np.mean(np.abs(div) ** 2, axis=(1, 2, 3))) / safe
    curl_res = np.sqrt(np.mean(np.abs(defect) ** 2, axis=(1, 2, 3, 4))) / safe

    return MaxwellReport(
        dx=float(dx), dt=float(dt), center=center, k_char=kc,
        n_interior=n_interior,
        div_residual=div_res, curl_residual=curl_res,
    )


def maxwell_refinement(
    state: HelicityAmplitude,
    dx: float | None = None,
    dt: float | None = None,
    n_interior: int = 3,
) -> dict:
    """Residuals at (dx, dt) and (dx/2, dt/2) plus observed orders."""
    coarse = maxwell_residual(state, dx=dx, dt=dt, n_interior=n_interior)
    fine = maxwell_residual(state, dx=coarse.dx / 2, dt=coarse.dt / 2,
                            n_interior=n_interior)
    orders = {
        "div": float(np.log2(coarse.div_residual.max() / fine.div_residual.max())),
        "curl": float(np.log2(coarse.curl_residual.max() / fine.curl_residual.max())),
    }
    return {"coarse": coarse, "fine": fine, "orders": orders}
