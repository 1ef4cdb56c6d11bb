"""Spherical momentum-space grids for integrals over the forward light cone.

A grid is a tensor product of Gauss-Legendre nodes in the radial variable
k = |p| (mapped linearly or logarithmically onto [k_min, k_max]), open
Gauss-Legendre nodes in cos(theta) (the poles are never sampled), and a
uniform periodic rule in phi.  Two measures are supported:

* flat        d^3p             = k^2 dk dcos(theta) dphi
* invariant   d^3p / (2|p|)    = (k/2) dk dcos(theta) dphi

Radial truncation to a shell [k_min, k_max] with k_min > 0 is deliberate:
states are expected to be negligible outside the shell and the state layer
reports the captured-norm fraction.  An optional cos(theta) window plays
the same role for strongly collimated states, which a full-range polar
rule cannot resolve at useful node counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

RADIAL_MAPS = ("linear", "log")

# Minimum sizes below which Gauss-Legendre / trapezoid rules degenerate.
_MIN_NK = 2
_MIN_NTHETA = 2
_MIN_NPHI = 4


@dataclass(frozen=True, eq=False)
class MomentumGrid:
    """Immutable tensor-product quadrature over a spherical momentum shell.

    Attributes
    ----------
    k_nodes, k_weights : ndarray, shape (n_k,)
        Radial nodes and weights for plain dk integration (the log map's
        Jacobian is folded into the weights).
    ct_nodes, ct_weights : ndarray, shape (n_theta,)
        cos(theta) nodes and weights; all nodes satisfy |ct| < 1.
    phi_nodes, phi_weights : ndarray, shape (n_phi,)
        Uniform azimuthal nodes on [0, 2pi) with weight 2pi/n_phi.
    p_vecs : ndarray, shape (n_nodes, 3)
        Cartesian momentum at every node, C-order over (k, theta, phi).
    k_flat, n_hat : ndarray
        |p| per node and the unit vectors p/|p|, same node order.
    w_flat, w_inv : ndarray, shape (n_nodes,)
        Quadrature weights for the flat and invariant measures.
    """

    n_k: int
    n_theta: int
    n_phi: int
    k_min: float
    k_max: float
    radial_map: str
    ct_window: tuple[float, float]
    k_nodes: np.ndarray
    k_weights: np.ndarray
    ct_nodes: np.ndarray
    ct_weights: np.ndarray
    phi_nodes: np.ndarray
    phi_weights: np.ndarray
    p_vecs: np.ndarray
    k_flat: np.ndarray
    n_hat: np.ndarray
    w_flat: np.ndarray
    w_inv: np.ndarray

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n_k, self.n_theta, self.n_phi)

    @property
    def n_nodes(self) -> int:
        return self.n_k * self.n_theta * self.n_phi


def build_grid(
    n_k: int,
    n_theta: int,
    n_phi: int,
    k_min: float,
    k_max: float,
    radial_map: str = "linear",
    ct_window: tuple[float, float] = (-1.0, 1.0),
) -> MomentumGrid:
    """Construct a spherical momentum grid.

    Parameters
    ----------
    n_k, n_theta, n_phi : int
        Node counts per direction.  Minimums: 2, 2 and 4.
    k_min, k_max : float
        Radial shell bounds, 0 < k_min < k_max.
    radial_map : {"linear", "log"}
        Affine or logarithmic map of the Gauss-Legendre rule onto
        [k_min, k_max].  The log map suits wide shells spanning decades.
    ct_window : (float, float), optional
        Polar window [lo, hi] within [-1, 1].  The default covers the
        full sphere; a narrower window concentrates nodes on a cap.

    Returns
    -------
    MomentumGrid

    Raises
    ------
    ValueError
        On invalid bounds, degenerate window, or node counts below the
        supported minimum.
    """
    if not (0.0 < k_min < k_max) or not np.isfinite(k_max):
        raise ValueError(
            f"invalid radial bounds: need 0 < k_min < k_max, got [{k_min}, {k_max}]"
        )
    if n_k < _MIN_NK or n_theta < _MIN_NTHETA or n_phi < _MIN_NPHI:
        raise ValueError(
            f"grid too small: need n_k >= {_MIN_NK}, n_theta >= {_MIN_NTHETA}, "
            f"n_phi >= {_MIN_NPHI}, got ({n_k}, {n_theta}, {n_phi})"
        )
    if radial_map not in RADIAL_MAPS:
        raise ValueError(f"unknown radial_map {radial_map!r}; choose from {RADIAL_MAPS}")
    ct_lo, ct_hi = float(ct_window[0]), float(ct_window[1])
    if not (-1.0 <= ct_lo < ct_hi <= 1.0):
        raise ValueError(f"invalid ct_window {ct_window}: need -1 <= lo < hi <= 1")

    x, w = leggauss(n_k)
    if radial_map == "linear":
        half = 0.5 * (k_max - k_min)
        k_nodes = k_min + half * (x + 1.0)
        k_weights = w * half
    else:
        lo, hi = np.log(k_min), np.log(k_max)
        half = 0.5 * (hi - lo)
        u = lo + half * (x + 1.0)
        k_nodes = np.exp(u)
        # dk = k du
        k_weights = w * half * k_nodes

    xt, wt = leggauss(n_theta)
    half_t = 0.5 * (ct_hi - ct_lo)
    ct_nodes = ct_lo + half_t * (xt + 1.0)
    ct_weights = wt * half_t

    phi_nodes = 2.0 * np.pi * np.arange(n_phi) / n_phi
    phi_weights = np.full(n_phi, 2.0 * np.pi / n_phi)

    st = np.sqrt(1.0 - ct_nodes**2)
    # node order: C-order over (k, theta, phi)
    kk = np.repeat(k_nodes, n_theta * n_phi)
    ct = np.tile(np.repeat(ct_nodes, n_phi), n_k)
    stt = np.tile(np.repeat(st, n_phi), n_k)
    ph = np.tile(phi_nodes, n_k * n_theta)

    n_hat = np.stack([stt * np.cos(ph), stt * np.sin(ph), ct], axis=1)
    p_vecs = kk[:, None] * n_hat

    wk = np.repeat(k_weights, n_theta * n_phi)
    wct = np.tile(np.repeat(ct_weights, n_phi), n_k)
    wph = np.tile(phi_weights, n_k * n_theta)
    w_ang = wct * wph
    w_flat = kk**2 * wk * w_ang
    w_inv = 0.5 * kk * wk * w_ang

    for arr in (k_nodes, k_weights, ct_nodes, ct_weights, phi_nodes, phi_weights,
                p_vecs, kk, n_hat, w_flat, w_inv):
        arr.flags.writeable = False

    return MomentumGrid(
        n_k=n_k, n_theta=n_theta, n_phi=n_phi,
        k_min=float(k_min), k_max=float(k_max),
        radial_map=radial_map, ct_window=(ct_lo, ct_hi),
        k_nodes=k_nodes, k_weights=k_weights,
        ct_nodes=ct_nodes, ct_weights=ct_weights,
        phi_nodes=phi_nodes, phi_weights=phi_weights,
        p_vecs=p_vecs, k_flat=kk, n_hat=n_hat,
        w_flat=w_flat, w_inv=w_inv,
    )


def _flatten_values(grid: MomentumGrid, values: np.ndarray) -> np.ndarray:
    """Reshape node data to (..., n_nodes), validating against the grid."""
    values = np.asarray(values)
    if values.shape[-1] == grid.n_nodes and (
        values.ndim == 1 or values.shape[-3:] != grid.shape
    ):
        return values
    if values.shape[-3:] == grid.shape:
        return values.reshape(values.shape[:-3] + (grid.n_nodes,))
    raise ValueError(
        f"values shape {values.shape} does not match grid shape {grid.shape} "
        f"or flat node count {grid.n_nodes}"
    )


def integrate_flat(grid: MomentumGrid, values: np.ndarray) -> complex | np.ndarray:
    """Integrate node samples against d^3p.

    `values` may be flat (..., n_nodes) or shaped (..., n_k, n_theta, n_phi);
    leading axes are preserved.
    """
    flat = _flatten_values(grid, values)
    return flat @ grid.w_flat


def integrate_invariant(grid: MomentumGrid, values: np.ndarray) -> complex | np.ndarray:
    """Integrate node samples against the invariant measure d^3p / (2|p|)."""
    flat = _flatten_values(grid, values)
    return flat @ grid.w_inv


def shell_volume(grid: MomentumGrid) -> float:
    """Exact flat-measure volume of the grid's shell-and-window region."""
    ct_lo, ct_hi = grid.ct_window
    return (grid.k_max**3 - grid.k_min**3) / 3.0 * (ct_hi - ct_lo) * 2.0 * np.pi
