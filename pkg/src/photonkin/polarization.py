"""Helicity frames, polarization vectors and spin-1 matrices.

For each momentum p away from the polar axis, the orthonormal triad
(e_theta, e_phi, e_k) is the spherical coordinate frame; the transverse
helicity vectors are

    eps(p, lam) = -(lam / sqrt(2)) * (e_theta + i lam e_phi),   lam = +-1.

They satisfy eps*(lam) . eps(lam') = delta, p . eps = 0, and are
eigenvectors of the helicity matrix W = S . p/|p| with eigenvalue lam.
On the polar axis the frame is fixed by the phi = 0 chart (`pole_frame`);
`frame` itself refuses momenta within `POLE_TOL` of the axis so that a
silent 0/0 can never leak into downstream transforms.
"""

from __future__ import annotations

import functools

import numpy as np

# sin(theta) below this is treated as on the polar axis
POLE_TOL = 1e-12

LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_i, _j, _k] = 1.0
    LEVI_CIVITA[_i, _k, _j] = -1.0
LEVI_CIVITA.flags.writeable = False

HELICITIES = (1, -1)


class PoleError(ValueError):
    """Momentum lies on (or numerically at) the polar axis."""


def spin_matrix(axis: int) -> np.ndarray:
    """Spin-1 generator (S^a)_ij = -i eps_{aij} for axis a in {0, 1, 2}."""
    if axis not in (0, 1, 2):
        raise ValueError(f"axis must be 0, 1 or 2, got {axis}")
    return -1j * LEVI_CIVITA[axis]


_SPIN = np.stack([spin_matrix(a) for a in range(3)])
_SPIN.flags.writeable = False


def frame(p: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spherical frame (e_theta, e_phi, e_k) at momenta p, shape (..., 3).

    Raises
    ------
    PoleError
        If any momentum has sin(theta) < POLE_TOL (use `pole_frame`).
    ValueError
        If any momentum is zero.
    """
    p = np.asarray(p, dtype=float)
    k = np.linalg.norm(p, axis=-1)
    if np.any(k == 0.0):
        raise ValueError("zero momentum has no helicity frame")
    rho = np.hypot(p[..., 0], p[..., 1])
    st = rho / k
    if np.any(st < POLE_TOL):
        raise PoleError(
            "momentum on the polar axis; use pole_frame for an explicit chart"
        )
    ct = p[..., 2] / k
    cp = p[..., 0] / rho
    sp = p[..., 1] / rho
    e_theta = np.stack([ct * cp, ct * sp, -st], axis=-1)
    e_phi = np.stack([-sp, cp, np.zeros_like(sp)], axis=-1)
    e_k = p / k[..., None]
    return e_theta, e_phi, e_k


def pole_frame(sign: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Frame on the polar axis in the phi = 0 chart.

    sign = +1 is the north pole (theta = 0), sign = -1 the south pole.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    ct = float(sign)
    # theta = 0 or pi with phi = 0 in the general formulas
    e_theta = np.array([ct, 0.0, 0.0])
    e_phi = np.array([0.0, 1.0, 0.0])
    e_k = np.array([0.0, 0.0, ct])
    return e_theta, e_phi, e_k


def polarization_vector(p: np.ndarray, lam: int) -> np.ndarray:
    """Helicity polarization vector eps(p, lam), shape (..., 3) complex."""
    if lam not in HELICITIES:
        raise ValueError(f"helicity must be +1 or -1, got {lam}")
    e_theta, e_phi, _ = frame(p)
    return -(lam / np.sqrt(2.0)) * (e_theta + 1j * lam * e_phi)


def helicity_matrix(p: np.ndarray) -> np.ndarray:
    """W(p) = S . p/|p| as a (..., 3, 3) complex matrix."""
    p = np.asarray(p, dtype=float)
    k = np.linalg.norm(p, axis=-1)
    if np.any(k == 0.0):
        raise ValueError("zero momentum has no helicity matrix")
    n = p / k[..., None]
    return np.einsum("aij,...a->...ij", _SPIN, n)


def transverse_projector(p: np.ndarray) -> np.ndarray:
    """delta_ij - p_i p_j / |p|^2 as a (..., 3, 3) real matrix."""
    p = np.asarray(p, dtype=float)
    k = np.linalg.norm(p, axis=-1)
    if np.any(k == 0.0):
        raise ValueError("zero momentum has no transverse projector")
    n = p / k[..., None]
    return np.eye(3) - n[..., :, None] * n[..., None, :]


def rotation_R(p: np.ndarray) -> np.ndarray:
    """Rotation R = R_z(phi) R_y(theta) with columns (e_theta, e_phi, e_k).

    R maps the fixed axes onto the frame: R x = e_theta, R y = e_phi,
    R z = e_k = p/|p|.
    """
    e_theta, e_phi, e_k = frame(p)
    return np.stack([e_theta, e_phi, e_k], axis=-1)


def to_helicity_rep(op: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Transform a Cartesian 3x3 operator to the 2x2 helicity block at p.

    O_{lam lam'} = eps*_i(p, lam) O_ij eps_j(p, lam'), rows and columns
    ordered (+1, -1).  Valid for momentum-diagonal (multiplicative)
    operators; derivative operators pick up connection terms that this
    pointwise transform does not see.
    """
    op = np.asarray(op)
    eps = np.stack([polarization_vector(p, lam) for lam in HELICITIES])
    return np.einsum("l...i,...ij,m...j->...lm", eps.conj(), op, eps)


def to_photon_frame(op: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Transform a Cartesian 3x3 operator to the (e_theta, e_phi, e_k) triad.

    O_{sigma sigma'} = e_i(p, sigma) O_ij e_j(p, sigma').  For the spin
    matrices this evaluates to -i eps_{sigma sigma' sigma''} e^a(p, sigma''),
    which is the form consistent with the su(2) algebra of the transformed
    blocks.
    """
    op = np.asarray(op)
    triad = np.stack(frame(p))  # (3, ..., 3)
    return np.einsum("s...i,...ij,t...j->...st", triad, op, triad)


@functools.lru_cache(maxsize=8)
def frames_on_grid(grid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(e_theta, e_phi, e_k) at every grid node, each (n_nodes, 3).

    Cached per grid object; grids are immutable.
    """
    out = frame(grid.p_vecs)
    for arr in out:
        arr.flags.writeable = False
    return out


@functools.lru_cache(maxsize=8)
def polarization_on_grid(grid) -> np.ndarray:
    """eps(p, lam) at every grid node, shape (2, n_nodes, 3), lam = (+1, -1)."""
    e_theta, e_phi, _ = frames_on_grid(grid)
    out = np.stack([
        -(lam / np.sqrt(2.0)) * (e_theta + 1j * lam * e_phi)
        for lam in HELICITIES
    ])
    out.flags.writeable = False
    return out
