"""Photon position operator on the momentum shell.

Two equivalent actions on transverse vector amplitudes V(p) are provided.
The compact form

    (q^a V)_i = i sum_sigma e_i(p, sigma) nabla^a [ e_j(p, sigma) V_j ]

moves the frame scalars e(p, sigma) . V with the weighted derivative

    nabla^a f = sqrt(2|p|) d/dp^a [ f / sqrt(2|p|) ],

and the expanded form spells the same operator out algebraically:

    (q^a V)_i = i nabla^a V_i
                + (1/|p|) [e_k x S]^a_ij V_j
                - (cot(theta)/|p|) e^a_phi W_ij V_j .

In the helicity representation the operator is the plain derivative
i d/dp^a per component, while the naive i nabla^a alone picks up the
diagonal connection lam D^a with D^a = cot(theta) e^a_phi / |p|
(`covariant_derivative`).

Derivatives are central finite differences on closed-form amplitudes,
never on gridded samples.  Commutator checks nest two applications; in
the compact form the two difference operators commute exactly (shift
operators commute and the frame projection is orthonormal), so only the
expanded form exposes the scheme's O(h^2) truncation, and convergence
orders are therefore measured on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import photon_state
from .polarization import LEVI_CIVITA, frame
from .photon_state import HelicityAmplitude, StateSpec, amplitude_gradient

# default FD step, relative to max(|p|, K_FLOOR)
FD_STEP_SINGLE = float(np.finfo(float).eps ** (1.0 / 3.0))
K_FLOOR = 1e-3

# fixed coarse relative steps for observed-order estimates; chosen so
# truncation dominates rounding by several decades, with a wide ratio to
# average out the next order's contamination
_ORDER_STEPS = (5e-3, 1e-3)

COMMUTATOR_KINDS = ("qq", "qp", "qW")


@dataclass(frozen=True)
class AnalyticState:
    """Closed-form helicity amplitude p -> (psi_+, psi_-).

    amp maps (..., 3) momenta to (..., 2) complex amplitudes and must be
    smooth on the probed region; grad, when given, returns (..., 2, 3).
    """

    amp: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray] | None = None


def gaussian_analytic(spec: StateSpec) -> AnalyticState:
    """AnalyticState for a Gaussian `StateSpec` (unnormalized), with gradient."""
    p0 = np.asarray(spec.center_p)
    x0 = np.asarray(spec.center_x)
    w = np.asarray(spec.helicity_weights, dtype=complex)
    s2 = 2.0 * spec.sigma_p**2

    def amp(p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        d = p - p0
        env = np.exp(-np.sum(d * d, axis=-1) / (2.0 * s2) - 1j * (p @ x0))
        return w * env[..., None]

    def grad(p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        factor = -(p - p0) / s2 - 1j * x0
        return amp(p)[..., :, None] * factor[..., None, :]

    return AnalyticState(amp=amp, grad=grad)


def vector_field(state: AnalyticState) -> Callable[[np.ndarray], np.ndarray]:
    """Closed-form transverse vector amplitude V(p) = sqrt(2|p|) sum eps psi."""

    def field(p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        k = np.linalg.norm(p, axis=-1)
        e_theta, e_phi, _ = frame(p)
        psi = state.amp(p)
        eps_p = -(1.0 / np.sqrt(2.0)) * (e_theta + 1j * e_phi)
        eps_m = (1.0 / np.sqrt(2.0)) * (e_theta - 1j * e_phi)
        return np.sqrt(2.0 * k)[..., None] * (
            eps_p * psi[..., 0, None] + eps_m * psi[..., 1, None]
        )

    return field


def _shift(p: np.ndarray, axis: int, h) -> tuple[np.ndarray, np.ndarray]:
    e = np.zeros_like(p)
    e[..., axis] = h
    return p + e, p - e


def _central(f: Callable, p: np.ndarray, axis: int, h) -> np.ndarray:
    """(f(p + h e_a) - f(p - h e_a)) / 2h, broadcasting h over trailing axes."""
    hi, lo = _shift(p, axis, h)
    num = f(hi) - f(lo)
    denom = 2.0 * np.asarray(h)
    if denom.ndim:
        denom = denom.reshape(denom.shape + (1,) * (num.ndim - denom.ndim))
    return num / denom


def _default_h(p: np.ndarray, scale: float) -> np.ndarray:
    k = np.linalg.norm(np.asarray(p, float), axis=-1)
    return scale * np.maximum(k, K_FLOOR)


def nabla_weighted(
    f: Callable[[np.ndarray], np.ndarray],
    p: np.ndarray,
    axis: int,
    h: float | None = None,
    df: Callable[[np.ndarray], np.ndarray] | None = None,
) -> np.ndarray:
    """Weighted derivative nabla^a f = sqrt(2|p|) d/dp^a (f / sqrt(2|p|)).

    f maps (..., 3) to (...) or (..., K).  With `df` (exact d f/dp^a for
    this axis) the weight term is applied in closed form; otherwise a
    central difference of the reduced function is used with step `h`
    (default FD_STEP_SINGLE * max(|p|, K_FLOOR)).
    """
    p = np.asarray(p, dtype=float)
    k = np.linalg.norm(p, axis=-1)
    if df is not None:
        val = f(p)
        dval = df(p)
        weight = (p[..., axis] / (2.0 * k * k))
        weight = weight.reshape(weight.shape + (1,) * (dval.ndim - weight.ndim))
        return dval - weight * val
    if h is None:
        h = _default_h(p, FD_STEP_SINGLE)

    def reduced(q):
        kk = np.linalg.norm(q, axis=-1)
        val = f(q)
        w = np.sqrt(2.0 * kk)
        return val / w.reshape(w.shape + (1,) * (val.ndim - w.ndim))

    d = _central(reduced, p, axis, h)
    root = np.sqrt(2.0 * k)
    return d * root.reshape(root.shape + (1,) * (d.ndim - root.ndim))


def _frame_scalars(field: Callable, q: np.ndarray) -> np.ndarray:
    """Reduced frame scalars s_sigma = e(p, sigma) . V / sqrt(2|p|), (..., 3)."""
    triad = np.stack(frame(q), axis=-2)  # (..., 3 sigma, 3 i)
    v = field(q)
    k = np.linalg.norm(np.asarray(q, float), axis=-1)
    return np.einsum("...si,...i->...s", triad, v) / np.sqrt(2.0 * k)[..., None]


def apply_position_vector(
    field: Callable[[np.ndarray], np.ndarray],
    axis: int,
    p: np.ndarray,
    h: float | None = None,
    form: str = "compact",
) -> np.ndarray:
    """Evaluate (q^a V)(p) for a closed-form transverse field V.

    form = "compact" differentiates the three frame scalars; "expanded"
    differentiates the Cartesian components and adds the algebraic spin
    terms.  Both are second-order accurate in the FD step.
    """
    p = np.asarray(p, dtype=float)
    if h is None:
        h = _default_h(p, FD_STEP_SINGLE)
    k = np.linalg.norm(p, axis=-1)

    if form == "compact":
        ds = _central(lambda q: _frame_scalars(field, q), p, axis, h)  # (..., 3s)
        triad = np.stack(frame(p), axis=-2)
        return 1j * np.sqrt(2.0 * k)[..., None] * np.einsum(
            "...si,...s->...i", triad, ds
        )
    if form != "expanded":
        raise ValueError(f"unknown form {form!r}; choose 'compact' or 'expanded'")

    term1 = 1j * nabla_weighted(field, p, axis, h=h)
    v = field(p)
    e_theta, e_phi, e_k = frame(p)
    # (1/k) [e_k x S]^a V  with (S^c V)_i = -i eps_{cij} V_j
    sv = -1j * np.einsum("cij,...j->...ci", LEVI_CIVITA, v)
    term2 = np.einsum("bc,...b,...ci->...i", LEVI_CIVITA[axis], e_k, sv) / k[..., None]
    # -(cot(theta)/k) e_phi^a (W V)  with W V = i (e_k x V)
    wv = 1j * np.cross(e_k, v)
    ct = e_k[..., 2]
    st = np.sqrt(1.0 - ct**2)
    coeff = -(ct / st) * e_phi[..., axis] / k
    term3 = coeff[..., None] * wv
    return term1 + term2 + term3


def apply_position_helicity(
    amp: Callable[[np.ndarray], np.ndarray],
    axis: int,
    p: np.ndarray,
    h: float | None = None,
) -> np.ndarray:
    """q^a in the helicity representation: i d psi_lam / d p^a, (..., 2)."""
    p = np.asarray(p, dtype=float)
    if h is None:
        h = _default_h(p, FD_STEP_SINGLE)
    return 1j * _central(amp, p, axis, h)


def covariant_derivative(
    amp: Callable[[np.ndarray], np.ndarray],
    axis: int,
    p: np.ndarray,
    h: float | None = None,
) -> np.ndarray:
    """Helicity form of the naive i nabla^a: i d/dp^a + lam D^a per component.

    D^a = cot(theta) e^a_phi / |p| is the diagonal connection picked up by
    projecting i nabla^a between polarization vectors.
    """
    p = np.asarray(p, dtype=float)
    if h is None:
        h = _default_h(p, FD_STEP_SINGLE)
    d = 1j * _central(amp, p, axis, h)
    e_theta, e_phi, e_k = frame(p)
    k = np.linalg.norm(p, axis=-1)
    ct = e_k[..., 2]
    st = np.sqrt(1.0 - ct**2)
    big_d = (ct / st) * e_phi[..., axis] / k
    lam = np.array([1.0, -1.0])
    return d + big_d[..., None] * lam * amp(p)


@dataclass(frozen=True)
class CommutatorReport:
    """Residuals of a commutator identity over a probe batch."""

    kind: str
    n_probes: int
    fd_step: str
    residual_max: float
    residual_rms: float
    order_estimate: float | None
    pair_residuals: dict

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n_probes": self.n_probes,
            "fd_step": self.fd_step,
            "residual_max": self.residual_max,
            "residual_rms": self.residual_rms,
            "order_estimate": self.order_estimate,
            "pair_residuals": dict(self.pair_residuals),
        }


def _q_field(field: Callable, axis: int, h, form: str) -> Callable:
    """The field p -> (q^axis V)(p) as a new closed-form field."""

    def applied(q: np.ndarray) -> np.ndarray:
        return apply_position_vector(field, axis, q, h=h, form=form)

    return applied


def _residuals_qq(field, probes, h, form) -> dict:
    out = {}
    v = field(probes)
    scale = np.abs(v).max()
    for a, b in ((0, 1), (0, 2), (1, 2)):
        qa_qb = apply_position_vector(_q_field(field, b, h, form), a, probes, h=h, form=form)
        qb_qa = apply_position_vector(_q_field(field, a, h, form), b, probes, h=h, form=form)
        qa = apply_position_vector(field, a, probes, h=h, form=form)
        qb = apply_position_vector(field, b, probes, h=h, form=form)
        denom = scale + np.abs(qa).max() + np.abs(qb).max()
        out[f"[q{a},q{b}]"] = float(np.abs(qa_qb - qb_qa).max() / denom)
    return out


def _residuals_qp(field, probes, h, form) -> dict:
    out = {}
    v = field(probes)
    scale = np.abs(v).max()
    for a in range(3):
        for b in range(3):
            def pb_field(q, bb=b):
                return q[..., bb, None] * field(q)

            qa_pb = apply_position_vector(pb_field, a, probes, h=h, form=form)
            pb_qa = probes[..., b, None] * apply_position_vector(field, a, probes, h=h, form=form)
            expect = (1j if a == b else 0.0) * v
            out[f"[q{a},p{b}]"] = float(
                np.abs(qa_pb - pb_qa - expect).max() / scale
            )
    return out


def _residuals_qw(field, probes, h, form) -> dict:
    def w_apply(q, vals):
        nk = np.linalg.norm(np.asarray(q, float), axis=-1)
        n = q / nk[..., None]
        return 1j * np.cross(n, vals)

    out = {}
    v = field(probes)
    scale = np.abs(v).max()
    for a in range(3):
        def w_field(q):
            return w_apply(q, field(q))

        qa_w = apply_position_vector(w_field, a, probes, h=h, form=form)
        w_qa = w_apply(probes, apply_position_vector(field, a, probes, h=h, form=form))
        out[f"[q{a},W]"] = float(np.abs(qa_w - w_qa).max() / scale)
    return out


_RESIDUAL_FNS = {"qq": _residuals_qq, "qp": _residuals_qp, "qW": _residuals_qw}


def commutator_check(
    state: AnalyticState,
    kind: str,
    probes: np.ndarray,
    h: float | None = None,
    form: str = "expanded",
    estimate_order: bool = True,
) -> CommutatorReport:
    """Verify a commutator identity of the position operator by nested FD.

    kind in {"qq", "qp", "qW"}: position components commute among
    themselves, are canonical against momentum, and commute with the
    helicity matrix.  probes is an (m, 3) batch of off-pole momenta.
    `order_estimate` is measured at fixed coarse steps where truncation
    dominates, always on the expanded form: the compact form's residual
    is rounding-limited at any step (its nested differences commute
    exactly), so it has no truncation order to observe.
    """
    if kind not in COMMUTATOR_KINDS:
        raise ValueError(f"kind must be one of {COMMUTATOR_KINDS}, got {kind!r}")
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    field = vector_field(state)
    if h is None:
        h_val = _default_h(probes, FD_STEP_SINGLE)
        step_desc = f"{FD_STEP_SINGLE:.3e} * max(|p|, {K_FLOOR})"
    else:
        h_val = float(h)
        step_desc = f"{h_val:.3e} (fixed)"

    res = _RESIDUAL_FNS[kind](field, probes, h_val, form)
    values = np.array(list(res.values()))

    order = None
    if estimate_order:
        k_med = float(np.median(np.linalg.norm(probes, axis=-1)))
        h1, h2 = (s * max(k_med, K_FLOOR) for s in _ORDER_STEPS)
        r1 = max(_RESIDUAL_FNS[kind](field, probes, h1, "expanded").values())
        r2 = max(_RESIDUAL_FNS[kind](field, probes, h2, "expanded").values())
        if r2 > 0.0:
            order = float(np.log(r1 / r2) / np.log(_ORDER_STEPS[0] / _ORDER_STEPS[1]))

    return CommutatorReport(
        kind=kind,
        n_probes=probes.shape[0],
        fd_step=step_desc,
        residual_max=float(values.max()),
        residual_rms=float(np.sqrt(np.mean(values**2))),
        order_estimate=order,
        pair_residuals=res,
    )


def expectation_position(state: HelicityAmplitude) -> np.ndarray:
    """<q^a> = sum_lam integral d^3p psi* i d_a psi, exact-gradient route.

    Requires a spec-backed state (see `photon_state.amplitude_gradient`).
    Returns the real expectation vector; the quadrature's imaginary
    residue is O(machine) for normalized states.
    """
    grad = amplitude_gradient(state)  # (2, n, 3)
    integrand = 1j * np.einsum("ln,lna->na", state.flat.conj(), grad)
    vec = state.grid.w_flat @ integrand
    return vec.real / photon_state.inner(state, state).real


def position_eigenfunction_residual(
    point: np.ndarray,
    lam: int,
    probes: np.ndarray,
    k_ref: float = 1.0,
    h: float | None = None,
) -> float:
    """Max relative residual of q^a V = x^a V on the smooth eigenfield.

    V_x(p) = sqrt(2|p|) eps(p, lam) e^{-i p . x} is the position
    eigenvector's vector amplitude; the operator must return the
    eigenvalue x^a pointwise.
    """
    point = np.asarray(point, dtype=float)
    probes = np.atleast_2d(np.asarray(probes, dtype=float))

    def field(q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        k = np.linalg.norm(q, axis=-1)
        e_theta, e_phi, _ = frame(q)
        eps = -(lam / np.sqrt(2.0)) * (e_theta + 1j * lam * e_phi)
        return np.sqrt(2.0 * k)[..., None] * eps * np.exp(-1j * (q @ point))[..., None]

    v = field(probes)
    scale = np.abs(v).max() * max(1.0, float(np.abs(point).max()))
    worst = 0.0
    for a in range(3):
        qa = apply_position_vector(field, a, probes, h=h)
        worst = max(worst, float(np.abs(qa - point[a] * v).max() / scale))
    return worst
