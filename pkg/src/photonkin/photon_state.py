"""One-photon states on a momentum shell and their representations.

A state is stored as the pair of helicity amplitudes psi_lam(p) sampled on
a `MomentumGrid`, with the norm

    <psi|psi> = sum_lam  integral d^3p |psi_lam(p)|^2 .

The equivalent transverse vector amplitude on the light cone is

    V_i(p) = sqrt(2|p|) sum_lam eps_i(p, lam) psi_lam(p),

normalized with the invariant measure d^3p / (2|p|); `to_vector` and
`from_vector` convert between the two, and the conversion is an exact
pointwise isometry (no quadrature enters).

Position-space quantities are direct quadratures of the Fourier kernel
exp(i p . x) against the grid; nothing here assumes a uniform p-lattice.

Truncation accounting: `from_spec` normalizes on the grid and reports the
captured-norm fraction against the closed-form whole-space norm.  Specs
whose captured fraction deviates from 1 by more than `NORM_CAPTURE_TOL`
are rejected rather than silently renormalized.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .polarization import HELICITIES, polarization_on_grid
from .sphgrid import MomentumGrid, build_grid

NORM_CAPTURE_TOL = 1e-6
TRANSVERSALITY_TOL = 1e-10

_FOURIER_NORM = (2.0 * np.pi) ** -1.5
# cap on the size of the node-by-point phase matrix held at once
_CHUNK_ENTRIES = 4_000_000


class NormLeakError(ValueError):
    """The grid fails to capture the spec's whole-space norm."""


class TransversalityError(ValueError):
    """A vector amplitude has a longitudinal component above tolerance."""


@dataclass(frozen=True)
class StateSpec:
    """Gaussian wave-packet specification.

    The helicity amplitude is

        psi_lam(p) = w_lam N exp(-|p - center_p|^2 / (4 sigma_p^2))
                           exp(-i p . center_x),

    an isotropic Gaussian of momentum standard deviation sigma_p per axis,
    centered in phase space at (center_x, center_p), with complex helicity
    weights w = (w_+, w_-).  N is fixed by grid normalization.
    """

    center_p: tuple[float, float, float]
    sigma_p: float
    center_x: tuple[float, float, float] = (0.0, 0.0, 0.0)
    helicity_weights: tuple[complex, complex] = (1.0, 0.0)

    def __post_init__(self):
        if not (self.sigma_p > 0.0 and np.isfinite(self.sigma_p)):
            raise ValueError(f"sigma_p must be positive, got {self.sigma_p}")
        w = np.asarray(self.helicity_weights, dtype=complex)
        if w.shape != (2,):
            raise ValueError("helicity_weights must be a pair (w_plus, w_minus)")
        if not np.all(np.isfinite(w.view(float))):
            raise ValueError("helicity_weights must be finite")
        if np.linalg.norm(w) == 0.0:
            raise ValueError("helicity_weights must not both vanish")
        object.__setattr__(self, "center_p", tuple(float(c) for c in self.center_p))
        object.__setattr__(self, "center_x", tuple(float(c) for c in self.center_x))
        object.__setattr__(self, "helicity_weights", (complex(w[0]), complex(w[1])))


@dataclass(frozen=True, eq=False)
class HelicityAmplitude:
    """Helicity amplitudes psi_lam on a grid, values shape (2, n_k, n_theta, n_phi).

    The leading axis orders helicity as (+1, -1).  `spec` retains the
    generating `StateSpec` when known, which unlocks exact gradients;
    `t_evolved` tracks free evolution already applied to the values;
    `captured` is the captured-norm fraction reported at construction.
    """

    grid: MomentumGrid
    values: np.ndarray
    spec: StateSpec | None = None
    t_evolved: float = 0.0
    captured: float | None = None

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=complex)
        if v.shape != (2,) + self.grid.shape:
            raise ValueError(
                f"values shape {v.shape} does not match (2,) + grid shape {self.grid.shape}"
            )
        object.__setattr__(self, "values", v)

    @property
    def flat(self) -> np.ndarray:
        """Values as (2, n_nodes), node order matching grid.p_vecs."""
        return self.values.reshape(2, self.grid.n_nodes)


@dataclass(frozen=True, eq=False)
class VectorAmplitude:
    """Transverse vector amplitude V_i(p), values shape (n_nodes, 3)."""

    grid: MomentumGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=complex)
        if v.shape != (self.grid.n_nodes, 3):
            raise ValueError(
                f"values shape {v.shape} does not match (n_nodes, 3) = "
                f"({self.grid.n_nodes}, 3)"
            )
        object.__setattr__(self, "values", v)


@dataclass(frozen=True, eq=False)
class PositionSamples:
    """Samples of a position-space quantity at explicit points.

    kind is one of "helicity_scalar" (values (2, m)), "vector" (values
    (m, 3)) or "riemann_silberstein" (values (2, m, 3)).
    """

    points: np.ndarray
    values: np.ndarray
    kind: str


def _spec_values(spec: StateSpec, grid: MomentumGrid) -> np.ndarray:
    """Unnormalized spec amplitudes on the grid, shape (2, n_nodes)."""
    p0 = np.asarray(spec.center_p)
    x0 = np.asarray(spec.center_x)
    d = grid.p_vecs - p0
    envelope = np.exp(-np.einsum("ni,ni->n", d, d) / (4.0 * spec.sigma_p**2))
    phase = np.exp(-1j * (grid.p_vecs @ x0))
    w = np.asarray(spec.helicity_weights, dtype=complex)
    return w[:, None] * (envelope * phase)[None, :]


def whole_space_norm_sq(spec: StateSpec) -> float:
    """Closed-form norm^2 of the unnormalized spec over all of R^3."""
    w = np.asarray(spec.helicity_weights, dtype=complex)
    return float(np.sum(np.abs(w) ** 2) * (2.0 * np.pi * spec.sigma_p**2) ** 1.5)


def from_spec(spec: StateSpec, grid: MomentumGrid) -> HelicityAmplitude:
    """Realize a spec on a grid, unit-normalized by grid quadrature.

    Raises
    ------
    NormLeakError
        If the grid-captured fraction of the whole-space norm deviates
        from 1 by more than NORM_CAPTURE_TOL, meaning the shell/window
        truncates the state or the node density cannot resolve it.
    """
    raw = _spec_values(spec, grid)
    norm_sq = float(np.sum((np.abs(raw) ** 2) @ grid.w_flat))
    captured = norm_sq / whole_space_norm_sq(spec)
    if abs(captured - 1.0) > NORM_CAPTURE_TOL:
        raise NormLeakError(
            f"grid captures fraction {captured:.9f} of the spec norm "
            f"(tolerance {NORM_CAPTURE_TOL}); enlarge the shell/window "
            f"or refine the grid"
        )
    values = (raw / np.sqrt(norm_sq)).reshape((2,) + grid.shape)
    return HelicityAmplitude(grid=grid, values=values, spec=spec, captured=captured)


def inner(a: HelicityAmplitude, b: HelicityAmplitude) -> complex:
    """<a|b> = sum_lam integral d^3p conj(a) b on the common grid."""
    if a.grid is not b.grid:
        raise ValueError("states live on different grids")
    return complex(np.sum((a.flat.conj() * b.flat) @ a.grid.w_flat))


def norm(a: HelicityAmplitude) -> float:
    return float(np.sqrt(inner(a, a).real))


def to_vector(state: HelicityAmplitude) -> VectorAmplitude:
    """V_i = sqrt(2|p|) sum_lam eps_i(p, lam) psi_lam, pointwise exact."""
    eps = polarization_on_grid(state.grid)  # (2, n, 3)
    scale = np.sqrt(2.0 * state.grid.k_flat)[:, None]
    vals = scale * np.einsum("ln,lni->ni", state.flat, eps)
    return VectorAmplitude(grid=state.grid, values=vals)


def from_vector(vec: VectorAmplitude) -> HelicityAmplitude:
    """psi_lam = eps*_i(p, lam) V_i / sqrt(2|p|), with transversality check.

    Raises
    ------
    TransversalityError
        If max |p_hat . V| / max |V| exceeds TRANSVERSALITY_TOL.
    """
    grid = vec.grid
    longitudinal = np.abs(np.einsum("ni,ni->n", grid.n_hat, vec.values))
    scale = np.abs(vec.values).max()
    if scale > 0.0 and longitudinal.max() / scale > TRANSVERSALITY_TOL:
        raise TransversalityError(
            f"longitudinal component {longitudinal.max() / scale:.3e} "
            f"exceeds {TRANSVERSALITY_TOL}"
        )
    eps = polarization_on_grid(grid)
    vals = np.einsum("lni,ni->ln", eps.conj(), vec.values)
    vals /= np.sqrt(2.0 * grid.k_flat)[None, :]
    return HelicityAmplitude(grid=grid, values=vals.reshape((2,) + grid.shape))


def _phase_apply(grid: MomentumGrid, weighted: np.ndarray, points: np.ndarray) -> np.ndarray:
    """sum_nodes weighted[..., n] exp(i p_n . x_m) -> (..., m), chunked in m."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    m = points.shape[0]
    out = np.empty(weighted.shape[:-1] + (m,), dtype=complex)
    step = max(1, _CHUNK_ENTRIES // grid.n_nodes)
    for lo in range(0, m, step):
        hi = min(m, lo + step)
        phase = np.exp(1j * (grid.p_vecs @ points[lo:hi].T))  # (n, mc)
        out[..., lo:hi] = weighted @ phase
    return out


def to_position_rep(state: HelicityAmplitude, points: np.ndarray) -> PositionSamples:
    """<x lam|psi> = (2 pi)^{-3/2} integral d^3p e^{i p . x} psi_lam(p).

    points: (m, 3).  Returns helicity-scalar samples, values (2, m).
    """
    weighted = state.flat * state.grid.w_flat[None, :]
    vals = _FOURIER_NORM * _phase_apply(state.grid, weighted, points)
    return PositionSamples(points=np.atleast_2d(np.asarray(points, float)),
                           values=vals, kind="helicity_scalar")


def coordinate_wavefunction(state: HelicityAmplitude, points: np.ndarray) -> PositionSamples:
    """Transverse coordinate-space field, values (m, 3).

    V(x)_i = (2 pi)^{-3/2} sum_lam integral d^3p e^{i p . x}
             eps_i(p, lam) psi_lam(p)
    """
    eps = polarization_on_grid(state.grid)
    node_vec = np.einsum("ln,lni->in", state.flat, eps)  # (3, n)
    weighted = node_vec * state.grid.w_flat[None, :]
    vals = _FOURIER_NORM * _phase_apply(state.grid, weighted, points)  # (3, m)
    return PositionSamples(points=np.atleast_2d(np.asarray(points, float)),
                           values=vals.T, kind="vector")


def rs_momentum_field(state: HelicityAmplitude) -> np.ndarray:
    """Momentum-space Riemann-Silberstein integrand per helicity.

    F_hat(p, lam) = sqrt(2|p|) i eps(p, lam) psi_lam(p), shape (2, n, 3).
    Satisfies (S . p) F_hat = lam |p| F_hat node by node.
    """
    eps = polarization_on_grid(state.grid)
    scale = 1j * np.sqrt(2.0 * state.grid.k_flat)
    return scale[None, :, None] * eps * state.flat[:, :, None]


def riemann_silberstein(state: HelicityAmplitude, points: np.ndarray) -> PositionSamples:
    """Riemann-Silberstein fields F(x, lam) at the state's own time.

    F(x, lam) = (2 pi)^{-3/2} integral d^3p sqrt(2|p|) i e^{i p . x}
                eps(p, lam) psi_lam(p)

    values shape (2, m, 3).  Evolution is applied with `dynamics.evolve`
    before sampling; the values already carry any e^{-i|p|t} phase.
    """
    node_field = rs_momentum_field(state)  # (2, n, 3)
    weighted = np.swapaxes(node_field, 1, 2) * state.grid.w_flat  # (2, 3, n)
    vals = _FOURIER_NORM * _phase_apply(state.grid, weighted, points)  # (2, 3, m)
    return PositionSamples(points=np.atleast_2d(np.asarray(points, float)),
                           values=np.swapaxes(vals, 1, 2), kind="riemann_silberstein")


def localized_state(grid: MomentumGrid, point: np.ndarray, lam: int) -> HelicityAmplitude:
    """Band-limited position eigenvector |x lam> as a grid state.

    psi_lam'(p) = delta_{lam lam'} (2 pi)^{-3/2} e^{-i p . x}; not
    normalizable, so `captured` is left unset.  Its overlap with any
    state reproduces `to_position_rep` at the same point by construction.
    """
    if lam not in HELICITIES:
        raise ValueError(f"helicity must be +1 or -1, got {lam}")
    point = np.asarray(point, dtype=float)
    vals = np.zeros((2, grid.n_nodes), dtype=complex)
    vals[HELICITIES.index(lam)] = _FOURIER_NORM * np.exp(-1j * (grid.p_vecs @ point))
    return HelicityAmplitude(grid=grid, values=vals.reshape((2,) + grid.shape))


def _box_rule(lo: np.ndarray, hi: np.ndarray, n_q: tuple[int, int, int]):
    """Tensor Gauss-Legendre rule over the box [lo, hi], ((m,3) pts, (m,) wts)."""
    from numpy.polynomial.legendre import leggauss

    axes, wts = [], []
    for a in range(3):
        x, w = leggauss(int(n_q[a]))
        half = 0.5 * (hi[a] - lo[a])
        axes.append(lo[a] + half * (x + 1.0))
        wts.append(w * half)
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    WX, WY, WZ = np.meshgrid(*wts, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    return pts, (WX * WY * WZ).ravel()


def probability_in_region(
    state: HelicityAmplitude,
    lo: np.ndarray,
    hi: np.ndarray,
    lam: int | None = None,
    n_q: tuple[int, int, int] = (12, 12, 12),
) -> float:
    """integral_box d^3x |<x lam|psi>|^2 by tensor Gauss-Legendre quadrature.

    lam = None sums both helicities.  Degenerate boxes return 0.  The rule
    must resolve both the envelope and the fastest carrier wave; n_q is
    the caller's knob for that.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(hi < lo):
        raise ValueError(f"box has hi < lo: {lo} .. {hi}")
    if np.any(hi == lo):
        return 0.0
    pts, wts = _box_rule(lo, hi, n_q)
    samples = to_position_rep(state, pts).values  # (2, m)
    dens = np.abs(samples) ** 2
    if lam is not None:
        if lam not in HELICITIES:
            raise ValueError(f"helicity must be +1, -1 or None, got {lam}")
        dens = dens[HELICITIES.index(lam)][None, :]
    return float(np.sum(dens @ wts))


def amplitude_gradient(state: HelicityAmplitude) -> np.ndarray:
    """Exact gradient d psi_lam / d p^a on the nodes, shape (2, n_nodes, 3).

    Available for spec-generated states (including evolved ones, where the
    phase contributes -i t p_hat).  Raises ValueError otherwise.
    """
    if state.spec is None:
        raise ValueError(
            "gradient unavailable: state does not carry a generating spec"
        )
    spec = state.spec
    g = state.grid
    factor = (
        -(g.p_vecs - np.asarray(spec.center_p)) / (2.0 * spec.sigma_p**2)
        - 1j * np.asarray(spec.center_x)
        - 1j * state.t_evolved * g.n_hat
    )
    return state.flat[:, :, None] * factor[None, :, :]


# ---------------------------------------------------------------------------
# serialization
#
# Two interchange formats:
#   spec document  one JSON file: grid parameters + the generating StateSpec
#   amplitudes     raw little-endian complex128, C-order over
#                  (helicity, k, cos_theta, phi), plus a JSON sidecar with
#                  grid parameters and layout metadata
# ---------------------------------------------------------------------------

_SPEC_FORMAT = "photonkin-state-spec/1"
_AMP_FORMAT = "photonkin-amplitudes/1"


def _grid_to_dict(grid: MomentumGrid) -> dict:
    return {
        "n_k": grid.n_k, "n_theta": grid.n_theta, "n_phi": grid.n_phi,
        "k_min": grid.k_min, "k_max": grid.k_max,
        "radial_map": grid.radial_map,
        "ct_window": list(grid.ct_window),
    }


def _grid_from_dict(d: dict) -> MomentumGrid:
    return build_grid(
        int(d["n_k"]), int(d["n_theta"]), int(d["n_phi"]),
        float(d["k_min"]), float(d["k_max"]),
        radial_map=d.get("radial_map", "linear"),
        ct_window=tuple(d.get("ct_window", (-1.0, 1.0))),
    )


def _spec_to_dict(spec: StateSpec) -> dict:
    w = spec.helicity_weights
    return {
        "kind": "gaussian",
        "center_p": list(spec.center_p),
        "sigma_p": spec.sigma_p,
        "center_x": list(spec.center_x),
        "helicity_weights": [[w[0].real, w[0].imag], [w[1].real, w[1].imag]],
    }


def _spec_from_dict(d: dict) -> StateSpec:
    if d.get("kind", "gaussian") != "gaussian":
        raise ValueError(f"unsupported state kind {d.get('kind')!r}")
    w = d["helicity_weights"]
    return StateSpec(
        center_p=tuple(d["center_p"]),
        sigma_p=float(d["sigma_p"]),
        center_x=tuple(d.get("center_x", (0.0, 0.0, 0.0))),
        helicity_weights=(complex(w[0][0], w[0][1]), complex(w[1][0], w[1][1])),
    )


def save_state(state: HelicityAmplitude, stem: str, format: str = "amplitudes") -> list[str]:
    """Write a state to disk; returns the list of files written.

    format = "amplitudes": `<stem>.bin` (complex128, little-endian, C-order
    over (helicity, k, cos_theta, phi)) plus sidecar `<stem>.json`.
    format = "spec": single `<stem>.json` carrying grid + StateSpec;
    requires the state to have been built by `from_spec`.
    """
    if format == "spec":
        if state.spec is None:
            raise ValueError("state carries no spec; use format='amplitudes'")
        doc = {
            "format": _SPEC_FORMAT,
            "grid": _grid_to_dict(state.grid),
            "state": _spec_to_dict(state.spec),
            "t_evolved": state.t_evolved,
        }
        path = f"{stem}.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, indent=2)
            fh.write("\n")
        return [path]
    if format != "amplitudes":
        raise ValueError(f"unknown format {format!r}")
    bin_path = f"{stem}.bin"
    raw = state.values.astype("<c16")
    raw.tofile(bin_path)
    sidecar = {
        "format": _AMP_FORMAT,
        "data_file": bin_path.rsplit("/", 1)[-1],
        "dtype": "complex128",
        "byte_order": "little",
        "index_order": ["helicity", "k", "cos_theta", "phi"],
        "helicity_order": [1, -1],
        "shape": [2, *state.grid.shape],
        "grid": _grid_to_dict(state.grid),
        "t_evolved": state.t_evolved,
        "captured": state.captured,
    }
    json_path = f"{stem}.json"
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return [bin_path, json_path]


def load_state(path: str) -> HelicityAmplitude:
    """Load a state from a `save_state` JSON (either format).

    `path` may be the JSON path or the bare stem.  The amplitudes format
    round-trips complex128 exactly.
    """
    json_path = path if path.endswith(".json") else f"{path}.json"
    with open(json_path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    fmt = doc.get("format")
    if fmt == _SPEC_FORMAT:
        grid = _grid_from_dict(doc["grid"])
        state = from_spec(_spec_from_dict(doc["state"]), grid)
        t = float(doc.get("t_evolved", 0.0))
        if t != 0.0:
            phase = np.exp(-1j * grid.k_flat * t).reshape(grid.shape)
            state = replace(state, values=state.values * phase, t_evolved=t)
        return state
    if fmt == _AMP_FORMAT:
        grid = _grid_from_dict(doc["grid"])
        shape = tuple(doc["shape"])
        if shape != (2,) + grid.shape:
            raise ValueError(f"sidecar shape {shape} inconsistent with grid")
        base = json_path.rsplit("/", 1)[0]
        data_file = doc["data_file"]
        bin_path = data_file if base == json_path else f"{base}/{data_file}"
        raw = np.fromfile(bin_path, dtype="<c16")
        if raw.size != np.prod(shape):
            raise ValueError(
                f"amplitude file holds {raw.size} values, expected {np.prod(shape)}"
            )
        return HelicityAmplitude(
            grid=grid,
            values=raw.astype(complex).reshape(shape),
            t_evolved=float(doc.get("t_evolved", 0.0)),
            captured=doc.get("captured"),
        )
    raise ValueError(f"unrecognized state document format {fmt!r} in {json_path}")
