"""Free flight of a photon wavepacket.

Evolution multiplies each momentum amplitude by e^{-i|p|t} (c = 1), so
the norm and energy are conserved to rounding and the position
expectation moves on the straight line <q>(t) = <q>(0) + t <p_hat>.
The packet's transverse field solves the vacuum field equations; the
demo checks the divergence and curl residuals on a small spacetime
lattice and shows their second-order decay under refinement.
"""

import numpy as np

import photonkin as pk

grid = pk.build_grid(48, 24, 24, 7.0, 13.0, ct_window=(0.94, 1.0))
state = pk.from_spec(
    pk.StateSpec(center_p=(0.0, 0.0, 10.0), sigma_p=0.5,
                 center_x=(0.0, 0.0, -5.0)),
    grid,
)
print(f"packet: <H> = {pk.energy_mean(state):.4f}, norm = {pk.norm(state):.12f}")

times = np.linspace(0.0, 10.0, 6)
drift = pk.unitarity_energy_drift(state, times)
print(f"norm drift over t in [0,10]:   {drift['norm_drift']:.2e}")
print(f"energy drift over t in [0,10]: {drift['energy_drift']:.2e}")

ehr = pk.ehrenfest_check(state, times)
print("\n  t      <q_z>          straight line")
for t, q, pred in zip(times, ehr.positions, ehr.predicted):
    print(f"  {t:4.1f}   {q[2]:+.9f}   {pred[2]:+.9f}")
print(f"worst ballistic residual: {ehr.residual_max:.2e}")

study = pk.maxwell_refinement(state)
coarse, fine, orders = study["coarse"], study["fine"], study["orders"]
print("\nfield-equation residuals (normalized, central differences)")
print(f"  coarse dx={coarse.dx:.4f}: div {coarse.div_residual.max():.2e}"
      f"  curl {coarse.curl_residual.max():.2e}")
print(f"  fine   dx={fine.dx:.4f}: div {fine.div_residual.max():.2e}"
      f"  curl {fine.curl_residual.max():.2e}")
print(f"  observed orders: div {orders['div']:.2f}, curl {orders['curl']:.2f}")

print(f"\nhelicity transport residual (spectral, exact identity): "
      f"{pk.helicity_transport_residual(state):.2e}")
