"""Helicity frames: the orthonormal triad, polarization vectors, and the
spin algebra they diagonalize.

Every momentum away from the z-axis carries a right-handed triad
(e_theta, e_phi, e_k).  The polarization vectors built from it are
eigenvectors of the helicity matrix W(p) = S . p_hat with eigenvalues
+1 and -1; there is no 0 eigenstate in the transverse subspace.
"""

import numpy as np

import photonkin as pk

p = np.array([1.0, -2.0, 2.0])
e_theta, e_phi, e_k = pk.frame(p)
print("momentum", p, " |p| =", np.linalg.norm(p))
print("e_theta", np.round(e_theta, 6))
print("e_phi  ", np.round(e_phi, 6))
print("e_k    ", np.round(e_k, 6))

for lam in (1, -1):
    eps = pk.polarization_vector(p, lam)
    w = pk.helicity_matrix(p)
    dev = np.abs(w @ eps - lam * eps).max()
    print(f"lambda={lam:+d}  |W eps - lam eps| = {dev:.2e}   p.eps = "
          f"{abs(np.dot(p, eps)):.2e}")

# completeness: the two polarizations resolve the transverse subspace
eps_p = pk.polarization_vector(p, 1)
eps_m = pk.polarization_vector(p, -1)
proj = np.outer(eps_p.conj(), eps_p) + np.outer(eps_m.conj(), eps_m)
print("completeness defect:",
      f"{np.abs(proj - pk.transverse_projector(p)).max():.2e}")

# the frame is singular on the z-axis itself; batched calls reject poles
try:
    pk.frame(np.array([0.0, 0.0, 3.0]))
except pk.PoleError as exc:
    print("pole momentum rejected:", exc)

# arbitrarily close to the pole the construction stays finite and exact
near = np.array([1e-9, 0.0, 3.0])
eps = pk.polarization_vector(near, 1)
w = pk.helicity_matrix(near)
print(f"1e-9 off the pole: eigenrelation residual "
      f"{np.abs(w @ eps - eps).max():.2e}")
