"""Momentum-shell quadrature: build a grid and check it against closed forms.

The grid is a tensor product of Gauss-Legendre nodes in |p| and cos(theta)
with a uniform azimuthal rule.  Weights come in two flavors: w_flat for
d^3p and w_inv for the invariant measure d^3p / 2|p|.
"""

import numpy as np

import photonkin as pk

grid = pk.build_grid(n_k=40, n_theta=24, n_phi=16, k_min=1.0, k_max=9.0)
print(f"grid: {grid.shape} nodes over |p| in [{grid.k_min}, {grid.k_max}]")
print(f"flat nodes: {grid.n_nodes}")

# a shell volume is a polynomial in k, so Gauss-Legendre gets it exactly
from photonkin import sphgrid

shell = sphgrid.integrate_flat(grid, np.ones(grid.n_nodes))
exact = 4.0 / 3.0 * np.pi * (9.0**3 - 1.0**3)
print(f"shell volume   quadrature {shell:.12f}   exact {exact:.12f}")

# an isotropic Gaussian profile against both measures
f = np.exp(-((grid.k_flat - 4.0) ** 2))
flat = sphgrid.integrate_flat(grid, f)
inv = sphgrid.integrate_invariant(grid, f)
print(f"d^3p integral       {flat:.12f}")
print(f"d^3p/2|p| integral  {inv:.12f}")

# the log map concentrates radial nodes at small |p| for wide shells
wide = pk.build_grid(48, 16, 8, 0.01, 50.0, radial_map="log")
g = np.exp(-wide.k_flat)
print(f"log-map integral of e^-|p| over [0.01, 50]: {wide.w_flat @ g:.12f}")
print(f"closed form 8 pi - O(k_min^2):              {8*np.pi:.12f}")
