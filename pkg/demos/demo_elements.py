"""
=================================
Raviart-Thomas and BDM elements
=================================

The reference flux elements on the unit square: dimensions, the identity
between degrees of freedom and the nodal basis, and the Piola map.
"""

# %%
# Dimensions and conditioning
# ---------------------------

import numpy as np

from layermixed import flux_reference_basis, piola_map

for family, degrees in (("rt", range(0, 4)), ("bdm", range(1, 4))):
    for k in degrees:
        el = flux_reference_basis(family, k)
        funcs = el.functionals()
        err = np.abs(funcs.apply(el.values(funcs.points)) - np.eye(el.dim)).max()
        print(f"{family.upper()}_{k}: dim={el.dim:3d} per-edge={el.n_edge} interior={el.n_interior:2d} "
              f"cond={el.gram_cond:8.1f} |DOF(basis) - I|={err:.1e}")

# %%
# Normal traces of RT_0
# ---------------------
#
# Each lowest-order basis function has unit outward normal component on
# its own edge and none on the others.

el = flux_reference_basis("rt", 0)
mid = np.array([[0.5, 0.0], [1.0, 0.5], [0.5, 1.0], [0.0, 0.5]])
normals = np.array([[0, -1], [1, 0], [0, 1], [-1, 0]])
vals = el.values(mid)
print(np.round(np.einsum("bcn,nc->bn", vals, normals), 12))

# %%
# Piola map
# ---------
#
# A reference field ``(1, 0)`` on a 2 x 3 cell has physical value
# ``(1/3, 0)``; the divergence scales with the inverse cell area.

values, div = piola_map(2.0, 3.0, values=np.array([[1.0], [0.0]]), divergence=np.array([1.0]))
print(values.ravel(), div)
