"""
=================================
Layer-adapted meshes
=================================

Shishkin and Bakhvalov-S meshes for a layer of width ``eps``, in the
two-sided and left-only layouts, and the quantities that control the
interpolation error on them.
"""

# %%
# One-dimensional meshes
# ----------------------
#
# The transition point ``lambda = sigma eps ln N`` splits the interval into
# a fine part resolving the layer and a uniform coarse part.

import numpy as np

from layermixed import Region, build_mesh_1d, build_tensor_mesh, mesh_stats

N, eps, sigma = 16, 1e-4, 2.5
for family in ("shishkin", "bakhvalov-s"):
    m = build_mesh_1d(N, eps, sigma, family, "two-sided")
    print(m.header())
    print("  first points:", np.array2string(m.points[:5], precision=3))
    print(f"  lambda/eps = {m.lam / eps:.3f}, coarse width = {m.widths[N // 2]:.4f}")

# %%
# Graded widths
# -------------
#
# Shishkin fine cells are uniform with width ``4 sigma eps ln N / N``.
# Bakhvalov-S grading is close to geometric: the first cell shrinks like
# ``eps / N`` while the last fine cell stays about ``4 eps`` wide.

for family in ("shishkin", "bakhvalov-s"):
    for N in (16, 64, 256, 1024):
        s = mesh_stats(build_mesh_1d(N, eps, sigma, family, "two-sided"))
        print(f"{family:12s} N={N:5d}  max fine h/eps={s.h / eps:7.3f}  "
              f"min h*N/eps={s.hmin_scaled:6.3f}  max|psi'|={s.max_abs_psi_prime:6.3f}")

# %%
# Tensor meshes
# -------------
#
# Cells are classified by which one-dimensional band they sit in. With the
# left-only layout there is a single corner block at the origin.

for layout in ("two-sided", "left-only"):
    m = build_mesh_1d(16, eps, sigma, "bakhvalov-s", layout)
    counts = build_tensor_mesh(m, m).region_counts()
    print(layout, {r.value: counts[r] for r in Region})
