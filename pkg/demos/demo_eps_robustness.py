"""
=================================
Robustness in eps
=================================

RT_1 on a 16 x 16 Bakhvalov-S mesh for the corner-layer problem. The
scalar error and the balanced error stay put as ``eps`` shrinks, while the
flux error drops like ``eps^{1/2}`` and the divergence error grows like
``eps^{-1/2}``.
"""

# %%
# Sweep over eps
# --------------

from layermixed import RunConfig, render_table, run_sweep
from layermixed.harness import rows_to_csv

config = RunConfig.from_mapping({"family": "rt", "k": "1", "N": "16",
                                 "eps": "1e-3,1e-4,1e-5,1e-6"})
rows, _ = run_sweep(config)
print(render_table(rows_to_csv(rows)))

# %%
# Decade ratios
# -------------
#
# Successive ratios near ``sqrt(10) = 3.16`` confirm the scalings.

for a, b in zip(rows, rows[1:]):
    print(f"eps {a['eps']:.0e} -> {b['eps']:.0e}: flux ratio {a['err_flux'] / b['err_flux']:.3f}, "
          f"div ratio {b['err_div'] / a['err_div']:.3f}")
