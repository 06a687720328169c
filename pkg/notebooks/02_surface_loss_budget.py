# ---
# jupyter:
#   jupytext:
#     formats: ipynb,py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Surface participation and the T1 budget
#
# A 2D cross-section resolves the thin lossy interfaces that a coarse 3D
# mesh cannot.  The interface fractions feed a TLS quality factor, and the
# Purcell channel through the readout resonator completes the budget.

# %%
from transmon_twin.losses import ReadoutResonator, channels, load_table1, q_tls, t1_budget
from transmon_twin.xsect import CrossSectionGeometry, convergence_study, interface_participation, solve_potential

# %% [markdown]
# ## Cross-section of the 15/9 um line

# %%
geom = CrossSectionGeometry(15e-6, 9e-6, 11.65)
sol = solve_potential(geom, 128)
f = interface_participation(sol)
print(f"grid {sol.potential.shape}, C = {sol.capacitance * 1e12:.1f} pF/m")
for k in ("MA", "MS", "SA"):
    print(f"  f_{k} = {f[k]:.3e}")

# %% [markdown]
# Refinement is monotone and a Richardson estimate gives the continuum
# limit for MS and SA.  MA converges slowest because the field peaks at the
# metal corners; its fitted order is close to zero, so the extrapolated MA is
# unreliable and the finest-grid value is the better number.

# %%
cs = convergence_study(geom, [64, 96, 128])
d = cs.as_dict()
for R, fr in zip(d["resolutions"], d["fractions"]):
    print(f"R={R:4d}  MA {fr['f_MA']:.4e}  MS {fr['f_MS']:.4e}  SA {fr['f_SA']:.4e}")
ex = d["extrapolated"]
print(f"R=inf   MA {ex['f_MA']:.4e}  MS {ex['f_MS']:.4e}  SA {ex['f_SA']:.4e}  (orders {d['orders']})")

# %% [markdown]
# ## Hybrid versus 3D-only participation
#
# Every hybrid surface fraction exceeds its 3D-only counterpart, so the
# hybrid Q_TLS is lower for any set of loss tangents.

# %%
table = load_table1()
for name, p in table.items():
    Q = q_tls(channels(p))
    print(f"{name:<22} MA {p.MA:.2e}  MS {p.MS:.2e}  SA {p.SA:.2e}  Q_TLS {Q:.3g}")

# %% [markdown]
# ## Full budget for QB-0
#
# TLS and Purcell rates add; the total sits near the 12 us bound.

# %%
Q = q_tls(channels(table["3D-2D (MER)"]))
b = t1_budget(5.766e9, Q, g=115e6, delta=5.6941e9 - 7.60728e9,
              resonator=ReadoutResonator(7.57905e9, 15.3e3, 4.28e3))
print(b.table())
