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
# # Characterization fits on synthetic data
#
# Each experiment is generated from the measured QB-0 values at SNR 20
# (the flux map from the tunable QB-1),
# re-fitted with the Levenberg-Marquardt engine and summarized in the usual
# value(uncertainty) notation.

# %%
import numpy as np

from transmon_twin.data import load_table2
from transmon_twin.expfit import (
    AXES,
    dispersive_shift_measurement,
    fit_trace,
    s21_notch_model,
    scenario,
    summarize_fits,
    synthesize,
    table2_report,
)

fits = {}
for i, kind in enumerate(AXES):
    sc = scenario(kind, "QB-1" if kind == "flux_map" else "QB-0")
    tr = synthesize(kind, sc.params, sc.axes, sc.sigma, (5, i))
    kw = {"E_C": sc.params["E_C"]} if kind == "flux_map" else {}
    fits[kind] = r = fit_trace(tr, **kw)
    print(f"{kind:<9} chi2_red={r.chi2_red:5.2f}  iterations={r.iterations}")

# %% [markdown]
# ## Notch resonator
#
# On resonance the dip depth is 1 - Q_l/Q_c, which is 0.219 for QB-0.

# %%
m = {k: v[0] for k, v in load_table2()["QB-0"]["measured"].items()}
Q_l = 1 / (1 / m["Q_i"] + 1 / m["Q_c"])
print(f"|S21(f_r)| = {abs(s21_notch_model(np.array([m['f_r']]), m['f_r'], Q_l, m['Q_c'])[0]):.4f}")
r = fits["notch"]
print("fitted Q_i = %.0f +- %.0f" % r.derived["Q_i"])

# %% [markdown]
# ## Dispersive shift from two resonator traces

# %%
sc = scenario("notch")
chi = m["chi"]
g_tr = synthesize("notch", {**sc.params, "f_r": sc.params["f_r"] + chi}, sc.axes, sc.sigma, 21)
e_tr = synthesize("notch", {**sc.params, "f_r": sc.params["f_r"] - chi}, sc.axes, sc.sigma, 22)
ds = dispersive_shift_measurement(g_tr, e_tr)
print(f"chi = {ds.chi / 1e3:.0f} +- {ds.sigma / 1e3:.0f} kHz, distortion warning: {ds.distortion_warning}")

# %% [markdown]
# ## Summary table

# %%
col = summarize_fits(fits, ds)
truth = dict(m, g=load_table2()["QB-1"]["measured"]["g"][0])
print(table2_report({"fit": col, "truth": truth}))
