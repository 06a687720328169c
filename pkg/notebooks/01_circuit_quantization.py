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
# # Circuit quantization of the readout pair
#
# From a Maxwell capacitance matrix and a junction inductance to the qubit
# frequency, anharmonicity, coupling and dispersive shift.  Two routes are
# compared: the lumped oscillator model (LOM) and energy participation (EPR).

# %%
import numpy as np

from transmon_twin.circuit import (
    JosephsonElement,
    calibrate_lj,
    cpw_line,
    dispersive_shift,
    ec_from_csigma,
    ej_from_lj,
    lom_analysis,
    read_capacitance_csv,
    transmon_asymptotic,
    transmon_spectrum,
)
from transmon_twin.data import fixture_path, load_table2
from transmon_twin.epr import epr_vs_lom_report

np.set_printoptions(precision=4, suppress=True)
table = load_table2()

# %% [markdown]
# ## Charging energy and the transmon spectrum
#
# A 100 fF shunt gives E_C close to the measured |alpha| of QB-0; in the
# transmon limit alpha is about -E_C.

# %%
ec = ec_from_csigma(100e-15)
print(f"E_C(100 fF) = {ec / 1e6:.1f} MHz, measured |alpha| = {-table['QB-0']['measured']['alpha'][0] / 1e6:.1f} MHz")

for ratio in (20, 50, 100, 200):
    lv = transmon_spectrum(ratio * 200e6, 200e6, 3)
    f01, a = lv[1] - lv[0], lv[2] - 2 * lv[1] + lv[0]
    fa, aa = transmon_asymptotic(ratio * 200e6, 200e6)
    print(f"E_J/E_C={ratio:4d}  f01 {f01 / 1e9:7.4f} GHz (asym {fa / 1e9:7.4f})  alpha {a / 1e6:8.2f} MHz")

# %% [markdown]
# ## LOM on the shipped capacitance matrices
#
# L_J is calibrated so the dressed qubit hits the design frequency; the
# remaining quantities follow.

# %%
for q, fname in (("QB-0", "qb0_capacitance.csv"), ("QB-1", "qb1_capacitance.csv")):
    C = read_capacitance_csv(fixture_path(fname))
    exp = table[q]["expected"]
    L = calibrate_lj(exp["f_q"], C, exp["f_r"], C_J=2e-15)
    r = lom_analysis(C, JosephsonElement("single", L_J=L, C_J=2e-15), exp["f_r"])
    print(f"{q}: L_J={L * 1e9:.2f} nH  C_sigma={r.C_sigma * 1e15:.1f} fF  "
          f"alpha={r.transmon.alpha / 1e6:.1f} MHz  g={r.coupled.g / 1e6:.1f} MHz  chi={r.coupled.chi / 1e3:.0f} kHz")

# %% [markdown]
# The dispersive formula on the design values alone:

# %%
for q in ("QB-0", "QB-1"):
    e = table[q]["expected"]
    chi = dispersive_shift(e["g"], e["f_q"] - e["f_r"], e["alpha"])
    print(f"{q}: chi = {chi / 1e3:.1f} kHz (design |chi| {e['chi'] / 1e3:.0f} kHz)")

# %% [markdown]
# ## LOM versus EPR across flux
#
# QB-1 is tuned by a symmetric SQUID.  The two routes agree to a fraction
# of a percent at the sweet spot and drift apart slowly as the qubit is
# pulled down in frequency.

# %%
C = read_capacitance_csv(fixture_path("qb1_capacitance.csv"))
j = JosephsonElement("symmetric-squid", E_J_max=ej_from_lj(8.56e-9), C_J=2e-15)
rep = epr_vs_lom_report(np.linspace(0, 0.45, 10), C, j, table["QB-1"]["expected"]["f_r"])
print("flux   f_LOM [GHz]  f_EPR [GHz]")
for flux, f_lom, f_epr in rep.as_table():
    print(f"{flux:4.2f}   {f_lom / 1e9:9.5f}   {f_epr / 1e9:9.5f}")
print(f"max relative difference {rep.max_rel_diff:.2e}")

# %% [markdown]
# ## Feedline impedance

# %%
Z0, eps_eff = cpw_line(15e-6, 9e-6, 11.65)
print(f"15/9 um CPW on silicon: Z0 = {Z0:.1f} ohm, eps_eff = {eps_eff:.3f}")
