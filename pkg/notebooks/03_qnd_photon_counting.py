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
# # Repeated QND parity checks for single-photon counting
#
# A qubit dispersively coupled to a storage cavity picks up a pi phase per
# photon after t = 1/(4 xi).  Repeating the parity check N times and taking
# a majority vote suppresses false clicks from readout errors.

# %%
import numpy as np

from transmon_twin.qnd import (
    QndProtocol,
    QubitNoise,
    StorageCavity,
    dark_count_rate,
    ghz_pi_time,
    majority_dark_rate,
    roc_curve,
    sweep,
)

xi = 350e3
print(f"pi time: {ghz_pi_time(xi) * 1e9:.1f} ns; with an m-qubit GHZ probe: "
      + ", ".join(f"m={m}: {ghz_pi_time(xi, m) * 1e9:.1f} ns" for m in (1, 2, 3)))

# %% [markdown]
# ## Dark counts from readout error alone

# %%
noise = QubitNoise(readout_error=0.1)
for N in (1, 3, 5, 7, 9):
    s = dark_count_rate(QndProtocol(xi, ghz_pi_time(xi), N), noise, 100_000, 1).dark_count
    print(f"N={N}: MC {s.estimate:.2e} [{s.ci_low:.2e}, {s.ci_high:.2e}]  exact {majority_dark_rate(N, 0.1):.2e}")

# %% [markdown]
# ## Efficiency with realistic coherence
#
# Qubit decay during the parity window now competes with the vote, so the
# efficiency saturates while dark counts keep falling.

# %%
cav = StorageCavity(f_s=7.0e9, Q_s=1.0e6, n_init=1)
real = QubitNoise(T1=1.52e-6, T2=0.61e-6, readout_error=0.1)
rows = sweep("n_repeats", [1, 3, 5, 7], QndProtocol(xi, ghz_pi_time(xi), 1), cav, real, 20_000, 3)
for r in rows:
    print(f"N={r['n_repeats']}: efficiency {r['efficiency']:.3f}  dark {r['dark_rate']:.2e}")

# %% [markdown]
# ## Threshold trade-off

# %%
roc = roc_curve(QndProtocol(xi, ghz_pi_time(xi), 7), cav, real, 20_000, 4)
print(np.array2string(roc, precision=4, suppress_small=True))
