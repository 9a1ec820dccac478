"""Kerr-medium evolution of a coherent state: phase variance and fractional revivals."""
import math

import matplotlib.pyplot as plt
import numpy as np

from _common import save
from qphase import dynamics1 as dyn
from qphase import phasedist as pd
from qphase import states

st = states.coherent(2.0)
taus = np.linspace(0, 2 * math.pi, 400)
var = [dyn.anharmonic_mean_variance(st, t)[1] for t in taus]

fig, axes = plt.subplots(1, 2, figsize=(11, 3.8))
axes[0].plot(taus, var)
axes[0].axhline(math.pi ** 2 / 3, ls="--", color="k", lw=0.7, label="uniform phase")
axes[0].set_xlabel("tau")
axes[0].set_ylabel("Pegg-Barnett phase variance")
axes[0].legend()
for N in (2, 3, 4):
    d = pd.pb_distribution(dyn.anharmonic_evolve(st, 2 * math.pi / N), theta0=-math.pi, M=720)
    axes[1].plot(d.theta, d.values, label=f"tau = 2 pi / {N}")
    print(f"N={N}: symmetry defect / peak = {dyn.rotational_symmetry_defect(d, N) / d.values.max():.2e}")
axes[1].set_xlabel("theta")
axes[1].set_ylabel("P(theta)")
axes[1].legend()
save(fig, "kerr_revivals.png")
