"""Jaynes-Cummings model: photon number and phase variance through collapse and revival."""
import matplotlib.pyplot as plt
import numpy as np

from _common import save
from qphase import dynamics1 as dyn

traj = dyn.jcm_trajectory(5.0, np.linspace(0, 2.5, 1251))
print("revival centres (scaled time):", dyn.revival_centers(traj))
print("phase-variance extremum nearest T=1:", dyn.nearest_variance_extremum(traj, 1.0))

fig, axes = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
axes[0].plot(traj.T, traj.mean_n)
axes[0].set_ylabel("<n>")
axes[1].plot(traj.T, traj.phase_variance)
axes[1].set_ylabel("phase variance")
axes[1].set_xlabel("T = gt / (2 pi |alpha0|)")
save(fig, "jcm_collapse_revival.png")
