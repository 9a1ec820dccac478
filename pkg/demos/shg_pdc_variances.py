"""Phase variances of both modes in second-harmonic generation and down-conversion."""
import matplotlib.pyplot as plt
import numpy as np

from _common import save
from qphase import shgpdc as sp

fig, axes = plt.subplots(1, 2, figsize=(11, 3.8))
shg = sp.variance_trajectory(sp.SHG, 2.0, np.linspace(0, 3, 61))
axes[0].plot(shg["gt"], shg["var_a"], label="fundamental")
axes[0].plot(shg["gt"], shg["var_b"], label="harmonic")
axes[0].set_title("SHG, |alpha0|^2 = 4")
pdc = sp.variance_trajectory(sp.PDC, 2.0, np.linspace(0, 1.2, 49))
ideal = [sp.ideal_squeezed_variance(4.0 * g) for g in pdc["gt"]]
axes[1].plot(pdc["gt"], pdc["var_a"], label="signal")
axes[1].plot(pdc["gt"], pdc["var_b"], label="pump")
axes[1].plot(pdc["gt"], ideal, "--", label="ideal squeezed vacuum")
axes[1].set_title("PDC, |beta0|^2 = 4")
for ax in axes:
    ax.set_xlabel("gt")
    ax.set_ylabel("phase variance")
    ax.legend()
print(f"PDC signal variance at gt=0.1: {pdc['var_a'][4]:.5f} (ideal {ideal[4]:.5f})")
save(fig, "shg_pdc_variances.png")
