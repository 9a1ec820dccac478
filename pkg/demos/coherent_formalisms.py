"""Coherent-state phase distributions in the Pegg-Barnett, Wigner and Husimi pictures."""
import math

import matplotlib.pyplot as plt

from _common import save
from qphase import phasedist as pd
from qphase import states

fig, axes = plt.subplots(1, 3, figsize=(12, 3.6), sharey=True)
for ax, nbar in zip(axes, (0.5, 2.0, 8.0)):
    st = states.coherent(math.sqrt(nbar))
    for label, dist in (("Pegg-Barnett", pd.pb_distribution(st, M=512)),
                        ("Wigner (s=0)", pd.sparam_distribution(st, 0, M=512)),
                        ("Husimi (s=-1)", pd.sparam_distribution(st, -1, M=512))):
        ax.plot(dist.theta, dist.values, label=label)
        print(f"nbar={nbar:4} {label:14} variance={dist.mean_variance()[1]:.5f}")
    ax.set_title(f"|alpha0|^2 = {nbar}")
    ax.set_xlabel("theta")
axes[0].set_ylabel("P(theta)")
axes[0].legend()
save(fig, "coherent_formalisms.png")
