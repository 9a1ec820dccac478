"""Garrison-Wong phase distribution of the vacuum against the flat Pegg-Barnett one."""
import math

import matplotlib.pyplot as plt

from _common import save
from qphase import gwphase as gw
from qphase import states

fig, ax = plt.subplots(figsize=(6, 3.6))
for n0 in (0, 1, 3):
    d = gw.gw_distribution(states.number(n0), theta0=-math.pi, M=1024)
    ax.plot(d.theta, d.values, label=f"|{n0}>")
    print(f"|{n0}>: raw integral {d.meta['raw_integral']:.9f}, interior max/min {gw.interior_ratio(d):.2f}")
ax.axhline(1 / (2 * math.pi), ls="--", color="k", lw=0.7, label="Pegg-Barnett")
ax.set_xlabel("theta")
ax.set_ylabel("P_GW(theta)")
ax.legend()
save(fig, "gw_vacuum.png")
