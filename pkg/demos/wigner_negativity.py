"""Negative Wigner phase distribution of (|0> + |2>)/sqrt 2 against its Husimi counterpart."""
import math

import matplotlib.pyplot as plt

from _common import save
from qphase import phasedist as pd
from qphase import states

st = states.from_amplitudes([1, 0, 1])
fig, ax = plt.subplots(figsize=(6, 3.6))
for s in (0, -0.5, -1):
    d = pd.sparam_distribution(st, s, theta0=-math.pi, M=512)
    ax.plot(d.theta, d.values, label=f"s = {s}")
    print(f"s={s:5}: min P = {d.values.min():+.6f}")
print(f"expected Wigner minimum (1 - sqrt 2)/(2 pi) = {(1 - math.sqrt(2)) / (2 * math.pi):+.6f}")
ax.axhline(0, color="k", lw=0.5)
ax.set_xlabel("theta")
ax.set_ylabel("P(theta)")
ax.legend()
save(fig, "wigner_negativity.png")
