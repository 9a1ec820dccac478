"""Two-mode squeezed vacuum: cast phase-sum distribution and the phase correlation C12."""
import math

import matplotlib.pyplot as plt
import numpy as np

from _common import save
from qphase import states
from qphase import twomode as tm

fig, axes = plt.subplots(1, 2, figsize=(11, 3.8))
for r in (0.25, 0.5, 1.0):
    st = states.two_mode_squeezed_vacuum(r, 0.0)
    p = tm.sum_marginal(st, M=512)
    axes[0].plot(p.theta, p.values, label=f"r = {r}")
axes[0].set_xlabel("theta_+ (mod 2 pi)")
axes[0].set_ylabel("P(theta_+)")
axes[0].legend()

rs = np.linspace(0.01, 3, 120)
c12 = [tm.tmsv_closed_forms(r)["C12"] for r in rs]
axes[1].plot(rs, c12)
axes[1].axhline(-math.pi ** 2 / 3, ls="--", color="k", lw=0.7)
axes[1].set_xlabel("r")
axes[1].set_ylabel("C12")
for r in (0.5, 2.0):
    print(f"r={r}: C12 series {tm.tmsv_c12_series(r):.12f}  closed {tm.tmsv_closed_forms(r)['C12']:.12f}")
save(fig, "tmsv_correlation.png")
