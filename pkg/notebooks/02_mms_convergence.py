# %% [markdown]
# # Convergence on a manufactured solution
#
# A travelling wave in density, velocity and temperature is imposed on a
# periodic domain.  Its residual in the Euler equations is injected as a
# source, so the discrete solution should approach it at the design order
# of the scheme.  The time step shrinks with `dx**2`, which keeps the
# forward-Euler error below the spatial error at second order.

# %%
import matplotlib.pyplot as plt
import numpy as np

from phieuler import run_mms_convergence
from phieuler.verification import MMS_MESHES

first = run_mms_convergence(order=1)
second = run_mms_convergence(order=2)

# %% [markdown]
# Observed rates between consecutive meshes:

# %%
for label, res in (("first order", first), ("MUSCL", second)):
    print(label)
    for name, rates in res.rates.items():
        print(f"  {name:4s} " + "  ".join(f"{r:.3f}" for r in rates))

# %%
h = 1.0 / np.asarray(MMS_MESHES, float)
fig, ax = plt.subplots(figsize=(5, 4))
for res, style in ((first, "o-"), (second, "s-")):
    for name in ("rho", "T"):
        ax.loglog(h, res.errors[name], style, label=f"order {res.order}, {name}")
ax.loglog(h, 0.5 * h / h[0] * first.errors["rho"][0], "k:", lw=1, label="slope 1")
ax.loglog(h, 0.5 * (h / h[0]) ** 2 * second.errors["rho"][0], "k--", lw=1, label="slope 2")
ax.set_xlabel("dx")
ax.set_ylabel("normalized L2 error")
ax.legend(fontsize=7)
plt.show()
