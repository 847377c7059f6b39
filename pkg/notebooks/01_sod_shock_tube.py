# %% [markdown]
# # Sod shock tube against the exact solution
#
# The ideal gas is the Van der Waals model with `a = b = 0`, so the solver
# runs unchanged while the exact Riemann solution provides an oracle.  We
# store temperature, update it with the secant-corrected linearization and
# compare with the plain linearization ("simplified" mode), which drops the
# conservation correction.

# %%
import matplotlib.pyplot as plt
import numpy as np

from phieuler import exact_riemann_ideal, load_case, run

case = load_case("sod", n_cells=400)
exact = exact_riemann_ideal(case.left, case.right, case.eos.gamma)
print(f"P* = {exact.p_star:.6f}, u* = {exact.u_star:.6f}, "
      f"shock speed = {exact.right_speeds[0]:.6f}")

# %% [markdown]
# Both variants share the mesh, CFL number and final time.

# %%
results = {mode: run(case.with_overrides(mode=mode)) for mode in ("secant", "simplified")}
for mode, r in results.items():
    print(f"{mode:10s} steps {r.n_steps:4d}  imbalance {r.imbalance:+.3e}")

# %% [markdown]
# The secant update keeps the total-energy imbalance at round-off.  The
# simplified update leaks energy at every step, which shows up as a shock
# that travels at the wrong speed.

# %%
x = results["secant"].grid.centers
rho_ex, u_ex, P_ex = exact.profile(x, results["secant"].t, case.x_interface)
fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
for ax, key, ref in zip(axes, ("rho", "u", "P"), (rho_ex, u_ex, P_ex)):
    ax.plot(x, ref, "k-", lw=1, label="exact")
    for mode, r in results.items():
        ax.plot(x, r.profiles()[key], lw=1, label=mode)
    ax.set_title(key)
    ax.set_xlabel("x")
axes[0].legend()
fig.tight_layout()

# %% [markdown]
# Zoom on the shock: the simplified profile sits visibly off the exact jump.

# %%
shock_x = case.x_interface + exact.right_speeds[0] * results["secant"].t
window = np.abs(x - shock_x) < 0.05
fig, ax = plt.subplots(figsize=(5, 3.5))
ax.plot(x[window], rho_ex[window], "k-", label="exact")
for mode, r in results.items():
    ax.plot(x[window], r.profiles()["rho"][window], ".-", label=mode)
ax.legend()
ax.set_xlabel("x")
ax.set_ylabel("rho")
plt.show()
