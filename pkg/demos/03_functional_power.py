# %% [markdown]
# # Power curves for curve-valued covariates
# The three functional designs use paths sampled on a grid of [0, 1] and
# the discretized L2 distance. The printed CSV can go straight to a plot.

# %%
from psidep.simlab import SimSetting, power_curve

lambdas = [0.0, 0.25, 0.5, 0.75, 1.0]
for kind in ("sin", "max", "mixture", "degree"):
    curve = power_curve(SimSetting(kind, 100, m=100), lambdas, reps=200, seed=0, workers=4)
    print(kind, " ".join(f"{r:.2f}" for r in curve.rates))

# %%
print(curve.to_csv())
