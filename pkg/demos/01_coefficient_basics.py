# %% [markdown]
# # The coefficient on a toy sample
# Each point looks at its nearest neighbour and we tabulate the pair
# (own label, neighbour's label). Cramér's V of that table is psi_hat.

# %%
import numpy as np

from psidep import PointCloud, build_neighbor_graph, contingency, estimate_psi, psi_hat

x = PointCloud.euclidean([0.0, 1.0, 3.0, 6.0, 10.0])
g = build_neighbor_graph(x)
print("nearest neighbours:", g.nbr)          # [1 0 1 2 3]
print("W_n, W_n', L_n:", g.w_n, g.w_n_prime, g.l_n)

# %%
y = ["red", "blue", "red", "blue", "blue"]
c = contingency(y, g)
print(c.counts)                              # [[0 2] [2 1]]
print("psi_hat =", psi_hat(c))               # 4/9

# %% [markdown]
# Renaming the labels changes nothing, not even the last bit.

# %%
assert psi_hat(contingency(["b", "r", "b", "r", "r"], g)) == psi_hat(c)

# %% [markdown]
# Two well separated clusters with one label each give psi_hat = 1, and
# labels unrelated to position sit near 0.

# %%
rng = np.random.default_rng(0)
pts = np.vstack([rng.normal(0, 0.3, (200, 2)), rng.normal(5, 0.3, (200, 2))])
print(estimate_psi(PointCloud.euclidean(pts), [0] * 200 + [1] * 200).psi_hat)
print(estimate_psi(PointCloud.euclidean(pts), rng.integers(0, 3, 400)).psi_hat)
