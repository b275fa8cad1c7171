# %% [markdown]
# # Fuzzy indices
#
# XB and KWON2 score a fuzzy partition directly. WP is WI computed on
# membership-weighted representatives instead of the nearest centroid.

# %%
import numpy as np

from bcvi import MixtureComponent, MixtureSpec, RunOptions, best_of_restarts, generate_mixture
from bcvi.clustering import HardClustering, SoftClustering
from bcvi.cvi_hard import wi_series
from bcvi.cvi_soft import FuzzyRepresentativeConfig, kwon2_series, wp_series, xb_series

comps = tuple(MixtureComponent(1 / 3, c, (0.6, 0.6)) for c in ((0, 0), (9, 0), (4, 8)))
data = generate_mixture(MixtureSpec(comps, 150, 5))
K = 6
fits = {k: best_of_restarts("fcm", data, k, 2.0, RunOptions(restarts=4, seed=0)) for k in range(2, K + 2)}
for s in (xb_series(data, fits, K), kwon2_series(data, fits, K), wp_series(data, fits)):
    print(s.index_name, np.round(s.values, 4), "best k =", s.best())

# %% [markdown]
# With 0/1 memberships WP and WI agree to rounding, whatever gamma is.

# %%
rng = np.random.default_rng(0)
hard, soft = {}, {}
for k in range(2, K + 2):
    a = np.concatenate([np.arange(1, k + 1), rng.integers(1, k + 1, data.n - k)])
    hard[k] = HardClustering.from_assignments(data, a)
    soft[k] = SoftClustering.crisp(data, a)
for gamma in (0.5, 2.0, 8.0):
    gap = np.abs(wp_series(data, soft, FuzzyRepresentativeConfig(gamma)).values - wi_series(data, hard).values)
    print(gamma, gap.max())
