# %% [markdown]
# # Hard indices over k = 2..K
#
# DB and STR read one partition at a time. WI compares the
# pair-distance correlation profile across neighbouring k.

# %%
import numpy as np

from bcvi import MixtureComponent, MixtureSpec, RunOptions, best_of_restarts, generate_mixture
from bcvi.cvi_hard import correlation_index_from_profile, db_series, str_series, wi_series

comps = tuple(MixtureComponent(0.25, c, (0.6, 0.6)) for c in ((0, 0), (7, 0), (0, 7), (7, 7)))
data = generate_mixture(MixtureSpec(comps, 200, 3))
K = 7
fits = {k: best_of_restarts("kmeans", data, k, opts=RunOptions(restarts=5, seed=2)) for k in range(2, K + 2)}

# %%
for s in (db_series(data, fits, K), str_series(data, fits), wi_series(data, fits)):
    print(s.index_name, s.direction.name, np.round(s.values, 3), "best k =", s.best())

# %% [markdown]
# The WI rule on a toy profile. An increase followed by a flat step gives
# an infinite first term, which gets replaced by the largest finite one.

# %%
s = correlation_index_from_profile([0.3, 0.9, 0.8, 0.85])
print(s.meta["case"], np.round(s.values, 6))
