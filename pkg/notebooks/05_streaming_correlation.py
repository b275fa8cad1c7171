# %% [markdown]
# # Pair-distance correlation without pair buffers
#
# The correlation between d(x_i, x_j) and d(c_i, c_j) over all pairs is
# accumulated in one pass, so memory stays flat in n.

# %%
import time
import tracemalloc

import numpy as np
from scipy.spatial.distance import pdist

from bcvi import baseline_dispersion, pair_distance_correlation

rng = np.random.default_rng(0)
x = rng.normal(size=(300, 3))
reps = np.round(x)
print(pair_distance_correlation(x, reps).value, np.corrcoef(pdist(x), pdist(reps))[0, 1])

# %%
x = rng.normal(size=(4000, 2))
reps = np.round(x)
tracemalloc.start()
t0 = time.perf_counter()
c = pair_distance_correlation(x, reps)
print(c.pair_count, round(c.value, 6), f"{time.perf_counter() - t0:.2f}s",
      f"peak {tracemalloc.get_traced_memory()[1] / 1e3:.1f} kB")
tracemalloc.stop()

# %% [markdown]
# The baseline the first profile entry is measured against.

# %%
print(baseline_dispersion(x))
