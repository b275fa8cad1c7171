# %% [markdown]
# # From an index series to a posterior over k
#
# The series becomes ratios r_k that sum to one. A Dirichlet (or
# generalized Dirichlet) prior over k is updated with n * r.

# %%
import numpy as np

from bcvi import (CviSeries, Direction, DirichletPrior, GDPrior, MixtureComponent, MixtureSpec, PipelineConfig,
                  compute_ratios, dirichlet_posterior, gd_posterior, profile_alpha, run_pipeline)
from bcvi.pipeline import plot_rows

series = CviSeries("GI", [0.4, 1.6, 0.9, 0.2, 0.5], Direction.A)
r = compute_ratios(series, n=100)
print(np.round(r.r, 4))

flat = dirichlet_posterior(DirichletPrior(np.ones(5)), r)
print(np.round(flat.mean, 4), flat.ranking)

# %% [markdown]
# A GD prior whose beta chain matches the Dirichlet gives the same means.

# %%
a = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
beta = np.cumsum(a[::-1])[::-1][1:]
gd = gd_posterior(GDPrior(a[:-1], beta), r)
print(np.abs(gd.mean - dirichlet_posterior(DirichletPrior(a), r).mean).max())

# %% [markdown]
# Two groups of two blobs plus one far blob. WI on its own prefers 5,
# a prior leaning towards small k recovers the coarse grouping.

# %%
centres = [(0, 0), (6, 0), (40, 0), (46, 0), (20, 35)]
mix = MixtureSpec(tuple(MixtureComponent(0.2, c, (0.6, 0.6)) for c in centres), 500, 7)
for profile in ("flat", "small"):
    res = run_pipeline(PipelineConfig(mixture=mix, K=10, index="wi", seed=1, alpha_profile=profile))
    print(profile, "argmax k =", res.posterior.ranking[0])
print(np.round(profile_alpha("small", 10, 500).alpha, 1))

# %%
for k, m, lo, hi in plot_rows(res.report):
    print(f"{k:>2} {m:.3f} [{lo:.3f}, {hi:.3f}]")
