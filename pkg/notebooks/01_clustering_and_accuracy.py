# %% [markdown]
# # Clustering a Gaussian mixture
#
# Draw three blobs, fit K-means and FCM for a few k and score the
# partitions against the generating labels.

# %%
import numpy as np

from bcvi import MixtureComponent, MixtureSpec, RunOptions, best_of_restarts, clustering_accuracy, generate_mixture

spec = MixtureSpec(
    tuple(MixtureComponent(1 / 3, c, (0.7, 0.7)) for c in ((0, 0), (8, 0), (4, 7))),
    total_n=240, seed=0, name="three-blobs",
)
data = generate_mixture(spec)
print(data.n, data.p, np.bincount(data.labels)[1:])

# %% [markdown]
# Best of ten restarts per k. The objective falls with k, so it says
# nothing about the right k on its own.

# %%
opts = RunOptions(restarts=10, seed=1)
for k in range(2, 6):
    km = best_of_restarts("kmeans", data, k, opts=opts)
    print(k, round(km.objective, 2), round(clustering_accuracy(data.labels, km.assignments), 3))

# %%
fcm = best_of_restarts("fcm", data, 3, 2.0, opts)
print(np.round(fcm.centroids, 2))
print("crisp accuracy", clustering_accuracy(data.labels, fcm.hard_assignments()))
# membership rows sum to one
print(np.abs(fcm.membership.sum(axis=1) - 1).max())
