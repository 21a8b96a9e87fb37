# %% [markdown]
# # How well conditioned is the linearized operator?
#
# Exhaustive restricted isometry constants of `A_z` for n=16 and s=2, and a
# Monte-Carlo look at how far noisy phases push `A_z x*` away from `e1`.

# %%
import numpy as np

import pocs

for m in (32, 64, 128):
    deltas = []
    for t in range(20):
        stream = pocs.RngStream(3, t, (m,))
        ens = pocs.SensingEnsemble.sample(stream, m, 16)
        x = pocs.sample_sparse_signal(stream.child(1), 16, 2)
        deltas.append(pocs.rip_of_linearized(ens, x, 2).delta)
    print(f"m={m:4d}: median delta_2 = {np.median(deltas):.3f}")

# %% [markdown]
# Enumerating supports gets expensive fast, so large problems are refused.

# %%
try:
    pocs.estimate_rip(np.zeros((2, 30)), 8)
except pocs.CombinatorialLimitError as exc:
    print(exc)

# %%
stream = pocs.RngStream(4)
ens = pocs.SensingEnsemble.sample(stream, 96, 16)
x = pocs.sample_sparse_signal(stream.child(1), 16, 2)
rep = pocs.validate_fidelity_bound(ens, x, tau=0.05, trials=500, rng=stream.child(2))
print(f"delta_hat={rep.delta_hat:.3f}  worst ratio {rep.max_ratio:.3f}  bound {rep.bound_ratio:.3f}  holds={rep.holds}")
