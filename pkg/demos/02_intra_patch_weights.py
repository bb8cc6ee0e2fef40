# %% [markdown]
# # What the intra-patch weights do
#
# MK-NLM scores each pixel of a patch by how far it sits from the others.
# An isolated outlier gets a small weight, so it barely moves the patch
# distance.

# %%
import numpy as np

from mknlm import gaussian_kernel, intra_patch_weights, mk_distance, patch_distance

flat = np.full(9, 10.0)
spiked = flat.copy()
spiked[4] = 250.0
print("weights, flat patch:  ", np.round(intra_patch_weights(flat), 4))
print("weights, spiked patch:", np.round(intra_patch_weights(spiked), 4))

# %% [markdown]
# Compare the two distances between the flat patch and the spiked one.
# Plain NLM sees the full 240-level jump at the center. The modified
# distance discounts it through the tiny weight of the spike.

# %%
kernel = gaussian_kernel(3, 1.0)
plain = patch_distance(flat, spiked, kernel)
robust = mk_distance(flat, spiked, intra_patch_weights(flat), intra_patch_weights(spiked), kernel)
print(f"plain distance {plain:.1f}, modified distance {robust:.3f}")

# %% [markdown]
# Shifting a patch by a constant leaves its weights unchanged, because they
# only depend on pairwise differences.

# %%
print(np.allclose(intra_patch_weights(spiked + 37.0), intra_patch_weights(spiked)))
