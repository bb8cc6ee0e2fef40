# %% [markdown]
# # A small benchmark from Python
#
# The same harness the `mknlm bench` command uses, driven directly. Each
# (image, level) cell gets one noisy instance shared by all filters, and
# `h` is picked per cell by a grid search on RMSE.

# %%
import tempfile

from mknlm.bench import ExperimentConfig, FilterSetup, run_experiment

cfg = ExperimentConfig(
    images=[("gradient", "synthetic:gradient"), ("checkerboard", "synthetic:checkerboard")],
    filters=[
        FilterSetup("nlm", kind="nlm", search_radius=4, calibrate=True),
        FilterSetup("mknlm", kind="mknlm", search_radius=4, calibrate=True),
    ],
    noise_levels=(0.10, 0.20),
    image_size=32,
    output_dir=tempfile.mkdtemp(),
)
table = run_experiment(cfg, persist=False)

# %% [markdown]
# The markdown view bolds the best score in each cell.

# %%
print(table.to_markdown())
for (image_id, level, fid), extra in sorted(table.extras.items()):
    print(f"{image_id:12s} {level:.2f} {fid:6s} h={extra['h']:.2f} (h/sigma {extra['h_factor']})")
