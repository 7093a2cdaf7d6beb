"""End-to-end run of the ``blockreg`` command line tool.

Run with ``python demos/07_cli_pipeline.py``. The same commands work from a
shell once the package is installed, e.g. ``blockreg simulate --out data``.
"""
# %%
import os
import tempfile

from blockreg.cli import main

work = tempfile.mkdtemp(prefix="blockreg_")
data = os.path.join(work, "data")
main(["simulate", "--seed", "3", "--rho", "0.1", "--out", data])
print(sorted(os.listdir(data)))

# %%
# Fit the block model (short schedule), splitting the markers into segments
# of 100 the way long chromosomes would be handled.
fit_dir = os.path.join(work, "fit")
main(["fit", "--data", data, "--truth", os.path.join(data, "truth.tsv"), "--seed", "1",
      "--burn-in", "300", "--iters", "1500", "--segment-size", "100", "--out", fit_dir])
with open(os.path.join(fit_dir, "manifest.txt")) as fh:
    print(fh.read())

# %%
# Baselines write the same file layout; Wald tests write wald.tsv.
for cmd in ("ridge", "lasso", "wald"):
    out = os.path.join(work, cmd)
    main([cmd, "--data", data, "--truth", os.path.join(data, "truth.tsv"), "--out", out])
    with open(os.path.join(out, "manifest.txt")) as fh:
        auprc = [line for line in fh if line.startswith("auprc=")][0].strip()
    print(f"{cmd:<6} {auprc}")
print("outputs in", work)
