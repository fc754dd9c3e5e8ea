"""Which part of the auxiliary stream's distribution does the KL term use?

Each dark_mode keeps a different label subset in the consistency sum:
``full`` keeps every label, ``gold_only`` only the reference token,
``dark_only`` everything but the reference, and ``rank:a-b`` the non-gold
labels ranked a through b by the primary stream.
"""

import numpy as np

from mvnmt.analysis import read_csv, run_sweep
from mvnmt.config import RunConfig
from mvnmt.objectives import build_dark_mask

p = np.array([[0.5, 0.2, 0.15, 0.1, 0.05]])
for mode in ("full", "gold_only", "dark_only", (1, 2), (3, 0)):
    print(f"{str(mode):>10}: {build_dark_mask(p, np.array([0]), mode)[0].astype(int)}")

base = RunConfig().with_overrides({
    "model": {"d_model": 32, "d_ffn": 64, "heads": 2},
    "train": {"max_updates": 150, "log_every": 0},
    "data": {"train_count": 500, "test_count": 50},
})
# 150 updates only shows the plumbing; accuracies this early do not rank the modes.
result = run_sweep("dark_mode", ["full", "gold_only", "dark_only", "rank:1-5"], base)
result.to_csv("dark_mode.csv")
for row in read_csv("dark_mode.csv"):
    print(row["value"], row["view"], row["metric"])
