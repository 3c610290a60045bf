"""
Does the switched system drift to the boundary?
===============================================

The quantity V = x + y + 1/x + 1/y is at least 4 and grows when either
species gets very rare or very abundant.  Tracking it along many runs gives
evidence, not proof, about whether the populations eventually leave every
compact region.
"""

from pdmpswitch import DEMO_SYSTEM, LVState
from pdmpswitch.experiments import transience_mc

rep = transience_mc(DEMO_SYSTEM, LVState.from_xy(1.1, 1.0), horizon=1e4, n=40, root_seed=11)
for t, m in zip(rep.checkpoints, rep.median_log10_v):
    print(f"t={t:8.1f}  median log10 V = {m:8.2f}")

d = rep.to_dict()
print(d["label"], "- growth over the window (decades):", round(d["growth_ratio_log10"], 1))
print("fraction of runs trending up:", d["fraction_trending_up"])
