"""
Learning a multi-network representation from a dense tensor
===========================================================

The decomposition peels off one network component at a time.  Each
component starts rank-one and grows the edge that best explains what it
cannot yet fit, until the error or budget gate closes; the residual then
seeds the next component.
"""

import numpy as np

from mtnr.atl import AtlConfig, run_atl
from mtnr.data import gen_rank1_sum
from mtnr.metrics import rse
from mtnr.network import recover, recover_model

# Target: a sum of 8 random rank-1 tensors, the classic benchmark for
# structure learning (no single fixed topology matches it well).
truth = gen_rank1_sum((6, 6, 6, 6), 8, np.random.default_rng(42))

# A per-component parameter budget (gamma) below the dense size forces
# the fit to spread across several small networks instead of one big one.
model = run_atl(truth, AtlConfig(gamma=400.0), np.random.default_rng(0))

print(f"components: {len(model.components)}")
print(f"parameters: {model.param_count()} "
      f"(dense tensor has {truth.size})")
print(f"relative error: {rse(recover_model(model), truth):.2e}\n")

for k, comp in enumerate(model.components):
    edges = comp.ranks.edges() or "rank one"
    norm = float(np.linalg.norm(recover(comp)))
    print(f"component {k}: params={comp.param_count():4d}  "
          f"norm={norm:8.2f}  edges={edges}")
