"""
File formats: tensors, masks, and fitted models
===============================================

Everything the experiment runner writes can be produced and read back
directly.  All three formats are little-endian binary with a magic tag.
"""

import pathlib
import tempfile

import numpy as np

from mtnr import io
from mtnr.data import MissingPattern, gen_mask
from mtnr.network import TnComponent, grow_edge, recover_model, MtnrModel

workdir = pathlib.Path(tempfile.mkdtemp(prefix="mtnr-io-"))
rng = np.random.default_rng(11)

# .dnt holds one dense float64 tensor.
t = rng.standard_normal((3, 4, 5))
io.write_dnt(workdir / "t.dnt", t)
print("dnt round-trip exact:",
      bool(np.array_equal(io.read_dnt(workdir / "t.dnt"), t)))

# .msk holds a boolean mask, bit-packed.
mask = gen_mask((3, 4, 5), MissingPattern("mar", 0.4, seed=2))
io.write_msk(workdir / "m.msk", mask)
print("msk round-trip exact:",
      bool(np.array_equal(io.read_msk(workdir / "m.msk"), mask)))

# .mtnr holds a whole model: every component with its rank table.
c = TnComponent.rank_one((3, 4, 5), max_connections=3, rng=rng)
c = grow_edge(c, 0, 2, rng=rng)
model = MtnrModel([c], (3, 4, 5))
io.write_mtnr(workdir / "m.mtnr", model)
back = io.read_mtnr(workdir / "m.mtnr")
print("mtnr round-trip exact:",
      bool(np.array_equal(recover_model(back), recover_model(model))))

# Corrupt files fail loudly with FormatError, not silently.
(workdir / "bad.dnt").write_bytes(b"not a tensor")
try:
    io.read_dnt(workdir / "bad.dnt")
except io.FormatError as exc:
    print("corrupt file rejected:", exc)
