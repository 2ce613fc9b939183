"""Multi-tensor-network decomposition and completion.

A tensor is approximated by a sum of tensor-network components, each with its
own learned topology.  Subpackages:

- :mod:`mtnr.dense`      dense ops under the little-endian index convention
- :mod:`mtnr.network`    network components, recovery, edge growth
- :mod:`mtnr.algebra`    arithmetic directly on network factors
- :mod:`mtnr.atl`        adaptive topology learning (ALS + edge selection)
- :mod:`mtnr.completion` completion solvers (ALS and ADMM variants)
- :mod:`mtnr.data`       synthetic generators, masks, image tensorization
- :mod:`mtnr.metrics`    RSE / PSNR / SSIM
- :mod:`mtnr.io`         binary tensor/model/mask formats and PNG helpers
"""

__version__ = "0.1.0"
