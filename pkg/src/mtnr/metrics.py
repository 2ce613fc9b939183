"""Recovery-quality metrics: relative error, peak signal-to-noise ratio, and
a global (single-window) structural similarity index."""

import numpy as np

from . import dense

PSNR_CAP = 99.0


def rse(x, truth):
    """Relative error ``|x - truth| / |truth|`` in the Frobenius norm."""
    x = np.asarray(x, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if x.shape != truth.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {truth.shape}")
    denom = dense.frob(truth)
    if denom == 0.0:
        raise ValueError("reference tensor has zero norm")
    return dense.frob(x - truth) / denom


def psnr(x, truth):
    """Peak signal-to-noise ratio in dB, capped at 99 for (near-)exact
    recovery so downstream tables never carry infinities."""
    x = np.asarray(x, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if x.shape != truth.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {truth.shape}")
    err = dense.frob(x - truth) ** 2
    if err == 0.0:
        return PSNR_CAP
    peak = float(truth.max())
    value = 10.0 * np.log10(peak ** 2 * truth.size / err)
    return min(value, PSNR_CAP)


def ssim(x, truth):
    """Structural similarity from global image statistics.

    Uses one window spanning the whole image (no sliding window) with the
    conventional constants ``c1 = (0.01 L)^2`` and ``c2 = (0.03 L)^2`` where
    ``L`` is the dynamic range of ``truth`` (1.0 when constant).  A 3-D input
    is treated as channels along the last axis and averaged.
    """
    x = np.asarray(x, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if x.shape != truth.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {truth.shape}")
    if x.ndim == 3:
        return float(np.mean([ssim(x[..., c], truth[..., c])
                              for c in range(x.shape[2])]))
    if x.ndim != 2:
        raise ValueError(f"expected a 2-D view or channel stack, got "
                         f"{x.ndim}-D")
    span = float(np.ptp(truth)) or 1.0
    c1 = (0.01 * span) ** 2
    c2 = (0.03 * span) ** 2
    mx, my = x.mean(), truth.mean()
    vx, vy = x.var(), truth.var()
    cov = ((x - mx) * (truth - my)).mean()
    return float((2 * mx * my + c1) * (2 * cov + c2) /
                 ((mx ** 2 + my ** 2 + c1) * (vx + vy + c2)))
