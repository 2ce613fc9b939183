"""Synthetic tensor generators, missing-entry masks, and image reshaping.

Masks are boolean arrays with ``True`` marking an observed entry.  The
missing patterns mirror the usual completion benchmarks: independent entries
(MAR), whole rows or columns of a designated pair of spatial modes (RMAR /
CMAR), and an even mix of both (RCMAR).
"""

from dataclasses import dataclass, field

import numpy as np

_PATTERN_KINDS = ("mar", "rmar", "cmar", "rcmar")


def gen_rank1_sum(dims, terms, rng):
    """Sum of ``terms`` outer products of i.i.d. standard-normal vectors."""
    if terms < 1:
        raise ValueError(f"need at least one term, got {terms}")
    out = np.zeros(tuple(dims))
    for _ in range(terms):
        piece = rng.standard_normal(dims[0])
        for d in dims[1:]:
            piece = np.tensordot(piece, rng.standard_normal(d), axes=0)
        out += piece
    return out


def gen_tt(dims, ranks, rng):
    """Contraction of a tensor-train chain with standard-normal cores.

    ``ranks`` are the N-1 internal bond sizes; the boundary bonds are 1.
    """
    dims = tuple(dims)
    ranks = tuple(ranks)
    if len(ranks) != len(dims) - 1:
        raise ValueError(
            f"need {len(dims) - 1} bond sizes for order {len(dims)}, "
            f"got {len(ranks)}")
    if any(r < 1 for r in ranks):
        raise ValueError(f"bond sizes must be >= 1, got {ranks}")
    bonds = (1,) + ranks + (1,)
    out = rng.standard_normal((bonds[0], dims[0], bonds[1]))
    for k in range(1, len(dims)):
        core = rng.standard_normal((bonds[k], dims[k], bonds[k + 1]))
        out = np.tensordot(out, core, axes=([out.ndim - 1], [0]))
    return out.reshape(dims)


@dataclass(frozen=True)
class MissingPattern:
    """Which entries to hide: kind, missing rate, and (for the row/column
    kinds) the two modes spanning the spatial view whose rows/columns are
    struck."""

    kind: str
    rate: float
    seed: int = 0
    modes: tuple = field(default=(0, 1))

    def validate(self, dims):
        if self.kind not in _PATTERN_KINDS:
            raise ValueError(
                f"unknown pattern {self.kind!r}, expected one of "
                f"{_PATTERN_KINDS}")
        if not 0 <= self.rate < 1:
            raise ValueError(f"missing rate must be in [0, 1), got {self.rate}")
        if self.kind != "mar":
            i, j = self.modes
            if not (0 <= i < len(dims) and 0 <= j < len(dims) and i != j):
                raise ValueError(
                    f"spatial modes {self.modes} invalid for order {len(dims)}")


def gen_mask(dims, pattern):
    """Boolean observation mask for ``dims`` under the given pattern.

    MAR hides exactly ``floor(rate * total)`` entries drawn without
    replacement.  RMAR/CMAR hide ``round(rate * extent)`` complete
    hyper-rows/-columns of the designated spatial modes; RCMAR splits the
    rate evenly between rows and columns, counting overlap once.
    """
    dims = tuple(dims)
    pattern.validate(dims)
    rng = np.random.default_rng(pattern.seed)
    mask = np.ones(dims, dtype=bool)
    if pattern.kind == "mar":
        total = int(np.prod(dims))
        hidden = rng.choice(total, size=int(pattern.rate * total),
                            replace=False)
        flat = mask.reshape(-1, order="F")
        flat[hidden] = False
        return flat.reshape(dims, order="F")
    row_mode, col_mode = pattern.modes
    if pattern.kind in ("rmar", "rcmar"):
        rate = pattern.rate if pattern.kind == "rmar" else pattern.rate / 2
        struck = rng.choice(dims[row_mode],
                            size=round(rate * dims[row_mode]), replace=False)
        index = [slice(None)] * len(dims)
        index[row_mode] = struck
        mask[tuple(index)] = False
    if pattern.kind in ("cmar", "rcmar"):
        rate = pattern.rate if pattern.kind == "cmar" else pattern.rate / 2
        struck = rng.choice(dims[col_mode],
                            size=round(rate * dims[col_mode]), replace=False)
        index = [slice(None)] * len(dims)
        index[col_mode] = struck
        mask[tuple(index)] = False
    return mask


def tensorize_image(pixels, target_dims):
    """Refold an image into ``target_dims`` along the first-index-fastest
    flattening; lossless and inverted by :func:`detensorize_image`."""
    pixels = np.asarray(pixels)
    target_dims = tuple(target_dims)
    if pixels.size != int(np.prod(target_dims)):
        raise ValueError(
            f"cannot reshape {pixels.shape} into {target_dims}")
    return pixels.reshape(target_dims, order="F")


def detensorize_image(t, image_shape):
    """Inverse of :func:`tensorize_image`."""
    t = np.asarray(t)
    image_shape = tuple(image_shape)
    if t.size != int(np.prod(image_shape)):
        raise ValueError(f"cannot reshape {t.shape} into {image_shape}")
    return t.reshape(image_shape, order="F")
