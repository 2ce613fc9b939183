r"""Dense tensor operations under the little-endian multi-index convention.

A dense tensor of order N is a plain ``numpy.ndarray`` with ``ndim == N``.
Whenever a group of modes is merged into a single index (vectorization,
matricization, Kronecker-style products), the merge is *little-endian*: the
first mode of the group varies fastest, i.e.

    flat(i_1, ..., i_N) = i_1 + i_2*I_1 + i_3*I_1*I_2 + ...     (0-based)

which is exactly numpy's ``order='F'`` layout.  All functions here are pure:
they never mutate their inputs.  Modes are 0-based throughout.
"""

import math

import numpy as np


def _check_mode(t, mode):
    if not 0 <= mode < t.ndim:
        raise ValueError(f"mode {mode} out of range for order-{t.ndim} tensor")


def frob(a):
    """Frobenius norm of an array of any order."""
    return float(np.linalg.norm(np.asarray(a).ravel()))


# ---------------------------------------------------------------------------
# reshapes between tensors, vectors and matrices
# ---------------------------------------------------------------------------

def vectorize(t):
    """Flatten a tensor to a vector in little-endian (first-mode-fastest) order."""
    return np.reshape(t, -1, order="F")


def fold(v, dims):
    """Inverse of :func:`vectorize`: rebuild a tensor of shape ``dims``.

    Raises ValueError if ``len(v)`` does not equal ``prod(dims)``.
    """
    v = np.asarray(v)
    if v.size != math.prod(dims):
        raise ValueError(f"cannot fold {v.size} entries into shape {tuple(dims)}")
    return np.reshape(v, dims, order="F")


def matricize_mode(t, mode):
    """Mode-``mode`` matricization: rows are that mode, columns merge the rest.

    The column index is the little-endian merge of the remaining modes in
    ascending order.  Returns a ``(I_mode, prod(other dims))`` matrix.
    """
    t = np.asarray(t)
    _check_mode(t, mode)
    return np.reshape(np.moveaxis(t, mode, 0), (t.shape[mode], -1), order="F")


def fold_mode(m, mode, dims):
    """Inverse of :func:`matricize_mode` for a tensor of shape ``dims``."""
    m = np.asarray(m)
    dims = tuple(dims)
    rest = dims[:mode] + dims[mode + 1:]
    if m.shape != (dims[mode], math.prod(rest)):
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims} at mode {mode}")
    return np.moveaxis(np.reshape(m, (dims[mode],) + rest, order="F"), 0, mode)


def matricize_prefix(t, k):
    """k-matricization: merge the first ``k`` modes into rows, the rest into columns.

    Both merges are little-endian.  Requires ``1 <= k < t.ndim``.
    """
    t = np.asarray(t)
    if not 1 <= k < t.ndim:
        raise ValueError(f"prefix length {k} invalid for order-{t.ndim} tensor")
    return np.reshape(t, (math.prod(t.shape[:k]), -1), order="F")


def fold_prefix(m, k, dims):
    """Inverse of :func:`matricize_prefix` for a tensor of shape ``dims``."""
    m = np.asarray(m)
    dims = tuple(dims)
    if m.shape != (math.prod(dims[:k]), math.prod(dims[k:])):
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims} split at {k}")
    return np.reshape(m, dims, order="F")


def matricize_mode_pair(t, i, j):
    """Mode-(i, j) matricization: rows merge modes ``i`` and ``j`` (i fastest).

    Requires ``i < j``.  Columns merge the remaining modes in ascending order,
    little-endian.
    """
    t = np.asarray(t)
    _check_mode(t, i)
    _check_mode(t, j)
    if not i < j:
        raise ValueError(f"need i < j, got ({i}, {j})")
    moved = np.moveaxis(t, (i, j), (0, 1))
    return np.reshape(moved, (t.shape[i] * t.shape[j], -1), order="F")


def fold_mode_pair(m, i, j, dims):
    """Inverse of :func:`matricize_mode_pair` for a tensor of shape ``dims``."""
    m = np.asarray(m)
    dims = tuple(dims)
    rest = tuple(d for k, d in enumerate(dims) if k not in (i, j))
    if i >= j:
        raise ValueError(f"need i < j, got ({i}, {j})")
    if m.shape != (dims[i] * dims[j], math.prod(rest)):
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims} at modes ({i}, {j})")
    moved = np.reshape(m, (dims[i], dims[j]) + rest, order="F")
    return np.moveaxis(moved, (0, 1), (i, j))


# ---------------------------------------------------------------------------
# element-wise and product operations
# ---------------------------------------------------------------------------

def hadamard(a, b):
    """Element-wise product of two same-shape tensors."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return a * b


def kronecker(a, b):
    """Mode-wise Kronecker product of two same-order tensors.

    Mode k of the result has size ``I_k * J_k``; the merged index runs over
    ``a``'s index fastest:  C[..., i_k + j_k*I_k, ...] = A[i] * B[j].
    (For matrices this is ``np.kron(b, a)``.)
    """
    a, b = np.asarray(a), np.asarray(b)
    if a.ndim != b.ndim:
        raise ValueError(f"order mismatch {a.ndim} vs {b.ndim}")
    return np.kron(b, a)


def khatri_rao_mode(a, b, mode):
    """Mode-``mode`` Khatri-Rao product: Kronecker on every mode except ``mode``.

    Requires ``a.shape[mode] == b.shape[mode]``; that mode is kept (the two
    tensors are paired slice-by-slice along it) while every other mode k is
    merged to size ``I_k * J_k`` with ``a``'s index fastest.
    """
    a, b = np.asarray(a), np.asarray(b)
    if a.ndim != b.ndim:
        raise ValueError(f"order mismatch {a.ndim} vs {b.ndim}")
    n = a.ndim
    _check_mode(a, mode)
    if a.shape[mode] != b.shape[mode]:
        raise ValueError(
            f"shared mode {mode} differs: {a.shape[mode]} vs {b.shape[mode]}")
    sub_a = list(range(n))
    sub_b = [mode if k == mode else n + k for k in range(n)]
    out = []
    for k in range(n):
        # b's axis before a's axis: the C-order merge then runs a fastest
        out.extend([k] if k == mode else [n + k, k])
    merged = np.einsum(a, sub_a, b, sub_b, out)
    shape = [a.shape[k] if k == mode else a.shape[k] * b.shape[k] for k in range(n)]
    return merged.reshape(shape)


def outer(a, b):
    """Outer product: order adds, C[i_1..i_N, j_1..j_M] = A[i] * B[j]."""
    return np.tensordot(np.asarray(a), np.asarray(b), axes=0)


def mode_n_product(t, matrix, mode):
    """Multiply ``matrix`` (J x I_mode) into ``t`` along ``mode``.

    Result keeps the mode order of ``t`` with size J at ``mode``.
    """
    t, matrix = np.asarray(t), np.asarray(matrix)
    _check_mode(t, mode)
    if matrix.ndim != 2 or matrix.shape[1] != t.shape[mode]:
        raise ValueError(
            f"matrix shape {matrix.shape} does not act on mode {mode} of size {t.shape[mode]}")
    return np.moveaxis(np.tensordot(t, matrix, axes=([mode], [1])), -1, mode)


def contract(a, b, pairs):
    """Contract ``a`` and ``b`` over the given ``(mode_of_a, mode_of_b)`` pairs.

    Free modes of ``a`` (ascending) come first in the result, then free modes
    of ``b``.  An empty pair list gives the outer product; contracting all
    modes of both gives a 0-d array.
    """
    a, b = np.asarray(a), np.asarray(b)
    ax_a = [p[0] for p in pairs]
    ax_b = [p[1] for p in pairs]
    if len(set(ax_a)) != len(ax_a) or len(set(ax_b)) != len(ax_b):
        raise ValueError("a mode may appear in at most one contraction pair")
    for ma, mb in pairs:
        _check_mode(a, ma)
        _check_mode(b, mb)
        if a.shape[ma] != b.shape[mb]:
            raise ValueError(
                f"contracted dims differ: a mode {ma} has {a.shape[ma]}, "
                f"b mode {mb} has {b.shape[mb]}")
    return np.tensordot(a, b, axes=(ax_a, ax_b))
