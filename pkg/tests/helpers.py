"""Independent scalar-loop oracles used to pin down the library's value maps.

Everything here is written directly from the index formulas with explicit
Python loops over ``itertools.product`` — deliberately slow and deliberately
free of the library's own reshape/einsum machinery, so a bug in the package
cannot hide in its oracle.  Index convention matches the package: merged
multi-indices are little-endian (first index fastest), modes are 0-based.
"""

import itertools

import numpy as np


def flat_index(idx, dims):
    """Little-endian flat position of multi-index ``idx`` in a ``dims`` box."""
    f, stride = 0, 1
    for i, d in zip(idx, dims):
        f += i * stride
        stride *= d
    return f


def all_indices(dims):
    """Iterate every multi-index of a ``dims`` box (first mode fastest)."""
    for rev in itertools.product(*(range(d) for d in reversed(dims))):
        yield tuple(reversed(rev))


def o_vectorize(t):
    t = np.asarray(t)
    v = np.zeros(t.size)
    for idx in all_indices(t.shape):
        v[flat_index(idx, t.shape)] = t[idx]
    return v


def o_matricize_mode(t, mode):
    t = np.asarray(t)
    rest = [d for k, d in enumerate(t.shape) if k != mode]
    m = np.zeros((t.shape[mode], int(np.prod(rest, initial=1))))
    for idx in all_indices(t.shape):
        col = flat_index([i for k, i in enumerate(idx) if k != mode], rest)
        m[idx[mode], col] = t[idx]
    return m


def o_matricize_prefix(t, k):
    t = np.asarray(t)
    m = np.zeros((int(np.prod(t.shape[:k])), int(np.prod(t.shape[k:], initial=1))))
    for idx in all_indices(t.shape):
        m[flat_index(idx[:k], t.shape[:k]), flat_index(idx[k:], t.shape[k:])] = t[idx]
    return m


def o_matricize_mode_pair(t, i, j):
    t = np.asarray(t)
    rest = [d for k, d in enumerate(t.shape) if k not in (i, j)]
    m = np.zeros((t.shape[i] * t.shape[j], int(np.prod(rest, initial=1))))
    for idx in all_indices(t.shape):
        row = flat_index((idx[i], idx[j]), (t.shape[i], t.shape[j]))
        col = flat_index([x for k, x in enumerate(idx) if k not in (i, j)], rest)
        m[row, col] = t[idx]
    return m


def o_hadamard(a, b):
    a, b = np.asarray(a), np.asarray(b)
    c = np.zeros(a.shape)
    for idx in all_indices(a.shape):
        c[idx] = a[idx] * b[idx]
    return c


def o_kronecker(a, b):
    a, b = np.asarray(a), np.asarray(b)
    c = np.zeros([ia * ib for ia, ib in zip(a.shape, b.shape)])
    for ia in all_indices(a.shape):
        for ib in all_indices(b.shape):
            pos = tuple(x + y * dx for x, y, dx in zip(ia, ib, a.shape))
            c[pos] = a[ia] * b[ib]
    return c


def o_khatri_rao_mode(a, b, mode):
    a, b = np.asarray(a), np.asarray(b)
    shape = [a.shape[k] if k == mode else a.shape[k] * b.shape[k]
             for k in range(a.ndim)]
    c = np.zeros(shape)
    for ia in all_indices(a.shape):
        for ib in all_indices(b.shape):
            if ia[mode] != ib[mode]:
                continue
            pos = tuple(
                ia[k] if k == mode else ia[k] + ib[k] * a.shape[k]
                for k in range(a.ndim))
            c[pos] = a[ia] * b[ib]
    return c


def o_outer(a, b):
    a, b = np.asarray(a), np.asarray(b)
    c = np.zeros(a.shape + b.shape)
    for ia in all_indices(a.shape):
        for ib in all_indices(b.shape):
            c[ia + ib] = a[ia] * b[ib]
    return c


def o_mode_n_product(t, matrix, mode):
    t, matrix = np.asarray(t), np.asarray(matrix)
    shape = list(t.shape)
    shape[mode] = matrix.shape[0]
    c = np.zeros(shape)
    for idx in all_indices(shape):
        s = 0.0
        for r in range(t.shape[mode]):
            src = list(idx)
            src[mode] = r
            s += matrix[idx[mode], r] * t[tuple(src)]
        c[idx] = s
    return c


def o_contract(a, b, pairs):
    a, b = np.asarray(a), np.asarray(b)
    ax_a = [p[0] for p in pairs]
    ax_b = [p[1] for p in pairs]
    free_a = [k for k in range(a.ndim) if k not in ax_a]
    free_b = [k for k in range(b.ndim) if k not in ax_b]
    shape = [a.shape[k] for k in free_a] + [b.shape[k] for k in free_b]
    c = np.zeros(shape) if shape else np.zeros(())
    shared = [a.shape[k] for k in ax_a]
    for idx in all_indices(shape) if shape else [()]:
        ia = [0] * a.ndim
        ib = [0] * b.ndim
        for k, v in zip(free_a, idx[:len(free_a)]):
            ia[k] = v
        for k, v in zip(free_b, idx[len(free_a):]):
            ib[k] = v
        s = 0.0
        for sh in all_indices(shared) if shared else [()]:
            for k, v in zip(ax_a, sh):
                ia[k] = v
            for k, v in zip(ax_b, sh):
                ib[k] = v
            s += a[tuple(ia)] * b[tuple(ib)]
        c[idx] = s
    return c


# ---------------------------------------------------------------------------
# network-level oracles
# ---------------------------------------------------------------------------

def o_recover(factors, ranks):
    """Sum over all bond index assignments of outer products of factor fibers.

    ``factors[k]`` is an order-N array whose axis j (j != k) is the bond to
    factor j and whose axis k is the physical mode.  ``ranks`` is the N x N
    bond-size matrix.  Direct transcription of the element-wise definition of
    the contraction of a fully-connected (rank-padded) network.
    """
    n = len(factors)
    ranks = np.asarray(ranks)
    dims = [np.asarray(factors[k]).shape[k] for k in range(n)]
    edge_list = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edge_dims = [int(ranks[i, j]) for i, j in edge_list]
    x = np.zeros(dims)
    for assign in all_indices(edge_dims):
        bond = {e: v for e, v in zip(edge_list, assign)}
        term = np.ones(())
        for k in range(n):
            sel = []
            for j in range(n):
                if j == k:
                    sel.append(slice(None))
                else:
                    e = (min(k, j), max(k, j))
                    sel.append(bond[e])
            fiber = np.asarray(factors[k])[tuple(sel)]
            term = np.multiply.outer(term, fiber)
        x += term
    return x


def o_recover_left_fold(factors, ranks, order):
    """Contract the network by absorbing factors one at a time in ``order``.

    An alternative contraction schedule used to check order independence.
    Keeps an accumulator tensor with named axes: physical axes of absorbed
    factors plus open bonds toward unabsorbed factors.
    """
    n = len(factors)
    ranks = np.asarray(ranks)
    first = order[0]
    acc = np.asarray(factors[first])
    # axis labels of acc: ('p', k) or ('b', i, j) with i < j
    labels = [("p", first) if j == first else ("b", min(first, j), max(first, j))
              for j in range(n)]
    absorbed = {first}
    for k in order[1:]:
        f = np.asarray(factors[k])
        f_labels = [("p", k) if j == k else ("b", min(k, j), max(k, j))
                    for j in range(n)]
        shared = [lab for lab in labels
                  if lab[0] == "b" and lab in f_labels
                  and (lab[1] == k or lab[2] == k)]
        ax_acc = [labels.index(lab) for lab in shared]
        ax_f = [f_labels.index(lab) for lab in shared]
        acc = np.tensordot(acc, f, axes=(ax_acc, ax_f))
        labels = ([lab for i, lab in enumerate(labels) if i not in ax_acc]
                  + [lab for i, lab in enumerate(f_labels) if i not in ax_f])
        absorbed.add(k)
    # all bonds are now closed; put physical axes in ascending mode order
    perm = [labels.index(("p", k)) for k in range(n)]
    return np.transpose(acc, perm)


def o_svt(a, mu):
    """Singular value thresholding via explicit SVD reassembly."""
    u, s, vt = np.linalg.svd(np.asarray(a, float), full_matrices=False)
    return (u * np.maximum(s - mu, 0.0)) @ vt


def random_topology(rng, n, max_connections, max_rank=3):
    """Random symmetric bond-size matrix respecting the connection cap."""
    r = np.ones((n, n), dtype=int)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    rng.shuffle(pairs)
    for i, j in pairs:
        if rng.random() < 0.6:
            conn_i = sum(1 for k in range(n) if k != i and r[i, k] > 1)
            conn_j = sum(1 for k in range(n) if k != j and r[j, k] > 1)
            if conn_i < max_connections and conn_j < max_connections:
                r[i, j] = r[j, i] = int(rng.integers(2, max_rank + 1))
    return r


def o_apply_mask(x, mask, fill):
    """Positionwise merge by scalar loop: observed from fill, rest from x."""
    out = np.empty(x.shape)
    for idx in all_indices(x.shape):
        out[idx] = fill[idx] if mask[idx] else x[idx]
    return out
