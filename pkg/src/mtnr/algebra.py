r"""Arithmetic on network components without leaving factor space.

Every operation here returns a new :class:`~mtnr.network.TnComponent` whose
recovery equals the corresponding dense operation applied to the operands'
recoveries — products by merging bonds mode-wise (bond sizes multiply), sums
by a block embedding (bond sizes add).  None of them form the dense tensors.

Merged indices follow the package convention: the first operand's index runs
fastest.
"""

import numpy as np

from . import dense
from .network import RankMatrix, TnComponent, grow_edge, multilinear_form


def _check_same_dims(a, b):
    if a.dims != b.dims:
        raise ValueError(f"physical dims differ: {a.dims} vs {b.dims}")


def _check_same_order(a, b):
    if a.order != b.order:
        raise ValueError(f"orders differ: {a.order} vs {b.order}")


def _cap_for(table, *components):
    """Connection cap for a result: operand caps, lifted to the realized degree.

    Product and sum topologies carry the union of the operand edge sets, which
    may exceed either operand's learning-time cap; the cap is an upper bound,
    so it widens to fit.
    """
    degrees = (np.asarray(table) > 1).sum(axis=0)
    return max(int(degrees.max(initial=0)), *(c.max_connections for c in components))


def tn_mode_n_product(c, matrix, mode):
    """Multiply ``matrix`` into the network along physical mode ``mode``.

    Only factor ``mode`` changes; the topology is untouched.
    """
    factors = list(c.factors)
    factors[mode] = dense.mode_n_product(factors[mode], np.asarray(matrix), mode)
    return TnComponent(factors, c.ranks.copy(), c.max_connections)


def tn_multilinear_vectors(c, vectors):
    """Collapse every physical mode with a vector; returns the scalar result."""
    return multilinear_form(c, vectors)


def tn_hadamard(a, b):
    """Element-wise product in factor space.

    Factor k of the result pairs the operands' factors slice-by-slice along
    the shared physical mode k and merges every bond mode-wise, so each bond
    size multiplies.
    """
    _check_same_order(a, b)
    _check_same_dims(a, b)
    factors = [dense.khatri_rao_mode(fa, fb, k)
               for k, (fa, fb) in enumerate(zip(a.factors, b.factors))]
    table = a.ranks.table * b.ranks.table
    return TnComponent(factors, RankMatrix(a.order, table), _cap_for(table, a, b))


def tn_inner(a, b):
    """Inner product <recover(a), recover(b)> computed in factor space."""
    _check_same_order(a, b)
    _check_same_dims(a, b)
    prod = tn_hadamard(a, b)
    return tn_multilinear_vectors(prod, [np.ones(d) for d in prod.dims])


def tn_outer(a, b):
    """Outer product: the factor lists concatenate; no new edges appear.

    Each factor of ``a`` gains trailing size-1 bond axes toward ``b``'s
    factors and vice versa; the bond table is block diagonal.
    """
    na, nb = a.order, b.order
    factors = []
    for k in range(na):
        factors.append(a.factors[k].reshape(a.factors[k].shape + (1,) * nb))
    for k in range(nb):
        factors.append(b.factors[k].reshape((1,) * na + b.factors[k].shape))
    table = np.ones((na + nb, na + nb), dtype=int)
    table[:na, :na] = a.ranks.table
    table[na:, na:] = b.ranks.table
    return TnComponent(factors, RankMatrix(na + nb, table), _cap_for(table, a, b))


def tn_kronecker(a, b):
    """Mode-wise Kronecker product in factor space.

    Every mode of every factor merges (``a``'s index fastest), so physical
    sizes and bond sizes both multiply.
    """
    _check_same_order(a, b)
    factors = [dense.kronecker(fa, fb) for fa, fb in zip(a.factors, b.factors)]
    table = a.ranks.table * b.ranks.table
    return TnComponent(factors, RankMatrix(a.order, table), _cap_for(table, a, b))


def tn_khatri_rao(a, b, mode):
    """Khatri-Rao product at ``mode``: that physical mode is shared, the rest
    merge as in :func:`tn_kronecker`."""
    _check_same_order(a, b)
    if a.dims[mode] != b.dims[mode]:
        raise ValueError(
            f"shared mode {mode} differs: {a.dims[mode]} vs {b.dims[mode]}")
    factors = []
    for k, (fa, fb) in enumerate(zip(a.factors, b.factors)):
        if k == mode:
            factors.append(dense.khatri_rao_mode(fa, fb, mode))
        else:
            factors.append(dense.kronecker(fa, fb))
    table = a.ranks.table * b.ranks.table
    return TnComponent(factors, RankMatrix(a.order, table), _cap_for(table, a, b))


# ---------------------------------------------------------------------------
# addition
# ---------------------------------------------------------------------------

def _union_components(a, b):
    """Connected components of the union edge graph of two topologies."""
    n = a.order
    adj = (a.ranks.table > 1) | (b.ranks.table > 1)
    seen = [False] * n
    groups = []
    for start in range(n):
        if seen[start]:
            continue
        stack, group = [start], []
        seen[start] = True
        while stack:
            v = stack.pop()
            group.append(v)
            for w in range(n):
                if adj[v, w] and not seen[w]:
                    seen[w] = True
                    stack.append(w)
        groups.append(sorted(group))
    return groups


def connect_for_addition(a, b, rng):
    """Preprocess a pair for exact addition: make the union graph connected.

    The block-embedding sum is only exact when the union of the two edge sets
    connects all factors; otherwise cross terms survive (isolated factors are
    the simplest case).  Zero-filled size-2 edges between randomly chosen
    vertices of distinct union components are grown in ``a`` until one
    component remains.  Values of both operands are preserved exactly.
    """
    _check_same_order(a, b)
    _check_same_dims(a, b)
    a = TnComponent([f.copy() for f in a.factors], a.ranks.copy(),
                    max(a.max_connections, a.order))
    while True:
        groups = _union_components(a, b)
        if len(groups) <= 1:
            break
        g0, g1 = groups[0], groups[1]
        i = int(g0[rng.integers(len(g0))])
        j = int(g1[rng.integers(len(g1))])
        a = grow_edge(a, i, j)  # zero fill: value preserved
    return a, b


def tn_add(a, b, rng=None):
    """Sum in factor space via block embedding; exact, no floating-point work.

    Resulting bond sizes: ``P = 1`` where both operands have size-1 bonds,
    otherwise ``P = R + S``.  Per factor, ``a``'s block occupies the low index
    range of every widened bond axis and ``b``'s block the high range, zeros
    elsewhere.  Needs the union of the edge graphs connected; when it is not,
    :func:`connect_for_addition` runs first (``rng`` required then).
    """
    _check_same_order(a, b)
    _check_same_dims(a, b)
    if len(_union_components(a, b)) > 1 and a.order > 1:
        if rng is None:
            raise ValueError(
                "union topology is disconnected; pass an rng so zero-filled "
                "edges can be grown to connect it")
        a, b = connect_for_addition(a, b, rng)
    n = a.order
    table = np.where((a.ranks.table == 1) & (b.ranks.table == 1), 1,
                     a.ranks.table + b.ranks.table)
    np.fill_diagonal(table, 1)
    factors = []
    for k in range(n):
        fa, fb = a.factors[k], b.factors[k]
        shape = [a.dims[k] if j == k else int(table[j, k]) for j in range(n)]
        y = np.zeros(shape)
        sel_a = [slice(None) if j == k else slice(0, a.ranks.bond(j, k))
                 for j in range(n)]
        sel_b = [slice(None) if j == k else
                 slice(int(table[j, k]) - b.ranks.bond(j, k), int(table[j, k]))
                 for j in range(n)]
        y[tuple(sel_a)] = fa
        # on all-shared-bond factors (order 1) the two blocks coincide and the
        # sum is literal factor addition, hence += rather than assignment
        y[tuple(sel_b)] += fb
        factors.append(y)
    return TnComponent(factors, RankMatrix(n, table), _cap_for(table, a, b))


def topology_of_sum(rank_matrices):
    """Predicted bond table of an iterated sum (left fold of the add rule).

    Pure rule application: an entry stays 1 only while every operand has a
    size-1 bond there; as soon as one operand carries a real edge, every later
    operand adds its size (even size-1 ones occupy a block slice).  The
    connectivity preprocessing of :func:`tn_add` is not modelled.
    """
    mats = list(rank_matrices)
    if not mats:
        raise ValueError("need at least one bond table")
    acc = mats[0].table.copy()
    for m in mats[1:]:
        if m.order != acc.shape[0]:
            raise ValueError("bond tables must share one order")
        acc = np.where((acc == 1) & (m.table == 1), 1, acc + m.table)
        np.fill_diagonal(acc, 1)
    return RankMatrix(acc.shape[0], acc)
