r"""Tensor-network components: topology, recovery, edge growth, rank bounds.

A component of order N holds one factor per mode.  Factor k is an order-N
array whose axis k is the physical mode (size I_k) and whose axis j != k is
the bond toward factor j (size R[j, k]).  Bonds of size 1 mean "no edge", so
every topology from independent vectors up to a fully connected network fits
in the same storage scheme.  The represented tensor is the full contraction
of all bonds ("recovery"); merged index groups follow the package-wide
little-endian convention.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import dense


class RankMatrix:
    """Symmetric N x N table of bond sizes; diagonal fixed at 1.

    ``table[i, j]`` is the size of the bond between factors i and j; 1 means
    the factors are not connected.
    """

    def __init__(self, n, table=None):
        if n < 1:
            raise ValueError(f"need at least one mode, got {n}")
        if table is None:
            self.table = np.ones((n, n), dtype=int)
        else:
            t = np.asarray(table, dtype=int)
            if t.shape != (n, n):
                raise ValueError(f"table shape {t.shape} != ({n}, {n})")
            if not np.array_equal(t, t.T):
                raise ValueError("bond table must be symmetric")
            if (t < 1).any():
                raise ValueError("bond sizes must be >= 1")
            if (np.diag(t) != 1).any():
                raise ValueError("diagonal entries (self loops) must be 1")
            self.table = t.copy()

    @property
    def order(self):
        return self.table.shape[0]

    def bond(self, i, j):
        return int(self.table[i, j])

    def set_bond(self, i, j, r):
        if i == j:
            raise ValueError("self loops are not allowed")
        if r < 1:
            raise ValueError(f"bond size must be >= 1, got {r}")
        self.table[i, j] = self.table[j, i] = int(r)

    def connections(self, k):
        """Number of real edges (bond size > 1) incident to factor k."""
        return int(np.sum(self.table[k] > 1)) - (1 if self.table[k, k] > 1 else 0)

    def edges(self):
        """Sorted list of (i, j, size) with i < j for every real edge."""
        n = self.order
        return [(i, j, int(self.table[i, j]))
                for i in range(n) for j in range(i + 1, n)
                if self.table[i, j] > 1]

    def copy(self):
        return RankMatrix(self.order, self.table)

    def __eq__(self, other):
        return isinstance(other, RankMatrix) and np.array_equal(self.table, other.table)

    def __repr__(self):
        return f"RankMatrix({self.order}, {self.table.tolist()})"


class TnComponent:
    """One tensor-network component: factors plus their bond-size matrix."""

    def __init__(self, factors, ranks, max_connections):
        if max_connections < 1:
            raise ValueError("connection cap must be >= 1")
        n = ranks.order
        if len(factors) != n:
            raise ValueError(f"{len(factors)} factors for an order-{n} topology")
        self.factors = [np.asarray(f, dtype=float) for f in factors]
        self.ranks = ranks
        self.max_connections = int(max_connections)
        self.validate()

    def validate(self):
        """Check factor shapes against the bond table and the connection cap."""
        n = self.order
        for k, f in enumerate(self.factors):
            if f.ndim != n:
                raise ValueError(f"factor {k} has order {f.ndim}, expected {n}")
            for j in range(n):
                if j != k and f.shape[j] != self.ranks.bond(j, k):
                    raise ValueError(
                        f"factor {k} axis {j} has size {f.shape[j]}, "
                        f"bond table says {self.ranks.bond(j, k)}")
        for k in range(n):
            if self.ranks.connections(k) > self.max_connections:
                raise ValueError(
                    f"factor {k} has {self.ranks.connections(k)} edges, "
                    f"cap is {self.max_connections}")

    @property
    def order(self):
        return self.ranks.order

    @property
    def dims(self):
        """Physical mode sizes (I_1, ..., I_N)."""
        return tuple(f.shape[k] for k, f in enumerate(self.factors))

    def param_count(self):
        """Total number of stored factor entries."""
        return int(sum(f.size for f in self.factors))

    def copy(self):
        return TnComponent([f.copy() for f in self.factors], self.ranks.copy(),
                           self.max_connections)

    @classmethod
    def rank_one(cls, dims, max_connections, rng=None):
        """All-bonds-1 component; entries standard normal, or zero without rng."""
        n = len(dims)
        factors = []
        for k, d in enumerate(dims):
            shape = [1] * n
            shape[k] = d
            if rng is None:
                factors.append(np.zeros(shape))
            else:
                factors.append(rng.standard_normal(shape))
        return cls(factors, RankMatrix(n), max_connections)

    def __repr__(self):
        return (f"TnComponent(order={self.order}, dims={self.dims}, "
                f"edges={self.ranks.edges()}, params={self.param_count()})")


# ---------------------------------------------------------------------------
# network contraction
# ---------------------------------------------------------------------------
#
# Nodes carry an axis-label list alongside the value array: ('p', k) for the
# physical mode of factor k, ('b', i, j) with i < j for the bond between
# factors i and j.  Contracting two nodes closes every bond label they share.

def _factor_node(component, k):
    labels = []
    for j in range(component.order):
        labels.append(("p", k) if j == k else ("b", min(j, k), max(j, k)))
    return component.factors[k], labels, k


def _shared_axes(labels_a, labels_b):
    common = [lab for lab in labels_a if lab[0] == "b" and lab in labels_b]
    return ([labels_a.index(lab) for lab in common],
            [labels_b.index(lab) for lab in common])


def _contract_greedy(nodes):
    """Pairwise-contract all nodes, smallest intermediate first.

    Disconnected groups combine by outer product.  Ties go to the pair with
    the lexicographically smallest (min factor index per group) key so the
    schedule is deterministic.
    """
    nodes = list(nodes)
    while len(nodes) > 1:
        best = None
        for a in range(len(nodes)):
            for b in range(a + 1, len(nodes)):
                ta, la, ka = nodes[a]
                tb, lb, kb = nodes[b]
                ax_a, _ = _shared_axes(la, lb)
                shared = math.prod(ta.shape[x] for x in ax_a)
                size = (ta.size // max(shared, 1)) * (tb.size // max(shared, 1))
                key = (size, min(ka, kb), max(ka, kb))
                if best is None or key < best[0]:
                    best = (key, a, b)
        _, a, b = best
        ta, la, ka = nodes[a]
        tb, lb, kb = nodes[b]
        ax_a, ax_b = _shared_axes(la, lb)
        merged = np.tensordot(ta, tb, axes=(ax_a, ax_b))
        labels = ([lab for i, lab in enumerate(la) if i not in ax_a]
                  + [lab for i, lab in enumerate(lb) if i not in ax_b])
        nodes[b:b + 1] = []
        nodes[a] = (merged, labels, min(ka, kb))
    return nodes[0]


def _subnetwork(component, include):
    """Contract the factors in ``include``; return (tensor, labels).

    Axes are reordered to: physical modes of included factors ascending, then
    for each excluded factor m (ascending) its open bonds ordered by source
    factor ascending.  Bonds between two included factors are closed.
    """
    include = sorted(include)
    if not include:
        raise ValueError("subnetwork needs at least one factor")
    excluded = [m for m in range(component.order) if m not in include]
    tensor, labels, _ = _contract_greedy([_factor_node(component, k) for k in include])
    target = [("p", k) for k in include]
    for m in excluded:
        target += [("b", min(s, m), max(s, m)) for s in include]
    tensor = np.transpose(tensor, [labels.index(lab) for lab in target])
    return tensor, target


def recover(component):
    """Contract every bond; returns the represented dense tensor.

    The result has the component's physical dims in mode order.  The
    contraction schedule is greedy (smallest intermediate first) but the value
    is schedule-independent.
    """
    tensor, _ = _subnetwork(component, range(component.order))
    return tensor


def recover_excluding(component, exclude):
    """Contract the subnetwork without the factors in ``exclude``.

    Axis layout of the result: physical modes of the kept factors in
    ascending mode order, then one merged dangling-bond mode per excluded
    factor (excluded factors ascending; within a group the bonds are merged
    little-endian over the source factors ascending).
    """
    exclude = set(exclude)
    include = [k for k in range(component.order) if k not in exclude]
    if not include:
        raise ValueError("cannot exclude every factor")
    if len(exclude | set(include)) != component.order or \
            any(not 0 <= m < component.order for m in exclude):
        raise ValueError(f"invalid mode set {sorted(exclude)}")
    tensor, labels = _subnetwork(component, include)
    # merge each excluded factor's dangling group; C-order merge runs the last
    # axis fastest, so list each group's sources in descending order
    n_phys = len(include)
    perm = list(range(n_phys))
    shape = [component.dims[k] for k in include]
    pos = n_phys
    for m in sorted(exclude):
        group = list(range(pos, pos + len(include)))
        perm += group[::-1]
        shape.append(math.prod(tensor.shape[x] for x in group))
        pos += len(include)
    return np.transpose(tensor, perm).reshape(shape)


def multilinear_form(component, vectors):
    """Scalar <recover(c), v_1 o ... o v_N> without forming the dense tensor.

    Each factor's physical mode is collapsed with its vector first, then the
    remaining bond-only network is contracted.
    """
    if len(vectors) != component.order:
        raise ValueError("need one vector per mode")
    nodes = []
    for k in range(component.order):
        v = np.asarray(vectors[k], dtype=float)
        if v.ndim != 1 or v.size != component.dims[k]:
            raise ValueError(f"vector {k} has shape {v.shape}, "
                             f"mode size is {component.dims[k]}")
        tensor, labels, _ = _factor_node(component, k)
        collapsed = np.tensordot(tensor, v, axes=([k], [0]))
        del labels[k]
        nodes.append((collapsed, labels, k))
    tensor, _, _ = _contract_greedy(nodes)
    return float(tensor)


# ---------------------------------------------------------------------------
# structural edits
# ---------------------------------------------------------------------------

def grow_edge(component, i, j, rng=None):
    """Return a copy with bond (i, j) one larger; existing entries preserved.

    Factor i gains a slice along axis j and factor j along axis i.  With an
    ``rng`` the new slices are i.i.d. Gaussian with standard deviation
    ``0.01 * frob(factor) / sqrt(factor.size)``; without one they are zero
    (which leaves the recovered tensor unchanged).

    Raises ValueError when creating a brand-new edge would push either factor
    past the connection cap.
    """
    if i == j:
        raise ValueError("self loops are not allowed")
    i, j = min(i, j), max(i, j)
    c = component.copy()
    r = c.ranks.bond(i, j)
    if r == 1:
        for k in (i, j):
            if c.ranks.connections(k) >= c.max_connections:
                raise ValueError(
                    f"factor {k} already has {c.ranks.connections(k)} edges "
                    f"(cap {c.max_connections})")
    for k, axis in ((i, j), (j, i)):
        f = c.factors[k]
        shape = list(f.shape)
        shape[axis] = 1
        if rng is None:
            piece = np.zeros(shape)
        else:
            std = 0.01 * dense.frob(f) / math.sqrt(f.size)
            piece = std * rng.standard_normal(shape)
        c.factors[k] = np.concatenate([f, piece], axis=axis)
    c.ranks.set_bond(i, j, r + 1)
    c.validate()
    return c


# ---------------------------------------------------------------------------
# rank bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RankBound:
    """One matricization-rank check: kind is 'mode' or 'prefix'."""
    kind: str
    mode: int
    actual: int
    bound: int

    @property
    def ok(self):
        return self.actual <= self.bound


def _numerical_rank(m, tol_factor):
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol_factor * s[0]))


def check_rank_bounds(component, tol_factor=1e-8):
    """Numerical matricization ranks of the recovered tensor vs. bond products.

    For every mode n the mode-n rank is bounded by ``prod_j R[n, j]``; for
    every prefix split k the rank of the first-k-modes matricization is
    bounded by ``prod_{i < k <= j} R[i, j]`` (bonds crossing the split).
    Returns a list of :class:`RankBound`; entries with ``ok == False`` are
    violations.
    """
    x = recover(component)
    table = component.ranks.table
    n = component.order
    report = []
    for mode in range(n):
        bound = math.prod(int(table[mode, j]) for j in range(n) if j != mode)
        actual = _numerical_rank(dense.matricize_mode(x, mode), tol_factor)
        report.append(RankBound("mode", mode, actual, bound))
    for k in range(1, n):
        bound = math.prod(int(table[i, j]) for i in range(k) for j in range(k, n))
        actual = _numerical_rank(dense.matricize_prefix(x, k), tol_factor)
        report.append(RankBound("prefix", k, actual, bound))
    return report


# ---------------------------------------------------------------------------
# multi-component models
# ---------------------------------------------------------------------------

@dataclass
class MtnrModel:
    """A sum of components, all sharing the same physical dims."""

    components: list = field(default_factory=list)
    target_dims: tuple = ()

    def __post_init__(self):
        self.target_dims = tuple(int(d) for d in self.target_dims)
        if not self.target_dims and self.components:
            self.target_dims = self.components[0].dims
        for c in self.components:
            if c.dims != self.target_dims:
                raise ValueError(
                    f"component dims {c.dims} != model dims {self.target_dims}")

    @property
    def order(self):
        return len(self.target_dims)

    def add(self, component):
        if component.dims != self.target_dims:
            raise ValueError(
                f"component dims {component.dims} != model dims {self.target_dims}")
        self.components.append(component)

    def param_count(self):
        return int(sum(c.param_count() for c in self.components))


def recover_model(model):
    """Sum of the components' recovered tensors (zeros for an empty model)."""
    if not model.target_dims:
        raise ValueError("model has no target dims")
    x = np.zeros(model.target_dims)
    for c in model.components:
        x += recover(c)
    return x
