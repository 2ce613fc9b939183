r"""Adaptive topology learning: fit components by ALS, grow edges where the
residual projects worst.

One component is fitted at a time against the current residual.  Inside a
component the loop alternates full ALS sweeps (each factor solved in closed
form against the flattened remainder network, sweep order freshly randomized)
with at most one structural step per sweep: when the sweep-to-sweep change
stalls and the parameter budget allows it, the bond whose two factors explain
the residual best — measured by projecting the residual matricization onto
the pair's subnetwork — grows by one.

Progress is reported on the ``mtnr.atl`` logger as ``key=value`` lines, one
per sweep.
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import dense
from .network import MtnrModel, TnComponent, grow_edge, recover, recover_excluding

log = logging.getLogger("mtnr.atl")

# relative fit below which a component is treated as exact: further sweeps or
# growth could only chase rounding noise
_FIT_FLOOR = 1e-12

# relative singular-value cutoff shared by every pseudo-inverse here
_PINV_RCOND = 1e-10


@dataclass(frozen=True)
class AtlConfig:
    """Knobs for topology learning.

    epsilon          stop adding components once the residual norm falls below
                     ``epsilon * |x|``
    delta            a sweep whose relative change is below ``delta`` counts
                     as stalled and may trigger edge growth
    max_sweeps       cap on ALS sweeps per component
    gamma            parameter budget per component; ``None`` resolves to
                     ``N * max(dims) * 4**max_connections`` for the instance
    max_connections  cap on edges per factor (t)
    max_components   cap on the number of components
    seed             seed used by callers that build their own generator
    """

    epsilon: float = 2e-2
    delta: float = 4e-3
    max_sweeps: int = 3000
    gamma: float | None = None
    max_connections: int = 3
    max_components: int = 32
    seed: int = 0

    def validate(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if self.max_connections < 1:
            raise ValueError("max_connections must be >= 1")
        if self.max_components < 1:
            raise ValueError("max_components must be >= 1")
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    def resolve_gamma(self, dims):
        """Budget for a given instance; checks it leaves room for rank one."""
        gamma = self.gamma
        if gamma is None:
            gamma = len(dims) * max(dims) * 4 ** self.max_connections
        if gamma < sum(dims):
            raise ValueError(
                f"budget {gamma} cannot even hold a rank-one component "
                f"({sum(dims)} parameters)")
        return float(gamma)


# ---------------------------------------------------------------------------
# ALS
# ---------------------------------------------------------------------------

def als_update_factor(component, target, n):
    """Closed-form least-squares update of factor ``n`` against ``target``.

    Solves ``min |target_(n) - Z_(n) B^T|`` over factor n, where B is the
    flattened remainder network, via the normal equations with a
    pseudo-inverted Gram matrix (rank deficiency is harmless).  The fit
    residual never increases.  Returns a new component.
    """
    target = np.asarray(target, dtype=float)
    if target.shape != component.dims:
        raise ValueError(f"target shape {target.shape} != dims {component.dims}")
    b = dense.matricize_prefix(recover_excluding(component, {n}),
                               component.order - 1)
    gram = b.T @ b
    rhs = dense.matricize_mode(target, n) @ b
    z = rhs @ np.linalg.pinv(gram, rcond=_PINV_RCOND, hermitian=True)
    out = component.copy()
    out.factors[n] = dense.fold_mode(z, n, component.factors[n].shape)
    return out


def projection_error_scores(component, target):
    """How much residual each factor pair could still absorb.

    For every pair (i, j) the current approximation error is matricized with
    modes (i, j) as rows and regressed onto the pair's contracted subnetwork;
    the Frobenius norm of the coefficient matrix is the pair's score.  Exact
    fit gives all-zero scores.
    """
    target = np.asarray(target, dtype=float)
    if target.shape != component.dims:
        raise ValueError(f"target shape {target.shape} != dims {component.dims}")
    err = target - recover(component)
    n = component.order
    scores = {}
    for i in range(n):
        for j in range(i + 1, n):
            pair = recover_excluding(component, set(range(n)) - {i, j})
            pair_mat = dense.matricize_prefix(pair, 2) if pair.ndim > 2 else \
                pair.reshape(pair.shape[0] * pair.shape[1], -1, order="F")
            err_mat = dense.matricize_mode_pair(err, i, j)
            w = np.linalg.pinv(pair_mat, rcond=_PINV_RCOND) @ err_mat
            scores[(i, j)] = dense.frob(w)
    return scores


@dataclass
class EdgeSelectionState:
    """Per-component growth bookkeeping: last pick and per-edge pick counts."""

    last: tuple | None = None
    counts: dict = field(default_factory=dict)

    def count(self, i, j):
        return self.counts.get((min(i, j), max(i, j)), 0)

    def record(self, i, j):
        key = (min(i, j), max(i, j))
        self.counts[key] = self.counts.get(key, 0) + 1
        self.last = key


def select_edge(scores, state, component):
    """Pick the admissible pair with the largest score, or None.

    A pair is admissible when it is not the immediately previous pick, its
    pick count is still below ``min(I_i, I_j)``, and — if the bond is new —
    both factors are below the connection cap.  Ties break toward the
    lexicographically smallest pair.  The state is updated on success.
    """
    dims = component.dims
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    for (i, j), _ in ranked:
        if state.last == (i, j):
            continue
        if state.count(i, j) >= min(dims[i], dims[j]):
            continue
        if component.ranks.bond(i, j) == 1:
            if (component.ranks.connections(i) >= component.max_connections or
                    component.ranks.connections(j) >= component.max_connections):
                continue
        state.record(i, j)
        return (i, j)
    return None


# ---------------------------------------------------------------------------
# component fitting
# ---------------------------------------------------------------------------

def _init_component(target, cfg, rng):
    """Rank-one start, scaled so the recovery norm matches the target norm."""
    c = TnComponent.rank_one(np.asarray(target).shape, cfg.max_connections, rng=rng)
    norm_t = dense.frob(target)
    norm_c = dense.frob(recover(c))
    if norm_t > 0 and norm_c > 0:
        c.factors[0] = c.factors[0] * (norm_t / norm_c)
    return c


def _sweep_rse(a_new, a_old):
    denom = dense.frob(a_old)
    diff = dense.frob(a_new - a_old)
    if denom == 0.0:
        return 0.0 if diff == 0.0 else math.inf
    return diff / denom


def fit_component(target, cfg, rng, component_index=0):
    """Fit one component to ``target`` by ALS with adaptive edge growth.

    Runs up to ``cfg.max_sweeps`` sweeps; each sweep updates every factor in
    a fresh random order, then — if the sweep stalled (relative change below
    ``cfg.delta``) and the parameter budget still has room — grows the best
    admissible edge by one.  Stops early when the fit is numerically exact or
    when a stalled sweep finds nothing admissible to grow.  A zero target
    returns the all-zero rank-one component immediately.
    """
    cfg.validate()
    target = np.asarray(target, dtype=float)
    gamma = cfg.resolve_gamma(target.shape)
    if dense.frob(target) == 0.0:
        return TnComponent.rank_one(target.shape, cfg.max_connections)
    c = _init_component(target, cfg, rng)
    state = EdgeSelectionState()
    a_prev = recover(c)
    target_norm = dense.frob(target)
    for sweep in range(1, cfg.max_sweeps + 1):
        for n in rng.permutation(c.order):
            c = als_update_factor(c, target, int(n))
        a_new = recover(c)
        rse = _sweep_rse(a_new, a_prev)
        a_prev = a_new
        fit = dense.frob(target - a_new)
        edge = None
        if fit <= _FIT_FLOOR * target_norm:
            log.debug("component=%d sweep=%d rse=%.3e params=%d edge=none",
                      component_index, sweep, rse, c.param_count())
            break
        if rse <= cfg.delta and c.param_count() <= gamma:
            edge = select_edge(projection_error_scores(c, target), state, c)
            if edge is not None:
                c = grow_edge(c, *edge, rng=rng)
        log.debug("component=%d sweep=%d rse=%.3e params=%d edge=%s",
                  component_index, sweep, rse, c.param_count(),
                  "none" if edge is None else f"{edge[0]}-{edge[1]}")
        if edge is None and rse <= cfg.delta / 10:
            break
    return c


def run_atl(x, cfg, rng):
    """Decompose ``x`` into a sum of learned-topology components.

    Components are fitted greedily against the running residual until its
    norm drops below ``epsilon * |x|`` or ``max_components`` is reached.
    The residual norm never increases from one component to the next.
    """
    cfg.validate()
    x = np.asarray(x, dtype=float)
    cfg.resolve_gamma(x.shape)
    norm_x = dense.frob(x)
    model = MtnrModel([], target_dims=x.shape)
    residual = x.copy()
    while dense.frob(residual) > cfg.epsilon * norm_x and \
            len(model.components) < cfg.max_components:
        c = fit_component(residual, cfg, rng,
                          component_index=len(model.components))
        model.add(c)
        residual = residual - recover(c)
        log.info("component=%d residual=%.6e params=%d edges=%s",
                 len(model.components) - 1, dense.frob(residual),
                 c.param_count(), c.ranks.edges())
    return model
