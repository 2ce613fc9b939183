r"""Tensor completion by greedy component fitting on the observed entries.

Both solvers share one outer loop: components are fitted one at a time
against the observed part of the running residual, their values on the
missing entries are accumulated into the output, and the loop stops when the
latest component barely moves the observed entries.  Observed values are
copied from the input once and never recomputed, so they survive bitwise.

Inside a component the two solvers differ in the factor update.  The ALS
variant alternates closed-form least-squares factor sweeps with a refresh of
the fit target (observed residual on the mask, current reconstruction off
it).  The ADMM variant additionally carries an auxiliary tensor and a
multiplier per (factor, mode) pair and applies singular-value thresholding
to the auxiliary unfoldings, which pushes every factor toward low mode
ranks.  Structure growth is shared with the topology-learning module.

Progress lines go to the ``mtnr.completion`` logger; the ADMM solver adds
``rho=``, ``primal_residual=`` and ``objective=`` fields.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import dense
from .atl import (_FIT_FLOOR, AtlConfig, EdgeSelectionState, _sweep_rse,
                  als_update_factor, projection_error_scores, select_edge)
from .network import (MtnrModel, TnComponent, grow_edge, recover,
                      recover_excluding)

log = logging.getLogger("mtnr.completion")


def apply_mask(x, mask, fill):
    """Merge two tensors: ``fill`` where the mask observes, ``x`` elsewhere."""
    x = np.asarray(x, dtype=float)
    fill = np.asarray(fill, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    if x.shape != mask.shape or fill.shape != mask.shape:
        raise ValueError(
            f"shape mismatch: x {x.shape}, fill {fill.shape}, mask {mask.shape}")
    return np.where(mask, fill, x)


def svt(a, mu):
    """Singular value thresholding: shrink singular values by ``mu``.

    Returns ``U max(S - mu, 0) V^T``, the closed-form minimizer of
    ``mu*|X|_* + 0.5*|X - a|_F^2``.
    """
    if mu < 0:
        raise ValueError(f"threshold must be nonnegative, got {mu}")
    u, s, vt = np.linalg.svd(np.asarray(a, dtype=float), full_matrices=False)
    return (u * np.maximum(s - mu, 0.0)) @ vt


class CompletionResult(NamedTuple):
    """Recovered tensor plus the model that produced its missing entries."""

    recovered: np.ndarray
    model: MtnrModel


# ---------------------------------------------------------------------------
# shared outer loop
# ---------------------------------------------------------------------------

def _check_mask(m, mask):
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != m.shape:
        raise ValueError(f"mask shape {mask.shape} != data shape {m.shape}")
    if not mask.any():
        raise ValueError("mask observes no entries")
    return mask


def _complete(m, mask, cfg, rng, fit_one):
    cfg.validate()
    m = np.asarray(m, dtype=float)
    mask = _check_mask(m, mask)
    cfg.resolve_gamma(m.shape)
    x = np.where(mask, m, 0.0)
    obs_norm = dense.frob(x)
    model = MtnrModel([], target_dims=m.shape)
    if obs_norm == 0.0:
        return CompletionResult(x, model)
    obs_res = x.copy()
    while len(model.components) < cfg.max_components:
        c = fit_one(obs_res, mask, cfg, rng, len(model.components))
        a_k = recover(c)
        model.add(c)
        x[~mask] += a_k[~mask]
        obs_res = obs_res - np.where(mask, a_k, 0.0)
        ratio = dense.frob(a_k[mask]) / obs_norm
        log.info("component=%d observed_ratio=%.6e params=%d edges=%s",
                 len(model.components) - 1, ratio, c.param_count(),
                 c.ranks.edges())
        if ratio < cfg.epsilon:
            break
    return CompletionResult(x, model)


# ---------------------------------------------------------------------------
# ALS solver
# ---------------------------------------------------------------------------

def _init_small(obs_res, cfg, rng):
    """Rank-one start well below the data scale.

    The fit target carries the component's own reconstruction on the missing
    entries, so a large random start would seed those entries with junk that
    the refresh then reinforces.  Starting near zero means the first sweeps
    are driven almost entirely by the observed values, mirroring the
    zero-fill of the output tensor.
    """
    c = TnComponent.rank_one(obs_res.shape, cfg.max_connections, rng=rng)
    norm_t = dense.frob(obs_res)
    norm_c = dense.frob(recover(c))
    if norm_t > 0 and norm_c > 0:
        c.factors[0] = c.factors[0] * (0.01 * norm_t / norm_c)
    return c


def _fit_als_component(obs_res, mask, cfg, rng, index):
    gamma = cfg.resolve_gamma(obs_res.shape)
    obs_norm = dense.frob(obs_res)
    c = _init_small(obs_res, cfg, rng)
    state = EdgeSelectionState()
    a_prev = recover(c)
    t = apply_mask(a_prev, mask, obs_res)
    for sweep in range(1, cfg.max_sweeps + 1):
        for n in rng.permutation(c.order):
            c = als_update_factor(c, t, int(n))
        a_new = recover(c)
        t = apply_mask(a_new, mask, obs_res)
        rse = _sweep_rse(a_new, a_prev)
        a_prev = a_new
        fit = dense.frob(t - a_new)  # error on the observed entries only
        edge = None
        if fit <= _FIT_FLOOR * obs_norm:
            log.debug("component=%d sweep=%d rse=%.3e params=%d edge=none",
                      index, sweep, rse, c.param_count())
            break
        if rse <= cfg.delta and c.param_count() <= gamma:
            edge = select_edge(projection_error_scores(c, t), state, c)
            if edge is not None:
                c = grow_edge(c, *edge, rng=rng)
        log.debug("component=%d sweep=%d rse=%.3e params=%d edge=%s",
                  index, sweep, rse, c.param_count(),
                  "none" if edge is None else f"{edge[0]}-{edge[1]}")
        if edge is None and rse <= cfg.delta / 10:
            break
    return c


def mtnr_als_complete(m, mask, cfg, rng):
    """Complete ``m`` on the unobserved entries of ``mask`` by greedy ALS.

    Observed entries (mask True) are preserved bitwise; missing ones are
    filled with the summed reconstructions of the fitted components.
    Returns a :class:`CompletionResult`.
    """
    return _complete(m, mask, cfg, rng, _fit_als_component)


# ---------------------------------------------------------------------------
# ADMM solver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdmmConfig(AtlConfig):
    """ALS knobs plus the split-variable penalty schedule.

    lam         weight of the data-fit term against the nuclear penalties
    rho         initial penalty on the factor/auxiliary splits
    rho_max     penalty cap
    rho_growth  multiplicative penalty growth per iteration
    """

    lam: float = 10.0
    rho: float = 0.1
    rho_max: float = 30.0
    rho_growth: float = 1.01

    def validate(self):
        super().validate()
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if not 0 < self.rho <= self.rho_max:
            raise ValueError(
                f"need 0 < rho <= rho_max, got rho={self.rho} "
                f"rho_max={self.rho_max}")
        if self.rho_growth < 1:
            raise ValueError(
                f"rho_growth must be >= 1, got {self.rho_growth}")


@dataclass
class AdmmState:
    """Split variables for one component: per (factor i, mode n) an auxiliary
    tensor ``aux[i][n]`` and a multiplier ``mult[i][n]``, both shaped like
    factor i, plus the current penalty."""

    aux: list
    mult: list
    rho: float

    @classmethod
    def zeros_like(cls, component, rho):
        shapes = [f.shape for f in component.factors]
        return cls(aux=[[np.zeros(s) for _ in range(component.order)]
                        for s in shapes],
                   mult=[[np.zeros(s) for _ in range(component.order)]
                         for s in shapes],
                   rho=rho)

    def grown_to(self, component):
        """Zero-pad every tensor to the (possibly grown) factor shapes."""
        for i, f in enumerate(component.factors):
            self.aux[i] = [_pad_to(g, f.shape) for g in self.aux[i]]
            self.mult[i] = [_pad_to(y, f.shape) for y in self.mult[i]]
        for i, f in enumerate(component.factors):
            assert all(g.shape == f.shape for g in self.aux[i])
            assert all(y.shape == f.shape for y in self.mult[i])
        return self


def _pad_to(arr, shape):
    pad = [(0, want - have) for have, want in zip(arr.shape, shape)]
    if any(after for _, after in pad):
        return np.pad(arr, pad)
    return arr


def admm_update_factor(component, state, t_tensor, i, cfg):
    """Regularized least-squares update of factor ``i`` (the Z step).

    Minimizes the penalty-augmented fit, whose normal matrix is the Gram
    matrix of the remainder network plus ``rho * order`` on the diagonal —
    always invertible, so a plain solve suffices.
    """
    order = component.order
    b = dense.matricize_prefix(recover_excluding(component, {i}), order - 1)
    gy = state.rho * state.aux[i][0] + state.mult[i][0]
    for n in range(1, order):
        gy = gy + state.rho * state.aux[i][n] + state.mult[i][n]
    rhs = dense.matricize_mode(gy, i) + \
        cfg.lam * (dense.matricize_mode(t_tensor, i) @ b)
    gram = cfg.lam * (b.T @ b) + state.rho * order * np.eye(b.shape[1])
    z = np.linalg.solve(gram, rhs.T).T
    out = component.copy()
    out.factors[i] = dense.fold_mode(z, i, component.factors[i].shape)
    return out


def admm_update_aux(component, state, i, n):
    """Proximal step for one auxiliary tensor: SVT on the mode-n unfolding.

    Modes of size one are passed through untouched — their unfolding is a
    vector and the nuclear penalty on it degenerates.
    """
    shifted = component.factors[i] - state.mult[i][n] / state.rho
    if shifted.shape[n] == 1:
        return shifted
    mat = dense.matricize_mode(shifted, n)
    return dense.fold_mode(svt(mat, 1.0 / state.rho), n, shifted.shape)


def admm_update_multiplier(state, component, i, n):
    """Dual ascent on one multiplier: ``Y += rho * (G - Z)``."""
    return state.mult[i][n] + state.rho * (state.aux[i][n]
                                           - component.factors[i])


def _admm_objective(component, state, fit, cfg):
    nuclear = 0.0
    for i in range(component.order):
        for n in range(component.order):
            g = state.aux[i][n]
            if g.shape[n] == 1:
                continue
            nuclear += np.linalg.svd(dense.matricize_mode(g, n),
                                     compute_uv=False).sum()
    return nuclear + 0.5 * cfg.lam * fit ** 2


def _fit_admm_component(obs_res, mask, cfg, rng, index):
    gamma = cfg.resolve_gamma(obs_res.shape)
    obs_norm = dense.frob(obs_res)
    c = _init_small(obs_res, cfg, rng)
    state = AdmmState.zeros_like(c, cfg.rho)
    selection = EdgeSelectionState()
    a_prev = recover(c)
    t = apply_mask(a_prev, mask, obs_res)
    for sweep in range(1, cfg.max_sweeps + 1):
        for i in range(c.order):
            c = admm_update_factor(c, state, t, i, cfg)
        for i in range(c.order):
            for n in range(c.order):
                state.aux[i][n] = admm_update_aux(c, state, i, n)
        for i in range(c.order):
            for n in range(c.order):
                state.mult[i][n] = admm_update_multiplier(state, c, i, n)
        a_new = recover(c)
        t = apply_mask(a_new, mask, obs_res)
        state.rho = min(cfg.rho_growth * state.rho, cfg.rho_max)
        rse = _sweep_rse(a_new, a_prev)
        a_prev = a_new
        fit = dense.frob(t - a_new)
        primal = sum(dense.frob(state.aux[i][n] - c.factors[i])
                     for i in range(c.order) for n in range(c.order))
        edge = None
        if fit <= _FIT_FLOOR * obs_norm:
            log.debug("component=%d sweep=%d rse=%.3e params=%d edge=none "
                      "rho=%.4f primal_residual=%.3e objective=%.6e",
                      index, sweep, rse, c.param_count(), state.rho, primal,
                      _admm_objective(c, state, fit, cfg))
            break
        if rse <= cfg.delta and c.param_count() <= gamma:
            edge = select_edge(projection_error_scores(c, t), selection, c)
            if edge is not None:
                c = grow_edge(c, *edge, rng=rng)
                state = state.grown_to(c)
        log.debug("component=%d sweep=%d rse=%.3e params=%d edge=%s rho=%.4f "
                  "primal_residual=%.3e objective=%.6e",
                  index, sweep, rse, c.param_count(),
                  "none" if edge is None else f"{edge[0]}-{edge[1]}",
                  state.rho, primal, _admm_objective(c, state, fit, cfg))
        if edge is None and rse <= cfg.delta / 10:
            break
    return c


def mtnr_admm_complete(m, mask, cfg, rng):
    """Complete ``m`` like :func:`mtnr_als_complete`, with nuclear-norm
    pressure on every factor unfolding via ADMM splitting.

    ``cfg`` must be an :class:`AdmmConfig`; the penalty restarts at
    ``cfg.rho`` for every new component.  Returns a
    :class:`CompletionResult` with observed entries preserved bitwise.
    """
    return _complete(m, mask, cfg, rng, _fit_admm_component)
