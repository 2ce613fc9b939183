"""Completion solvers: masking, SVT, the ADMM steps, and both end-to-end
solvers on small synthetic instances."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from mtnr import dense
from mtnr.atl import AtlConfig
from mtnr.completion import (AdmmConfig, AdmmState, admm_update_aux,
                             admm_update_factor, admm_update_multiplier,
                             apply_mask, mtnr_admm_complete,
                             mtnr_als_complete, svt)
from mtnr.network import TnComponent, grow_edge, recover, recover_excluding

from helpers import o_apply_mask, o_svt


def random_mask(rng, dims, rate):
    """Mask with exactly floor(rate * total) entries missing."""
    total = int(np.prod(dims))
    missing = rng.permutation(total)[:int(rate * total)]
    flat = np.ones(total, dtype=bool)
    flat[missing] = False
    return flat.reshape(dims)


def rank1(rng, dims):
    vecs = [rng.standard_normal(d) for d in dims]
    out = vecs[0]
    for v in vecs[1:]:
        out = np.tensordot(out, v, axes=0)
    return out


# ---------------------------------------------------------------------------
# apply_mask
# ---------------------------------------------------------------------------

def test_apply_mask_fully_observed_returns_fill():
    rng = np.random.default_rng(0)
    x, fill = rng.standard_normal((3, 4)), rng.standard_normal((3, 4))
    assert_array_equal(apply_mask(x, np.ones((3, 4), bool), fill), fill)


def test_apply_mask_fully_unobserved_returns_x():
    rng = np.random.default_rng(1)
    x, fill = rng.standard_normal((3, 4)), rng.standard_normal((3, 4))
    assert_array_equal(apply_mask(x, np.zeros((3, 4), bool), fill), x)


def test_apply_mask_matches_scalar_oracle():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((3, 4, 2))
    fill = rng.standard_normal((3, 4, 2))
    mask = rng.random((3, 4, 2)) < 0.5
    assert_array_equal(apply_mask(x, mask, fill), o_apply_mask(x, mask, fill))


def test_apply_mask_shape_mismatch():
    with pytest.raises(ValueError):
        apply_mask(np.zeros((2, 2)), np.ones((2, 3), bool), np.zeros((2, 2)))


# ---------------------------------------------------------------------------
# singular value thresholding
# ---------------------------------------------------------------------------

def test_svt_zero_threshold_is_identity():
    a = np.random.default_rng(3).standard_normal((4, 6))
    assert_allclose(svt(a, 0.0), a, atol=1e-12)


def test_svt_diagonal_spot():
    assert_allclose(svt(np.diag([3.0, 1.0]), 2.0), np.diag([1.0, 0.0]),
                    atol=1e-12)


def test_svt_matches_oracle():
    rng = np.random.default_rng(4)
    for _ in range(5):
        a = rng.standard_normal((5, 7))
        assert_allclose(svt(a, 0.3), o_svt(a, 0.3), atol=1e-12)


def test_svt_minimizes_proximal_objective():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((5, 7))
    mu = 0.5

    def objective(x):
        return mu * np.linalg.svd(x, compute_uv=False).sum() + \
            0.5 * dense.frob(x - a) ** 2

    best = objective(svt(a, mu))
    for _ in range(100):
        perturbed = svt(a, mu) + 0.01 * rng.standard_normal((5, 7))
        assert best <= objective(perturbed) + 1e-12


def test_svt_is_1_lipschitz():
    rng = np.random.default_rng(6)
    for _ in range(10):
        a = rng.standard_normal((4, 5))
        b = rng.standard_normal((4, 5))
        assert dense.frob(svt(a, 0.7) - svt(b, 0.7)) <= \
            dense.frob(a - b) * (1 + 1e-12)


def test_svt_negative_threshold_rejected():
    with pytest.raises(ValueError):
        svt(np.eye(2), -0.1)


# ---------------------------------------------------------------------------
# ADMM steps
# ---------------------------------------------------------------------------

def small_component(rng, dims=(3, 4, 2)):
    c = TnComponent.rank_one(dims, max_connections=3, rng=rng)
    c = grow_edge(c, 0, 1, rng=rng)
    c = grow_edge(c, 1, 2, rng=rng)
    return c


def randomized_state(rng, component, rho):
    state = AdmmState.zeros_like(component, rho)
    for i in range(component.order):
        for n in range(component.order):
            state.aux[i][n] = rng.standard_normal(component.factors[i].shape)
            state.mult[i][n] = rng.standard_normal(component.factors[i].shape)
    return state


def test_admm_factor_lam_zero_limit_is_mean_of_splits():
    rng = np.random.default_rng(7)
    c = small_component(rng)
    state = randomized_state(rng, c, rho=0.8)
    t = rng.standard_normal(c.dims)
    out = admm_update_factor(c, state, t, 1, AdmmConfig(lam=1e-14))
    want = sum(state.aux[1][n] + state.mult[1][n] / state.rho
               for n in range(3)) / 3
    assert_allclose(out.factors[1], want, atol=1e-10)


def admm_factor_objective(component, state, t, i, cfg):
    """The quantity the Z step minimizes, as a function of factor i."""
    fit = dense.frob(t - recover(component))
    penalty = sum(
        dense.frob(state.aux[i][n] - component.factors[i]
                   + state.mult[i][n] / state.rho) ** 2
        for n in range(component.order))
    return 0.5 * state.rho * penalty + 0.5 * cfg.lam * fit ** 2


def test_admm_factor_update_is_stationary():
    # numerical gradient of the step's objective vanishes at the update
    rng = np.random.default_rng(8)
    c = small_component(rng)
    state = randomized_state(rng, c, rho=0.5)
    t = rng.standard_normal(c.dims)
    cfg = AdmmConfig(lam=2.0)
    out = admm_update_factor(c, state, t, 0, cfg)
    f0 = out.factors[0]
    h = 1e-6
    grad = np.zeros(f0.size)
    for p in range(f0.size):
        for sign, bucket in ((1, 0), (-1, 1)):
            probe = out.copy()
            flat = probe.factors[0].ravel()
            flat[p] += sign * h
            probe.factors[0] = flat.reshape(f0.shape)
            val = admm_factor_objective(probe, state, t, 0, cfg)
            grad[p] += sign * val
    grad /= 2 * h
    assert np.linalg.norm(grad) <= 1e-5


def test_admm_factor_update_satisfies_normal_equations():
    rng = np.random.default_rng(9)
    c = small_component(rng)
    state = randomized_state(rng, c, rho=1.3)
    t = rng.standard_normal(c.dims)
    cfg = AdmmConfig(lam=3.0)
    out = admm_update_factor(c, state, t, 2, cfg)
    b = dense.matricize_prefix(recover_excluding(c, {2}), 2)
    gram = cfg.lam * (b.T @ b) + state.rho * 3 * np.eye(b.shape[1])
    gy = sum(state.rho * state.aux[2][n] + state.mult[2][n] for n in range(3))
    rhs = dense.matricize_mode(gy, 2) + \
        cfg.lam * dense.matricize_mode(t, 2) @ b
    z = dense.matricize_mode(out.factors[2], 2)
    assert dense.frob(z @ gram - rhs) <= 1e-8 * dense.frob(rhs)


def test_admm_aux_large_rho_returns_factor():
    rng = np.random.default_rng(10)
    c = small_component(rng)
    state = randomized_state(rng, c, rho=1e12)
    for n in range(3):
        assert_allclose(admm_update_aux(c, state, 0, n), c.factors[0],
                        atol=1e-9)


def test_admm_aux_skips_unit_modes():
    rng = np.random.default_rng(11)
    c = small_component(rng)  # edge (0,2) absent: factor 0 axis 2 has size 1
    state = randomized_state(rng, c, rho=2.0)
    got = admm_update_aux(c, state, 0, 2)
    assert_array_equal(got, c.factors[0] - state.mult[0][2] / 2.0)


def test_admm_aux_is_svt_of_shifted_unfolding():
    rng = np.random.default_rng(12)
    c = small_component(rng)
    state = randomized_state(rng, c, rho=1.7)
    got = admm_update_aux(c, state, 1, 0)
    shifted = c.factors[1] - state.mult[1][0] / state.rho
    want = dense.fold_mode(o_svt(dense.matricize_mode(shifted, 0), 1 / 1.7),
                           0, shifted.shape)
    assert_allclose(got, want, atol=1e-12)


def test_admm_aux_minimizes_proximal_objective():
    rng = np.random.default_rng(13)
    c = small_component(rng)
    state = randomized_state(rng, c, rho=0.9)
    got = admm_update_aux(c, state, 1, 1)

    def objective(g):
        nuc = np.linalg.svd(dense.matricize_mode(g, 1),
                            compute_uv=False).sum()
        return nuc + 0.5 * state.rho * dense.frob(
            g - c.factors[1] + state.mult[1][1] / state.rho) ** 2

    best = objective(got)
    for _ in range(50):
        assert best <= objective(
            got + 0.01 * rng.standard_normal(got.shape)) + 1e-10


def test_admm_multiplier_zero_residual_is_noop():
    rng = np.random.default_rng(14)
    c = small_component(rng)
    state = AdmmState.zeros_like(c, rho=1.0)
    for i in range(3):
        for n in range(3):
            state.aux[i][n] = c.factors[i].copy()
            state.mult[i][n] = rng.standard_normal(c.factors[i].shape)
    before = state.mult[2][1].copy()
    assert_array_equal(admm_update_multiplier(state, c, 2, 1), before)


def test_admm_multiplier_matches_elementwise_formula():
    rng = np.random.default_rng(15)
    c = small_component(rng)
    state = randomized_state(rng, c, rho=0.6)
    got = admm_update_multiplier(state, c, 1, 2)
    want = np.empty_like(got)
    y, g, z = state.mult[1][2], state.aux[1][2], c.factors[1]
    for idx in np.ndindex(*want.shape):
        want[idx] = y[idx] + 0.6 * (g[idx] - z[idx])
    assert_allclose(got, want, atol=1e-14)


def test_admm_state_tracks_growth():
    rng = np.random.default_rng(16)
    c = small_component(rng)
    state = randomized_state(rng, c, rho=1.0)
    kept = state.aux[0][1].copy()
    grown = grow_edge(c, 0, 2, rng=rng)
    state = state.grown_to(grown)
    for i in range(3):
        for n in range(3):
            assert state.aux[i][n].shape == grown.factors[i].shape
            assert state.mult[i][n].shape == grown.factors[i].shape
    # old block preserved, new slice zero-filled
    assert_array_equal(state.aux[0][1][:, :, :1], kept)
    assert_array_equal(state.aux[0][1][:, :, 1:], 0.0)


def test_admm_primal_residual_trends_down_on_fixed_structure():
    # soft feasibility property: over the tail half of the iterations the
    # split residual should not grow, in the vast majority of seeds
    good = 0
    for seed in range(20):
        rng = np.random.default_rng(400 + seed)
        c = small_component(rng)
        target = recover(c) + 0.05 * rng.standard_normal(c.dims)
        z = TnComponent(
            [f.copy() for f in c.factors], c.ranks.copy(), c.max_connections)
        # start the penalty above the factor scale: at tiny rho the SVT
        # threshold 1/rho flattens every auxiliary to zero and the split
        # stays infeasible for hundreds of iterations
        state = AdmmState.zeros_like(z, rho=5.0)
        cfg = AdmmConfig(lam=10.0, rho=5.0, rho_growth=1.05)
        residuals = []
        for _ in range(100):
            for i in range(3):
                z = admm_update_factor(z, state, target, i, cfg)
            for i in range(3):
                for n in range(3):
                    state.aux[i][n] = admm_update_aux(z, state, i, n)
            for i in range(3):
                for n in range(3):
                    state.mult[i][n] = admm_update_multiplier(state, z, i, n)
            state.rho = min(cfg.rho_growth * state.rho, 30.0)
            residuals.append(sum(
                dense.frob(state.aux[i][n] - z.factors[i])
                for i in range(3) for n in range(3)))
        tail = residuals[len(residuals) // 2:]
        if all(b <= a * (1 + 1e-6) + 1e-12 for a, b in zip(tail, tail[1:])):
            good += 1
    assert good >= 16


# ---------------------------------------------------------------------------
# end-to-end ALS completion
# ---------------------------------------------------------------------------

def test_als_complete_fully_observed_returns_input():
    rng = np.random.default_rng(17)
    m = rank1(rng, (4, 4, 4))
    mask = np.ones(m.shape, bool)
    result = mtnr_als_complete(m, mask, AtlConfig(), np.random.default_rng(1))
    assert_array_equal(result.recovered, m)
    model_sum = sum(recover(c) for c in result.model.components)
    assert dense.frob(model_sum - m) <= 1e-6 * dense.frob(m)


def test_als_complete_rank1_half_missing():
    rng = np.random.default_rng(18)
    truth = rank1(rng, (6, 6, 6, 6))
    mask = random_mask(rng, truth.shape, rate=0.5)
    m = np.where(mask, truth, 0.0)
    # budget sized for the known rank (a loose budget would spend the
    # observation surplus on interpolating the missing half), stall threshold
    # tight enough to run the observed fit to convergence, and best of three
    # starts -- masked ALS can swamp from an unlucky init
    cfg = AtlConfig(gamma=float(4 * 6), delta=1e-6, max_sweeps=500)
    best = min(
        dense.frob(
            mtnr_als_complete(m, mask, cfg,
                              np.random.default_rng(s)).recovered - truth)
        for s in (2, 3, 4))
    assert best <= 1e-3 * dense.frob(truth)


def test_als_complete_preserves_observed_bitwise():
    rng = np.random.default_rng(19)
    truth = rank1(rng, (5, 5, 5))
    mask = random_mask(rng, truth.shape, rate=0.3)
    result = mtnr_als_complete(truth, mask, AtlConfig(),
                               np.random.default_rng(3))
    assert_array_equal(result.recovered[mask], truth[mask])


def test_als_complete_rejects_empty_mask():
    with pytest.raises(ValueError):
        mtnr_als_complete(np.ones((3, 3, 3)), np.zeros((3, 3, 3), bool),
                          AtlConfig(), np.random.default_rng(0))


def test_als_complete_zero_observed_values():
    mask = random_mask(np.random.default_rng(20), (3, 3, 3), 0.5)
    result = mtnr_als_complete(np.zeros((3, 3, 3)), mask, AtlConfig(),
                               np.random.default_rng(4))
    assert_array_equal(result.recovered, np.zeros((3, 3, 3)))
    assert result.model.components == []


def test_als_complete_deterministic_given_seed():
    rng = np.random.default_rng(21)
    truth = rank1(rng, (5, 5, 5))
    mask = random_mask(rng, truth.shape, 0.4)
    a = mtnr_als_complete(truth, mask, AtlConfig(), np.random.default_rng(7))
    b = mtnr_als_complete(truth, mask, AtlConfig(), np.random.default_rng(7))
    assert_array_equal(a.recovered, b.recovered)


# ---------------------------------------------------------------------------
# end-to-end ADMM completion
# ---------------------------------------------------------------------------

def test_admm_complete_fully_observed_rank1():
    rng = np.random.default_rng(22)
    truth = rank1(rng, (5, 5, 5))
    mask = np.ones(truth.shape, bool)
    result = mtnr_admm_complete(truth, mask, AdmmConfig(max_sweeps=300),
                                np.random.default_rng(5))
    model_sum = sum(recover(c) for c in result.model.components)
    assert dense.frob(model_sum - truth) <= 1e-2 * dense.frob(truth)


def test_admm_complete_preserves_observed_bitwise():
    rng = np.random.default_rng(23)
    truth = rank1(rng, (5, 5, 5))
    mask = random_mask(rng, truth.shape, rate=0.4)
    result = mtnr_admm_complete(truth, mask, AdmmConfig(max_sweeps=200),
                                np.random.default_rng(6))
    assert_array_equal(result.recovered[mask], truth[mask])


def test_admm_complete_requires_admm_config_fields():
    with pytest.raises(ValueError):
        AdmmConfig(rho=-1.0).validate()
    with pytest.raises(ValueError):
        AdmmConfig(lam=0.0).validate()
    with pytest.raises(ValueError):
        AdmmConfig(rho_growth=0.5).validate()
