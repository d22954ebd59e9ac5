import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poissonridge.shrinkage import (BandNoiseModel, ThresholdPolicy,
                                    apply_shrinkage, estimate_band_noise,
                                    select_pyramid_thresholds,
                                    select_threshold, soft_threshold,
                                    threshold_grid)
from poissonridge.wavelet import WaveletSpec, dwt_forward


def test_soft_threshold_hand_values():
    assert soft_threshold(3.0, 1.0) == 2.0
    assert soft_threshold(-3.0, 1.0) == -2.0
    assert soft_threshold(0.5, 1.0) == 0.0
    assert np.allclose(soft_threshold(np.array([-2.0, -0.1, 0.0, 0.1, 2.0]), 0.5),
                       [-1.5, 0.0, 0.0, 0.0, 1.5])
    assert np.allclose(soft_threshold(np.array([4.0, -4.0]), 0.0), [4.0, -4.0])
    with pytest.raises(ValueError):
        soft_threshold(1.0, -0.5)


@given(st.floats(-1e6, 1e6), st.floats(0, 1e6))
def test_soft_threshold_magnitude_law(w, tau):
    out = float(soft_threshold(w, tau))
    assert abs(out) == pytest.approx(max(abs(w) - tau, 0.0))
    assert out * w >= 0.0  # never flips sign


def test_estimate_band_noise_orthonormal_atom_variance_equals_rate():
    # approximation of a constant rate lam is gain * lam; the predicted
    # detail variance should come back as exactly lam at every level,
    # because orthonormal atoms have sum psi^2 = 1
    lam = 3.5
    for level in (1, 2):
        spec = WaveletSpec("haar", 2, "undecimated")
        gain = np.sqrt(2.0) ** level
        approx = np.full(16, gain * lam)
        model = estimate_band_noise(np.zeros(16), approx, spec, level)
        assert np.allclose(model.variances, lam)
        assert model.scale == pytest.approx(np.sqrt(lam))


def test_estimate_band_noise_clamps_negative_approximations():
    spec = WaveletSpec("haar", 1, "undecimated")
    model = estimate_band_noise(np.zeros(4), np.array([-5.0, -1.0, 0.0, 2.0]),
                                spec, 1)
    assert model.variances.min() == 0.0
    assert np.all(model.variances >= 0.0)


def test_estimate_band_noise_shape_mismatch():
    spec = WaveletSpec("haar", 1, "undecimated")
    with pytest.raises(ValueError):
        estimate_band_noise(np.zeros(4), np.zeros(5), spec, 1)


def test_threshold_grid_layout():
    policy = ThresholdPolicy(grid_points=6, grid_max=5.0)
    assert np.allclose(threshold_grid(policy, 2.0), [0, 2, 4, 6, 8, 10])


def test_policy_validation():
    with pytest.raises(ValueError):
        ThresholdPolicy(selector="minimax")
    with pytest.raises(ValueError):
        ThresholdPolicy(grid_points=1)
    with pytest.raises(ValueError):
        ThresholdPolicy(grid_max=0.0)
    # long and short selector spellings are the same policy
    assert ThresholdPolicy(selector="sure-gaussian-approx").selector == "sure"
    assert ThresholdPolicy(selector="oracle").selector == "oracle-erm"


def test_fixed_selector_scales_band_noise():
    noise = BandNoiseModel(variances=np.ones(4), scale=2.0)
    policy = ThresholdPolicy(selector="fixed", fixed_scale=3.0)
    assert select_threshold(np.ones(4), noise, policy) == 6.0


def test_oracle_erm_attains_grid_minimum():
    rng = np.random.default_rng(0)
    ref = rng.normal(0, 2, size=200)
    w = ref + rng.normal(0, 1, size=200)
    noise = BandNoiseModel(variances=np.ones(200), scale=1.0)
    policy = ThresholdPolicy(selector="oracle-erm", grid_points=41, grid_max=4.0)
    tau = select_threshold(w, noise, policy, reference=ref)
    grid = threshold_grid(policy, noise.scale)
    risks = np.array([np.sum((soft_threshold(w, t) - ref) ** 2) for t in grid])
    assert np.sum((soft_threshold(w, tau) - ref) ** 2) == risks.min()


def test_oracle_erm_noiseless_band_selects_zero():
    # shrinking an already-clean band only adds error
    w = np.array([3.0, -1.0, 0.5, 2.0])
    noise = BandNoiseModel(variances=np.ones(4), scale=1.0)
    policy = ThresholdPolicy(selector="oracle-erm")
    assert select_threshold(w, noise, policy, reference=w.copy()) == 0.0


def test_oracle_erm_requires_matching_reference():
    noise = BandNoiseModel(variances=np.ones(4), scale=1.0)
    policy = ThresholdPolicy(selector="oracle-erm")
    with pytest.raises(ValueError):
        select_threshold(np.ones(4), noise, policy)
    with pytest.raises(ValueError):
        select_threshold(np.ones(4), noise, policy, reference=np.ones(5))


def test_sure_selector_frozen_hand_case():
    # risk(tau) = sum v_i (1 - 2 * [|w_i| <= tau]) + min(w_i^2, tau^2)
    # w = [.5, .5, 4, -4], v = 1: risk(0)=4, risk(1)=2.5, risk(2)=8.5,
    # rising after, so tau = 1 wins
    w = np.array([0.5, 0.5, 4.0, -4.0])
    noise = BandNoiseModel(variances=np.ones(4), scale=1.0)
    policy = ThresholdPolicy(selector="sure", grid_points=6, grid_max=5.0)
    assert select_threshold(w, noise, policy) == 1.0


def test_oracle_erm_pure_noise_band_zeroes_everything():
    # clean coefficients are all zero, so risk is sum soft(w, tau)^2,
    # nonincreasing in tau; the selected tau must zero the whole band,
    # and the smaller-tau tie break lands on the first grid point that
    # does (0.4 here, the max magnitude)
    w = np.array([0.4, -0.3, 0.2, 0.1, -0.25])
    noise = BandNoiseModel(variances=np.full(5, 0.01), scale=0.1)
    policy = ThresholdPolicy(selector="oracle-erm", grid_points=51, grid_max=5.0)
    tau = select_threshold(w, noise, policy, reference=np.zeros(5))
    assert np.all(soft_threshold(w, tau) == 0.0)
    assert tau == pytest.approx(0.4)


def test_sure_is_unbiased_for_gaussian_bands():
    # paired check: for W ~ N(theta, v), SURE(tau) and the realized loss
    # ||soft(W, tau) - theta||^2 agree in expectation at every tau
    rng = np.random.default_rng(0)
    theta = np.array([0.0, 0.5, 1.0, 2.0, 4.0, -1.5, -3.0, 0.25])
    v = 1.0
    taus = np.linspace(0.0, 3.0, 7)
    trials = 1000
    w = theta + rng.normal(0, np.sqrt(v), size=(trials, theta.size))
    for tau in taus:
        shrunk = np.sign(w) * np.maximum(np.abs(w) - tau, 0.0)
        loss = ((shrunk - theta) ** 2).sum(axis=1)
        sure = (v * (1 - 2 * (np.abs(w) <= tau))
                + np.minimum(w ** 2, tau ** 2)).sum(axis=1)
        paired = sure - loss
        assert abs(paired.mean()) <= 3 * paired.std(ddof=1) / np.sqrt(trials)


def test_sure_ties_break_toward_smaller_tau():
    w = np.zeros(3)
    noise = BandNoiseModel(variances=np.zeros(3), scale=1.0)
    policy = ThresholdPolicy(selector="sure", grid_points=11, grid_max=2.0)
    assert select_threshold(w, noise, policy) == 0.0


def test_zero_scale_and_empty_band_select_zero():
    policy = ThresholdPolicy(selector="sure")
    noise = BandNoiseModel(variances=np.ones(4), scale=0.0)
    assert select_threshold(np.ones(4), noise, policy) == 0.0
    assert select_threshold(np.array([]), noise, policy) == 0.0


def make_pyramid(seed, levels=2, batch=None):
    rng = np.random.default_rng(seed)
    shape = (32,) if batch is None else (32, batch)
    x = rng.uniform(0, 6, size=shape)
    return dwt_forward(x, WaveletSpec("haar", levels, "undecimated"))


def noise_for(pyr, value=1.0):
    return [BandNoiseModel(variances=np.full(np.shape(d), value), scale=np.sqrt(value))
            for d in pyr.details]


def test_per_band_thresholds_differ_pooled_shared():
    pyr = make_pyramid(1)
    models = noise_for(pyr)
    per = select_pyramid_thresholds(pyr, ThresholdPolicy(selector="sure"), models)
    assert len(per) == len(pyr.details)
    pooled = select_pyramid_thresholds(
        pyr, ThresholdPolicy(selector="sure", per_band=False), models)
    assert len(set(pooled)) == 1


def test_pooled_matches_concatenated_selection():
    pyr = make_pyramid(2)
    models = noise_for(pyr, value=2.0)
    policy = ThresholdPolicy(selector="sure", per_band=False)
    pooled = select_pyramid_thresholds(pyr, policy, models)
    w = np.concatenate([d.ravel() for d in pyr.details])
    v = np.concatenate([m.variances.ravel() for m in models])
    direct = select_threshold(
        w, BandNoiseModel(variances=v, scale=np.sqrt(np.median(v))), policy)
    assert pooled[0] == direct


def test_threshold_count_mismatch():
    pyr = make_pyramid(3)
    with pytest.raises(ValueError):
        select_pyramid_thresholds(pyr, ThresholdPolicy(), noise_for(pyr)[:1])
    with pytest.raises(ValueError):
        apply_shrinkage(pyr, ThresholdPolicy(), noise_for(pyr), thresholds=[1.0])


def test_apply_shrinkage_leaves_approximation_untouched():
    pyr = make_pyramid(4, batch=3)
    out = apply_shrinkage(pyr, ThresholdPolicy(selector="fixed", fixed_scale=1.0),
                          noise_for(pyr))
    assert np.array_equal(out.approximation, pyr.approximation)
    assert out.approximation is not pyr.approximation
    for shrunk, raw in zip(out.details, pyr.details):
        assert np.allclose(shrunk, soft_threshold(raw, 1.0))
    assert out.spec == pyr.spec and out.original_length == pyr.original_length


def test_apply_shrinkage_honors_explicit_thresholds():
    pyr = make_pyramid(5)
    out = apply_shrinkage(pyr, ThresholdPolicy(), noise_for(pyr),
                          thresholds=[0.7, 0.0])
    assert np.allclose(out.details[0], soft_threshold(pyr.details[0], 0.7))
    assert np.array_equal(out.details[1], pyr.details[1])
