import itertools
import json

import numpy as np
import pytest
from sklearn.base import clone

import temquant as tq
from temquant.interval_stats import Density


def gaussian_density(support=(0.0, 1.0), mu=0.4, sigma=0.15):
    lo, hi = support
    return Density.from_callable(
        lambda x: np.exp(-0.5 * ((x - mu) / sigma) ** 2), support, normalize=True)


def sample_pool(n=20000, seed=0):
    return np.random.default_rng(seed).normal(0.4, 0.15, n)


def designed(designer, bits):
    if designer == "uniform":
        return tq.design_uniform((0.0, 1.0), bits)
    if designer == "compander":
        return tq.design_compander(tq.CompanderSpec(0.2, gaussian_density()), bits)
    codebook, _ = tq.design_lloyd_max(sample_pool(), bits)
    return codebook


def test_design_uniform_one_bit():
    cb = tq.design_uniform((0.0, 1.0), 1)
    assert np.allclose(cb.boundaries, [0.0, 0.5, 1.0])
    assert np.allclose(cb.levels, [0.25, 0.75])


def test_design_uniform_interval_support_cell_width():
    cb = tq.design_uniform((6.818e-4, 7.5e-3), 2)
    widths = np.diff(cb.boundaries)
    assert np.allclose(widths, (7.5e-3 - 6.818e-4) / 4)
    assert widths[0] == pytest.approx(1.7045e-3, rel=1e-3)


def test_design_uniform_error_bound():
    cb = tq.design_uniform((0.0, 1.0), 3)
    x = np.random.default_rng(1).uniform(0.0, 1.0, 1000)
    _, levels = tq.quantize_sequence(cb, x)
    assert np.max(np.abs(x - levels)) <= (1.0 / 8) / 2 + 1e-12


def test_design_uniform_rejects_bad_bits():
    with pytest.raises(ValueError):
        tq.design_uniform((0.0, 1.0), 0)


def test_quantize_scalar_and_clamping():
    cb = tq.design_uniform((0.0, 1.0), 1)
    assert tq.quantize(cb, 0.3) == (0, 0.25)
    assert tq.quantize(cb, -5.0) == (0, 0.25)
    assert tq.quantize(cb, 5.0) == (1, 0.75)
    # tie on an interior boundary goes to the right cell
    assert tq.quantize(cb, 0.5) == (1, 0.75)


def test_quantize_sequence_empty():
    cb = tq.design_uniform((0.0, 1.0), 2)
    idx, levels = tq.quantize_sequence(cb, [])
    assert idx.size == 0 and levels.size == 0


@pytest.mark.parametrize("designer", ["uniform", "compander", "lloyd-max"])
@pytest.mark.parametrize("bits", range(2, 13))
def test_codebook_interleaving_and_idempotence(designer, bits):
    cb = designed(designer, bits)
    assert cb.boundaries.size == 2 ** bits + 1
    assert np.all(np.diff(cb.boundaries) > 0)
    assert np.all(cb.levels > cb.boundaries[:-1])
    assert np.all(cb.levels < cb.boundaries[1:])
    x = np.random.default_rng(bits).uniform(*cb.support, 500)
    _, once = tq.quantize_sequence(cb, x)
    _, twice = tq.quantize_sequence(cb, once)
    assert np.array_equal(once, twice)


def test_compander_uniform_density_matches_uniform_codebook():
    flat = Density.from_callable(lambda x: np.ones_like(x), (0.0, 1.0),
                                 normalize=True)
    for gamma in (0.1, 0.5, 1.0):
        cb = tq.design_compander(tq.CompanderSpec(gamma, flat), 3)
        ref = tq.design_uniform((0.0, 1.0), 3)
        assert np.allclose(cb.boundaries, ref.boundaries, atol=1e-12)
        assert np.allclose(cb.levels, ref.levels, atol=1e-12)


def test_compander_small_gamma_tends_to_uniform():
    cb = tq.design_compander(tq.CompanderSpec(1e-3, gaussian_density()), 4)
    ref = tq.design_uniform((0.0, 1.0), 4)
    assert np.max(np.abs(cb.boundaries - ref.boundaries)) < 0.01


def test_compander_closed_form_inverse_square():
    # p(T) ~ 1/T^2 on [1, 2]: escort CDF at gamma=1 is G(T) = 2(1 - 1/T),
    # so the one-bit boundary sits at G^{-1}(1/2) = 4/3.
    density = Density.from_callable(lambda t: 2.0 / t ** 2, (1.0, 2.0))
    cb = tq.design_compander(tq.CompanderSpec(1.0, density), 1)
    assert cb.boundaries[1] == pytest.approx(4.0 / 3.0, abs=1e-5)


def test_compander_consistency_with_transform_domain():
    spec = tq.CompanderSpec(0.2, gaussian_density())
    cb = tq.design_compander(spec, 4)
    x = np.random.default_rng(3).uniform(*spec.support, 2000)
    via_codebook = cb.indices(x)
    via_transform = np.clip((spec.compress(x) * cb.n_levels).astype(int),
                            0, cb.n_levels - 1)
    assert np.array_equal(via_codebook, via_transform)


def test_compander_rejects_bad_gamma():
    with pytest.raises(ValueError):
        tq.CompanderSpec(0.0, gaussian_density())
    with pytest.raises(ValueError):
        tq.CompanderSpec(1.5, gaussian_density())


def test_compander_rejects_empty_density():
    empty = Density(np.linspace(0.0, 1.0, 8), np.zeros(8))
    with pytest.raises(ValueError, match="degenerate"):
        tq.CompanderSpec(0.5, empty)


def test_lloyd_max_uniform_density_one_bit():
    flat = Density.from_callable(lambda x: np.ones_like(x), (0.0, 1.0),
                                 normalize=True)
    cb, _ = tq.design_lloyd_max(flat, 1)
    assert cb.boundaries[1] == pytest.approx(0.5, abs=1e-4)
    assert np.allclose(cb.levels, [0.25, 0.75], atol=1e-4)


def test_lloyd_max_uniform_density_two_bits():
    # density mode discretizes onto a fine grid, so the fixed point matches
    # the continuous optimum to the discretization resolution
    flat = Density.from_callable(lambda x: np.ones_like(x), (0.0, 1.0),
                                 normalize=True)
    cb, _ = tq.design_lloyd_max(flat, 2)
    assert np.allclose(cb.levels, [0.125, 0.375, 0.625, 0.875], atol=1e-4)


def test_lloyd_max_distortion_non_increasing():
    _, history = tq.design_lloyd_max(sample_pool(seed=7), 4)
    assert np.all(np.diff(history) <= 1e-15)


def test_lloyd_max_stationarity():
    samples = sample_pool(seed=11)
    cb, _ = tq.design_lloyd_max(samples, 3)
    idx, _ = tq.quantize_sequence(cb, samples)
    for j in range(cb.n_levels):
        cell = samples[idx == j]
        if cell.size:
            assert cb.levels[j] == pytest.approx(cell.mean(), rel=1e-6)
    assert np.allclose(cb.boundaries[1:-1],
                       0.5 * (cb.levels[:-1] + cb.levels[1:]), rtol=1e-12)


@pytest.mark.parametrize("bits", [1, 2])
def test_lloyd_max_matches_small_instance_brute_force(bits):
    # Exhaustive search over boundary placements at sample midpoints; the
    # iteration must reach the best achievable partition of this instance.
    samples = np.sort(np.random.default_rng(0).normal(0.0, 1.0, 16))
    cb, history = tq.design_lloyd_max(samples, bits)
    midpoints = 0.5 * (samples[1:] + samples[:-1])
    best = np.inf
    for combo in itertools.combinations(range(midpoints.size), 2 ** bits - 1):
        edges = midpoints[list(combo)]
        idx = np.searchsorted(edges, samples, side="right")
        distortion = sum(((samples[idx == j] - samples[idx == j].mean()) ** 2).sum()
                         for j in range(2 ** bits)) / samples.size
        best = min(best, distortion)
    assert best >= history[-1] * (1 - 1e-9)


def test_lloyd_max_requires_enough_distinct_samples():
    with pytest.raises(ValueError, match="distinct"):
        tq.design_lloyd_max(np.array([0.0, 1.0, 1.0, 1.0]), 2)


def test_tracked_quantization_error_is_memoryless(short_sequence, paper_params):
    # The receiver error after each event equals that event's own
    # quantization residual, e_{n+1} = Q(d_n) - d_n with
    # d_n = t_{n+1} - tracked_n, so in-support gaps keep the receiver
    # within half a cell regardless of history.
    bounds = tq.interval_bounds(paper_params, 1.0)
    cb = tq.design_uniform(bounds, 4)
    instants = short_sequence.instants
    idx, levels, tracked = tq.quantize_intervals_tracked(cb, instants)
    assert tracked[0] == instants[0]
    assert np.all(np.diff(tracked) > 0)
    assert np.array_equal(levels, cb.levels[idx])
    gaps = instants[1:] - tracked[:-1]
    residuals = np.array([tq.quantize(cb, d)[1] - d for d in gaps])
    assert np.allclose(tracked[1:] - instants[1:], residuals, atol=1e-15)
    cell = np.max(np.diff(cb.boundaries))
    in_support = (gaps >= bounds[0]) & (gaps <= bounds[1])
    assert np.all(np.abs(residuals[in_support]) <= 0.5 * cell + 1e-15)
    # quantized intervals stay inside the analytic support
    assert np.all(levels >= bounds[0]) and np.all(levels <= bounds[1])


def test_tracked_quantization_validates_input():
    cb = tq.design_uniform((0.0, 1.0), 2)
    with pytest.raises(ValueError):
        tq.quantize_intervals_tracked(cb, np.array([0.0]))
    with pytest.raises(ValueError):
        tq.quantize_intervals_tracked(cb, np.array([0.0, 0.5, 0.4]))


def test_codebook_json_round_trip():
    cb = tq.design_compander(tq.CompanderSpec(0.2, gaussian_density()), 3)
    text = cb.to_json()
    parsed = tq.Codebook.from_json(text)
    assert parsed.bits == cb.bits
    assert parsed.designer == "compander"
    assert parsed.gamma == pytest.approx(0.2)
    assert np.allclose(parsed.boundaries, cb.boundaries)
    assert np.allclose(parsed.levels, cb.levels)
    record = json.loads(text)
    assert set(record) == {"designer", "bits", "boundaries", "levels", "gamma"}


def test_codebook_rejects_broken_interleaving():
    with pytest.raises(ValueError):
        tq.Codebook(np.array([0.0, 0.5, 1.0]), np.array([0.6, 0.75]), 1)


def test_uniform_quantizer_estimator():
    est = tq.UniformQuantizer(bits=2).fit(np.array([0.0, 1.0, 0.5, 0.25]))
    idx = est.transform(np.array([0.1, 0.9]))
    assert idx.tolist() == [0, 3]
    levels = est.inverse_transform(idx)
    assert np.allclose(levels, [0.125, 0.875])
    column = est.transform(np.array([[0.1], [0.9]]))
    assert column.shape == (2, 1)


def test_compander_quantizer_estimator_with_density():
    est = tq.CompanderQuantizer(bits=3, gamma=0.2, density=gaussian_density())
    est.fit()
    assert est.codebook_.designer == "compander"
    x = np.random.default_rng(0).uniform(0, 1, 50)
    assert np.array_equal(est.codebook_.indices(x), est.transform(x))


def test_compander_quantizer_estimator_from_samples():
    est = tq.CompanderQuantizer(bits=3, gamma=0.2, n_bins=32)
    est.fit(sample_pool(seed=2))
    assert est.codebook_.n_levels == 8


def test_lloyd_max_estimator_tracks_distortion():
    est = tq.LloydMaxQuantizer(bits=3).fit(sample_pool(seed=3))
    assert est.distortion_ == pytest.approx(est.distortion_history_[-1])
    assert np.all(np.diff(est.distortion_history_) <= 1e-15)
    assert est.n_iter_ >= 1


def test_estimators_clone():
    for est in (tq.UniformQuantizer(bits=5),
                tq.CompanderQuantizer(bits=3, gamma=0.1),
                tq.LloydMaxQuantizer(bits=2, max_iterations=50)):
        cloned = clone(est)
        assert cloned.get_params() == est.get_params()


def test_estimator_requires_fit_before_transform():
    from sklearn.exceptions import NotFittedError
    with pytest.raises(NotFittedError):
        tq.UniformQuantizer().transform(np.array([0.1]))
