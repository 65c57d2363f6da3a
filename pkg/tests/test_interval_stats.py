import numpy as np
import pytest

import temquant as tq
from temquant.interval_stats import Density

from conftest import OMEGA0


PARAMS = tq.TemParams(1.2, 1.0, 0.0015)


def uniform_amplitude_density(c=1.0):
    return Density.from_callable(lambda f: np.full_like(f, 1.0 / (2 * c)), (-c, c))


def gaussian_amplitude_density(c=1.0, sigma=0.35):
    def pdf(f):
        return np.exp(-0.5 * (f / sigma) ** 2)
    return Density.from_callable(pdf, (-c, c), normalize=True)


def test_uniform_law_closed_form():
    # For a flat amplitude law the induced density is delta/(2c T^2) on the
    # interval support, integrating exactly to one.
    induced = tq.induced_interval_pdf(uniform_amplitude_density(), PARAMS,
                                      amplitude_bound=1.0)
    t_min, t_max = induced.support
    assert t_min == pytest.approx(0.0015 / 2.2, rel=1e-12)
    assert t_max == pytest.approx(0.0015 / 0.2, rel=1e-12)
    expected = 0.0015 / (2.0 * induced.grid ** 2)
    assert np.allclose(induced.values, expected, rtol=1e-9)
    assert induced.normalization() == pytest.approx(1.0, abs=1e-6)


def test_gaussian_law_normalization_certificate():
    induced = tq.induced_interval_pdf(gaussian_amplitude_density(), PARAMS,
                                      amplitude_bound=1.0)
    assert induced.normalization() == pytest.approx(1.0, abs=1e-6)
    # unimodal with an interior mode
    mode = induced.grid[np.argmax(induced.values)]
    lo, hi = induced.support
    assert lo < mode < hi


def test_narrow_law_concentrates_at_delta_over_b():
    narrow = Density.from_callable(lambda f: np.full_like(f, 50.0), (-0.01, 0.01))
    induced = tq.induced_interval_pdf(narrow, PARAMS)
    lo, hi = induced.support
    center = PARAMS.threshold_delta / PARAMS.bias_b
    assert lo <= center <= hi
    assert (hi - lo) / center < 0.02


def test_probability_conserved_under_the_map():
    amplitude = gaussian_amplitude_density()
    induced = tq.induced_interval_pdf(amplitude, PARAMS, amplitude_bound=1.0)
    kd = PARAMS.scale_kappa * PARAMS.threshold_delta
    rng = np.random.default_rng(0)
    lo, hi = induced.support
    for _ in range(10):
        t_a, t_b = np.sort(rng.uniform(lo, hi, 2))
        f_lo = kd / t_b - PARAMS.bias_b
        f_hi = kd / t_a - PARAMS.bias_b
        assert induced.mass(t_a, t_b) == pytest.approx(
            amplitude.mass(f_lo, f_hi), abs=1e-6)


def test_induced_rejects_mass_outside_bound():
    wide = Density.from_callable(lambda f: np.full_like(f, 0.25), (-2.0, 2.0))
    with pytest.raises(ValueError, match="outside"):
        tq.induced_interval_pdf(wide, PARAMS, amplitude_bound=1.0)


def test_induced_requires_valid_bias():
    amplitude = uniform_amplitude_density(c=1.5)
    with pytest.raises(ValueError, match="bias"):
        tq.induced_interval_pdf(amplitude, PARAMS)


def test_empirical_histogram_normalized(short_sequence):
    hist = tq.empirical_interval_histogram([short_sequence], n_bins=32)
    assert hist.masses.sum() == pytest.approx(1.0, abs=1e-12)


def test_empirical_histogram_support(short_sequence, paper_params):
    bounds = tq.interval_bounds(paper_params, 1.0)
    hist = tq.empirical_interval_histogram([short_sequence], n_bins=32,
                                           support=bounds)
    assert hist.bin_edges[0] == pytest.approx(bounds[0])
    assert hist.bin_edges[-1] == pytest.approx(bounds[1])


def test_empirical_histogram_constant_signal_single_bin(paper_params):
    expected = paper_params.threshold_delta / paper_params.bias_b
    seq = tq.FiringSequence(0.0, np.full(50, expected))
    bounds = tq.interval_bounds(paper_params, 1.0)
    hist = tq.empirical_interval_histogram([seq], n_bins=64, support=bounds)
    occupied = np.nonzero(hist.masses)[0]
    assert occupied.size == 1
    assert hist.bin_edges[occupied[0]] <= expected <= hist.bin_edges[occupied[0] + 1]


def test_empirical_histogram_requires_intervals():
    with pytest.raises(ValueError):
        tq.empirical_interval_histogram([tq.FiringSequence(0.0, np.array([]))])


def test_empirical_histogram_rejects_unknown_weighting(short_sequence):
    with pytest.raises(ValueError):
        tq.empirical_interval_histogram([short_sequence], weighting="mass")


def test_divergence_identical_piecewise_constant_is_zero():
    density = Density(np.linspace(0.0, 1.0, 11), np.ones(11))
    hist = tq.Histogram(np.linspace(0.0, 1.0, 11), np.full(10, 0.1), 100)
    assert tq.distribution_divergence(hist, density) == pytest.approx(0.0, abs=1e-12)


def test_divergence_single_bin_vs_uniform():
    density = Density(np.linspace(0.0, 1.0, 11), np.ones(11))
    masses = np.zeros(10)
    masses[0] = 1.0
    hist = tq.Histogram(np.linspace(0.0, 1.0, 11), masses, 100)
    assert tq.distribution_divergence(hist, density) == pytest.approx(0.9, abs=1e-12)


def test_divergence_monte_carlo_oracle():
    # Draw a large sample directly from the density by inverse-CDF sampling;
    # its histogram must sit within TV 0.01 of the density.
    density = tq.induced_interval_pdf(gaussian_amplitude_density(), PARAMS,
                                      amplitude_bound=1.0)
    rng = np.random.default_rng(42)
    u = rng.uniform(0.0, density.normalization(), 1_000_000)
    grid_cdf = density.cdf(density.grid)
    samples = np.interp(u, grid_cdf, density.grid)
    edges = np.linspace(*density.support, 65)
    counts = np.histogram(samples, edges)[0].astype(float)
    hist = tq.Histogram(edges, counts / counts.sum(), samples.size)
    assert tq.distribution_divergence(hist, density) <= 0.01


def test_divergence_rejects_disjoint_supports():
    density = Density(np.linspace(0.0, 1.0, 11), np.ones(11))
    hist = tq.Histogram(np.linspace(2.0, 3.0, 11), np.full(10, 0.1), 10)
    with pytest.raises(ValueError, match="disjoint"):
        tq.distribution_divergence(hist, density)


def test_density_validation():
    with pytest.raises(ValueError):
        Density(np.array([0.0, 0.0, 1.0]), np.ones(3))  # non-increasing grid
    with pytest.raises(ValueError):
        Density(np.linspace(0, 1, 4), np.array([0.1, -0.2, 0.1, 0.0]))


def test_density_from_histogram_normalizes():
    edges = np.linspace(-1.0, 1.0, 9)
    masses = np.array([1, 2, 4, 8, 8, 4, 2, 1], dtype=float)
    hist = tq.Histogram(edges, masses / masses.sum(), 30)
    density = Density.from_histogram(hist)
    assert density.normalization() == pytest.approx(1.0, rel=1e-9)


def test_pooling_more_realizations_tightens_agreement(paper_params):
    # Seeded ergodic-averaging direction: the divergence of a single
    # realization exceeds that of a 20-realization pool.
    support = (-0.15, 0.15)
    pool = []
    amp_edges = np.linspace(-1.0, 1.0, 33)
    counts = np.zeros(32)
    for seed in range(20):
        process = tq.generate_realization(seed, OMEGA0, support,
                                          "gaussian-coefficients", 1.0)
        _, values = tq.evaluate_grid(process, 1e-5)
        counts += np.histogram(values, amp_edges)[0]
        pool.append(tq.encode(process, paper_params, 1e-5))
    amplitude_hist = tq.Histogram(amp_edges, counts / counts.sum(), 1)
    induced = tq.induced_interval_pdf(Density.from_histogram(amplitude_hist),
                                      paper_params, amplitude_bound=1.0)
    bounds = tq.interval_bounds(paper_params, 1.0)
    tv_one = tq.distribution_divergence(
        tq.empirical_interval_histogram(pool[:1], 32, support=bounds), induced)
    tv_pool = tq.distribution_divergence(
        tq.empirical_interval_histogram(pool, 32, support=bounds), induced)
    assert tv_pool < tv_one
