"""Distribution of firing intervals induced by the encoder.

The map from instantaneous amplitude f to interval length is
T = kappa*delta / (f + b), monotone on [-c, c].  Pushing an amplitude
density through this map gives the interval density

    p_T(T) = p_F(kappa*delta/T - b) * kappa*delta / T**2

supported on [kappa*delta/(b+c), kappa*delta/(b-c)] and zero elsewhere.
This module implements that transform for tabulated densities, the matching
empirical histogram estimate, and a total-variation comparison of the two.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Density",
    "induced_interval_pdf",
    "empirical_interval_histogram",
    "distribution_divergence",
]

DENSITY_GRID_SIZE = 4096


@dataclass(frozen=True)
class Density:
    """Probability density tabulated on a strictly increasing grid.

    Values between grid points are linearly interpolated; the density is
    zero outside the grid span.  ``normalization()`` reports the trapezoidal
    integral over the support, which serves as the normalization
    certificate of any transform that produced the density.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.ascontiguousarray(self.grid, dtype=float)
        values = np.ascontiguousarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("grid must contain at least two points")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if values.shape != grid.shape:
            raise ValueError("values must match the grid shape")
        if np.any(values < 0):
            raise ValueError("density values must be non-negative")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        cumulative = np.concatenate(
            ([0.0], np.cumsum(0.5 * (values[1:] + values[:-1]) * np.diff(grid))))
        cumulative.setflags(write=False)
        object.__setattr__(self, "_cumulative", cumulative)

    @property
    def support(self):
        return (float(self.grid[0]), float(self.grid[-1]))

    def pdf(self, x):
        """Pointwise density; zero outside the support."""
        return np.interp(np.asarray(x, dtype=float), self.grid, self.values,
                         left=0.0, right=0.0)

    def cdf(self, x):
        """Exact integral of the interpolant from the support's left edge."""
        x = np.asarray(x, dtype=float)
        clipped = np.clip(x, self.grid[0], self.grid[-1])
        j = np.clip(np.searchsorted(self.grid, clipped, side="right"),
                    1, self.grid.size - 1)
        g0, g1 = self.grid[j - 1], self.grid[j]
        v0, v1 = self.values[j - 1], self.values[j]
        vx = v0 + (v1 - v0) * (clipped - g0) / (g1 - g0)
        return self._cumulative[j - 1] + 0.5 * (v0 + vx) * (clipped - g0)

    def mass(self, lo, hi):
        """Probability mass of the interval [lo, hi]."""
        return float(self.cdf(hi) - self.cdf(lo))

    def normalization(self):
        """Trapezoidal integral over the support (the certificate)."""
        return float(self._cumulative[-1])

    def require_normalized(self, tol=1e-6):
        total = self.normalization()
        if abs(total - 1.0) > tol:
            raise ValueError(f"density integrates to {total!r}, expected 1 +/- {tol}")
        return self

    @classmethod
    def from_callable(cls, fn, support, n_grid=DENSITY_GRID_SIZE, normalize=False):
        """Tabulate a closed-form density on a uniform grid."""
        lo, hi = support
        grid = np.linspace(lo, hi, n_grid)
        values = np.asarray(fn(grid), dtype=float)
        if normalize:
            values = values / np.trapezoid(values, grid)
        return cls(grid, values)

    @classmethod
    def from_histogram(cls, histogram, n_grid=DENSITY_GRID_SIZE):
        """Interpolate a histogram's bin heights into a normalized density.

        Heights (mass/width) are anchored at the bin centers, extended flat
        to the outer edges, linearly interpolated onto a uniform grid, and
        renormalized to unit trapezoidal mass.
        """
        heights = histogram.masses / histogram.bin_widths
        grid = np.linspace(histogram.bin_edges[0], histogram.bin_edges[-1], n_grid)
        values = np.interp(grid, histogram.bin_centers, heights)
        total = np.trapezoid(values, grid)
        if total <= 0:
            raise ValueError("histogram carries no mass")
        return cls(grid, values / total)


def induced_interval_pdf(amplitude_pdf, params, amplitude_bound=None):
    """Push an amplitude density through the encoder's interval map.

    The returned density is tabulated on the image of the amplitude grid
    under f -> kappa*delta/(f + b), which concentrates points where the
    transformed density is steep; its ``normalization()`` certifies that the
    change of variables preserved unit mass.

    Parameters
    ----------
    amplitude_pdf : Density
        Amplitude law supported on [-c, c].
    params : TemParams
    amplitude_bound : float, optional
        If given, the amplitude support must lie within
        [-amplitude_bound, amplitude_bound].

    Returns
    -------
    Density
        Interval density on [kappa*delta/(b+c), kappa*delta/(b-c)].
    """
    f_lo, f_hi = amplitude_pdf.support
    if amplitude_bound is not None:
        slack = 1e-12 * max(1.0, amplitude_bound)
        if f_lo < -amplitude_bound - slack or f_hi > amplitude_bound + slack:
            raise ValueError("amplitude density has mass outside [-c, c]")
    params.require_valid_for(max(abs(f_lo), abs(f_hi)))

    kd = params.scale_kappa * params.threshold_delta
    f_grid = amplitude_pdf.grid
    t_grid = (kd / (params.bias_b + f_grid))[::-1]
    p_f = amplitude_pdf.values[::-1]
    values = p_f * kd / t_grid ** 2
    return Density(t_grid, values)


def empirical_interval_histogram(sequences, n_bins=64, support=None,
                                 weighting="duration"):
    """Pool firing sequences into a normalized interval histogram.

    With ``weighting='duration'`` each interval contributes mass
    proportional to its own length, matching an estimate built by sampling
    the current interval at a uniform time resolution (the same estimator
    used for the amplitude law).  ``weighting='count'`` weights every
    interval equally; event-triggered counting over-represents short
    intervals relative to the time-stationary law.

    Parameters
    ----------
    sequences : sequence of FiringSequence
    n_bins : int
    support : tuple of float, optional
        Histogram range; defaults to the span of the pooled intervals.
    weighting : {'duration', 'count'}

    Returns
    -------
    Histogram
    """
    from .signals import Histogram

    if weighting not in ("duration", "count"):
        raise ValueError("weighting must be 'duration' or 'count'")
    pooled = [s.intervals for s in sequences if len(s)]
    if not pooled:
        raise ValueError("no intervals to pool")
    intervals = np.concatenate(pooled)
    if support is None:
        support = (float(intervals.min()), float(intervals.max()))
    edges = np.linspace(support[0], support[1], n_bins + 1)
    weights = intervals if weighting == "duration" else None
    counts = np.histogram(intervals, edges, weights=weights)[0]
    total = counts.sum()
    if total <= 0:
        raise ValueError("pooled intervals fall outside the requested support")
    return Histogram(edges, counts / total, intervals.size)


def distribution_divergence(histogram, density):
    """Total-variation distance between a histogram and a density.

    Computed as half the summed absolute difference between each bin's
    empirical mass and the density's mass over the same bin.

    Returns
    -------
    float
        Value in [0, 1].
    """
    edges = histogram.bin_edges
    lo, hi = density.support
    if edges[-1] <= lo or edges[0] >= hi:
        raise ValueError("histogram and density have disjoint supports")
    model_mass = np.diff(density.cdf(edges))
    return float(0.5 * np.abs(histogram.masses - model_mass).sum())
