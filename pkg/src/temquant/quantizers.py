"""Scalar quantizer design: uniform, power-law compander, and Lloyd-Max.

All designers produce a :class:`Codebook` (decision boundaries interleaved
with reconstruction levels).  The estimator classes at the bottom wrap the
designers in a fit/transform interface so codebooks can be trained on
sample pools and composed with scikit-learn pipelines.
"""

import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import NumericalError
from .interval_stats import Density

__all__ = [
    "Codebook",
    "CompanderSpec",
    "design_uniform",
    "design_compander",
    "design_lloyd_max",
    "quantize",
    "quantize_sequence",
    "quantize_intervals_tracked",
    "UniformQuantizer",
    "CompanderQuantizer",
    "LloydMaxQuantizer",
]

LLOYD_MAX_TOLERANCE = 1e-10
LLOYD_MAX_MAX_ITERATIONS = 500
# Floor applied to tabulated densities before powering, relative to the peak;
# keeps the escort CDF invertible when empirical tail bins are empty.
ESCORT_DENSITY_FLOOR = 1e-12


def _check_bits(bits):
    bits = int(bits)
    if bits < 1:
        raise ValueError("bits must be at least 1")
    return bits


@dataclass(frozen=True)
class Codebook:
    """Scalar quantizer: 2**bits cells over a closed support.

    ``boundaries`` holds the B+1 strictly increasing decision boundaries
    (outer two are the support endpoints) and ``levels`` the B reconstruction
    values, interleaved as boundaries[i] < levels[i] < boundaries[i+1].
    Cells are half-open [b_i, b_{i+1}) with the last cell closed; inputs
    outside the support clamp to the outermost cells.
    """

    boundaries: np.ndarray
    levels: np.ndarray
    bits: int
    designer: str = "uniform"
    gamma: float = None

    def __post_init__(self):
        boundaries = np.ascontiguousarray(self.boundaries, dtype=float)
        levels = np.ascontiguousarray(self.levels, dtype=float)
        bits = _check_bits(self.bits)
        n_levels = 2 ** bits
        if boundaries.shape != (n_levels + 1,):
            raise ValueError(f"expected {n_levels + 1} boundaries for {bits} bits")
        if levels.shape != (n_levels,):
            raise ValueError(f"expected {n_levels} levels for {bits} bits")
        if np.any(np.diff(boundaries) <= 0):
            raise ValueError("boundaries must be strictly increasing")
        if np.any(levels <= boundaries[:-1]) or np.any(levels >= boundaries[1:]):
            raise ValueError("levels must interleave strictly with boundaries")
        boundaries.setflags(write=False)
        levels.setflags(write=False)
        object.__setattr__(self, "boundaries", boundaries)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "bits", bits)

    @property
    def n_levels(self):
        return self.levels.size

    @property
    def support(self):
        return (float(self.boundaries[0]), float(self.boundaries[-1]))

    def indices(self, x):
        """Cell index of each input; boundary ties go to the right cell."""
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.boundaries, x, side="right") - 1
        return np.clip(idx, 0, self.n_levels - 1)

    def to_dict(self):
        record = {
            "designer": self.designer,
            "bits": self.bits,
            "boundaries": self.boundaries.tolist(),
            "levels": self.levels.tolist(),
        }
        if self.gamma is not None:
            record["gamma"] = self.gamma
        return record

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, record):
        return cls(np.asarray(record["boundaries"], dtype=float),
                   np.asarray(record["levels"], dtype=float),
                   int(record["bits"]), record.get("designer", "uniform"),
                   record.get("gamma"))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def quantize(codebook, x):
    """Quantize a scalar.

    Returns
    -------
    (index, level) : tuple of (int, float)
    """
    idx = int(codebook.indices(x))
    return idx, float(codebook.levels[idx])


def quantize_sequence(codebook, values):
    """Elementwise quantization of a sequence.

    Returns
    -------
    (indices, levels) : tuple of ndarray
    """
    values = np.asarray(values, dtype=float)
    idx = codebook.indices(values)
    return idx, codebook.levels[idx]


def quantize_intervals_tracked(codebook, instants):
    """Quantize inter-event intervals with a tracking (closed-loop) coder.

    The coder mirrors the receiver: each transmitted interval is the
    quantized difference between the next true instant and the receiver's
    accumulated instant, so timing errors stay bounded by roughly one cell
    width instead of accumulating along the sequence.  The first instant is
    carried unquantized.

    Parameters
    ----------
    codebook : Codebook
    instants : ndarray
        Strictly increasing true event instants (length N+1).

    Returns
    -------
    indices : ndarray of int
        Transmitted cell indices (length N).
    levels : ndarray of float
        Dequantized intervals (length N).
    tracked_instants : ndarray of float
        Receiver-side instants, tracked_instants[0] == instants[0].
    """
    instants = np.asarray(instants, dtype=float)
    if instants.ndim != 1 or instants.size < 2:
        raise ValueError("need at least two instants")
    if np.any(np.diff(instants) <= 0):
        raise ValueError("instants must be strictly increasing")
    n = instants.size - 1
    indices = np.empty(n, dtype=np.int64)
    levels = np.empty(n)
    tracked = np.empty(instants.size)
    tracked[0] = instants[0]
    boundaries = codebook.boundaries
    codes = codebook.levels
    top = codes.size - 1
    acc = instants[0]
    for i in range(n):
        gap = instants[i + 1] - acc
        j = np.searchsorted(boundaries, gap, side="right") - 1
        j = 0 if j < 0 else (top if j > top else j)
        indices[i] = j
        levels[i] = codes[j]
        acc += codes[j]
        tracked[i + 1] = acc
    return indices, levels, tracked


def design_uniform(support, bits):
    """Equal-width codebook over a closed interval, levels at cell midpoints."""
    bits = _check_bits(bits)
    lo, hi = float(support[0]), float(support[1])
    if not np.isfinite([lo, hi]).all() or hi <= lo:
        raise ValueError("support must be a non-degenerate finite interval")
    boundaries = np.linspace(lo, hi, 2 ** bits + 1)
    levels = 0.5 * (boundaries[:-1] + boundaries[1:])
    return Codebook(boundaries, levels, bits, designer="uniform")


@dataclass(frozen=True)
class CompanderSpec:
    """Power-law (escort) compander: gamma in (0, 1] applied to a base density.

    The compressor is the CDF of the escort density
    p(u)**gamma / integral(p**gamma); gamma < 1 flattens concentrated regions
    so that uniform quantization in the compressed domain allocates finer
    cells where the base density is large.
    """

    gamma: float
    base_density: Density

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        peak = float(np.max(self.base_density.values))
        if peak <= 0:
            raise ValueError("degenerate base density: no mass to compand")
        grid = self.base_density.grid
        powered = np.maximum(self.base_density.values,
                             ESCORT_DENSITY_FLOOR * peak) ** self.gamma
        cdf = np.concatenate(
            ([0.0], np.cumsum(0.5 * (powered[1:] + powered[:-1]) * np.diff(grid))))
        cdf /= cdf[-1]
        cdf.setflags(write=False)
        object.__setattr__(self, "_escort_cdf", cdf)

    @property
    def support(self):
        return self.base_density.support

    def compress(self, x):
        """Escort CDF, mapping the support onto [0, 1]."""
        x = np.clip(np.asarray(x, dtype=float), *self.support)
        return np.interp(x, self.base_density.grid, self._escort_cdf)

    def expand(self, u):
        """Inverse of :meth:`compress` by monotone interpolation."""
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        return np.interp(u, self._escort_cdf, self.base_density.grid)


def design_compander(spec, bits):
    """Compand-then-uniform-quantize codebook.

    Boundaries are the escort CDF's quantiles at i/B and levels the
    quantiles at (i + 1/2)/B, i.e. uniform quantization in the compressed
    domain mapped back to the original one.
    """
    bits = _check_bits(bits)
    n_levels = 2 ** bits
    boundaries = spec.expand(np.arange(n_levels + 1) / n_levels)
    levels = spec.expand((np.arange(n_levels) + 0.5) / n_levels)
    return Codebook(boundaries, levels, bits, designer="compander", gamma=spec.gamma)


def _density_to_weighted_samples(density, n_grid=32768):
    """Discretize a density into (points, trapezoidal weights)."""
    lo, hi = density.support
    points = np.linspace(lo, hi, n_grid)
    vals = density.pdf(points)
    h = points[1] - points[0]
    weights = vals * h
    weights[0] *= 0.5
    weights[-1] *= 0.5
    return points, weights


def design_lloyd_max(samples_or_density, bits, tolerance=LLOYD_MAX_TOLERANCE,
                     max_iterations=LLOYD_MAX_MAX_ITERATIONS):
    """Locally MSE-optimal codebook by alternating centroid/midpoint updates.

    Accepts either a sample array (each sample weighted equally) or a
    :class:`Density` (discretized to weighted samples on a fine grid).
    Starting from the uniform codebook, levels are set to cell centroids and
    boundaries to midpoints of adjacent levels until the relative distortion
    change drops below ``tolerance`` or ``max_iterations`` is reached.

    Returns
    -------
    (codebook, distortions) : tuple of (Codebook, ndarray)
        The converged codebook and the per-iteration mean-squared
        distortion sequence; ``distortions[-1]`` is the final distortion.
    """
    bits = _check_bits(bits)
    n_levels = 2 ** bits
    if isinstance(samples_or_density, Density):
        points, weights = _density_to_weighted_samples(samples_or_density)
    else:
        points = np.asarray(samples_or_density, dtype=float).ravel()
        if np.unique(points).size < n_levels:
            raise ValueError(
                f"need at least {n_levels} distinct samples for {bits} bits")
        weights = np.ones_like(points)

    order = np.argsort(points)
    points = points[order]
    weights = weights[order]
    lo, hi = points[0], points[-1]
    if hi <= lo:
        raise ValueError("samples must span a non-degenerate interval")
    # Pad the support by a vanishing margin so a cell holding only an
    # extreme sample keeps its centroid strictly inside the cell.
    margin = 1e-12 * max(hi - lo, abs(lo), abs(hi))
    lo -= margin
    hi += margin

    boundaries = np.linspace(lo, hi, n_levels + 1)
    levels = 0.5 * (boundaries[:-1] + boundaries[1:])
    cum_w = np.concatenate(([0.0], np.cumsum(weights)))
    cum_wx = np.concatenate(([0.0], np.cumsum(weights * points)))
    cum_wx2 = np.concatenate(([0.0], np.cumsum(weights * points ** 2)))
    total_w = cum_w[-1]

    distortions = []
    previous = np.inf
    for _ in range(max_iterations):
        # Cells are contiguous sample ranges; centroids and distortion come
        # from prefix sums over the sorted samples.
        cut = np.searchsorted(points, boundaries[1:-1], side="left")
        starts = np.concatenate(([0], cut))
        stops = np.concatenate((cut, [points.size]))
        w = cum_w[stops] - cum_w[starts]
        wx = cum_wx[stops] - cum_wx[starts]
        occupied = w > 0
        new_levels = np.where(
            occupied, np.divide(wx, w, out=np.zeros_like(wx), where=occupied),
            0.5 * (boundaries[:-1] + boundaries[1:]))
        if np.any(np.diff(new_levels) <= 0):
            raise NumericalError("Lloyd-Max levels collapsed; samples too degenerate")
        levels = new_levels
        boundaries = np.concatenate(
            ([lo], 0.5 * (levels[:-1] + levels[1:]), [hi]))

        cut = np.searchsorted(points, boundaries[1:-1], side="left")
        starts = np.concatenate(([0], cut))
        stops = np.concatenate((cut, [points.size]))
        w = cum_w[stops] - cum_w[starts]
        wx = cum_wx[stops] - cum_wx[starts]
        wx2 = cum_wx2[stops] - cum_wx2[starts]
        distortion = float(np.sum(wx2 - 2 * levels * wx + w * levels ** 2) / total_w)
        distortions.append(distortion)
        if previous < np.inf and abs(previous - distortion) <= tolerance * max(previous, 1e-300):
            break
        previous = distortion

    codebook = Codebook(boundaries, levels, bits, designer="lloyd-max")
    return codebook, np.asarray(distortions)


class _QuantizerEstimator(BaseEstimator, TransformerMixin):
    """Shared fit/transform plumbing over a fitted ``codebook_``."""

    def _column(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 2 and X.shape[1] == 1:
            return X[:, 0], True
        if X.ndim == 1:
            return X, False
        raise ValueError("expected a 1-D array or a single-column 2-D array")

    def transform(self, X):
        """Map values to cell indices."""
        check_is_fitted(self, "codebook_")
        values, is_2d = self._column(X)
        idx = self.codebook_.indices(values)
        return idx[:, None] if is_2d else idx

    def inverse_transform(self, X):
        """Map cell indices back to reconstruction levels."""
        check_is_fitted(self, "codebook_")
        idx, is_2d = self._column(X)
        idx = np.clip(idx.astype(int), 0, self.codebook_.n_levels - 1)
        levels = self.codebook_.levels[idx]
        return levels[:, None] if is_2d else levels

    def quantize(self, X):
        """Convenience: values straight to reconstruction levels."""
        check_is_fitted(self, "codebook_")
        values, is_2d = self._column(X)
        _, levels = quantize_sequence(self.codebook_, values)
        return levels[:, None] if is_2d else levels


class UniformQuantizer(_QuantizerEstimator):
    """Equal-width scalar quantizer.

    Parameters
    ----------
    bits : int
        Codebook size is 2**bits.
    support : tuple of float, optional
        Fixed support; if None, taken from the data range during fit.
    """

    def __init__(self, bits=4, support=None):
        self.bits = bits
        self.support = support

    def fit(self, X, y=None):
        if self.support is not None:
            support = self.support
        else:
            values, _ = self._column(X)
            support = (float(values.min()), float(values.max()))
        self.codebook_ = design_uniform(support, self.bits)
        return self


class CompanderQuantizer(_QuantizerEstimator):
    """Power-law compander quantizer fitted to a density or sample pool.

    Parameters
    ----------
    bits : int
    gamma : float
        Escort exponent in (0, 1].
    density : Density, optional
        Base density; if None, an empirical density is built from the
        training samples.
    n_bins : int
        Histogram bins used when estimating the density from samples.
    support : tuple of float, optional
        Histogram range for the empirical density; defaults to data range.
    """

    def __init__(self, bits=4, gamma=0.2, density=None, n_bins=64, support=None):
        self.bits = bits
        self.gamma = gamma
        self.density = density
        self.n_bins = n_bins
        self.support = support

    def fit(self, X=None, y=None):
        from .signals import Histogram

        if self.density is not None:
            density = self.density
        else:
            if X is None:
                raise ValueError("samples are required when no density is given")
            values, _ = self._column(X)
            support = self.support or (float(values.min()), float(values.max()))
            edges = np.linspace(support[0], support[1], self.n_bins + 1)
            counts = np.histogram(values, edges)[0]
            hist = Histogram(edges, counts / counts.sum(), values.size)
            density = Density.from_histogram(hist)
        self.spec_ = CompanderSpec(self.gamma, density)
        self.codebook_ = design_compander(self.spec_, self.bits)
        return self


class LloydMaxQuantizer(_QuantizerEstimator):
    """Lloyd-Max scalar quantizer.

    Parameters
    ----------
    bits : int
    tolerance : float
        Relative distortion-change stopping threshold.
    max_iterations : int
    density : Density, optional
        Design from a density instead of the training samples.

    Attributes
    ----------
    codebook_ : Codebook
    distortion_ : float
        Final mean-squared distortion on the design input.
    distortion_history_ : ndarray
        Distortion after each iteration (non-increasing).
    """

    def __init__(self, bits=4, tolerance=LLOYD_MAX_TOLERANCE,
                 max_iterations=LLOYD_MAX_MAX_ITERATIONS, density=None):
        self.bits = bits
        self.tolerance = tolerance
        self.max_iterations = max_iterations
        self.density = density

    def fit(self, X=None, y=None):
        if self.density is not None:
            source = self.density
        else:
            if X is None:
                raise ValueError("samples are required when no density is given")
            source, _ = self._column(X)
        self.codebook_, self.distortion_history_ = design_lloyd_max(
            source, self.bits, self.tolerance, self.max_iterations)
        self.distortion_ = float(self.distortion_history_[-1])
        self.n_iter_ = self.distortion_history_.size
        return self
