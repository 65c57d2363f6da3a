"""Synthesis and evaluation of bounded bandlimited stochastic signals.

A realization is a finite sinc expansion on a Nyquist-spaced lattice of
centers.  The lattice spacing pi/omega0 guarantees band limitation to
[-omega0, omega0] by construction, and a post-synthesis rescaling makes the
peak amplitude hit the requested bound exactly.
"""

from dataclasses import dataclass

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

__all__ = [
    "BandlimitedProcess",
    "Histogram",
    "generate_realization",
    "evaluate",
    "evaluate_grid",
    "estimate_amplitude_pdf",
]

AMPLITUDE_LAWS = ("gaussian-coefficients", "uniform-coefficients")

# Default evaluation resolution (seconds) for peak normalization and encoding.
DEFAULT_GRID_STEP = 1e-6


@dataclass(frozen=True)
class BandlimitedProcess:
    """A single realization: sum of sincs on a Nyquist-spaced lattice.

    Attributes
    ----------
    coefficients : ndarray of float
        Sinc amplitudes, one per center.
    centers : ndarray of float
        Center instants (s), uniformly spaced at pi/omega0.
    band_edge_omega0 : float
        Band edge (rad/s).
    amplitude_bound_c : float
        Peak amplitude bound; |evaluate(t)| <= c on the support.
    support : tuple of float
        Closed time interval (t_start, t_end) in seconds.
    """

    coefficients: np.ndarray
    centers: np.ndarray
    band_edge_omega0: float
    amplitude_bound_c: float
    support: tuple

    def __post_init__(self):
        coeffs = np.ascontiguousarray(self.coefficients, dtype=float)
        centers = np.ascontiguousarray(self.centers, dtype=float)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ValueError("coefficients must be a non-empty 1-D array")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        if centers.shape != coeffs.shape:
            raise ValueError("centers and coefficients must have equal length")
        if self.band_edge_omega0 <= 0:
            raise ValueError("band_edge_omega0 must be positive")
        if self.amplitude_bound_c <= 0:
            raise ValueError("amplitude_bound_c must be positive")
        t_start, t_end = self.support
        if not t_end > t_start:
            raise ValueError("support must be a non-degenerate interval")
        spacing = np.pi / self.band_edge_omega0
        if centers.size > 1:
            steps = np.diff(centers)
            if not np.allclose(steps, spacing, rtol=1e-9, atol=0.0):
                raise ValueError("centers must be spaced at exactly pi/omega0")
        coeffs.setflags(write=False)
        centers.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "support", (float(t_start), float(t_end)))

    @property
    def nyquist_period(self):
        """Lattice spacing pi/omega0 in seconds."""
        return np.pi / self.band_edge_omega0


@dataclass(frozen=True)
class Histogram:
    """Normalized histogram: bin edges, per-bin masses and the sample count."""

    bin_edges: np.ndarray
    masses: np.ndarray
    n_samples: int

    def __post_init__(self):
        edges = np.ascontiguousarray(self.bin_edges, dtype=float)
        masses = np.ascontiguousarray(self.masses, dtype=float)
        if edges.ndim != 1 or edges.size < 2:
            raise ValueError("bin_edges must contain at least two values")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("bin_edges must be strictly increasing")
        if masses.shape != (edges.size - 1,):
            raise ValueError("masses must have one entry per bin")
        if np.any(masses < 0):
            raise ValueError("masses must be non-negative")
        total = masses.sum()
        if total > 0 and abs(total - 1.0) > 1e-9:
            raise ValueError("masses must be normalized to unit total")
        edges.setflags(write=False)
        masses.setflags(write=False)
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "masses", masses)

    @property
    def bin_centers(self):
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def bin_widths(self):
        return np.diff(self.bin_edges)


def _sinc_series_reference(coefficients, centers, omega0, t):
    """Directly summed sinc series; slow but unconditionally correct."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for a, ck in zip(coefficients, centers):
        out += a * np.sinc(omega0 * (t - ck) / np.pi)
    return out


def _sinc_series_numpy(signed, coefficients, t_first, inv_spacing, t):
    u = (t - t_first) * inv_spacing
    k = np.arange(coefficients.size)
    near = np.abs(u[:, None] - k[None, :]) < 1e-3
    bad = near.any(axis=1)
    out = np.empty_like(u)
    good = ~bad
    if good.any():
        ug = u[good]
        acc = (signed[None, :] / (ug[:, None] - k[None, :])).sum(axis=1)
        out[good] = np.sin(np.pi * ug) / np.pi * acc
    if bad.any():
        ub = u[bad]
        out[bad] = (coefficients[None, :] * np.sinc(ub[:, None] - k[None, :])).sum(axis=1)
    return out


if njit is not None:

    @njit(cache=True)
    def _sinc_series_kernel(signed, coefficients, t_first, inv_spacing, t):
        # For a Nyquist-spaced lattice, sum a_k sinc(u - k) collapses to a
        # single sine evaluation:  sin(pi u)/pi * sum_k (-1)^k a_k / (u - k).
        # Points within 1e-3 of a lattice node are handled by the direct
        # sinc to avoid cancellation in the sine factor.
        n_k = coefficients.size
        out = np.empty(t.size)
        for i in range(t.size):
            u = (t[i] - t_first) * inv_spacing
            acc = 0.0
            near = -1
            for k in range(n_k):
                d = u - k
                if abs(d) < 1e-3:
                    near = k
                else:
                    acc += signed[k] / d
            val = np.sin(np.pi * u) / np.pi * acc
            if near >= 0:
                d = u - near
                if d == 0.0:
                    val += coefficients[near]
                else:
                    val += coefficients[near] * np.sin(np.pi * d) / (np.pi * d)
            out[i] = val
        return out

else:  # pragma: no cover
    _sinc_series_kernel = None


def _sinc_series(coefficients, centers, omega0, t):
    coeffs = np.ascontiguousarray(coefficients, dtype=float)
    signed = coeffs * (-1.0) ** np.arange(coeffs.size)
    inv_spacing = omega0 / np.pi
    t = np.ascontiguousarray(t, dtype=float)
    if _sinc_series_kernel is not None:
        return _sinc_series_kernel(signed, coeffs, centers[0], inv_spacing, t)
    return _sinc_series_numpy(signed, coeffs, centers[0], inv_spacing, t)  # pragma: no cover


def evaluate(process, t):
    """Evaluate the sinc series at time(s) ``t``.

    The value is sum_k coeff_k * sinc(omega0 * (t - center_k)) with
    sinc(x) = sin(x)/x and sinc(0) = 1.  Defined for all real t; accuracy
    as a model of the underlying process degrades outside the support.

    Parameters
    ----------
    process : BandlimitedProcess
    t : float or array_like
        Evaluation instant(s) in seconds.

    Returns
    -------
    float or ndarray
        Amplitude(s), matching the shape of ``t``.
    """
    arr = np.asarray(t, dtype=float)
    vals = _sinc_series(process.coefficients, process.centers,
                        process.band_edge_omega0, arr.ravel()).reshape(arr.shape)
    if arr.ndim == 0:
        return float(vals)
    return vals


def _support_grid(support, grid_step):
    t_start, t_end = support
    n = int(np.floor((t_end - t_start) / grid_step + 0.5)) + 1
    return t_start + grid_step * np.arange(n)


def evaluate_grid(process, grid_step=DEFAULT_GRID_STEP):
    """Sample the realization on a uniform grid covering its support.

    Parameters
    ----------
    process : BandlimitedProcess
    grid_step : float
        Grid resolution in seconds.

    Returns
    -------
    times, values : ndarray
        Ordered sample instants and the matching amplitudes.
    """
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    t_start, t_end = process.support
    if grid_step > t_end - t_start:
        raise ValueError("grid_step exceeds the support length")
    times = _support_grid(process.support, grid_step)
    values = _sinc_series(process.coefficients, process.centers,
                          process.band_edge_omega0, times)
    return times, values


def _lattice_centers(omega0, support):
    # One extra center beyond each support edge avoids a systematic taper
    # of boundary amplitudes.
    spacing = np.pi / omega0
    t_start, t_end = support
    first = t_start - spacing
    n = int(np.floor((t_end + spacing - first) / spacing + 1e-9)) + 1
    return first + spacing * np.arange(n)


def generate_realization(seed, omega0, support, amplitude_law="gaussian-coefficients",
                         target_bound_c=1.0, normalization_grid_step=DEFAULT_GRID_STEP):
    """Draw one realization and normalize its peak to the amplitude bound.

    Coefficients are drawn i.i.d. per lattice center (standard normal or
    uniform on [-1, 1]) and rescaled so that the peak absolute amplitude on
    a fine grid over the support equals ``target_bound_c`` exactly.

    Parameters
    ----------
    seed : int
        Seed for the coefficient draw; identical seeds give identical output.
    omega0 : float
        Band edge in rad/s.
    support : tuple of float
        Closed interval (t_start, t_end) in seconds.
    amplitude_law : {'gaussian-coefficients', 'uniform-coefficients'}
    target_bound_c : float
        Desired peak amplitude.
    normalization_grid_step : float
        Resolution of the grid used to locate the peak.

    Returns
    -------
    BandlimitedProcess
    """
    if omega0 <= 0:
        raise ValueError("omega0 must be positive")
    t_start, t_end = support
    if not t_end > t_start:
        raise ValueError("support must be a non-degenerate interval")
    if target_bound_c <= 0:
        raise ValueError("target_bound_c must be positive")
    if amplitude_law not in AMPLITUDE_LAWS:
        raise ValueError(f"amplitude_law must be one of {AMPLITUDE_LAWS}")

    centers = _lattice_centers(omega0, support)
    inside = np.count_nonzero((centers >= t_start) & (centers <= t_end))
    if inside == 0:
        raise ValueError("no sinc centers fit inside the support")

    rng = np.random.default_rng(seed)
    if amplitude_law == "gaussian-coefficients":
        raw = rng.standard_normal(centers.size)
    else:
        raw = rng.uniform(-1.0, 1.0, centers.size)

    coefficients = _normalized_coefficients(
        raw, centers, omega0, support, target_bound_c, normalization_grid_step)
    return BandlimitedProcess(coefficients, centers, float(omega0),
                              float(target_bound_c), (float(t_start), float(t_end)))


def _normalized_coefficients(raw, centers, omega0, support, target_bound_c, grid_step):
    """Rescale raw coefficients so the peak grid amplitude equals the bound."""
    times = _support_grid(support, grid_step)
    values = _sinc_series(raw, centers, omega0, times)
    peak = np.max(np.abs(values))
    if peak == 0.0:
        raise ValueError("cannot normalize the zero signal")
    return np.asarray(raw, dtype=float) * (target_bound_c / peak)


def estimate_amplitude_pdf(realizations, grid_step=DEFAULT_GRID_STEP, n_bins=64):
    """Pool grid samples of several realizations into an amplitude histogram.

    The histogram spans [-c, c] (c is the common amplitude bound), pools the
    samples of every realization and is normalized to unit mass; it is the
    empirical estimate of the ensemble amplitude law.

    Parameters
    ----------
    realizations : sequence of BandlimitedProcess
    grid_step : float
        Sampling resolution in seconds.
    n_bins : int
        Number of equal-width amplitude bins.

    Returns
    -------
    Histogram
    """
    realizations = list(realizations)
    if not realizations:
        raise ValueError("at least one realization is required")
    if n_bins < 2:
        raise ValueError("n_bins must be at least 2")
    c = max(p.amplitude_bound_c for p in realizations)
    edges = np.linspace(-c, c, n_bins + 1)
    counts = np.zeros(n_bins)
    n_samples = 0
    for process in realizations:
        _, values = evaluate_grid(process, grid_step)
        counts += np.histogram(values, edges)[0]
        n_samples += values.size
    return Histogram(edges, counts / counts.sum(), n_samples)
