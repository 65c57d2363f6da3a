"""Integrate-and-fire time encoding of bandlimited signals.

The encoder adds a bias b > c to the input so the integrand stays strictly
positive, integrates with scale 1/kappa, and fires whenever the integral
reaches the threshold delta, resetting afterwards.  Events are localized by
cumulative trapezoidal integration on a fine grid plus linear interpolation
of the crossing inside the grid cell.
"""

from dataclasses import dataclass

import numpy as np

from .signals import evaluate_grid

__all__ = [
    "TemParams",
    "FiringSequence",
    "encode",
    "encode_sampled",
    "interval_bounds",
    "validate_nyquist",
]

# Coarsest grid that still localizes events to a small fraction of the
# shortest admissible interval.
MAX_ENCODE_GRID_STEP = 1e-5


@dataclass(frozen=True)
class TemParams:
    """Encoder triple: bias, integrator scale and firing threshold.

    Attributes
    ----------
    bias_b : float
        Constant added to the signal; must exceed the amplitude bound of the
        input being encoded.
    scale_kappa : float
        Integrator scale; the integrand is (f + b)/kappa.
    threshold_delta : float
        Firing threshold of the integrator.
    """

    bias_b: float
    scale_kappa: float = 1.0
    threshold_delta: float = 0.0015

    def __post_init__(self):
        if self.scale_kappa <= 0:
            raise ValueError("scale_kappa must be positive")
        if self.threshold_delta <= 0:
            raise ValueError("threshold_delta must be positive")

    def require_valid_for(self, amplitude_bound_c):
        if self.bias_b <= amplitude_bound_c:
            raise ValueError(
                f"bias_b={self.bias_b} must exceed the amplitude bound "
                f"c={amplitude_bound_c}")


@dataclass(frozen=True)
class FiringSequence:
    """First firing instant plus the ordered inter-event intervals."""

    first_instant_t1: float
    intervals: np.ndarray

    def __post_init__(self):
        intervals = np.ascontiguousarray(self.intervals, dtype=float)
        if intervals.ndim != 1:
            raise ValueError("intervals must be 1-D")
        if intervals.size and np.any(intervals <= 0):
            raise ValueError("every interval must be strictly positive")
        intervals.setflags(write=False)
        object.__setattr__(self, "intervals", intervals)
        object.__setattr__(self, "first_instant_t1", float(self.first_instant_t1))

    @property
    def instants(self):
        """All firing instants t_1 .. t_{N+1} (N = number of intervals)."""
        return self.first_instant_t1 + np.concatenate(
            ([0.0], np.cumsum(self.intervals)))

    def __len__(self):
        return self.intervals.size


def interval_bounds(params, amplitude_bound_c):
    """Analytic sandwich for the firing intervals.

    Any interval produced by an encoder with valid parameters lies in
    [kappa*delta/(b + c), kappa*delta/(b - c)].

    Parameters
    ----------
    params : TemParams
    amplitude_bound_c : float
        Peak amplitude bound of the encoded signal.

    Returns
    -------
    (t_min, t_max) : tuple of float
    """
    if amplitude_bound_c < 0:
        raise ValueError("amplitude bound must be non-negative")
    params.require_valid_for(amplitude_bound_c)
    kd = params.scale_kappa * params.threshold_delta
    return (kd / (params.bias_b + amplitude_bound_c),
            kd / (params.bias_b - amplitude_bound_c))


def validate_nyquist(sequence, omega0):
    """True iff every interval is below the Nyquist period pi/omega0.

    An empty sequence is vacuously valid.
    """
    if len(sequence) == 0:
        return True
    return float(np.max(sequence.intervals)) < np.pi / omega0


def encode(process, params, grid_step=1e-6):
    """Encode a realization into its firing sequence.

    Parameters
    ----------
    process : BandlimitedProcess
    params : TemParams
        Must satisfy bias_b > process.amplitude_bound_c.
    grid_step : float
        Integration grid resolution in seconds (at most 1e-5).

    Returns
    -------
    FiringSequence

    Raises
    ------
    ValueError
        If the bias condition fails, the grid is too coarse, or the support
        is too short to produce a single firing.
    """
    params.require_valid_for(process.amplitude_bound_c)
    times, values = evaluate_grid(process, grid_step)
    return encode_sampled(times, values, params)


def encode_sampled(times, values, params):
    """Encode an already-sampled waveform (uniform grid) into firing events.

    The biased waveform is integrated with the cumulative trapezoidal rule;
    each crossing of an integer multiple of the threshold is localized by
    linear interpolation within its grid cell.  A trailing partial interval
    (integrator not yet full at the end of the record) is discarded.

    Parameters
    ----------
    times, values : ndarray
        Uniformly spaced sample instants and amplitudes.
    params : TemParams

    Returns
    -------
    FiringSequence
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size != values.size or times.size < 2:
        raise ValueError("times and values must be equal-length with >= 2 samples")
    dt = times[1] - times[0]
    if dt > MAX_ENCODE_GRID_STEP * (1 + 1e-9):
        raise ValueError(
            f"grid step {dt:g} s too coarse; at most {MAX_ENCODE_GRID_STEP:g} s")
    peak = float(np.max(np.abs(values)))
    params.require_valid_for(peak)

    integrand = (values + params.bias_b) / params.scale_kappa
    increments = 0.5 * (integrand[1:] + integrand[:-1]) * dt
    cumulative = np.concatenate(([0.0], np.cumsum(increments)))

    delta = params.threshold_delta
    n_events = int(cumulative[-1] / delta)
    if n_events == 0:
        raise ValueError("support too short for a single firing")
    thresholds = delta * np.arange(1, n_events + 1)
    # The integrand is strictly positive, so the cumulative integral is
    # strictly increasing and every threshold has a unique crossing cell.
    idx = np.searchsorted(cumulative, thresholds)
    frac = (thresholds - cumulative[idx - 1]) / (cumulative[idx] - cumulative[idx - 1])
    crossings = times[idx - 1] + frac * dt

    return FiringSequence(crossings[0], np.diff(crossings))
