"""Bandlimited reconstruction from firing sequences and non-uniform samples.

The integrate-and-fire condition fixes the signal integral over each
inter-event gap: q_n = kappa*delta - b*T_n.  Reconstruction fits a sinc
expansion anchored midway between consecutive instants so the modeled
integrals match the measurements in a ridge-regularized least-squares
sense.  Non-uniform amplitude samples are handled the same way with a
plain sinc interpolation system.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import sici
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

try:
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None

from .errors import NumericalError, NyquistViolationError

__all__ = [
    "TemMeasurements",
    "ReconstructionConfig",
    "measurements_from_sequence",
    "reconstruct_tem",
    "reconstruct_nus",
    "nmse_db",
    "SincInterpolator",
]

NMSE_FLOOR_DB = -300.0


@dataclass(frozen=True)
class TemMeasurements:
    """Decoder-side event instants and per-gap signal integrals.

    ``instants`` holds the N+1 reconstructed firing instants and
    ``integrals`` the N values q_n = kappa*delta - b*T_n, each equal to the
    signal integral over the corresponding gap when the intervals are exact.
    """

    instants: np.ndarray
    integrals: np.ndarray

    def __post_init__(self):
        instants = np.ascontiguousarray(self.instants, dtype=float)
        integrals = np.ascontiguousarray(self.integrals, dtype=float)
        if instants.ndim != 1 or instants.size < 2:
            raise ValueError("need at least two instants")
        if np.any(np.diff(instants) <= 0):
            raise ValueError("instants must be strictly increasing")
        if integrals.shape != (instants.size - 1,):
            raise ValueError("need exactly one integral per gap")
        instants.setflags(write=False)
        integrals.setflags(write=False)
        object.__setattr__(self, "instants", instants)
        object.__setattr__(self, "integrals", integrals)

    @property
    def intervals(self):
        return np.diff(self.instants)


@dataclass(frozen=True)
class ReconstructionConfig:
    """Decoder settings.

    Attributes
    ----------
    omega0 : float
        Band edge of the reconstruction model (rad/s).
    regularization : float
        Relative ridge weight; the actual ridge is this value times the
        largest diagonal entry of the normal matrix.
    output_grid_step : float
        Default evaluation grid resolution (s).
    edge_trim_fraction : float
        Fraction trimmed from each side when scoring NMSE.
    """

    omega0: float
    regularization: float = 1e-8
    output_grid_step: float = 1e-4
    edge_trim_fraction: float = 0.1

    def __post_init__(self):
        if self.omega0 <= 0:
            raise ValueError("omega0 must be positive")
        if self.regularization < 0:
            raise ValueError("regularization must be non-negative")
        if self.output_grid_step <= 0:
            raise ValueError("output_grid_step must be positive")
        if not 0 <= self.edge_trim_fraction < 0.5:
            raise ValueError("edge_trim_fraction must lie in [0, 0.5)")


def measurements_from_sequence(sequence, params):
    """Turn a firing sequence into decoder measurements.

    Instants accumulate the intervals from the first instant; each integral
    is q_n = kappa*delta - b*T_n.
    """
    if len(sequence) == 0:
        raise ValueError("sequence carries no intervals")
    q = (params.scale_kappa * params.threshold_delta
         - params.bias_b * sequence.intervals)
    return TemMeasurements(sequence.instants, q)


if njit is not None:

    @njit(cache=True)
    def _sinc_mix_kernel(anchors, coefficients, omega0, t):
        out = np.empty(t.size)
        for i in range(t.size):
            acc = 0.0
            for k in range(anchors.size):
                x = omega0 * (t[i] - anchors[k])
                if x == 0.0:
                    acc += coefficients[k]
                else:
                    acc += coefficients[k] * np.sin(x) / x
            out[i] = acc
        return out

else:  # pragma: no cover
    _sinc_mix_kernel = None


def _sinc_mix(anchors, coefficients, omega0, t):
    """Evaluate sum_k c_k sinc(omega0 (t - s_k)) on arbitrary instants."""
    t = np.ascontiguousarray(t, dtype=float)
    anchors = np.ascontiguousarray(anchors, dtype=float)
    coefficients = np.ascontiguousarray(coefficients, dtype=float)
    if _sinc_mix_kernel is not None:
        return _sinc_mix_kernel(anchors, coefficients, omega0, t)
    out = np.empty(t.size)  # pragma: no cover
    chunk = 16384
    for lo in range(0, t.size, chunk):
        block = t[lo:lo + chunk, None] - anchors[None, :]
        out[lo:lo + chunk] = np.sinc(omega0 * block / np.pi) @ coefficients
    return out


def _ridge_solve(system, rhs, relative_ridge):
    normal = system.T @ system
    if relative_ridge > 0:
        ridge = relative_ridge * float(np.max(np.diag(normal)))
        normal[np.diag_indices_from(normal)] += ridge
    try:
        coefficients = scipy.linalg.solve(normal, system.T @ rhs, assume_a="pos")
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"singular system after regularization: {exc}") from exc
    if not np.all(np.isfinite(coefficients)):
        raise NumericalError("non-finite reconstruction coefficients")
    return coefficients


def _default_grid(t_start, t_end, step):
    n = int(np.floor((t_end - t_start) / step + 0.5)) + 1
    return t_start + step * np.arange(n)


def reconstruct_tem(measurements, config, t_eval=None):
    """Reconstruct a waveform from integrate-and-fire measurements.

    The model is f(t) = sum_k c_k sinc(omega0 (t - s_k)) with one anchor
    s_k midway between consecutive instants.  Its integral over each gap is
    expressed through the sine integral Si, giving a linear system
    M c = q solved as regularized least squares.

    Parameters
    ----------
    measurements : TemMeasurements
    config : ReconstructionConfig
    t_eval : ndarray, optional
        Evaluation instants; defaults to a uniform grid spanning the
        measurement instants at ``config.output_grid_step``.

    Returns
    -------
    times, values : ndarray

    Raises
    ------
    NyquistViolationError
        If any gap reaches the Nyquist period (recovery guarantee void).
    NumericalError
        If the regularized system cannot be solved.
    """
    instants = measurements.instants
    if instants.size < 3:
        raise ValueError("need at least 2 intervals to reconstruct")
    gaps = measurements.intervals
    t_nyq = np.pi / config.omega0
    widest = float(np.max(gaps))
    if widest >= t_nyq:
        raise NyquistViolationError(
            f"max gap {widest:g} s >= Nyquist period {t_nyq:g} s")

    anchors = 0.5 * (instants[:-1] + instants[1:])
    # Antiderivative of sinc(omega0 (t - s)) is Si(omega0 (t - s)) / omega0.
    si = sici(config.omega0 * (instants[:, None] - anchors[None, :]))[0]
    system = (si[1:, :] - si[:-1, :]) / config.omega0
    coefficients = _ridge_solve(system, measurements.integrals,
                                config.regularization)

    if t_eval is None:
        t_eval = _default_grid(instants[0], instants[-1], config.output_grid_step)
    else:
        t_eval = np.asarray(t_eval, dtype=float)
    return t_eval, _sinc_mix(anchors, coefficients, config.omega0, t_eval)


def reconstruct_nus(times, amplitudes, config, t_eval=None):
    """Reconstruct a waveform from non-uniform amplitude samples.

    Solves the sinc interpolation system anchored at the sample times as
    regularized least squares and evaluates the expansion on the grid.

    Raises
    ------
    NyquistViolationError
        If any gap between consecutive sample times reaches pi/omega0.
    """
    times = np.asarray(times, dtype=float)
    interpolator = SincInterpolator(
        omega0=config.omega0, regularization=config.regularization)
    interpolator.fit(times, amplitudes)
    if t_eval is None:
        t_eval = _default_grid(times[0], times[-1], config.output_grid_step)
    else:
        t_eval = np.asarray(t_eval, dtype=float)
    return t_eval, interpolator.predict(t_eval)


def nmse_db(reference, estimate, edge_trim_fraction=0.1):
    """Normalized mean-squared error in decibels over the trimmed grid.

    A symmetric fraction of samples is dropped from both ends before
    summing; the result is floored at -300 dB.

    Raises
    ------
    ValueError
        If the trimmed reference is identically zero (NMSE undefined).
    """
    reference = np.asarray(reference, dtype=float)
    estimate = np.asarray(estimate, dtype=float)
    if reference.shape != estimate.shape:
        raise ValueError("waveforms must share the evaluation grid")
    if not 0 <= edge_trim_fraction < 0.5:
        raise ValueError("edge_trim_fraction must lie in [0, 0.5)")
    n_trim = int(reference.size * edge_trim_fraction)
    sl = slice(n_trim, reference.size - n_trim)
    signal_energy = float(np.sum(reference[sl] ** 2))
    if signal_energy == 0.0:
        raise ValueError("NMSE undefined: reference is identically zero after trimming")
    error_energy = float(np.sum((reference[sl] - estimate[sl]) ** 2))
    if error_energy == 0.0:
        return NMSE_FLOOR_DB
    return max(10.0 * np.log10(error_energy / signal_energy), NMSE_FLOOR_DB)


class SincInterpolator(BaseEstimator, RegressorMixin):
    """Bandlimited regressor through non-uniformly spaced samples.

    Fits coefficients of sum_k c_k sinc(omega0 (t - t_k)) anchored at the
    training times by regularized least squares; prediction evaluates the
    expansion at arbitrary instants.

    Parameters
    ----------
    omega0 : float
        Band edge in rad/s.
    regularization : float
        Relative ridge weight for the interpolation system.
    """

    def __init__(self, omega0=2 * np.pi * 50, regularization=1e-8):
        self.omega0 = omega0
        self.regularization = regularization

    def _times(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 2 and X.shape[1] == 1:
            return X[:, 0]
        if X.ndim == 1:
            return X
        raise ValueError("expected sample times as a 1-D or single-column array")

    def fit(self, X, y):
        """Fit on sample times ``X`` and amplitudes ``y``."""
        times = self._times(X)
        amplitudes = np.asarray(y, dtype=float)
        if times.size == 0 or times.shape != amplitudes.shape:
            raise ValueError("times and amplitudes must be equal-length and non-empty")
        if np.any(np.diff(times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        t_nyq = np.pi / self.omega0
        if times.size > 1:
            widest = float(np.max(np.diff(times)))
            if widest >= t_nyq:
                raise NyquistViolationError(
                    f"max sample gap {widest:g} s >= Nyquist period {t_nyq:g} s")
        system = np.sinc(self.omega0 * (times[:, None] - times[None, :]) / np.pi)
        self.times_ = times
        self.coef_ = _ridge_solve(system, amplitudes, self.regularization)
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        t = self._times(X)
        return _sinc_mix(self.times_, self.coef_, self.omega0, t)
