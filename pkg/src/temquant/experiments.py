"""Seeded end-to-end pipelines, rate-distortion sweeps and distribution checks.

Four transmission branches are compared at equal per-sample bit budgets:

* ``tem-uq``   - firing intervals, uniform codebook (B bits per event);
* ``tem-nuq``  - firing intervals, power-law compander (B bits per event);
* ``nus-uq``   - amplitude/time pairs, both uniform (2B bits per sample);
* ``nus-nuq``  - amplitude/time pairs, compander times and Lloyd-Max
  amplitudes (2B bits per sample).

Codebooks are designed on a training pool of realizations disjoint (by seed
offset) from the evaluation pool.  Interval streams are coded with the
tracking quantizer so receiver-side timing errors stay bounded.
"""

import csv
import dataclasses
import io
import json
from dataclasses import dataclass

import numpy as np

from .encoder import (TemParams, FiringSequence, encode_sampled,
                      interval_bounds, MAX_ENCODE_GRID_STEP)
from .errors import ConfigError
from .interval_stats import (Density, distribution_divergence,
                             empirical_interval_histogram, induced_interval_pdf)
from .quantizers import (CompanderSpec, design_compander, design_lloyd_max,
                         design_uniform, quantize_intervals_tracked,
                         quantize_sequence)
from .reconstruction import (ReconstructionConfig, TemMeasurements,
                             nmse_db, reconstruct_nus, reconstruct_tem)
from .signals import (Histogram, evaluate, evaluate_grid,
                      generate_realization)

__all__ = [
    "ExperimentConfig",
    "RateDistortionRecord",
    "DistributionCheckReport",
    "QuantizerBank",
    "load_config",
    "run_pipeline",
    "run_sweep",
    "run_distribution_check",
    "emit",
    "parse_records",
]

BRANCHES = ("tem-uq", "tem-nuq", "nus-uq", "nus-nuq")

# branch -> (family, time-codebook kind, amplitude-codebook kind)
_BRANCH_SPECS = {
    "tem-uq": ("tem", "uniform", None),
    "tem-nuq": ("tem", "compander", None),
    "nus-uq": ("nus", "uniform", "uniform"),
    "nus-nuq": ("nus", "compander", "lloyd-max"),
}

GAMMA_SWEEP_VALUES = (0.05, 0.1, 0.2, 0.5)


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one experiment family.

    Defaults reproduce the reference setup: a 50 Hz band edge on a 0.9 s
    support with unit amplitude bound, bias 1.2 and threshold 0.0015
    (which keeps every interval below the Nyquist period, preserving the
    recovery guarantee).
    """

    omega0: float = 2 * np.pi * 50
    support: tuple = (-0.45, 0.45)
    c: float = 1.0
    b: float = 1.2
    kappa: float = 1.0
    delta: float = 0.0015
    gamma: float = 0.2
    bits: tuple = (3, 4, 5, 6, 7, 8, 9, 10, 11, 12)
    n_realizations: int = 100
    seed: int = 0
    grid_step: float = 1e-6
    n_bins: int = 64
    edge_trim: float = 0.1
    amplitude_law: str = "gaussian-coefficients"
    tem_quantizer: str = "compander"
    nus_time_quantizer: str = "compander"
    nus_amplitude_quantizer: str = "lloyd-max"
    codebook_source: str = "empirical-pool"
    branches: tuple = BRANCHES
    output_grid_step: float = 1e-4
    regularization: float = 1e-8
    n_train_realizations: int = 20
    train_seed_offset: int = 10000

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(float(v) for v in self.support))
        object.__setattr__(self, "bits", tuple(int(v) for v in self.bits))
        object.__setattr__(self, "branches", tuple(self.branches))
        try:
            self._validate()
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def _validate(self):
        if len(self.support) != 2 or self.support[1] <= self.support[0]:
            raise ConfigError("support must be a non-degenerate (start, end) pair")
        if self.c <= 0:
            raise ConfigError("c must be positive")
        if self.b <= self.c:
            raise ConfigError(f"bias b={self.b} must exceed the amplitude bound c={self.c}")
        if self.kappa <= 0 or self.delta <= 0:
            raise ConfigError("kappa and delta must be positive")
        t_max = self.kappa * self.delta / (self.b - self.c)
        t_nyq = np.pi / self.omega0
        if not t_max < t_nyq:
            raise ConfigError(
                f"kappa*delta/(b-c)={t_max:g} s must stay below the Nyquist "
                f"period {t_nyq:g} s for guaranteed recovery")
        if not 0 < self.gamma <= 1:
            raise ConfigError("gamma must lie in (0, 1]")
        if not self.bits or any(b < 1 for b in self.bits):
            raise ConfigError("bits must be a non-empty list of integers >= 1")
        if any(b > 24 for b in self.bits):
            raise ConfigError("bits above 24 would need unreasonably large codebooks")
        if self.n_realizations < 1 or self.n_train_realizations < 1:
            raise ConfigError("realization counts must be positive")
        if self.n_realizations > self.train_seed_offset:
            raise ConfigError("train_seed_offset must exceed n_realizations")
        if not 0 < self.grid_step <= MAX_ENCODE_GRID_STEP:
            raise ConfigError(f"grid_step must lie in (0, {MAX_ENCODE_GRID_STEP:g}] s")
        if self.n_bins < 2:
            raise ConfigError("n_bins must be at least 2")
        if not 0 <= self.edge_trim < 0.5:
            raise ConfigError("edge_trim must lie in [0, 0.5)")
        if self.output_grid_step <= 0:
            raise ConfigError("output_grid_step must be positive")
        if self.regularization < 0:
            raise ConfigError("regularization must be non-negative")
        if self.amplitude_law not in ("gaussian-coefficients", "uniform-coefficients"):
            raise ConfigError(f"unknown amplitude_law {self.amplitude_law!r}")
        if self.tem_quantizer not in ("uniform", "compander"):
            raise ConfigError(f"unknown tem_quantizer {self.tem_quantizer!r}")
        if self.nus_time_quantizer not in ("uniform", "compander"):
            raise ConfigError(f"unknown nus_time_quantizer {self.nus_time_quantizer!r}")
        if self.nus_amplitude_quantizer not in ("uniform", "lloyd-max"):
            raise ConfigError(
                f"unknown nus_amplitude_quantizer {self.nus_amplitude_quantizer!r}")
        if self.codebook_source not in ("empirical-pool", "theoretical-density"):
            raise ConfigError(f"unknown codebook_source {self.codebook_source!r}")
        unknown = set(self.branches) - set(BRANCHES)
        if unknown:
            raise ConfigError(f"unknown branches {sorted(unknown)}")

    @property
    def tem_params(self):
        return TemParams(self.b, self.kappa, self.delta)

    @property
    def reconstruction_config(self):
        return ReconstructionConfig(self.omega0, self.regularization,
                                    self.output_grid_step, self.edge_trim)

    @property
    def interval_support(self):
        return interval_bounds(self.tem_params, self.c)

    def eval_seed(self, index):
        return self.seed + index

    def train_seed(self, index):
        return self.seed + self.train_seed_offset + index


def load_config(path):
    """Load an :class:`ExperimentConfig` from a flat JSON key/value file.

    Keys must match field names exactly; unknown keys are an error.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a JSON object of config keys")
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
    return ExperimentConfig(**raw)


@dataclass(frozen=True)
class RateDistortionRecord:
    """One (branch, bits) cell of a rate-distortion sweep."""

    branch: str
    bits: int
    total_bits: int
    nmse_db: float
    nmse_stderr: float
    n: int
    seed: int


@dataclass(frozen=True)
class DistributionCheckReport:
    """Outcome of the empirical-vs-induced interval distribution check."""

    tv_distance: float
    normalization_certificate: float
    histogram: Histogram
    density: Density
    n_realizations: int
    seed: int


def total_bits_for(branch, bits):
    """Per-sample transmission cost: B for interval streams, 2B for
    amplitude/time pairs."""
    return 2 * bits if branch.startswith("nus") else bits


@dataclass(frozen=True)
class _Realization:
    """Cached per-seed artifacts shared across branches and bit depths."""

    instants: np.ndarray
    firing_amplitudes: np.ndarray
    t_eval: np.ndarray
    reference: np.ndarray


def _synthesize(config, seed):
    process = generate_realization(
        seed, config.omega0, config.support, config.amplitude_law, config.c,
        normalization_grid_step=config.grid_step)
    times, values = evaluate_grid(process, config.grid_step)
    sequence = encode_sampled(times, values, config.tem_params)
    return process, sequence, values


def _realization(config, seed):
    process, sequence, _ = _synthesize(config, seed)
    t_start, t_end = config.support
    n = int(np.floor((t_end - t_start) / config.output_grid_step + 0.5)) + 1
    t_eval = t_start + config.output_grid_step * np.arange(n)
    reference = evaluate(process, t_eval)
    instants = sequence.instants
    return _Realization(instants, evaluate(process, instants), t_eval, reference)


class QuantizerBank:
    """Codebooks designed once from a training pool and cached by (kind, bits).

    The pool is generated from seeds offset from the evaluation seeds, so
    codebook design never sees evaluation data.
    """

    def __init__(self, config):
        self.config = config
        intervals = []
        amplitudes = []
        amp_edges = np.linspace(-config.c, config.c, config.n_bins + 1)
        amp_counts = np.zeros(config.n_bins)
        n_amp = 0
        for i in range(config.n_train_realizations):
            process, sequence, values = _synthesize(config, config.train_seed(i))
            intervals.append(sequence.intervals)
            amplitudes.append(evaluate(process, sequence.instants))
            amp_counts += np.histogram(values, amp_edges)[0]
            n_amp += values.size
        self.train_intervals = np.concatenate(intervals)
        self.train_amplitudes = np.concatenate(amplitudes)
        self.amplitude_histogram = Histogram(amp_edges, amp_counts / amp_counts.sum(),
                                             n_amp)
        self._cache = {}

    def _interval_density(self):
        config = self.config
        if config.codebook_source == "theoretical-density":
            amplitude_density = Density.from_histogram(self.amplitude_histogram)
            return induced_interval_pdf(amplitude_density, config.tem_params,
                                        amplitude_bound=config.c)
        bounds = config.interval_support
        edges = np.linspace(bounds[0], bounds[1], config.n_bins + 1)
        counts = np.histogram(self.train_intervals, edges)[0]
        hist = Histogram(edges, counts / counts.sum(), self.train_intervals.size)
        return Density.from_histogram(hist)

    def interval_codebook(self, kind, bits):
        key = ("interval", kind, bits)
        if key not in self._cache:
            if kind == "uniform":
                codebook = design_uniform(self.config.interval_support, bits)
            elif kind == "compander":
                spec = CompanderSpec(self.config.gamma, self._interval_density())
                codebook = design_compander(spec, bits)
            else:
                raise ConfigError(f"unknown interval quantizer kind {kind!r}")
            self._cache[key] = codebook
        return self._cache[key]

    def amplitude_codebook(self, kind, bits):
        key = ("amplitude", kind, bits)
        if key not in self._cache:
            if kind == "uniform":
                codebook = design_uniform((-self.config.c, self.config.c), bits)
            elif kind == "lloyd-max":
                codebook, _ = design_lloyd_max(self.train_amplitudes, bits)
            else:
                raise ConfigError(f"unknown amplitude quantizer kind {kind!r}")
            self._cache[key] = codebook
        return self._cache[key]


def _branch_nmse(config, bank, branch, bits, data):
    family, time_kind, amp_kind = _BRANCH_SPECS[branch]
    params = config.tem_params
    rconfig = config.reconstruction_config
    time_codebook = bank.interval_codebook(time_kind, bits)
    _, levels, tracked = quantize_intervals_tracked(time_codebook, data.instants)
    if family == "tem":
        integrals = params.scale_kappa * params.threshold_delta - params.bias_b * levels
        measurements = TemMeasurements(tracked, integrals)
        _, estimate = reconstruct_tem(measurements, rconfig, t_eval=data.t_eval)
    else:
        amp_codebook = bank.amplitude_codebook(amp_kind, bits)
        _, quantized = quantize_sequence(amp_codebook, data.firing_amplitudes)
        _, estimate = reconstruct_nus(tracked, quantized, rconfig, t_eval=data.t_eval)
    return nmse_db(data.reference, estimate, config.edge_trim)


def run_pipeline(config, branch, bits, seed, bank=None):
    """One seeded end-to-end run: synthesize, encode, quantize, reconstruct.

    Parameters
    ----------
    config : ExperimentConfig
    branch : str
        One of ``tem-uq``, ``tem-nuq``, ``nus-uq``, ``nus-nuq``.
    bits : int
        Per-sample bit budget of each quantized coordinate.
    seed : int
        Realization seed.
    bank : QuantizerBank, optional
        Pre-built codebook bank; built from the config's training pool when
        omitted (pass one when calling repeatedly).

    Returns
    -------
    float
        NMSE in dB against the ground-truth realization.
    """
    if branch not in _BRANCH_SPECS:
        raise ConfigError(f"unknown branch {branch!r}")
    if bank is None:
        bank = QuantizerBank(config)
    data = _realization(config, seed)
    return _branch_nmse(config, bank, branch, int(bits), data)


def run_sweep(config, bank=None, progress=None):
    """Full factorial rate-distortion sweep over branches and bit depths.

    Every configured branch is evaluated at every bit depth on the same
    ``n_realizations`` seeded realizations; records report the mean NMSE and
    its standard error.

    Returns
    -------
    list of RateDistortionRecord
        Sorted by (branch, bits).
    """
    if not config.bits:
        raise ConfigError("bits list is empty")
    if bank is None:
        bank = QuantizerBank(config)
    realizations = [_realization(config, config.eval_seed(i))
                    for i in range(config.n_realizations)]
    records = []
    for branch in config.branches:
        for bits in config.bits:
            scores = np.array([_branch_nmse(config, bank, branch, bits, data)
                               for data in realizations])
            stderr = float(scores.std(ddof=1) / np.sqrt(scores.size)) \
                if scores.size > 1 else 0.0
            records.append(RateDistortionRecord(
                branch, bits, total_bits_for(branch, bits),
                float(scores.mean()), stderr, scores.size, config.seed))
            if progress is not None:
                progress(records[-1])
    records.sort(key=lambda r: (r.branch, r.bits))
    return records


def run_gamma_sweep(config, gammas=GAMMA_SWEEP_VALUES):
    """Sweep the compander exponent and keep the best record per cell.

    Returns
    -------
    records : list of RateDistortionRecord
        For compander branches, the record with the lowest mean NMSE across
        the probed gamma values; uniform branches are computed once.
    best_gamma : dict
        Winning gamma per (branch, bits) cell of the compander branches.
    """
    best = {}
    best_gamma = {}
    for i, gamma in enumerate(gammas):
        sub = dataclasses.replace(config, gamma=float(gamma))
        if i > 0:
            nuq = tuple(b for b in sub.branches if b.endswith("nuq"))
            if not nuq:
                break
            sub = dataclasses.replace(sub, branches=nuq)
        for record in run_sweep(sub):
            key = (record.branch, record.bits)
            if key not in best or record.nmse_db < best[key].nmse_db:
                best[key] = record
                if record.branch.endswith("nuq"):
                    best_gamma[key] = float(gamma)
    records = sorted(best.values(), key=lambda r: (r.branch, r.bits))
    return records, best_gamma


def run_distribution_check(config):
    """Compare pooled empirical interval statistics with the induced density.

    Pools ``n_realizations`` encodes, estimates the amplitude law from the
    same grid samples, pushes it through the interval transform, and
    reports the total-variation distance between the duration-weighted
    interval histogram and that induced density.
    """
    amp_edges = np.linspace(-config.c, config.c, config.n_bins + 1)
    amp_counts = np.zeros(config.n_bins)
    n_amp = 0
    sequences = []
    for i in range(config.n_realizations):
        _, sequence, values = _synthesize(config, config.eval_seed(i))
        sequences.append(sequence)
        amp_counts += np.histogram(values, amp_edges)[0]
        n_amp += values.size
    amplitude_histogram = Histogram(amp_edges, amp_counts / amp_counts.sum(), n_amp)
    amplitude_density = Density.from_histogram(amplitude_histogram)
    induced = induced_interval_pdf(amplitude_density, config.tem_params,
                                   amplitude_bound=config.c)
    histogram = empirical_interval_histogram(
        sequences, config.n_bins, support=config.interval_support,
        weighting="duration")
    tv = distribution_divergence(histogram, induced)
    return DistributionCheckReport(tv, induced.normalization(), histogram,
                                   induced, config.n_realizations, config.seed)


RECORD_HEADER = ("branch", "bits", "total_bits", "nmse_db", "nmse_stderr", "n", "seed")


def _format_float(x):
    return f"{x:.6g}"


def emit(records, path, fmt="csv"):
    """Write rate-distortion records to ``path`` (CSV or JSON).

    Floating-point fields carry 6 significant digits; output bytes are a
    deterministic function of the records.
    """
    records = sorted(records, key=lambda r: (r.branch, r.bits))
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(RECORD_HEADER)
        for r in records:
            writer.writerow([r.branch, r.bits, r.total_bits,
                             _format_float(r.nmse_db), _format_float(r.nmse_stderr),
                             r.n, r.seed])
        payload = buffer.getvalue()
    elif fmt == "json":
        rows = [{"branch": r.branch, "bits": r.bits, "total_bits": r.total_bits,
                 "nmse_db": float(_format_float(r.nmse_db)),
                 "nmse_stderr": float(_format_float(r.nmse_stderr)),
                 "n": r.n, "seed": r.seed} for r in records]
        payload = json.dumps(rows, indent=2, sort_keys=True) + "\n"
    else:
        raise ConfigError(f"unknown output format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(payload)
    return path


def parse_records(path):
    """Read back records emitted by :func:`emit` (CSV or JSON)."""
    text = open(path, "r", encoding="utf-8").read()
    records = []
    if text.lstrip().startswith("["):
        for row in json.loads(text):
            records.append(RateDistortionRecord(
                row["branch"], int(row["bits"]), int(row["total_bits"]),
                float(row["nmse_db"]), float(row["nmse_stderr"]),
                int(row["n"]), int(row["seed"])))
        return records
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != RECORD_HEADER:
        raise ValueError(f"unexpected header {header!r}")
    for row in reader:
        records.append(RateDistortionRecord(
            row[0], int(row[1]), int(row[2]), float(row[3]), float(row[4]),
            int(row[5]), int(row[6])))
    return records


def write_waveform_csv(path, times, values):
    """Two-column waveform record (time_s, amplitude)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("time_s", "amplitude"))
        for t, v in zip(times, values):
            writer.writerow((f"{t:.12g}", f"{v:.12g}"))
    return path


def read_waveform_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        rows = [(float(t), float(v)) for t, v in reader]
    times, values = zip(*rows)
    return np.asarray(times), np.asarray(values)


def write_sequence_csv(path, sequence):
    """Firing-sequence record: event index, instant, and preceding interval."""
    instants = sequence.instants
    intervals = sequence.intervals
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("n", "firing_instant_s", "interval_s"))
        writer.writerow((0, f"{instants[0]:.12g}", ""))
        for i, (t, dt) in enumerate(zip(instants[1:], intervals), start=1):
            writer.writerow((i, f"{t:.12g}", f"{dt:.12g}"))
    return path


def read_sequence_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: empty sequence file")
    t1 = float(rows[0][1])
    intervals = np.asarray([float(r[2]) for r in rows[1:]])
    return FiringSequence(t1, intervals)


def write_histogram_csv(path, histogram):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("bin_low", "bin_high", "mass"))
        for lo, hi, m in zip(histogram.bin_edges[:-1], histogram.bin_edges[1:],
                             histogram.masses):
            writer.writerow((f"{lo:.12g}", f"{hi:.12g}", f"{m:.12g}"))
    return path


def write_density_csv(path, density):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("interval_s", "density"))
        for x, v in zip(density.grid, density.values):
            writer.writerow((f"{x:.12g}", f"{v:.12g}"))
    return path
