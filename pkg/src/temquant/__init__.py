"""Time-encoding machines, interval statistics, non-uniform quantization and
bandlimited reconstruction."""

from .encoder import (FiringSequence, TemParams, encode, encode_sampled,
                      interval_bounds, validate_nyquist)
from .errors import ConfigError, NumericalError, NyquistViolationError
from .experiments import (DistributionCheckReport, ExperimentConfig,
                          QuantizerBank, RateDistortionRecord, emit,
                          load_config, parse_records, run_distribution_check,
                          run_gamma_sweep, run_pipeline, run_sweep)
from .interval_stats import (Density, distribution_divergence,
                             empirical_interval_histogram, induced_interval_pdf)
from .quantizers import (Codebook, CompanderQuantizer, CompanderSpec,
                         LloydMaxQuantizer, UniformQuantizer, design_compander,
                         design_lloyd_max, design_uniform, quantize,
                         quantize_intervals_tracked, quantize_sequence)
from .reconstruction import (ReconstructionConfig, SincInterpolator,
                             TemMeasurements, measurements_from_sequence,
                             nmse_db, reconstruct_nus, reconstruct_tem)
from .signals import (BandlimitedProcess, Histogram, estimate_amplitude_pdf,
                      evaluate, evaluate_grid, generate_realization)

__version__ = "0.1.0"

__all__ = [
    "BandlimitedProcess", "Histogram", "generate_realization", "evaluate",
    "evaluate_grid", "estimate_amplitude_pdf",
    "TemParams", "FiringSequence", "encode", "encode_sampled",
    "interval_bounds", "validate_nyquist",
    "Density", "induced_interval_pdf", "empirical_interval_histogram",
    "distribution_divergence",
    "Codebook", "CompanderSpec", "design_uniform", "design_compander",
    "design_lloyd_max", "quantize", "quantize_sequence",
    "quantize_intervals_tracked", "UniformQuantizer", "CompanderQuantizer",
    "LloydMaxQuantizer",
    "TemMeasurements", "ReconstructionConfig", "measurements_from_sequence",
    "reconstruct_tem", "reconstruct_nus", "nmse_db", "SincInterpolator",
    "ExperimentConfig", "RateDistortionRecord", "DistributionCheckReport",
    "QuantizerBank", "load_config", "run_pipeline", "run_sweep",
    "run_gamma_sweep", "run_distribution_check", "emit", "parse_records",
    "ConfigError", "NumericalError", "NyquistViolationError",
]
