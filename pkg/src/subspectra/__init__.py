"""Excitation spectra from sampled subspaces and long-time projected dynamics."""

__version__ = "0.1.0"

from .fcidump import (
    FCIDumpError,
    FCIDumpParseError,
    FCIDumpValidationError,
    IntegralTable,
    load_fixture,
    parse_fcidump,
    read_fcidump,
    table_checksum,
    write_fcidump,
)
from .fock import (
    ExcitationOperator,
    FockError,
    Sector,
    SectorWaveFunction,
    ZeroPerturbationError,
    apply_excitation,
    apply_ladder,
    build_hamiltonian,
    enumerate_sector,
    format_det,
    slater_condon_element,
)
from .eigensolver import (
    ConvergenceError,
    Propagator,
    SizeCapError,
    SpectrumReference,
    full_spectrum,
    ground_state,
    propagate,
)
from .emulator import EmulatorConfig, SubspaceSample, born_sample, exact_support, measure_evolved, measure_many
from .dynamics import (
    CorrelatorSeries,
    DegenerateSampleError,
    TimeGrid,
    accumulate_loschmidt,
    assemble_correlator,
    exhaustive_weights,
    local_estimator,
    merged_loschmidt,
    project_and_propagate,
)
from .spectrum import SpectrumResult, compare_to_reference, extract_peaks, fourier_spectrum, level_errors
from .diagnostics import alt_estimator_value, alt_estimator_variance, sampling_strategy_variance
from .pipeline import (
    ConfigError,
    PipelineError,
    RunConfig,
    load_config,
    reference_spectrum,
    run_pipeline,
    run_scaling_sweep,
    run_variance_study,
)
