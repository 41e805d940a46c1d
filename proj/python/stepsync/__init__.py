"""Stepping synchronization simulation and analysis.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports its public surface.
"""

from ._core import (  # noqa: F401
    SCHEMA_VERSION,
    AgentRun,
    AsynchronyPair,
    AsynchronySeries,
    CueSchedule,
    DetectorConfig,
    Direction,
    Error,
    FitWindow,
    FitWindowMode,
    Foot,
    ISISeries,
    MarkerTrace,
    Onset,
    OnsetSeries,
    PerturbationSpec,
    PhaseCorrectionEstimate,
    PhaseCorrectionParams,
    PreWindowSummary,
    RegressionBlock,
    RelativeAsynchronyCurve,
    SourceTag,
    StepsyncDataError,
    StepsyncValidationError,
    builtin_preset_names,
    compute_isi,
    default_config_json,
    detect_onsets,
    fit_phase_correction,
    fit_phase_correction_pooled,
    generate_cue_schedule,
    make_regression_block,
    match_onsets,
    percent_correction,
    preset_params,
    relative_asynchrony,
    resolve_threshold,
    run_experiment_json,
    schedule_to_json,
    simulate_agent,
    summarize_pre_perturbation,
    synthesize_trace,
    unwrap_asynchronies,
    write_onsets_csv,
)

__version__ = "0.1.0"
