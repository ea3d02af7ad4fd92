"""Stereo coding-artifact stimuli, MUSHRA trial planning, rating collection
and score analysis."""

from .audio import (
    AudioBuffer,
    MidSidePair,
    Spectrogram,
    istft,
    lowpass_anchor,
    mono_anchor,
    ms_forward,
    ms_inverse,
    read_wav,
    stft,
    stft_mono,
    write_wav,
)
from .artifacts import (
    ArtifactSpec,
    EngineSettings,
    QN_NMR_DB,
    SH_HOLE_PROB,
    apply_qn_mono,
    apply_sh_mono,
    process_stereo,
    render_condition_set,
)
from .masking import (
    CriticalBandPartition,
    MaskingConfig,
    MaskingThreshold,
    masking_threshold,
    measure_nmr,
)
from .planning import TrialPlan, TrialSeries, build_plan, build_series
from .stats import compare_lr_ms, export_figure_data, ingest_scores, summarize
from .config import RunConfig

__version__ = "0.1.0"

__all__ = [
    "ArtifactSpec",
    "AudioBuffer",
    "CriticalBandPartition",
    "EngineSettings",
    "MaskingConfig",
    "MaskingThreshold",
    "MidSidePair",
    "QN_NMR_DB",
    "RunConfig",
    "SH_HOLE_PROB",
    "Spectrogram",
    "TrialPlan",
    "TrialSeries",
    "apply_qn_mono",
    "apply_sh_mono",
    "build_plan",
    "build_series",
    "compare_lr_ms",
    "export_figure_data",
    "ingest_scores",
    "istft",
    "lowpass_anchor",
    "masking_threshold",
    "measure_nmr",
    "mono_anchor",
    "ms_forward",
    "ms_inverse",
    "process_stereo",
    "read_wav",
    "render_condition_set",
    "stft",
    "stft_mono",
    "summarize",
    "write_wav",
]
