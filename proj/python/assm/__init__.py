"""Streaming anomaly detection with an adaptive gated state-space model.

The heavy lifting lives in the compiled extension; this package re-exports
its public surface.
"""

from assm._core import (  # noqa: F401
    Activation,
    Checkpoint,
    CheckpointMeta,
    ConfusionCounts,
    Dataset,
    Distance,
    DivergenceError,
    GenConfig,
    Gradients,
    HiddenState,
    Interval,
    IoError,
    KfModel,
    LabeledSequence,
    LatencyResult,
    LossTerms,
    ModelConfig,
    Parameters,
    StepOutput,
    StreamConfig,
    StreamHandle,
    ThresholdResult,
    ThroughputResult,
    TrainConfig,
    TrainReport,
    ValidationError,
    Verdict,
    anomaly_score,
    backward,
    bench_stream,
    calibrate_threshold,
    compute_gate,
    default_kf_model,
    detection_latency,
    f1_score,
    finite_difference_gradient,
    generate_dataset,
    init_parameters,
    initial_state,
    kf_run,
    load_checkpoint,
    open_stream,
    project,
    roc_auc,
    run_sequence,
    save_checkpoint,
    score_sequence,
    state_update,
    step,
    total_loss,
    train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
