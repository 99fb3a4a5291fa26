"""Sparse screen features and Sarsa(lambda) agents for frame-based games."""

from ._shallowrl import (
    Env,
    FeatureError,
    FeatureExtractor,
    FormatError,
    LinearQ,
    ProtocolError,
    ScreenError,
    __version__,
    benchmark,
    compute_background,
    count_distinct_features,
    detect_blobs,
    run_experiment,
    run_trial,
    summarize_trials,
    welch_t_test,
)

__all__ = [
    "Env",
    "FeatureError",
    "FeatureExtractor",
    "FormatError",
    "LinearQ",
    "ProtocolError",
    "ScreenError",
    "__version__",
    "benchmark",
    "compute_background",
    "count_distinct_features",
    "detect_blobs",
    "run_experiment",
    "run_trial",
    "summarize_trials",
    "welch_t_test",
]
