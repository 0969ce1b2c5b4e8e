"""Metamorphic testing harness for LLM-based recommenders (Python bindings)."""

from ._mtrec import (  # noqa: F401
    Error,
    MissingRecording,
    TTestResult,
    apply_relation,
    kendall_tau,
    mock_recommend,
    overlap_ratio,
    parse_recommendations,
    pooled_t_test,
    rbo_ext,
    render_prompt,
    run_experiment,
    synthetic_corpus,
    t_cdf,
    welch_t_test,
)

__version__ = "0.1.0"
