"""Latency, length and quality evaluation for speech translation and interpreting."""

import json

from ._slteval import (
    SltError,
    __version__,
    align,
    apply_bpe,
    bleu,
    compose,
    compression,
    count_syllables,
    filter_corpus,
    finalization_times,
    intersect,
    link_latency,
    log_rank_stats,
    prune_time_regressive,
    render_report,
    summarize,
    tokenize,
    train_em,
    trim_lemma,
    two_sample_z,
)
from ._slteval import run_report as _run_report


def run_report(config, overrides=()):
    """Run an experiment config and return the report as a dict."""
    return json.loads(_run_report(str(config), list(overrides)))


__all__ = [
    "SltError",
    "__version__",
    "align",
    "apply_bpe",
    "bleu",
    "compose",
    "compression",
    "count_syllables",
    "filter_corpus",
    "finalization_times",
    "intersect",
    "link_latency",
    "log_rank_stats",
    "prune_time_regressive",
    "render_report",
    "run_report",
    "summarize",
    "tokenize",
    "train_em",
    "trim_lemma",
    "two_sample_z",
]
