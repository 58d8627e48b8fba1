"""Toolkit for screening, annotating and measuring critical machine-translation
errors in labeled mental-health corpora.

Subpackages/modules:
    corpus    record model, label sets, error taxonomy, JSONL persistence
    textnorm  normalization, tokenization, emoji-to-lexicon mapping
    metrics   from-scratch MT quality metrics over token sequences
    oracles   brute-force reference implementations used to validate metrics
    pipeline  translate/classify clients, caching, discrepancy extraction
    report    overall and per-error-type metric aggregation
    review    annotation queue, append-only event log, HTTP service
    cli       command-line entry point wiring the stages together
"""

__version__ = "0.1.0"
