"""Shift-Aggregate-Extract networks over hierarchical graph decompositions.

Thin python surface over the C++ core: dataset ingestion, EGNN decomposition,
lossless domain compression, and the training/cross-validation harness.
"""

import json as _json

try:
    from saen._saen import (
        ArgumentError,
        Compressed,
        Dataset,
        Decomposition,
        FormatError,
        IngestError,
        TrainingError,
        ValidationError,
        __version__,
        build_attributes,
        compute_cd,
        degree_attributes,
        domain_compress,
        ego_graph,
        egnn_decompose,
        forward_logits,
        parse_tu_dataset,
        verify_compression,
    )
    from saen import _saen as _core
except ImportError:  # pragma: no cover - build-tree layout
    from _saen import (
        ArgumentError,
        Compressed,
        Dataset,
        Decomposition,
        FormatError,
        IngestError,
        TrainingError,
        ValidationError,
        __version__,
        build_attributes,
        compute_cd,
        degree_attributes,
        domain_compress,
        ego_graph,
        egnn_decompose,
        forward_logits,
        parse_tu_dataset,
        verify_compression,
    )
    import _saen as _core


def compression_report(decomposition, compressed):
    """Per-level sizes, stored-entry and serialized-byte ratios as a dict."""
    return _json.loads(_core.compression_report_json(decomposition, compressed))


def cross_validate(config):
    """Run repeated stratified k-fold cross-validation; returns the report dict."""
    return _json.loads(_core.cross_validate_json(_json.dumps(config)))


def train_single(config):
    """Train once on the full dataset; returns the report dict."""
    return _json.loads(_core.train_single_json(_json.dumps(config)))


def bench(config, timeout_s, mem_cap_mb=0, epochs=1):
    """Compression ratio / speedup benchmark; returns the report dict."""
    return _json.loads(_core.bench_json(_json.dumps(config), timeout_s, mem_cap_mb, epochs))


__all__ = [
    "ArgumentError",
    "Compressed",
    "Dataset",
    "Decomposition",
    "FormatError",
    "IngestError",
    "TrainingError",
    "ValidationError",
    "__version__",
    "bench",
    "build_attributes",
    "compression_report",
    "compute_cd",
    "cross_validate",
    "degree_attributes",
    "domain_compress",
    "ego_graph",
    "egnn_decompose",
    "forward_logits",
    "parse_tu_dataset",
    "train_single",
    "verify_compression",
]
