"""Python surface of the API knowledge-graph pipeline.

Everything lives in the compiled extension; this package just re-exports
it under friendlier names.
"""

from apikg._core import (
    ConfigError,
    DataError,
    ProviderError,
    association_metrics,
    cosine,
    digest,
    embed,
    full_schema_triples,
    passes_filter,
    render_template,
    run_pipeline,
    tokenize,
)

__all__ = [
    "ConfigError",
    "DataError",
    "ProviderError",
    "association_metrics",
    "cosine",
    "digest",
    "embed",
    "full_schema_triples",
    "passes_filter",
    "render_template",
    "run_pipeline",
    "tokenize",
]
