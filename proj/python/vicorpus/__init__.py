"""Python access to the vicorpus core: annotation, validation, PCA and the CLI."""

import json

from ._vicorpus import (
    Error,
    InputError,
    UsageError,
    __version__,
    derive_seed,
    fit_pca,
    record_schema_violations,
    report_schema_violations,
    run_cli,
    sha256_hex,
    validate_corpus,
)
from ._vicorpus import annotate_report as _annotate_report


def annotate_report(report, **kwargs):
    """Annotation record for one instrumentation report (dict or JSON text), as a dict."""
    text = report if isinstance(report, str) else json.dumps(report)
    return json.loads(_annotate_report(text, **kwargs))


__all__ = [
    "Error",
    "InputError",
    "UsageError",
    "__version__",
    "annotate_report",
    "derive_seed",
    "fit_pca",
    "record_schema_violations",
    "report_schema_violations",
    "run_cli",
    "sha256_hex",
    "validate_corpus",
]
