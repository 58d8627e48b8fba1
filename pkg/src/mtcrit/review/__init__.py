"""Human annotation workflow: queue of discrepancy candidates, append-only
decision log, and the HTTP service the browser UI talks to."""

from .store import (
    AnnotationEvent,
    AnnotationLog,
    AnnotationValidationError,
    ReviewStore,
    StaleAssignmentError,
    export_annotated,
    latest_events,
    taxonomy_entries,
    validate_annotation_payload,
)

__all__ = [
    "AnnotationEvent",
    "AnnotationLog",
    "AnnotationValidationError",
    "ReviewStore",
    "StaleAssignmentError",
    "export_annotated",
    "latest_events",
    "taxonomy_entries",
    "validate_annotation_payload",
]
