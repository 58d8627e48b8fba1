"""Annotation queue and append-only decision store.

All state mutation serializes through one writer lock; annotation
throughput is human-bounded, so simplicity beats write parallelism. The
log on disk is the source of truth: replaying it over the same corpus
reconstructs the queue (pending/done) and the export exactly. Assignment
locks are deliberately in-memory only; they expire on idle timeout and
vanish on restart.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources
from typing import Any, Callable, Iterable, Sequence

from ..corpus import Corpus, ErrorType, SegmentRecord, load_corpus

#: Human-readable taxonomy labels for UI display.
TAXONOMY_LABELS = {
    ErrorType.DIALECTICAL: "Dialectical language",
    ErrorType.GRAMMAR_NEGATION: "Grammar: negation",
    ErrorType.GRAMMAR_PREPOSITION: "Grammar: preposition",
    ErrorType.GRAMMAR_SUBJECT: "Grammar: verb subject",
    ErrorType.ORTHOGRAPHIC: "Non-standard orthography",
    ErrorType.DIACRITIC: "Missing diacritics",
    ErrorType.VOCABULARY: "Vocabulary mistranslation",
    ErrorType.DELETION: "Deletion",
}


class StaleAssignmentError(Exception):
    """Submission for a record not currently assigned to this annotator."""


class AnnotationValidationError(Exception):
    """Invalid annotation payload; ``errors`` lists every violated field."""

    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("; ".join(errors))


@dataclass(frozen=True)
class AnnotationEvent:
    """One human decision with provenance.

    A critical decision must carry both the taxonomy tag and the corrected
    reference; a non-critical decision must carry neither.
    """

    record_id: str
    critical: bool
    annotator_id: str
    timestamp: str
    error_type: ErrorType | None = None
    corrected_reference: str | None = None

    def __post_init__(self):
        errors = _event_field_errors(
            record_id=self.record_id,
            critical=self.critical,
            annotator_id=self.annotator_id,
            error_type=self.error_type,
            corrected_reference=self.corrected_reference,
        )
        if not isinstance(self.timestamp, str) or not self.timestamp:
            errors.append("timestamp must be a non-empty ISO-8601 string")
        if errors:
            raise AnnotationValidationError(errors)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "record_id": self.record_id,
            "critical": self.critical,
            "annotator_id": self.annotator_id,
            "timestamp": self.timestamp,
        }
        if self.error_type is not None:
            out["error_type"] = self.error_type.value
        if self.corrected_reference is not None:
            out["corrected_reference"] = self.corrected_reference
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "AnnotationEvent":
        event, errors = validate_annotation_payload(data)
        if errors:
            raise AnnotationValidationError(errors)
        assert event is not None
        return event


def _event_field_errors(record_id, critical, annotator_id, error_type, corrected_reference) -> list[str]:
    errors = []
    if not isinstance(record_id, str) or not record_id:
        errors.append("record_id must be a non-empty string")
    if not isinstance(critical, bool):
        errors.append("critical must be a boolean")
    if not isinstance(annotator_id, str) or not annotator_id:
        errors.append("annotator_id must be a non-empty string")
    if critical is True:
        if error_type is None:
            errors.append("error_type is required when critical")
        if corrected_reference is None or (isinstance(corrected_reference, str) and not corrected_reference.strip()):
            errors.append("corrected_reference is required when critical")
    elif critical is False:
        if error_type is not None:
            errors.append("error_type must be absent when not critical")
        if corrected_reference is not None:
            errors.append("corrected_reference must be absent when not critical")
    return errors


def validate_annotation_payload(data: dict, timestamp: str | None = None) -> tuple[AnnotationEvent | None, list[str]]:
    """Validate a raw annotation payload; returns (event, field errors).

    The one validation path for both the HTTP service and direct library
    use, so a payload is accepted by the server exactly when it passes here.
    """
    if not isinstance(data, dict):
        return None, ["payload must be a JSON object"]
    allowed = {"record_id", "critical", "annotator_id", "timestamp", "error_type", "corrected_reference"}
    errors = [f"unknown field {key!r}" for key in sorted(set(data) - allowed)]
    error_type = data.get("error_type")
    if error_type is not None:
        try:
            error_type = ErrorType(error_type)
        except ValueError:
            errors.append(f"unknown error_type {data.get('error_type')!r}")
            error_type = None
            data = {k: v for k, v in data.items() if k != "error_type"}
    errors.extend(_event_field_errors(
        record_id=data.get("record_id"),
        critical=data.get("critical"),
        annotator_id=data.get("annotator_id"),
        error_type=error_type,
        corrected_reference=data.get("corrected_reference"),
    ))
    ts = data.get("timestamp") or timestamp or utc_now()
    if not isinstance(ts, str) or not ts:
        errors.append("timestamp must be a non-empty ISO-8601 string")
    if errors:
        return None, errors
    return AnnotationEvent(
        record_id=data["record_id"],
        critical=data["critical"],
        annotator_id=data["annotator_id"],
        timestamp=ts,
        error_type=error_type,
        corrected_reference=data.get("corrected_reference"),
    ), []


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


class AnnotationLog:
    """Append-only, line-delimited event log, durable before acknowledgment."""

    def __init__(self, path):
        self.path = path
        self._lock = threading.Lock()

    def append(self, event: AnnotationEvent) -> None:
        line = json.dumps(event.to_dict(), ensure_ascii=False) + "\n"
        with self._lock:
            with open(self.path, "a", encoding="utf-8", newline="\n") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())

    def load(self) -> list[AnnotationEvent]:
        try:
            fh = open(self.path, encoding="utf-8")
        except FileNotFoundError:
            return []
        with fh:
            return [
                AnnotationEvent.from_dict(json.loads(line))
                for line in (l.strip() for l in fh)
                if line
            ]


def latest_events(events: Iterable[AnnotationEvent]) -> dict[str, AnnotationEvent]:
    """Last write wins per record id: latest timestamp, log order on ties."""
    latest: dict[str, tuple[tuple, AnnotationEvent]] = {}
    for index, event in enumerate(events):
        key = (event.timestamp, index)
        if event.record_id not in latest or key > latest[event.record_id][0]:
            latest[event.record_id] = (key, event)
    return {record_id: ev for record_id, (_, ev) in latest.items()}


def export_annotated(corpus: Corpus, events: Sequence[AnnotationEvent]) -> tuple[Corpus, list[str]]:
    """Merge the latest event per record into the corpus.

    Untouched records pass through unchanged. Events referencing unknown
    record ids are collected into the returned exceptions list; the export
    continues. Idempotent: re-exporting an exported corpus with the same
    log changes nothing.
    """
    by_record = latest_events(events)
    known = set(corpus.ids())
    exceptions = sorted(
        f"event for unknown record id {rid!r}" for rid in by_record if rid not in known
    )
    merged = []
    for rec in corpus.records:
        event = by_record.get(rec.id)
        if event is None:
            merged.append(rec)
        elif event.critical:
            merged.append(rec.with_fields(
                critical=True,
                error_type=event.error_type,
                reference_text=event.corrected_reference,
                annotator_id=event.annotator_id,
            ))
        else:
            merged.append(rec.with_fields(
                critical=False,
                error_type=None,
                annotator_id=event.annotator_id,
            ))
    return corpus.with_records(merged), exceptions


class ReviewStore:
    """Corpus-backed annotation queue with an append-only log.

    ``pending``, ``assigned`` and ``done`` partition the record ids at every
    observable point. Locks expire after ``lock_timeout`` seconds of idling
    (measured on the writer's clock) and their records return to the front
    of the queue in original corpus order.
    """

    def __init__(
        self,
        corpus: Corpus,
        log: AnnotationLog,
        lock_timeout: float = 600.0,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.corpus = corpus
        self.log = log
        self.lock_timeout = lock_timeout
        self.clock = clock
        self._mutex = threading.RLock()
        self._order = {rec.id: i for i, rec in enumerate(corpus.records)}
        self._events = log.load()
        done = {e.record_id for e in self._events if e.record_id in self._order}
        self._done: set[str] = done
        self._pending: list[str] = [r.id for r in corpus.records if r.id not in done]
        # record_id -> (annotator_id, deadline)
        self._assigned: dict[str, tuple[str, float]] = {}
        self._by_annotator: dict[str, str] = {}

    # -- internal ---------------------------------------------------------

    def _expire_locks(self) -> None:
        now = self.clock()
        expired = [rid for rid, (_, deadline) in self._assigned.items() if deadline <= now]
        for rid in expired:
            annotator, _ = self._assigned.pop(rid)
            self._by_annotator.pop(annotator, None)
            self._pending.append(rid)
        if expired:
            self._pending.sort(key=self._order.__getitem__)

    # -- operations -------------------------------------------------------

    def next_item(self, annotator_id: str) -> SegmentRecord | None:
        """Return and lock the first unassigned pending record.

        Calling again while already holding a lock returns the same record.
        None once the queue is exhausted.
        """
        if not annotator_id:
            raise AnnotationValidationError(["annotator_id must be a non-empty string"])
        with self._mutex:
            self._expire_locks()
            held = self._by_annotator.get(annotator_id)
            if held is not None:
                self._assigned[held] = (annotator_id, self.clock() + self.lock_timeout)
                return self.corpus.by_id(held)
            if not self._pending:
                return None
            record_id = self._pending.pop(0)
            self._assigned[record_id] = (annotator_id, self.clock() + self.lock_timeout)
            self._by_annotator[annotator_id] = record_id
            return self.corpus.by_id(record_id)

    def submit_annotation(self, event: AnnotationEvent) -> None:
        """Durably append one decision and release the assignment.

        The record must currently be assigned to the submitting annotator;
        anything else is a stale-assignment conflict.
        """
        with self._mutex:
            self._expire_locks()
            holder = self._assigned.get(event.record_id)
            if holder is None or holder[0] != event.annotator_id:
                raise StaleAssignmentError(
                    f"record {event.record_id!r} is not assigned to {event.annotator_id!r}"
                )
            # durable before any state moves
            self.log.append(event)
            self._events.append(event)
            self._assigned.pop(event.record_id)
            self._by_annotator.pop(event.annotator_id, None)
            self._done.add(event.record_id)

    def progress(self) -> dict[str, int]:
        with self._mutex:
            self._expire_locks()
            return {
                "pending": len(self._pending),
                "done": len(self._done),
                "assigned": len(self._assigned),
            }

    def events(self) -> list[AnnotationEvent]:
        with self._mutex:
            return list(self._events)

    def export(self) -> tuple[Corpus, list[str]]:
        return export_annotated(self.corpus, self.events())

    def queue_ids(self) -> dict[str, object]:
        """Snapshot of the queue partition (for tests and debugging)."""
        with self._mutex:
            return {
                "pending": list(self._pending),
                "assigned": dict(self._by_annotator),
                "done": set(self._done),
            }


def taxonomy_entries(example_corpus: Corpus | None = None) -> list[dict]:
    """ErrorType list with display labels and one calibration example each.

    Examples come from the bundled annotated mini corpus unless another
    corpus is supplied.
    """
    if example_corpus is None:
        with resources.as_file(resources.files("mtcrit").joinpath("data/mini_corpus.jsonl")) as p:
            example_corpus = load_corpus(p)
    examples: dict[ErrorType, dict] = {}
    for rec in example_corpus.records:
        if rec.error_type is not None and rec.error_type not in examples:
            examples[rec.error_type] = {
                "source_text": rec.source_text,
                "mt_text": rec.mt_text,
                "reference_text": rec.reference_text,
            }
    entries = []
    for error_type in ErrorType:
        entry = {
            "value": error_type.value,
            "group": error_type.group,
            "label": TAXONOMY_LABELS[error_type],
        }
        if error_type in examples:
            entry["example"] = examples[error_type]
        entries.append(entry)
    return entries
