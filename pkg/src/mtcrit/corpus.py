"""Record model, label sets, error taxonomy and line-delimited persistence.

A corpus is an ordered collection of bilingual segment records. Each record
carries the source tweet, its machine translation, an optional corrected
reference, the human gold label, the classifier's predicted label, and the
annotation outcome (criticality flag plus taxonomy tag).

File format: one JSON object per line, UTF-8, canonical field order
``id, source_text, mt_text, reference_text, gold_label, predicted_label,
error_type, critical, annotator_id``. Optional fields are omitted when null.
Unknown fields survive a load/save round-trip unchanged.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import IO, Any, Iterable, Iterator, Mapping


class CorpusError(Exception):
    """Base class for corpus-level failures."""


class RecordInvariantError(CorpusError):
    """A record violates one of the model invariants."""


class CorpusParseError(CorpusError):
    """A line of a corpus file could not be parsed."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class DuplicateIdError(CorpusError):
    """Two records share an id."""

    def __init__(self, record_id: str, first_line: int | None = None, second_line: int | None = None):
        self.record_id = record_id
        self.first_line = first_line
        self.second_line = second_line
        if first_line is not None and second_line is not None:
            msg = f"duplicate record id {record_id!r} on lines {first_line} and {second_line}"
        else:
            msg = f"duplicate record id {record_id!r}"
        super().__init__(msg)


class UnknownEnumValueError(CorpusError):
    """A closed-set field carries a value outside its set."""

    def __init__(self, fieldname: str, value: Any):
        self.fieldname = fieldname
        self.value = value
        super().__init__(f"unknown value {value!r} for field {fieldname!r}")


class SourceLabel(str, Enum):
    """Gold label assigned to the source tweet."""

    DEPRESSION = "depression"
    DEPRESSION_SUICIDAL = "depression_suicidal"
    NON_DEPRESSION = "non_depression"


class ClassifierLabel(str, Enum):
    """Label predicted by the target-language mental-health classifier."""

    ANXIETY = "anxiety"
    BIPOLAR = "bipolar"
    DEPRESSION = "depression"
    NON_MENTAL = "non_mental"


class ErrorType(str, Enum):
    """Closed taxonomy of critical translation error causes.

    The three ``grammar_*`` subtypes are stored at full granularity and
    roll up to a single ``grammar`` group for reporting.
    """

    DIALECTICAL = "dialectical"
    GRAMMAR_NEGATION = "grammar_negation"
    GRAMMAR_PREPOSITION = "grammar_preposition"
    GRAMMAR_SUBJECT = "grammar_subject"
    ORTHOGRAPHIC = "orthographic"
    DIACRITIC = "diacritic"
    VOCABULARY = "vocabulary"
    DELETION = "deletion"

    @property
    def group(self) -> str:
        """Reporting group: grammar subtypes merge, everything else is itself."""
        if self.value.startswith("grammar_"):
            return "grammar"
        return self.value


#: Reporting groups in alphabetical order (the csv/plot ordering).
ERROR_GROUPS = sorted({e.group for e in ErrorType})


def _parse_enum(enum_cls: type, fieldname: str, value: Any):
    try:
        return enum_cls(value)
    except ValueError:
        raise UnknownEnumValueError(fieldname, value) from None


def _nfc(text: str | None) -> str | None:
    # Arabic diacritics and presentation forms break id-stable round-trips
    # unless every stored string is NFC-normalized.
    if text is None:
        return None
    return unicodedata.normalize("NFC", text)


# Canonical on-disk field order.
_FIELDS = (
    "id",
    "source_text",
    "mt_text",
    "reference_text",
    "gold_label",
    "predicted_label",
    "error_type",
    "critical",
    "annotator_id",
)


@dataclass(frozen=True)
class SegmentRecord:
    """One bilingual tweet record.

    Invariants (enforced at construction):
      * ``id`` is non-empty,
      * a taxonomy tag (``error_type``) only exists after a criticality
        decision (``critical`` is not None),
      * a record marked critical carries a corrected ``reference_text``.
    """

    id: str
    source_text: str
    gold_label: SourceLabel
    mt_text: str | None = None
    reference_text: str | None = None
    predicted_label: ClassifierLabel | None = None
    error_type: ErrorType | None = None
    critical: bool | None = None
    annotator_id: str | None = None
    extra: dict[str, Any] = field(default_factory=dict, compare=True)

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise RecordInvariantError("record id must be a non-empty string")
        if self.gold_label is not None and not isinstance(self.gold_label, SourceLabel):
            raise UnknownEnumValueError("gold_label", self.gold_label)
        if self.predicted_label is not None and not isinstance(self.predicted_label, ClassifierLabel):
            raise UnknownEnumValueError("predicted_label", self.predicted_label)
        if self.error_type is not None and not isinstance(self.error_type, ErrorType):
            raise UnknownEnumValueError("error_type", self.error_type)
        if self.error_type is not None and self.critical is None:
            raise RecordInvariantError(
                f"record {self.id!r}: error_type set without a criticality decision"
            )
        if self.critical is True and self.reference_text is None:
            raise RecordInvariantError(
                f"record {self.id!r}: critical records require a corrected reference_text"
            )
        for name in ("id", "source_text", "mt_text", "reference_text", "annotator_id"):
            object.__setattr__(self, name, _nfc(getattr(self, name)))

    def to_dict(self) -> dict[str, Any]:
        """Serializable dict in canonical field order, optionals omitted."""
        out: dict[str, Any] = {}
        for name in _FIELDS:
            value = getattr(self, name)
            if value is None:
                continue
            if isinstance(value, Enum):
                value = value.value
            out[name] = value
        for key in sorted(self.extra):
            out[key] = self.extra[key]
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SegmentRecord":
        known = {k: data[k] for k in _FIELDS if k in data}
        extra = {k: v for k, v in data.items() if k not in _FIELDS}
        if "id" not in known:
            raise RecordInvariantError("record is missing an id")
        if "source_text" not in known:
            raise RecordInvariantError(f"record {known['id']!r} is missing source_text")
        if "gold_label" not in known:
            raise RecordInvariantError(f"record {known['id']!r} is missing gold_label")
        gold = _parse_enum(SourceLabel, "gold_label", known["gold_label"])
        predicted = known.get("predicted_label")
        if predicted is not None:
            predicted = _parse_enum(ClassifierLabel, "predicted_label", predicted)
        error_type = known.get("error_type")
        if error_type is not None:
            error_type = _parse_enum(ErrorType, "error_type", error_type)
        critical = known.get("critical")
        if critical is not None and not isinstance(critical, bool):
            raise RecordInvariantError(f"record {known['id']!r}: critical must be a boolean")
        return cls(
            id=known["id"],
            source_text=known["source_text"],
            mt_text=known.get("mt_text"),
            reference_text=known.get("reference_text"),
            gold_label=gold,
            predicted_label=predicted,
            error_type=error_type,
            critical=critical,
            annotator_id=known.get("annotator_id"),
            extra=extra,
        )

    def with_fields(self, **changes: Any) -> "SegmentRecord":
        """Copy with the given fields replaced (re-runs validation)."""
        return replace(self, **changes)


@dataclass(frozen=True)
class Corpus:
    """Ordered, id-unique collection of segment records.

    Immutable after construction; mutation means building a new corpus.
    ``metadata`` is free-form provenance (language pair, source run) and is
    not persisted in the record file.
    """

    records: tuple[SegmentRecord, ...]
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        seen: dict[str, int] = {}
        for i, rec in enumerate(self.records):
            if rec.id in seen:
                raise DuplicateIdError(rec.id, seen[rec.id] + 1, i + 1)
            seen[rec.id] = i

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[SegmentRecord]:
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def by_id(self, record_id: str) -> SegmentRecord:
        for rec in self.records:
            if rec.id == record_id:
                return rec
        raise KeyError(record_id)

    def ids(self) -> list[str]:
        return [r.id for r in self.records]

    def with_records(self, records: Iterable[SegmentRecord]) -> "Corpus":
        return Corpus(tuple(records), dict(self.metadata))


def _read_lines(fh: IO[str]) -> Iterator[tuple[int, str]]:
    for line_no, line in enumerate(fh, start=1):
        line = line.strip()
        if line:
            yield line_no, line


def load_corpus(path) -> Corpus:
    """Load a line-delimited corpus file.

    Raises :class:`CorpusParseError` with the offending line number,
    :class:`DuplicateIdError` naming both lines, or
    :class:`UnknownEnumValueError` for closed-set violations.
    """
    records: list[SegmentRecord] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in _read_lines(fh):
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusParseError(f"invalid JSON: {exc.msg}", line_no) from None
            if not isinstance(data, dict):
                raise CorpusParseError("record line must be a JSON object", line_no)
            try:
                rec = SegmentRecord.from_dict(data)
            except (RecordInvariantError, UnknownEnumValueError) as exc:
                raise CorpusParseError(str(exc), line_no) from exc
            if rec.id in seen:
                raise DuplicateIdError(rec.id, seen[rec.id], line_no)
            seen[rec.id] = line_no
            records.append(rec)
    return Corpus(tuple(records), {"path": str(path)})


def dump_record(record: SegmentRecord) -> str:
    return json.dumps(record.to_dict(), ensure_ascii=False)


def save_corpus(corpus: Corpus, path) -> None:
    """Write a corpus in the canonical line-delimited format.

    ``load_corpus(save_corpus(c))`` round-trips records byte-stably.
    Invariants are re-checked before anything is written.
    """
    lines = [dump_record(rec) for rec in corpus.records]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")


def taxonomy_frequencies(corpus: Corpus) -> dict[str, float]:
    """Fraction of critical records per error-type group.

    Grammar subtypes are merged into the ``grammar`` group. Fractions are
    taken over all records with ``critical == True`` and sum to 1.
    """
    counts: dict[str, int] = {}
    total = 0
    for rec in corpus.records:
        if rec.critical is not True:
            continue
        if rec.error_type is None:
            raise RecordInvariantError(
                f"record {rec.id!r} is critical but carries no error_type"
            )
        total += 1
        group = rec.error_type.group
        counts[group] = counts.get(group, 0) + 1
    if total == 0:
        raise CorpusError("no critical records: taxonomy frequencies are undefined")
    return {group: counts[group] / total for group in sorted(counts)}
