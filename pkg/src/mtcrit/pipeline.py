"""Two-step screening pipeline: translate, classify, extract discrepancies.

External translation and classification are consumed through transport-
agnostic client contracts. An HTTP adapter and deterministic stubs are
provided; responses are cached on disk keyed by (client id, input hash) so
interrupted runs resume without repeated paid API calls.

Failed records are never silently dropped: every record produces exactly one
run-log event, and the output corpus plus the failed events account for the
whole input.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Protocol, Sequence

import requests

from .corpus import ClassifierLabel, Corpus, SegmentRecord, SourceLabel
from .textnorm import CLASSIFIER_NORM, normalize


class PipelineError(Exception):
    """Pipeline-level failure (bad precondition, missing field)."""


class ClientError(PipelineError):
    """Transport-level client failure; retried with backoff."""


class ContractViolation(PipelineError):
    """A client returned something outside its contract."""


def classifier_input(text: str) -> str:
    """Normalization applied to classifier input: lowercase, punctuation
    removal, emoji-to-lexicon mapping, lemmatization."""
    return normalize(text, CLASSIFIER_NORM)


class TranslatorClient(Protocol):
    client_id: str

    def translate(self, text: str) -> str: ...


class ClassifierClient(Protocol):
    client_id: str

    def classify(self, text: str) -> ClassifierLabel: ...


@dataclass(frozen=True)
class DiscrepancyRule:
    """Label-discrepancy filter flagging candidate mistranslations.

    A record is flagged when its gold label is in ``gold_trigger`` and the
    classifier predicted ``predicted_trigger``. Predictions of other mental-
    health labels on depression-gold records are deliberately not flagged;
    widen ``gold_trigger``/``predicted_trigger`` via configuration for a
    stricter variant.
    """

    gold_trigger: frozenset = frozenset({SourceLabel.DEPRESSION, SourceLabel.DEPRESSION_SUICIDAL})
    predicted_trigger: ClassifierLabel = ClassifierLabel.NON_MENTAL

    def __post_init__(self):
        if not self.gold_trigger:
            raise PipelineError("gold_trigger must be non-empty")
        if not isinstance(self.predicted_trigger, ClassifierLabel):
            raise PipelineError("predicted_trigger must be a classifier label")
        object.__setattr__(self, "gold_trigger", frozenset(SourceLabel(g) for g in self.gold_trigger))

    def matches(self, record: SegmentRecord) -> bool:
        if record.predicted_label is None:
            raise PipelineError(f"record {record.id!r} has no predicted_label")
        return record.gold_label in self.gold_trigger and record.predicted_label == self.predicted_trigger

    def to_dict(self) -> dict:
        return {
            "gold_trigger": sorted(g.value for g in self.gold_trigger),
            "predicted_trigger": self.predicted_trigger.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DiscrepancyRule":
        return cls(
            gold_trigger=frozenset(SourceLabel(g) for g in data["gold_trigger"]),
            predicted_trigger=ClassifierLabel(data["predicted_trigger"]),
        )


# ---------------------------------------------------------------------------
# Response cache

class ResponseCache:
    """Content-addressed on-disk response store.

    Keys are sha256(client id NUL input text); values are small JSON files.
    Reads are lock-free, writes are serialized and atomic (tmp + replace).
    """

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    def _path(self, client_id: str, text: str) -> Path:
        digest = hashlib.sha256(f"{client_id}\0{text}".encode("utf-8")).hexdigest()
        return self.root / digest[:2] / f"{digest}.json"

    def get(self, client_id: str, text: str) -> str | None:
        path = self._path(client_id, text)
        try:
            with open(path, encoding="utf-8") as fh:
                return json.load(fh)["response"]
        except FileNotFoundError:
            return None

    def put(self, client_id: str, text: str, response: str) -> None:
        path = self._path(client_id, text)
        with self._write_lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump({"response": response}, fh, ensure_ascii=False)
            os.replace(tmp, path)


# ---------------------------------------------------------------------------
# Run log

@dataclass(frozen=True)
class RunLogEvent:
    """One per-record outcome: ok, cached, skipped or failed.

    No wall-clock fields; identical runs must produce identical logs.
    """

    record_id: str
    action: str
    outcome: str
    retries: int = 0
    error: str | None = None

    def to_dict(self) -> dict:
        out = {
            "record_id": self.record_id,
            "action": self.action,
            "outcome": self.outcome,
            "retries": self.retries,
        }
        if self.error is not None:
            out["error"] = self.error
        return out


@dataclass
class PipelineResult:
    corpus: Corpus
    events: list[RunLogEvent] = field(default_factory=list)

    def failed_ids(self) -> list[str]:
        return [e.record_id for e in self.events if e.outcome == "failed"]

    def write_log(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for event in self.events:
                fh.write(json.dumps(event.to_dict(), ensure_ascii=False) + "\n")


def _with_retry(
    call: Callable[[], str],
    max_retries: int,
    backoff: float,
    sleep: Callable[[float], None],
) -> tuple[str, int]:
    """Run ``call``, retrying transport errors with exponential backoff.

    Returns (result, retries used). Contract violations are never retried.
    """
    attempt = 0
    while True:
        try:
            return call(), attempt
        except ContractViolation:
            raise
        except (ClientError, requests.RequestException) as exc:
            if attempt >= max_retries:
                raise ClientError(str(exc)) from exc
            sleep(backoff * (2 ** attempt))
            attempt += 1


# ---------------------------------------------------------------------------
# Pipeline operations

def _process_records(
    corpus: Corpus,
    action: str,
    process: Callable[[SegmentRecord], tuple[SegmentRecord, RunLogEvent]],
    workers: int,
) -> PipelineResult:
    if workers <= 1:
        outcomes = [process(rec) for rec in corpus.records]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(process, corpus.records))
    kept: list[SegmentRecord] = []
    events: list[RunLogEvent] = []
    for rec, event in outcomes:
        events.append(event)
        if event.outcome != "failed":
            kept.append(rec)
    metadata = dict(corpus.metadata)
    metadata[f"{action}_failed"] = len(corpus.records) - len(kept)
    return PipelineResult(Corpus(tuple(kept), metadata), events)


def translate_corpus(
    corpus: Corpus,
    client: TranslatorClient,
    cache: ResponseCache | None = None,
    force: bool = False,
    max_retries: int = 3,
    backoff: float = 0.5,
    workers: int = 1,
    sleep: Callable[[float], None] = time.sleep,
) -> PipelineResult:
    """Populate mt_text on every record via the translator client.

    Records that already carry mt_text are skipped unless ``force``.
    Transport failures are retried with exponential backoff up to
    ``max_retries``; a record that still fails is reported in the run log
    and omitted from the output corpus.
    """

    def process(rec: SegmentRecord) -> tuple[SegmentRecord, RunLogEvent]:
        if rec.mt_text is not None and not force:
            return rec, RunLogEvent(rec.id, "translate", "skipped")
        if cache is not None:
            cached = cache.get(client.client_id, rec.source_text)
            if cached is not None:
                return rec.with_fields(mt_text=cached), RunLogEvent(rec.id, "translate", "cached")
        try:
            text, retries = _with_retry(
                lambda: client.translate(rec.source_text), max_retries, backoff, sleep
            )
        except ClientError as exc:
            return rec, RunLogEvent(rec.id, "translate", "failed", max_retries, str(exc))
        if cache is not None:
            cache.put(client.client_id, rec.source_text, text)
        return rec.with_fields(mt_text=text), RunLogEvent(rec.id, "translate", "ok", retries)

    return _process_records(corpus, "translate", process, workers)


def classify_corpus(
    corpus: Corpus,
    client: ClassifierClient,
    cache: ResponseCache | None = None,
    force: bool = False,
    max_retries: int = 3,
    backoff: float = 0.5,
    workers: int = 1,
    sleep: Callable[[float], None] = time.sleep,
) -> PipelineResult:
    """Populate predicted_label on every record via the classifier client.

    Classifier input passes through the classifier normalization first.
    A record with no mt_text is a hard precondition error, not a transport
    failure.
    """
    for rec in corpus.records:
        if not rec.mt_text:
            raise PipelineError(f"record {rec.id!r} has no mt_text to classify")

    def call(text: str) -> ClassifierLabel:
        label = client.classify(text)
        try:
            return ClassifierLabel(label)
        except ValueError:
            raise ContractViolation(
                f"classifier {client.client_id!r} returned out-of-set label {label!r}"
            ) from None

    def process(rec: SegmentRecord) -> tuple[SegmentRecord, RunLogEvent]:
        if rec.predicted_label is not None and not force:
            return rec, RunLogEvent(rec.id, "classify", "skipped")
        text = classifier_input(rec.mt_text)
        if cache is not None:
            cached = cache.get(client.client_id, text)
            if cached is not None:
                label = ClassifierLabel(cached)
                return rec.with_fields(predicted_label=label), RunLogEvent(rec.id, "classify", "cached")
        try:
            label, retries = _with_retry(lambda: call(text), max_retries, backoff, sleep)
        except ClientError as exc:
            return rec, RunLogEvent(rec.id, "classify", "failed", max_retries, str(exc))
        if cache is not None:
            cache.put(client.client_id, text, label.value)
        return rec.with_fields(predicted_label=label), RunLogEvent(rec.id, "classify", "ok", retries)

    return _process_records(corpus, "classify", process, workers)


def extract_discrepancies(corpus: Corpus, rule: DiscrepancyRule | None = None) -> Corpus:
    """Sub-corpus of records whose labels disagree per the rule, order kept.

    These are candidate mistranslations (or misclassifications) pending
    human review; the judgment itself belongs to the review module.
    """
    if rule is None:
        rule = DiscrepancyRule()
    flagged = tuple(rec for rec in corpus.records if rule.matches(rec))
    metadata = dict(corpus.metadata)
    metadata["discrepancy_rule"] = rule.to_dict()
    return Corpus(flagged, metadata)


# ---------------------------------------------------------------------------
# Stub clients (deterministic, call-counting)

class _StubBase:
    def __init__(self, client_id: str, fail_times: int = 0):
        self.client_id = client_id
        self.fail_times = fail_times
        self.calls = 0
        self._lock = threading.Lock()

    def _count_call(self) -> None:
        with self._lock:
            self.calls += 1
            if self.calls <= self.fail_times:
                raise ClientError(f"{self.client_id}: simulated transport failure #{self.calls}")


class StubTranslator(_StubBase):
    """Deterministic translator: explicit mapping, else a fixed default,
    else echo. Optionally fails the first ``fail_times`` calls."""

    def __init__(self, mapping: dict[str, str] | None = None, default: str | None = None,
                 fail_times: int = 0, client_id: str = "stub-translator"):
        super().__init__(client_id, fail_times)
        self.mapping = dict(mapping or {})
        self.default = default

    def translate(self, text: str) -> str:
        self._count_call()
        if text in self.mapping:
            return self.mapping[text]
        if self.default is not None:
            return self.default
        return text


class StubClassifier(_StubBase):
    """Deterministic classifier over already-normalized input text.

    Mapping keys must be in classifier-normalized form (see
    :func:`classifier_input`). Values may be labels or raw strings; raw
    strings are passed through unchecked so tests can simulate contract
    violations.
    """

    def __init__(self, mapping: dict[str, object] | None = None,
                 default: object = ClassifierLabel.NON_MENTAL,
                 fail_times: int = 0, client_id: str = "stub-classifier"):
        super().__init__(client_id, fail_times)
        self.mapping = dict(mapping or {})
        self.default = default

    def classify(self, text: str):
        self._count_call()
        return self.mapping.get(text, self.default)


# ---------------------------------------------------------------------------
# HTTP adapters

@dataclass(frozen=True)
class HttpClientConfig:
    """Transport settings for a remote translate/classify endpoint.

    The auth token is never stored in config files; ``auth_env`` names the
    environment variable holding it.
    """

    base_url: str
    path: str
    request_field: str = "text"
    response_field: str = "result"
    auth_env: str | None = None
    timeout: float = 30.0
    extra_request_fields: dict = field(default_factory=dict)
    client_id: str | None = None

    def resolved_client_id(self) -> str:
        return self.client_id or f"{self.base_url.rstrip('/')}{self.path}"

    @classmethod
    def from_dict(cls, data: dict) -> "HttpClientConfig":
        return cls(
            base_url=data["base_url"],
            path=data["path"],
            request_field=data.get("request_field", "text"),
            response_field=data.get("response_field", "result"),
            auth_env=data.get("auth_env"),
            timeout=float(data.get("timeout", 30.0)),
            extra_request_fields=dict(data.get("extra_request_fields", {})),
            client_id=data.get("client_id"),
        )


class _HttpAdapter:
    def __init__(self, config: HttpClientConfig, session: requests.Session | None = None):
        self.config = config
        self.client_id = config.resolved_client_id()
        self._session = session or requests.Session()

    def _request(self, text: str) -> str:
        headers = {}
        if self.config.auth_env:
            token = os.environ.get(self.config.auth_env)
            if not token:
                raise PipelineError(f"auth env var {self.config.auth_env!r} is not set")
            headers["Authorization"] = f"Bearer {token}"
        payload = {self.config.request_field: text, **self.config.extra_request_fields}
        url = self.config.base_url.rstrip("/") + self.config.path
        try:
            resp = self._session.post(url, json=payload, headers=headers, timeout=self.config.timeout)
        except requests.RequestException as exc:
            raise ClientError(f"{self.client_id}: {exc}") from exc
        if resp.status_code >= 500:
            raise ClientError(f"{self.client_id}: server error {resp.status_code}")
        if resp.status_code != 200:
            raise ContractViolation(f"{self.client_id}: unexpected status {resp.status_code}")
        body = resp.json()
        if self.config.response_field not in body:
            raise ContractViolation(
                f"{self.client_id}: response lacks field {self.config.response_field!r}"
            )
        return body[self.config.response_field]


class HttpTranslator(_HttpAdapter):
    def translate(self, text: str) -> str:
        return self._request(text)


class HttpClassifier(_HttpAdapter):
    def classify(self, text: str) -> ClassifierLabel:
        raw = self._request(text)
        try:
            return ClassifierLabel(raw)
        except ValueError:
            raise ContractViolation(
                f"{self.client_id}: out-of-set label {raw!r}"
            ) from None
