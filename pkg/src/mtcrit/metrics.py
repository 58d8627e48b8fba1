"""From-scratch MT quality metrics over token sequences.

All string metrics (sentence BLEU, GoogleBLEU, ROUGE-L, METEOR, TER) operate
on token sequences; BERTScore consumes per-token embedding sets produced
elsewhere. Scores are on a 0-1 scale except TER, which is an edit rate and
may exceed 1, and the rescaled BERTScore, which may be negative.

Every operation here is pure and stateless; the corpus scorer fans out per
record and orders its output deterministically by record id.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .corpus import Corpus, SegmentRecord
from .textnorm import TokenSequence, as_tokens, metric_tokens, stem

Tokens = Sequence[str]


class MetricError(ValueError):
    """Invalid metric input (empty reference, missing record fields, ...)."""


# ---------------------------------------------------------------------------
# n-gram counting and precision/recall

def ngram_counts(seq: Tokens, n: int) -> Counter:
    """Multiset of contiguous n-grams of ``seq``."""
    if n < 1:
        raise MetricError("n-gram order must be >= 1")
    toks = as_tokens(seq)
    return Counter(tuple(toks[i:i + n]) for i in range(len(toks) - n + 1))


def _clipped(hyp_counts: Counter, ref_counts: Counter) -> int:
    # per n-gram type, min(hyp count, ref count)
    return sum(min(c, ref_counts[g]) for g, c in hyp_counts.items() if g in ref_counts)


def ngram_precision_recall(hyp: Tokens, ref: Tokens, n: int) -> tuple[float, float]:
    """Clipped n-gram precision (over hyp total) and recall (over ref total).

    A zero denominator makes the corresponding component 0.
    """
    hyp_counts = ngram_counts(hyp, n)
    ref_counts = ngram_counts(ref, n)
    matches = _clipped(hyp_counts, ref_counts)
    hyp_total = sum(hyp_counts.values())
    ref_total = sum(ref_counts.values())
    precision = matches / hyp_total if hyp_total else 0.0
    recall = matches / ref_total if ref_total else 0.0
    return precision, recall


# ---------------------------------------------------------------------------
# Sentence / corpus BLEU

@dataclass(frozen=True)
class BleuConfig:
    """Maximum n-gram order and the sentence smoothing scheme.

    ``add_one_on_zero`` adds one to the clipped numerator and to the
    denominator, for orders >= 2 only, and only when the unsmoothed
    precision of that order is zero. Tweets are short; without this a
    single missing 4-gram zeroes the whole score.
    """

    max_n: int = 4
    smoothing: str = "add_one_on_zero"

    def __post_init__(self):
        if self.max_n < 1:
            raise MetricError("max_n must be >= 1")
        if self.smoothing not in ("none", "add_one_on_zero"):
            raise MetricError(f"unknown smoothing {self.smoothing!r}")


DEFAULT_BLEU = BleuConfig()


def _closest_ref_length(hyp_len: int, ref_lens: Sequence[int]) -> int:
    # ties resolved toward the shorter reference
    return min(ref_lens, key=lambda r: (abs(r - hyp_len), r))


def _bleu_segment_stats(hyp: Tokens, refs: Sequence[Tokens], max_n: int):
    """Per-order clipped numerators and denominators plus the length pair."""
    toks = as_tokens(hyp)
    ref_tokens = [as_tokens(r) for r in refs]
    numerators = []
    denominators = []
    for n in range(1, max_n + 1):
        hyp_counts = ngram_counts(toks, n) if len(toks) >= n else Counter()
        max_ref: Counter = Counter()
        for rt in ref_tokens:
            for gram, count in ngram_counts(rt, n).items():
                if count > max_ref[gram]:
                    max_ref[gram] = count
        numerators.append(_clipped(hyp_counts, max_ref))
        denominators.append(max(0, len(toks) - n + 1))
    ref_len = _closest_ref_length(len(toks), [len(rt) for rt in ref_tokens])
    return numerators, denominators, len(toks), ref_len


def _bleu_from_stats(numerators, denominators, hyp_len, ref_len, config: BleuConfig) -> float:
    if hyp_len == 0:
        return 0.0
    log_sum = 0.0
    for n, (num, den) in enumerate(zip(numerators, denominators), start=1):
        if config.smoothing == "add_one_on_zero" and n >= 2 and num == 0:
            num, den = num + 1, den + 1
        if num == 0 or den == 0:
            return 0.0
        log_sum += math.log(num / den)
    geo_mean = math.exp(log_sum / len(numerators))
    bp = min(1.0, math.exp(1.0 - ref_len / hyp_len))
    return bp * geo_mean


def bleu(hyp: Tokens, refs: Sequence[Tokens], config: BleuConfig = DEFAULT_BLEU) -> float:
    """Sentence BLEU: geometric mean of clipped modified precisions times
    the brevity penalty min(1, exp(1 - r/c))."""
    if not refs:
        raise MetricError("bleu requires at least one reference")
    stats = _bleu_segment_stats(hyp, refs, config.max_n)
    return _bleu_from_stats(*stats, config)


def bleu_corpus(pairs: Iterable[tuple[Tokens, Sequence[Tokens]]], config: BleuConfig = DEFAULT_BLEU) -> float:
    """Corpus BLEU: numerators/denominators are aggregated over segments
    before the geometric mean; lengths are summed for the brevity penalty."""
    numerators = [0] * config.max_n
    denominators = [0] * config.max_n
    hyp_total = 0
    ref_total = 0
    seen = False
    for hyp, refs in pairs:
        if not refs:
            raise MetricError("bleu requires at least one reference")
        seen = True
        nums, dens, hyp_len, ref_len = _bleu_segment_stats(hyp, refs, config.max_n)
        numerators = [a + b for a, b in zip(numerators, nums)]
        denominators = [a + b for a, b in zip(denominators, dens)]
        hyp_total += hyp_len
        ref_total += ref_len
    if not seen:
        raise MetricError("bleu_corpus requires at least one segment")
    return _bleu_from_stats(numerators, denominators, hyp_total, ref_total, config)


# ---------------------------------------------------------------------------
# GoogleBLEU

def google_bleu_stats(hyp: Tokens, ref: Tokens, max_n: int = 4) -> tuple[float, float, float]:
    """(precision, recall, score) over the pooled multiset of all 1..4-grams.

    score = min(precision, recall); two empty sequences count as a perfect
    match, a single empty one as a total miss.
    """
    th, tr = as_tokens(hyp), as_tokens(ref)
    if not th and not tr:
        return 1.0, 1.0, 1.0
    if not th or not tr:
        return 0.0, 0.0, 0.0
    hyp_counts: Counter = Counter()
    ref_counts: Counter = Counter()
    for n in range(1, max_n + 1):
        hyp_counts.update(ngram_counts(th, n))
        ref_counts.update(ngram_counts(tr, n))
    matches = _clipped(hyp_counts, ref_counts)
    precision = matches / sum(hyp_counts.values())
    recall = matches / sum(ref_counts.values())
    return precision, recall, min(precision, recall)


def google_bleu(hyp: Tokens, ref: Tokens) -> float:
    return google_bleu_stats(hyp, ref)[2]


# ---------------------------------------------------------------------------
# ROUGE-L

def lcs_length(a: Tokens, b: Tokens) -> int:
    """Longest common subsequence length (iterative DP, two rows)."""
    ta, tb = as_tokens(a), as_tokens(b)
    if len(ta) < len(tb):
        ta, tb = tb, ta
    prev = [0] * (len(tb) + 1)
    for x in ta:
        cur = [0] * (len(tb) + 1)
        for j, y in enumerate(tb, start=1):
            if x == y:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l(hyp: Tokens, ref: Tokens) -> float:
    """LCS-based F1: P = LCS/|hyp|, R = LCS/|ref|, F = 2PR/(P+R)."""
    th, tr = as_tokens(hyp), as_tokens(ref)
    lcs = lcs_length(th, tr)
    if lcs == 0:
        return 0.0
    precision = lcs / len(th)
    recall = lcs / len(tr)
    return 2 * precision * recall / (precision + recall)


# ---------------------------------------------------------------------------
# METEOR

@dataclass(frozen=True)
class MatcherStage:
    """One unigram matching stage: tokens match when their keys are equal.

    A key of None means the token cannot match at this stage.
    """

    name: str
    key: Callable[[str], Hashable | None]


def exact_matcher() -> MatcherStage:
    return MatcherStage("exact", lambda w: w)


def stem_matcher(stemmer: Callable[[str], str] = stem) -> MatcherStage:
    return MatcherStage("stem", stemmer)


def synonym_matcher(table: dict[str, str] | None = None) -> MatcherStage:
    """Synonym stage: tokens match when the table maps them to the same
    group id. The default empty table disables the stage."""
    groups = dict(table or {})
    return MatcherStage("synonym", lambda w: groups.get(w))


def load_synonym_table(path) -> dict[str, str]:
    """Two-column TSV ``word<TAB>group``, ``#`` comments."""
    table: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise MetricError(f"synonym table line {line_no}: expected 'word<TAB>group'")
            table[parts[0]] = parts[1]
    return table


def default_matchers() -> tuple[MatcherStage, ...]:
    return (exact_matcher(), stem_matcher(), synonym_matcher())


def _align(hyp: tuple, ref: tuple, matchers: Sequence[MatcherStage]) -> list[tuple[int, int]]:
    """Stage-ordered one-to-one unigram alignment.

    Stages consume only still-unmatched tokens, in order. Within a stage,
    hypothesis positions are scanned left to right; each picks the reference
    candidate that continues the run of its left neighbour when possible,
    otherwise the leftmost free candidate. That keeps chunks contiguous
    without a combinatorial search.
    """
    hyp_match: list[int | None] = [None] * len(hyp)
    ref_taken = [False] * len(ref)
    for stage in matchers:
        ref_keys = [stage.key(tok) for tok in ref]
        for hi, tok in enumerate(hyp):
            if hyp_match[hi] is not None:
                continue
            key = stage.key(tok)
            if key is None:
                continue
            candidates = [
                ri for ri, rkey in enumerate(ref_keys)
                if not ref_taken[ri] and rkey is not None and rkey == key
            ]
            if not candidates:
                continue
            pick = candidates[0]
            if hi > 0 and hyp_match[hi - 1] is not None:
                follow = hyp_match[hi - 1] + 1
                if follow in candidates:
                    pick = follow
            hyp_match[hi] = pick
            ref_taken[pick] = True
    return [(hi, ri) for hi, ri in enumerate(hyp_match) if ri is not None]


def _chunk_count(pairs: list[tuple[int, int]]) -> int:
    # fewest contiguous in-order runs covering the matched pairs
    chunks = 0
    prev: tuple[int, int] | None = None
    for hi, ri in pairs:
        if prev is None or hi != prev[0] + 1 or ri != prev[1] + 1:
            chunks += 1
        prev = (hi, ri)
    return chunks


def meteor(hyp: Tokens, ref: Tokens, matchers: Sequence[MatcherStage] | None = None) -> float:
    """Staged unigram matching (exact, stem, synonym) with the classic
    parameters: Fmean = 10PR/(R+9P), fragmentation penalty 0.5*(chunks/m)^3.
    """
    th, tr = as_tokens(hyp), as_tokens(ref)
    if matchers is None:
        matchers = default_matchers()
    pairs = _align(th, tr, matchers)
    m = len(pairs)
    if m == 0:
        return 0.0
    precision = m / len(th)
    recall = m / len(tr)
    fmean = 10 * precision * recall / (recall + 9 * precision)
    penalty = 0.5 * (_chunk_count(pairs) / m) ** 3
    return fmean * (1.0 - penalty)


# ---------------------------------------------------------------------------
# TER

def levenshtein(a: Tokens, b: Tokens) -> int:
    """Word-level edit distance (insert/delete/substitute, unit costs)."""
    ta, tb = as_tokens(a), as_tokens(b)
    if len(ta) < len(tb):
        ta, tb = tb, ta
    prev = list(range(len(tb) + 1))
    for i, x in enumerate(ta, start=1):
        cur = [i] + [0] * len(tb)
        for j, y in enumerate(tb, start=1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y))
        prev = cur
    return prev[-1]


MAX_SHIFT_BLOCK = 10


def _shift_candidates(current: list, ref_blocks: set[tuple]) -> Iterable[list]:
    for start in range(len(current)):
        max_len = min(MAX_SHIFT_BLOCK, len(current) - start)
        for length in range(1, max_len + 1):
            block = tuple(current[start:start + length])
            # only blocks that exactly match some contiguous ref sub-sequence move
            if block not in ref_blocks:
                continue
            rest = current[:start] + current[start + length:]
            for dest in range(len(rest) + 1):
                if dest == start:
                    continue
                yield rest[:dest] + list(block) + rest[dest:]


def _best_shift(current: list, tr: tuple, distance: int, ref_blocks: set[tuple]):
    """The shift with the largest edit-distance decrease, or None.

    Ties at the largest decrease are broken by one step of lookahead:
    among the tied moves, prefer the one whose result admits the best
    follow-up shift. Without this, a dead-end tie pick can strand the
    greedy loop one edit above an equally greedy alternative.
    """
    best_delta = 0
    tied: list[list] = []
    for candidate in _shift_candidates(current, ref_blocks):
        delta = distance - levenshtein(candidate, tr)
        if delta > best_delta:
            best_delta, tied = delta, [candidate]
        elif delta == best_delta and best_delta > 0:
            tied.append(candidate)
    if not tied:
        return None, 0
    if len(tied) == 1:
        return tied[0], best_delta
    after = distance - best_delta

    def next_gain(seq: list) -> int:
        gain = 0
        for candidate in _shift_candidates(seq, ref_blocks):
            gain = max(gain, after - levenshtein(candidate, tr))
        return gain

    return max(tied, key=next_gain), best_delta


def ter(hyp: Tokens, ref: Tokens) -> float:
    """Translation edit rate: (shifts + remaining edit distance) / |ref|.

    Shifts are found greedily: repeatedly apply the block move that most
    decreases the plain edit distance, each costing one edit, until no move
    decreases it. Moved blocks are capped at 10 tokens and must exactly
    match a contiguous reference sub-sequence.
    """
    th, tr = as_tokens(hyp), as_tokens(ref)
    if not tr:
        raise MetricError("ter is undefined for an empty reference")
    ref_blocks = {tr[i:j] for i in range(len(tr))
                  for j in range(i + 1, min(len(tr), i + MAX_SHIFT_BLOCK) + 1)}
    current = list(th)
    distance = levenshtein(current, tr)
    shifts = 0
    while distance > 0:
        best, best_delta = _best_shift(current, tr, distance, ref_blocks)
        if best is None:
            break
        current = best
        distance -= best_delta
        shifts += 1
    return (shifts + distance) / len(tr)


# ---------------------------------------------------------------------------
# BERTScore

class EmbeddingSet:
    """Per-token embedding vectors aligned with a token sequence."""

    def __init__(self, tokens: Tokens, vectors):
        self.tokens = as_tokens(tokens)
        arr = np.asarray(vectors, dtype=float)
        if arr.ndim != 2:
            raise MetricError("vectors must be a 2-D array (tokens x dim)")
        if arr.shape[0] != len(self.tokens):
            raise MetricError(
                f"vector count {arr.shape[0]} != token count {len(self.tokens)}"
            )
        if arr.shape[1] < 1:
            raise MetricError("embedding dimension must be >= 1")
        norms = np.linalg.norm(arr, axis=1)
        if np.any(norms == 0.0):
            raise MetricError("zero-norm embedding vector")
        self.vectors = arr
        self._norms = norms

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


def bertscore(hyp_emb: EmbeddingSet, ref_emb: EmbeddingSet) -> tuple[float, float, float]:
    """Greedy cosine matching: each token takes its best counterpart.

    Negative cosines are clamped to 0 before aggregation. Returns
    (precision, recall, f1).
    """
    if len(hyp_emb) == 0 or len(ref_emb) == 0:
        raise MetricError("bertscore requires non-empty embedding sets")
    if hyp_emb.dim != ref_emb.dim:
        raise MetricError(f"embedding dims differ: {hyp_emb.dim} vs {ref_emb.dim}")
    sim = hyp_emb.vectors @ ref_emb.vectors.T
    sim /= np.outer(hyp_emb._norms, ref_emb._norms)
    np.clip(sim, 0.0, 1.0, out=sim)
    precision = float(sim.max(axis=1).mean())
    recall = float(sim.max(axis=0).mean())
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def rescale(raw: float, baseline: float) -> float:
    """Baseline rescaling (raw - b) / (1 - b); may turn negative."""
    if baseline >= 1.0:
        raise MetricError("rescale baseline must be < 1")
    return (raw - baseline) / (1.0 - baseline)


# ---------------------------------------------------------------------------
# Per-record scoring

#: Report row order for metric names.
METRIC_ORDER = (
    "sacrebleu",
    "meteor",
    "rouge_l",
    "bertscore",
    "bertscore_rescaled",
    "ter",
    "google_bleu",
)

#: Reading direction per metric; TER is the only lower-is-better one.
METRIC_DIRECTIONS = {
    name: ("lower_better" if name == "ter" else "higher_better") for name in METRIC_ORDER
}


@dataclass(frozen=True)
class MetricVector:
    """Per-record scores for all enabled metrics.

    BERTScore fields are absent when no embeddings were supplied; the
    rescaled variant may be negative, TER may exceed 1.
    """

    sacrebleu: float
    meteor: float
    rouge_l: float
    ter: float
    google_bleu: float
    bertscore: float | None = None
    bertscore_rescaled: float | None = None

    def __post_init__(self):
        for name in ("sacrebleu", "meteor", "rouge_l", "google_bleu"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise MetricError(f"{name} out of [0, 1]: {value}")
        if self.ter < 0.0:
            raise MetricError(f"ter must be >= 0: {self.ter}")
        if self.bertscore is not None and not 0.0 <= self.bertscore <= 1.0:
            raise MetricError(f"bertscore out of [0, 1]: {self.bertscore}")
        if self.bertscore_rescaled is not None and self.bertscore is None:
            raise MetricError("bertscore_rescaled requires bertscore")

    def to_dict(self) -> dict[str, float]:
        out = {}
        for name in METRIC_ORDER:
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "MetricVector":
        return cls(
            sacrebleu=data["sacrebleu"],
            meteor=data["meteor"],
            rouge_l=data["rouge_l"],
            ter=data["ter"],
            google_bleu=data["google_bleu"],
            bertscore=data.get("bertscore"),
            bertscore_rescaled=data.get("bertscore_rescaled"),
        )


def score_pair(
    hyp: TokenSequence | Tokens,
    ref: TokenSequence | Tokens,
    embeddings: tuple[EmbeddingSet, EmbeddingSet] | None = None,
    rescale_baseline: float | None = None,
    bleu_config: BleuConfig = DEFAULT_BLEU,
    matchers: Sequence[MatcherStage] | None = None,
) -> MetricVector:
    """All string metrics for one hypothesis/reference token pair."""
    bert = bert_rescaled = None
    if embeddings is not None:
        _, _, bert = bertscore(*embeddings)
        if rescale_baseline is not None:
            bert_rescaled = rescale(bert, rescale_baseline)
    return MetricVector(
        sacrebleu=bleu(hyp, [ref], bleu_config),
        meteor=meteor(hyp, ref, matchers),
        rouge_l=rouge_l(hyp, ref),
        ter=ter(hyp, ref),
        google_bleu=google_bleu(hyp, ref),
        bertscore=bert,
        bertscore_rescaled=bert_rescaled,
    )


def score_record(
    record: SegmentRecord,
    embeddings: tuple[EmbeddingSet, EmbeddingSet] | None = None,
    rescale_baseline: float | None = None,
) -> MetricVector:
    """Score one record's MT output against its corrected reference.

    Both sides go through the default metric normalization (NFC, lowercase,
    punctuation separated into tokens).
    """
    if record.reference_text is None:
        raise MetricError(f"record {record.id!r} has no reference_text")
    if record.mt_text is None:
        raise MetricError(f"record {record.id!r} has no mt_text")
    hyp = metric_tokens(record.mt_text)
    ref = metric_tokens(record.reference_text)
    if len(ref) == 0:
        raise MetricError(f"record {record.id!r}: reference_text normalizes to no tokens")
    return score_pair(hyp, ref, embeddings, rescale_baseline)


# ---------------------------------------------------------------------------
# Embedding sidecar

class EmbeddingSidecar:
    """Per-record embedding vectors keyed by record id.

    File layout: JSON lines; the first line is a header declaring the
    vector dimension and an optional rescale baseline, every following line
    is ``{"id": ..., "hyp": [[...], ...], "ref": [[...], ...]}``.
    """

    HEADER_KIND = "embedding_sidecar"

    def __init__(self, dim: int, records: dict[str, tuple[list, list]], rescale_baseline: float | None = None):
        self.dim = dim
        self.records = records
        self.rescale_baseline = rescale_baseline

    @classmethod
    def load(cls, path) -> "EmbeddingSidecar":
        with open(path, encoding="utf-8") as fh:
            lines = [line for line in (l.strip() for l in fh) if line]
        if not lines:
            raise MetricError(f"{path}: empty embedding sidecar")
        header = json.loads(lines[0])
        if header.get("kind") != cls.HEADER_KIND or "dim" not in header:
            raise MetricError(f"{path}: first line must be a sidecar header with a dim field")
        dim = int(header["dim"])
        records: dict[str, tuple[list, list]] = {}
        for line in lines[1:]:
            row = json.loads(line)
            records[row["id"]] = (row["hyp"], row["ref"])
        return cls(dim, records, header.get("rescale_baseline"))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            header: dict = {"kind": self.HEADER_KIND, "dim": self.dim}
            if self.rescale_baseline is not None:
                header["rescale_baseline"] = self.rescale_baseline
            fh.write(json.dumps(header, ensure_ascii=False) + "\n")
            for record_id in sorted(self.records):
                hyp, ref = self.records[record_id]
                fh.write(json.dumps({"id": record_id, "hyp": hyp, "ref": ref}, ensure_ascii=False) + "\n")

    def embedding_sets(self, record: SegmentRecord) -> tuple[EmbeddingSet, EmbeddingSet] | None:
        """Build aligned embedding sets for a record, or None when absent.

        Vector counts must match the metric tokenization of the record's
        mt_text / reference_text.
        """
        if record.id not in self.records:
            return None
        hyp_vecs, ref_vecs = self.records[record.id]
        hyp_toks = metric_tokens(record.mt_text or "")
        ref_toks = metric_tokens(record.reference_text or "")
        if len(hyp_vecs) != len(hyp_toks) or len(ref_vecs) != len(ref_toks):
            raise MetricError(
                f"record {record.id!r}: sidecar vector counts "
                f"({len(hyp_vecs)}, {len(ref_vecs)}) do not match token counts "
                f"({len(hyp_toks)}, {len(ref_toks)})"
            )
        return EmbeddingSet(hyp_toks, hyp_vecs), EmbeddingSet(ref_toks, ref_vecs)


def score_corpus(
    corpus: Corpus,
    sidecar: EmbeddingSidecar | None = None,
    workers: int = 1,
) -> list[tuple[SegmentRecord, MetricVector]]:
    """Score every record that has a reference, in deterministic id order.

    Records without a reference_text are skipped (they were never annotated
    as critical); everything else failing to score raises.
    """
    scorable = sorted(
        (rec for rec in corpus.records if rec.reference_text is not None),
        key=lambda r: r.id,
    )

    def one(rec: SegmentRecord) -> tuple[SegmentRecord, MetricVector]:
        embeddings = sidecar.embedding_sets(rec) if sidecar is not None else None
        baseline = sidecar.rescale_baseline if sidecar is not None else None
        return rec, score_record(rec, embeddings, baseline)

    if workers <= 1:
        return [one(rec) for rec in scorable]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, scorable))
