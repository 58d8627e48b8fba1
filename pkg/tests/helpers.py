"""Shared test utilities: deterministic generators, fake embeddings, and the
independent spreadsheet-style report recomputation used as an aggregation
oracle."""

from __future__ import annotations

import hashlib
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from mtcrit.metrics import EmbeddingSidecar
from mtcrit.textnorm import metric_tokens

FIXTURES = Path(__file__).parent / "fixtures"

VOCAB = ["the", "cat", "sat", "on", "mat", "a", "dog", "ran", "fast", "slow",
         "big", "red", "sun", "sky", "day"]


def random_tokens(rng: random.Random, min_len=0, max_len=12, vocab=VOCAB) -> list[str]:
    return [rng.choice(vocab) for _ in range(rng.randint(min_len, max_len))]


def ter_pair_generator(seed: int, count: int):
    """The acceptance TER differential pair source: small mixed alphabets,
    hypothesis lengths 0-6, reference lengths 1-6."""
    rng = random.Random(seed)
    for _ in range(count):
        alphabet = "abcdef"[: rng.randint(2, 6)]
        hyp = [rng.choice(alphabet) for _ in range(rng.randint(0, 6))]
        ref = [rng.choice(alphabet) for _ in range(rng.randint(1, 6))]
        yield hyp, ref


def fake_vector(token: str, index: int, dim: int = 8, salt: str = "emb") -> list[float]:
    """Platform-stable pseudo-random embedding for one token occurrence."""
    out = []
    for k in range(dim):
        digest = hashlib.sha256(f"{salt}|{token}|{index}|{k}".encode("utf-8")).digest()
        out.append(int.from_bytes(digest[:8], "big") / 2**64 * 2 - 1)
    return out


def fake_sidecar(corpus, dim: int = 8, baseline: float = 0.25) -> EmbeddingSidecar:
    """Deterministic embedding sidecar aligned with the metric tokenization."""
    records = {}
    for rec in corpus.records:
        if rec.reference_text is None or rec.mt_text is None:
            continue
        hyp = [fake_vector(t, i, dim, "hyp") for i, t in enumerate(metric_tokens(rec.mt_text))]
        ref = [fake_vector(t, i, dim, "ref") for i, t in enumerate(metric_tokens(rec.reference_text))]
        records[rec.id] = (hyp, ref)
    return EmbeddingSidecar(dim, records, rescale_baseline=baseline)


def recompute_report(score_path) -> dict[tuple[str, str, str], tuple[float, int]]:
    """Independent recomputation of the stratified report from a score file.

    Reads the raw JSON lines directly and averages with exact rational
    arithmetic; shares no code with mtcrit.report.
    """
    with open(score_path, encoding="utf-8") as fh:
        lines = [json.loads(l) for l in fh if l.strip()]
    rows = lines[1:]  # header line
    group_of = {
        "grammar_negation": "grammar",
        "grammar_preposition": "grammar",
        "grammar_subject": "grammar",
    }
    cells: dict[tuple[str, str], list[Fraction]] = {}
    overall: dict[str, list[Fraction]] = {}
    for row in rows:
        group = group_of.get(row["error_type"], row["error_type"])
        for metric, value in row["scores"].items():
            cells.setdefault((group, metric), []).append(Fraction(value))
            overall.setdefault(metric, []).append(Fraction(value))
    out: dict[tuple[str, str, str], tuple[float, int]] = {}
    for (group, metric), values in cells.items():
        out[("group", group, metric)] = (float(sum(values) / len(values)), len(values))
    for metric, values in overall.items():
        out[("overall", "all", metric)] = (float(sum(values) / len(values)), len(values))
    return out


def acceptance(name: str, ok: bool, detail: str = "") -> None:
    """One visible pass/fail line per criterion, bypassing pytest capture."""
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[acceptance] {name}: {status}{suffix}", file=sys.__stdout__, flush=True)
    assert ok, f"acceptance criterion failed: {name}{suffix}"
