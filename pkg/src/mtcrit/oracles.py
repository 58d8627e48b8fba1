"""Brute-force reference implementations for validating the string metrics.

These deliberately use different algorithm families than the production
implementations (subsequence enumeration and memoized recursion instead of
iterative dynamic programming, exhaustive shift search instead of greedy),
so a bug cannot be shared between the checker and the checked. Inputs are
capped tiny by design; performance is a non-goal.
"""

from __future__ import annotations

import math
from collections import Counter
from functools import lru_cache
from typing import Sequence

from .textnorm import as_tokens

MAX_LCS_LEN = 12
MAX_TER_LEN = 6
TER_SEARCH_DEPTH = 2


class OracleBoundError(ValueError):
    """Input exceeds the deliberately tiny oracle bounds."""


def _check_bound(name: str, seq: tuple, limit: int) -> None:
    if len(seq) > limit:
        raise OracleBoundError(f"{name} length {len(seq)} exceeds oracle bound {limit}")


def _is_subsequence(sub: tuple, seq: tuple) -> bool:
    it = iter(seq)
    return all(tok in it for tok in sub)


def lcs_bruteforce(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length by enumerating all subsequences
    of the shorter sequence (bitmask enumeration, lengths capped at 12)."""
    ta, tb = as_tokens(a), as_tokens(b)
    _check_bound("a", ta, MAX_LCS_LEN)
    _check_bound("b", tb, MAX_LCS_LEN)
    short, long_ = (ta, tb) if len(ta) <= len(tb) else (tb, ta)
    best = 0
    for mask in range(1 << len(short)):
        size = mask.bit_count()
        if size <= best:
            continue
        sub = tuple(short[i] for i in range(len(short)) if mask >> i & 1)
        if _is_subsequence(sub, long_):
            best = size
    return best


def edit_distance_recursive(a: Sequence[str], b: Sequence[str]) -> int:
    """Word edit distance via memoized recursion (not the iterative DP the
    metrics module uses)."""
    ta, tb = as_tokens(a), as_tokens(b)

    @lru_cache(maxsize=None)
    def go(i: int, j: int) -> int:
        if i == len(ta):
            return len(tb) - j
        if j == len(tb):
            return len(ta) - i
        if ta[i] == tb[j]:
            return go(i + 1, j + 1)
        return 1 + min(go(i + 1, j), go(i, j + 1), go(i + 1, j + 1))

    return go(0, 0)


def _ref_block_set(ref: tuple, max_block: int = 10) -> set[tuple]:
    blocks = set()
    for i in range(len(ref)):
        for j in range(i + 1, min(len(ref), i + max_block) + 1):
            blocks.add(ref[i:j])
    return blocks


def _all_shifts(seq: tuple, valid_blocks: set[tuple]) -> set[tuple]:
    """Every sequence reachable by one valid block move.

    A move takes a contiguous block that exactly matches some contiguous
    reference sub-sequence (the same validity rule production shifts obey;
    the exhaustive search is what makes this an oracle) and re-inserts it
    at any other position.
    """
    results: set[tuple] = set()
    for start in range(len(seq)):
        for length in range(1, len(seq) - start + 1):
            block = seq[start:start + length]
            if block not in valid_blocks:
                continue
            rest = seq[:start] + seq[start + length:]
            for dest in range(len(rest) + 1):
                if dest == start:
                    continue
                results.add(rest[:dest] + block + rest[dest:])
    results.discard(seq)
    return results


def ter_bruteforce(hyp: Sequence[str], ref: Sequence[str], max_depth: int = TER_SEARCH_DEPTH) -> float:
    """Minimum of (shifts + edit distance) / |ref| over all shift sequences
    of depth <= 2, by exhaustive enumeration (lengths capped at 6)."""
    th, tr = as_tokens(hyp), as_tokens(ref)
    _check_bound("hyp", th, MAX_TER_LEN)
    _check_bound("ref", tr, MAX_TER_LEN)
    if not tr:
        raise ValueError("ter_bruteforce: empty reference")
    valid_blocks = _ref_block_set(tr)
    best = edit_distance_recursive(th, tr)
    frontier = {th}
    for depth in range(1, max_depth + 1):
        next_frontier: set[tuple] = set()
        for seq in frontier:
            next_frontier |= _all_shifts(seq, valid_blocks)
        if not next_frontier:
            break
        best = min(best, depth + min(edit_distance_recursive(s, tr) for s in next_frontier))
        frontier = next_frontier
    return best / len(tr)


def ngram_count_naive(s: Sequence[str], n: int) -> Counter:
    """Sliding-window n-gram multiset; |result| == max(0, len(s) - n + 1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    toks = as_tokens(s)
    return Counter(
        tuple(toks[i:i + n]) for i in range(len(toks) - n + 1)
    )


def clipped_matches_naive(hyp: Sequence[str], ref: Sequence[str], n: int) -> int:
    """Clipped n-gram match count via the naive multisets (oracle for the
    modified-precision numerator)."""
    hyp_counts = ngram_count_naive(hyp, n)
    ref_counts = ngram_count_naive(ref, n)
    return sum(min(c, ref_counts[g]) for g, c in hyp_counts.items() if g in ref_counts)


def generate_derived_fixtures() -> dict:
    """Expected values for the frozen metric fixtures, computed here with
    exact rational arithmetic and the brute-force searches, never with the
    production metric code."""
    from fractions import Fraction

    cases: dict[str, dict] = {}

    hyp = "the the the the the the the".split()
    ref = "the cat is on the mat".split()
    matches = clipped_matches_naive(hyp, ref, 1)
    cases["ngram_clipped_unigram_precision"] = {
        "op": "ngram_precision", "n": 1, "hyp": hyp, "ref": ref,
        "expected": float(Fraction(matches, len(hyp))),
    }

    hyp2, ref2 = "the cat".split(), "the cat sat".split()
    p1 = Fraction(clipped_matches_naive(hyp2, ref2, 1), len(hyp2))
    p2 = Fraction(clipped_matches_naive(hyp2, ref2, 2), len(hyp2) - 1)
    geo = float(p1 * p2) ** 0.5
    bp = min(1.0, math.exp(float(1 - Fraction(len(ref2), len(hyp2)))))
    cases["bleu_brevity_penalty"] = {
        "op": "bleu", "max_n": 2, "smoothing": "none", "hyp": hyp2, "refs": [ref2],
        "expected": bp * geo,
    }

    gh, gr = "a b".split(), "a b c".split()
    hyp_total = ref_total = match_total = 0
    for n in range(1, 5):
        hg, rg = ngram_count_naive(gh, n), ngram_count_naive(gr, n)
        hyp_total += sum(hg.values())
        ref_total += sum(rg.values())
        match_total += sum(min(c, rg[g]) for g, c in hg.items() if g in rg)
    cases["google_bleu_min_of_pr"] = {
        "op": "google_bleu", "hyp": gh, "ref": gr,
        "expected": float(min(Fraction(match_total, hyp_total), Fraction(match_total, ref_total))),
    }

    rh, rr = "a b c d".split(), "a c b d".split()
    lcs = lcs_bruteforce(rh, rr)
    p = Fraction(lcs, len(rh))
    r = Fraction(lcs, len(rr))
    cases["rouge_l_f1"] = {
        "op": "rouge_l", "hyp": rh, "ref": rr,
        "expected": float(2 * p * r / (p + r)),
    }

    # METEOR identity over 4 tokens: m=4 matches in a single chunk.
    ident = "a b c d".split()
    penalty = Fraction(1, 2) * Fraction(1, 4) ** 3
    cases["meteor_identity"] = {
        "op": "meteor", "hyp": ident, "ref": ident,
        "expected": float(1 - penalty),
    }
    # One stem-stage match over single-token sides: Fmean=1, chunks/m=1.
    cases["meteor_stem_match"] = {
        "op": "meteor", "hyp": ["cats"], "ref": ["cat"],
        "expected": float(1 - Fraction(1, 2)),
    }

    th, tr_ = "c a b d".split(), "a b c d".split()
    cases["ter_single_shift"] = {
        "op": "ter", "hyp": th, "ref": tr_,
        "expected": ter_bruteforce(th, tr_),
    }
    ih, ir = "a b d".split(), "a b c d".split()
    cases["ter_single_insertion"] = {
        "op": "ter", "hyp": ih, "ref": ir,
        "expected": ter_bruteforce(ih, ir),
    }

    # Unit hyp vectors, ref vectors at 60 degrees from their counterpart and
    # orthogonal to the other: every per-token best cosine is 1/2.
    half_height = math.sqrt(0.75)
    cases["bertscore_hand_cosine"] = {
        "op": "bertscore",
        "hyp_vectors": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        "ref_vectors": [[0.5, 0.0, half_height], [0.0, 0.5, half_height]],
        "expected": float(Fraction(1, 2)),
    }

    cases["rescale_midpoint"] = {
        "op": "rescale", "raw": 0.91, "baseline": 0.82,
        "expected": float((Fraction("0.91") - Fraction("0.82")) / (1 - Fraction("0.82"))),
    }

    return {"kind": "derived_metric_fixtures", "tolerance": 1e-9, "cases": cases}
