"""Word-overlap baselines: sentence-level BLEU and ROUGE-L."""

from __future__ import annotations

import math
from collections import Counter

from .corpus import Utterance


def bleu(candidate: Utterance, reference: Utterance, n: int = 4) -> float:
    """Sentence-level BLEU-n against a single reference, unsmoothed.

    Geometric mean of clipped k-gram precisions for k = 1..n, scaled by
    the brevity penalty ``min(1, exp(1 - |ref| / |cand|))``.  Any empty
    precision sends the score to 0.  A candidate too short to contain
    any k-gram for some k <= n has no defined score and yields NaN.
    """
    if not 1 <= n <= 4:
        raise ValueError(f"n must be in 1..4, got {n}")
    if not reference:
        raise ValueError("reference must be non-empty")
    if len(candidate) < n:
        return float("nan")

    log_sum = 0.0
    for k in range(1, n + 1):
        cand_counts = _ngram_counts(candidate, k)
        ref_counts = _ngram_counts(reference, k)
        clipped = sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
        total = len(candidate) - k + 1
        if clipped == 0:
            return 0.0
        log_sum += math.log(clipped / total)

    brevity = min(1.0, math.exp(1.0 - len(reference) / len(candidate)))
    return brevity * math.exp(log_sum / n)


def lcs_length(a: Utterance, b: Utterance) -> int:
    """Length of the longest common subsequence of two token lists."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for tok_a in a:
        curr = [0] * (len(b) + 1)
        for j, tok_b in enumerate(b, start=1):
            if tok_a == tok_b:
                curr[j] = prev[j - 1] + 1
            else:
                curr[j] = max(prev[j], curr[j - 1])
        prev = curr
    return prev[-1]


def rouge_l(candidate: Utterance, reference: Utterance) -> float:
    """ROUGE-L F1: harmonic mean of LCS-based precision and recall.

    0.0 when the candidate is empty or shares no common subsequence with
    the reference.
    """
    if not reference:
        raise ValueError("reference must be non-empty")
    if not candidate:
        return 0.0
    lcs = lcs_length(candidate, reference)
    if lcs == 0:
        return 0.0
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    return 2.0 * precision * recall / (precision + recall)


def _ngram_counts(tokens: Utterance, k: int) -> Counter:
    return Counter(tuple(tokens[i:i + k]) for i in range(len(tokens) - k + 1))
