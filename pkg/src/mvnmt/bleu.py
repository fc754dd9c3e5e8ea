"""Corpus BLEU-4 with clipped n-gram counts and a brevity penalty (no smoothing)."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import List, Sequence, Union

from .errors import ConfigError

Sentence = Union[str, Sequence[str]]


@dataclass
class BleuReport:
    bleu: float
    precisions: List[float]
    brevity_penalty: float
    hyp_len: int
    ref_len: int

    def __str__(self):
        p = "/".join(f"{100 * x:.1f}" for x in self.precisions)
        return (f"BLEU = {self.bleu:.2f}, {p} (BP={self.brevity_penalty:.3f}, "
                f"hyp_len={self.hyp_len}, ref_len={self.ref_len})")


def _tokens(s: Sentence) -> List[str]:
    return s.split() if isinstance(s, str) else [str(t) for t in s]


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i: i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(hyps: Sequence[Sentence], refs: Sequence[Sentence], max_n: int = 4) -> BleuReport:
    """BLEU in percent over a corpus with one reference per sentence.

    Sentences are strings (split on whitespace) or token sequences.  An
    n-gram order that neither side has (every sentence shorter than n) counts
    as fully matched; if only the hypotheses lack it, its precision is 0.
    """
    if len(hyps) != len(refs):
        raise ConfigError(f"{len(hyps)} hypotheses vs {len(refs)} references")
    if not hyps:
        raise ConfigError("empty corpus")
    matches = [0] * max_n
    totals = [0] * max_n
    ref_totals = [0] * max_n
    hyp_len = ref_len = 0
    for h, r in zip(hyps, refs):
        h, r = _tokens(h), _tokens(r)
        hyp_len += len(h)
        ref_len += len(r)
        for n in range(1, max_n + 1):
            hc, rc = _ngrams(h, n), _ngrams(r, n)
            matches[n - 1] += sum(min(c, rc[g]) for g, c in hc.items())
            totals[n - 1] += max(len(h) - n + 1, 0)
            ref_totals[n - 1] += max(len(r) - n + 1, 0)
    precisions = [m / t if t else float(rt == 0) for m, t, rt in zip(matches, totals, ref_totals)]
    if hyp_len == 0:
        bp = 0.0
    else:
        bp = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    if min(precisions) == 0.0:
        score = 0.0
    else:
        score = 100.0 * bp * math.exp(sum(math.log(p) for p in precisions) / max_n)
    return BleuReport(score, precisions, bp, hyp_len, ref_len)
