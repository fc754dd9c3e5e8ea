"""Vocabularies, toy transduction tasks, parallel corpora and batching."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError
from .model import BOS, EOS, PAD, UNK

log = logging.getLogger(__name__)

SPECIALS = ("<pad>", "<s>", "</s>", "<unk>")
TASKS = ("copy", "reverse", "sort")


class Vocabulary:
    """Token <-> id bijection with ids 0-3 reserved for pad/bos/eos/unk."""

    def __init__(self, tokens: Sequence[str] = ()):
        self.itos: List[str] = list(SPECIALS)
        self.stoi: Dict[str, int] = {t: i for i, t in enumerate(SPECIALS)}
        for tok in tokens:
            if tok in self.stoi:
                raise ValueError(f"duplicate token {tok!r}")
            self.stoi[tok] = len(self.itos)
            self.itos.append(tok)

    @classmethod
    def build(cls, sentences: Sequence[Sequence[str]], min_count: int = 1) -> "Vocabulary":
        """Tokens sorted by descending frequency, ties broken lexicographically."""
        counts = Counter(tok for sent in sentences for tok in sent)
        for s in SPECIALS:
            counts.pop(s, None)
        ordered = sorted((t for t, c in counts.items() if c >= min_count), key=lambda t: (-counts[t], t))
        return cls(ordered)

    @classmethod
    def for_toy(cls, vocab_size: int) -> "Vocabulary":
        """Symbols named by their id: token ``"7"`` has id 7."""
        return cls([str(i) for i in range(len(SPECIALS), vocab_size)])

    def __len__(self):
        return len(self.itos)

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.itos == other.itos

    def encode(self, tokens: Sequence[str]) -> List[int]:
        return [self.stoi.get(t, UNK) for t in tokens]

    def decode(self, ids: Sequence[int], strip: bool = True) -> List[str]:
        out = []
        for i in ids:
            i = int(i)
            if strip and i == EOS:
                break
            if strip and i in (PAD, BOS):
                continue
            out.append(self.itos[i])
        return out

    def to_list(self) -> List[str]:
        return list(self.itos[len(SPECIALS):])

    @classmethod
    def from_list(cls, tokens: Sequence[str]) -> "Vocabulary":
        return cls(tokens)

    def save(self, path) -> None:
        Path(path).write_text("\n".join(self.to_list()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls([ln for ln in lines if ln])


@dataclass
class ParallelCorpus:
    src: List[List[int]]
    tgt: List[List[int]]
    provenance: str = ""

    def __post_init__(self):
        if len(self.src) != len(self.tgt):
            raise ConfigError(f"{len(self.src)} source vs {len(self.tgt)} target sentences")
        for i, (s, t) in enumerate(zip(self.src, self.tgt)):
            if not s or not t:
                raise ConfigError(f"pair {i} has an empty side")

    def __len__(self):
        return len(self.src)

    def target_tokens(self) -> int:
        return sum(len(t) for t in self.tgt)

    def max_length(self) -> int:
        return max(max(len(s), len(t) + 1) for s, t in zip(self.src, self.tgt))

    def subset(self, idx: Sequence[int]) -> "ParallelCorpus":
        return ParallelCorpus([self.src[i] for i in idx], [self.tgt[i] for i in idx], self.provenance)


@dataclass
class Batch:
    """Padded id matrices; masks are true at pad positions."""

    src_ids: np.ndarray
    tgt_in_ids: np.ndarray
    tgt_out_ids: np.ndarray
    src_mask: np.ndarray
    tgt_mask: np.ndarray
    indices: List[int] = field(default_factory=list)

    @property
    def size(self) -> int:
        return self.src_ids.shape[0]

    @property
    def num_tokens(self) -> int:
        return int((~self.tgt_mask).sum())


def task_transform(task: str, src: Sequence[int]) -> List[int]:
    if task == "copy":
        return list(src)
    if task == "reverse":
        return list(reversed(src))
    if task == "sort":
        return sorted(src)
    raise ConfigError(f"unknown toy task {task!r}; expected one of {TASKS}")


def gen_toy_corpus(
    task: str,
    vocab_size: int,
    len_range: Tuple[int, int],
    count: int,
    seed: int,
) -> ParallelCorpus:
    """Random sources over the non-reserved ids with their task transform as target."""
    if task not in TASKS:
        raise ConfigError(f"unknown toy task {task!r}; expected one of {TASKS}")
    if vocab_size <= len(SPECIALS):
        raise ConfigError(f"vocab_size must exceed {len(SPECIALS)} reserved ids")
    lo, hi = len_range
    if not 1 <= lo <= hi:
        raise ConfigError(f"invalid length range {len_range}")
    if count < 1:
        raise ConfigError("count must be positive")
    rng = np.random.default_rng(seed)
    src, tgt = [], []
    for _ in range(count):
        n = int(rng.integers(lo, hi + 1))
        s = rng.integers(len(SPECIALS), vocab_size, size=n).tolist()
        src.append(s)
        tgt.append(task_transform(task, s))
    return ParallelCorpus(src, tgt, provenance=f"toy:{task}:v{vocab_size}:len{lo}-{hi}:n{count}:seed{seed}")


def read_lines(path) -> List[List[str]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ConfigError(f"{path} is not valid UTF-8: {e}") from e
    return [line.split() for line in text.splitlines()]


def load_parallel_corpus(
    src_path,
    tgt_path,
    vocab: Optional[Vocabulary] = None,
) -> Tuple[ParallelCorpus, Vocabulary]:
    """Read aligned whitespace-tokenized files.

    One vocabulary covers both sides; it is built from these files when not
    given, and unknown tokens map to ``<unk>``.
    """
    src_lines, tgt_lines = read_lines(src_path), read_lines(tgt_path)
    if len(src_lines) != len(tgt_lines):
        raise ConfigError(f"line count mismatch: {src_path} has {len(src_lines)}, {tgt_path} has {len(tgt_lines)}")
    if vocab is None:
        vocab = Vocabulary.build(src_lines + tgt_lines)
    corpus = ParallelCorpus(
        [vocab.encode(s) for s in src_lines],
        [vocab.encode(t) for t in tgt_lines],
        provenance=f"files:{src_path}:{tgt_path}",
    )
    return corpus, vocab


def make_batch(src: Sequence[Sequence[int]], tgt: Optional[Sequence[Sequence[int]]] = None, indices=None) -> Batch:
    """Pad a list of pairs; targets get ``<s>`` prepended on input and ``</s>`` appended on output."""
    b = len(src)
    s_len = max(len(s) for s in src)
    src_ids = np.full((b, s_len), PAD, dtype=np.int64)
    for i, s in enumerate(src):
        src_ids[i, : len(s)] = s
    if tgt is None:
        tgt_in = np.full((b, 1), BOS, dtype=np.int64)
        tgt_out = np.full((b, 1), PAD, dtype=np.int64)
    else:
        t_len = max(len(t) for t in tgt) + 1
        tgt_in = np.full((b, t_len), PAD, dtype=np.int64)
        tgt_out = np.full((b, t_len), PAD, dtype=np.int64)
        for i, t in enumerate(tgt):
            tgt_in[i, : len(t) + 1] = [BOS] + list(t)
            tgt_out[i, : len(t) + 1] = list(t) + [EOS]
    return Batch(src_ids, tgt_in, tgt_out, src_ids == PAD, tgt_out == PAD, list(indices or range(b)))


class BatchStats:
    def __init__(self):
        self.skipped = 0


def batch_iterator(
    corpus: ParallelCorpus,
    batch_tokens: int,
    seed: int,
    epoch: int,
    stats: Optional[BatchStats] = None,
) -> Iterator[Batch]:
    """Yield token-budgeted batches covering every pair once.

    Pairs are shuffled, stably sorted by length, cut greedily into batches
    whose padded size ``n * max_len`` stays within ``batch_tokens``, and the
    batch order is shuffled again.  The order is fixed by ``(seed, epoch)``.
    A pair that alone exceeds the budget is skipped and counted in ``stats``.
    """
    rng = np.random.default_rng([seed, epoch])
    cost = [max(len(s), len(t) + 1) for s, t in zip(corpus.src, corpus.tgt)]
    order = rng.permutation(len(corpus))
    order = order[np.argsort([cost[i] for i in order], kind="stable")]
    batches: List[List[int]] = []
    current: List[int] = []
    longest = 0
    for i in order:
        c = cost[i]
        if c > batch_tokens:
            if stats is not None:
                stats.skipped += 1
            log.warning("skipping pair %d: %d tokens exceed batch budget %d", i, c, batch_tokens)
            continue
        if current and (len(current) + 1) * max(longest, c) > batch_tokens:
            batches.append(current)
            current, longest = [], 0
        current.append(int(i))
        longest = max(longest, c)
    if current:
        batches.append(current)
    for k in rng.permutation(len(batches)):
        idx = batches[k]
        yield make_batch([corpus.src[i] for i in idx], [corpus.tgt[i] for i in idx], idx)
