"""Greedy, beam and ensemble decoding over a selected view.

Search is written against a *scorer*: a callable mapping a ``[k, t]``
matrix of prefixes (each starting with ``<s>``) to ``[k, V]`` next-token
log-probabilities.  :class:`ModelScorer` adapts a model and view to that
interface, so the search code can also be driven by hand-set scorers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import autograd as ag
from .autograd import Tensor
from .errors import ConfigError
from .model import BOS, EOS, PAD, Model, NoiseSpec, decode_single, encode_views, view_memory

Scorer = Callable[[np.ndarray], np.ndarray]


@dataclass
class DecodeConfig:
    view: str = "primary"
    beam_size: int = 1
    max_out_len: int = 0  # 0: source length + 10, capped by the model's max_len
    length_penalty: float = 1.0

    def __post_init__(self):
        if self.beam_size < 1:
            raise ConfigError("beam_size must be >= 1")
        if self.max_out_len < 0:
            raise ConfigError("max_out_len must be >= 0")


def _max_len(model: Model, src_len: int, requested: int) -> int:
    cap = model.config.max_len
    if requested > cap:
        raise ConfigError(f"max_out_len {requested} exceeds model max_len {cap}")
    return requested or min(src_len + 10, cap)


def _log_softmax_np(logits: np.ndarray) -> np.ndarray:
    z = logits.astype(np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


class ModelScorer:
    """Next-token log-probabilities of one view for a single source sentence.

    The encoder runs once at construction; every call re-runs the decoder on
    the full prefixes.
    """

    def __init__(self, model: Model, view: str, src: Sequence[int], noise: Optional[NoiseSpec] = None):
        self.model, self.view = model, view
        src_ids = np.asarray([list(src)], dtype=np.int64)
        with ag.no_grad():
            views = encode_views(model, src_ids, noise=noise)
            self.memory = view_memory(model, views, view).data
        self.src_mask = views.src_mask

    @property
    def vocab_size(self) -> int:
        return self.model.config.tgt_vocab

    def __call__(self, prefixes: np.ndarray) -> np.ndarray:
        k = prefixes.shape[0]
        mem = Tensor(np.repeat(self.memory, k, axis=0))
        mask = np.repeat(self.src_mask, k, axis=0)
        with ag.no_grad():
            logits = decode_single(self.model, self.view, mem, mask, prefixes)
        return _log_softmax_np(logits.data[:, -1])


class EnsembleScorer:
    """Averages member distributions per step.

    ``mode="prob"`` takes the arithmetic mean of probabilities;
    ``mode="log"`` averages log-probabilities and renormalizes.
    """

    def __init__(self, scorers: Sequence[Scorer], mode: str = "prob"):
        if not scorers:
            raise ConfigError("ensemble needs at least one member")
        if mode not in ("prob", "log"):
            raise ConfigError(f"unknown ensemble mode {mode!r}")
        self.scorers, self.mode = list(scorers), mode

    def __call__(self, prefixes: np.ndarray) -> np.ndarray:
        outs = [s(prefixes) for s in self.scorers]
        shapes = {o.shape for o in outs}
        if len(shapes) != 1:
            raise ConfigError(f"ensemble members disagree on vocabulary: {sorted(shapes)}")
        if self.mode == "prob":
            return np.log(np.mean([np.exp(o) for o in outs], axis=0))
        return _log_softmax_np(np.mean(outs, axis=0))


def greedy_search(scorer: Scorer, max_len: int, bos: int = BOS, eos: int = EOS) -> List[int]:
    """Argmax token per step until ``eos`` (not included) or ``max_len`` tokens."""
    seq = [bos]
    for _ in range(max_len):
        tok = int(np.argmax(scorer(np.asarray([seq]))[0]))
        if tok == eos:
            break
        seq.append(tok)
    return seq[1:]


def sequence_score(scorer: Scorer, tokens: Sequence[int], finished: bool = True, length_penalty: float = 1.0,
                   bos: int = BOS, eos: int = EOS) -> float:
    """Length-normalized log-probability of ``tokens`` (+ ``eos`` if finished)."""
    full = list(tokens) + ([eos] if finished else [])
    total = 0.0
    seq = [bos]
    for tok in full:
        total += float(scorer(np.asarray([seq]))[0, tok])
        seq.append(tok)
    return total / max(len(full), 1) ** length_penalty


def beam_search_core(
    scorer: Scorer,
    beam_size: int,
    max_len: int,
    length_penalty: float = 1.0,
    bos: int = BOS,
    eos: int = EOS,
) -> Tuple[List[int], float]:
    """Beam search scored by ``sum log p / len ** length_penalty``.

    Each step keeps the ``beam_size`` best continuations by cumulative
    log-probability; continuations ending in ``eos`` leave the beam as
    finished hypotheses and compete with the rest at the end.  Length counts
    generated tokens including ``eos``.  With ``beam_size=1`` this is greedy
    search.  Returns the best tokens (without ``eos``) and their score.
    """
    if beam_size < 1:
        raise ConfigError("beam_size must be >= 1")
    open_seqs: List[List[int]] = [[bos]]
    open_scores = np.zeros(1)
    finished: List[Tuple[float, List[int]]] = []
    for _ in range(max_len):
        lp = scorer(np.asarray(open_seqs))
        vocab = lp.shape[1]
        cand = (open_scores[:, None] + lp).reshape(-1)
        top = np.argsort(-cand, kind="stable")[:beam_size]
        next_seqs, next_scores = [], []
        for c in top:
            hyp, tok = divmod(int(c), vocab)
            seq = open_seqs[hyp] + [tok]
            if tok == eos:
                n = len(seq) - 1
                finished.append((float(cand[c]) / n**length_penalty, seq[1:-1]))
            else:
                next_seqs.append(seq)
                next_scores.append(cand[c])
        if not next_seqs:
            break
        open_seqs, open_scores = next_seqs, np.asarray(next_scores)
    else:
        for seq, s in zip(open_seqs, open_scores):
            finished.append((float(s) / (len(seq) - 1) ** length_penalty, seq[1:]))
    best = max(range(len(finished)), key=lambda i: (finished[i][0], -i))
    return finished[best][1], finished[best][0]


def greedy_decode(model: Model, view: str, src: Sequence[int], max_out_len: int = 0,
                  noise: Optional[NoiseSpec] = None) -> List[int]:
    scorer = ModelScorer(model, view, src, noise)
    return greedy_search(scorer, _max_len(model, len(src), max_out_len))


def beam_search(model: Model, view: str, src: Sequence[int], cfg: Optional[DecodeConfig] = None,
                noise: Optional[NoiseSpec] = None) -> Tuple[List[int], float]:
    cfg = cfg or DecodeConfig(view=view, beam_size=4)
    scorer = ModelScorer(model, view, src, noise)
    return beam_search_core(scorer, cfg.beam_size, _max_len(model, len(src), cfg.max_out_len), cfg.length_penalty)


def ensemble_decode(
    models: Sequence[Model],
    views: Sequence[str],
    src: Sequence[int],
    cfg: Optional[DecodeConfig] = None,
    mode: str = "prob",
) -> List[int]:
    """Decode with per-step distributions averaged across ``models``."""
    if len(models) != len(views):
        raise ConfigError("one view per ensemble member is required")
    vocabs = {m.config.tgt_vocab for m in models}
    if len(vocabs) != 1:
        raise ConfigError(f"ensemble members have different target vocabularies {sorted(vocabs)}")
    cfg = cfg or DecodeConfig()
    scorer = EnsembleScorer([ModelScorer(m, v, src) for m, v in zip(models, views)], mode)
    max_len = min(_max_len(m, len(src), cfg.max_out_len) for m in models)
    if cfg.beam_size == 1:
        return greedy_search(scorer, max_len)
    return beam_search_core(scorer, cfg.beam_size, max_len, cfg.length_penalty)[0]


def greedy_decode_batch(
    model: Model,
    view: str,
    sources: Sequence[Sequence[int]],
    max_out_len: int = 0,
    noise: Optional[NoiseSpec] = None,
    chunk: int = 256,
) -> List[List[int]]:
    """Greedy decoding of many sentences, ``chunk`` at a time.

    Noise, when given, is drawn once per chunk from ``noise.seed``.
    """
    out: List[List[int]] = []
    for start in range(0, len(sources), chunk):
        part = [list(s) for s in sources[start: start + chunk]]
        b = len(part)
        s_len = max(len(s) for s in part)
        src_ids = np.full((b, s_len), PAD, dtype=np.int64)
        for i, s in enumerate(part):
            src_ids[i, : len(s)] = s
        limit = _max_len(model, s_len, max_out_len)
        with ag.no_grad():
            views = encode_views(model, src_ids, noise=noise)
            memory = view_memory(model, views, view)
            seqs = np.full((b, 1), BOS, dtype=np.int64)
            done = np.zeros(b, dtype=bool)
            for _ in range(limit):
                logits = decode_single(model, view, memory, views.src_mask, seqs)
                nxt = np.argmax(logits.data[:, -1], axis=-1)
                nxt = np.where(done, PAD, nxt)
                done |= nxt == EOS
                seqs = np.concatenate([seqs, nxt[:, None]], axis=1)
                if done.all():
                    break
        for row in seqs[:, 1:]:
            toks = []
            for t in row:
                if t in (EOS, PAD):
                    break
                toks.append(int(t))
            out.append(toks)
    return out


def token_accuracy(hyps: Sequence[Sequence[int]], refs: Sequence[Sequence[int]]) -> float:
    """Fraction of reference positions (including the final ``eos``) reproduced exactly."""
    if len(hyps) != len(refs):
        raise ConfigError("hypothesis and reference counts differ")
    correct = total = 0
    for h, r in zip(hyps, refs):
        h = list(h) + [EOS]
        r = list(r) + [EOS]
        correct += sum(1 for a, b in zip(h, r) if a == b)
        total += len(r)
    if total == 0:
        raise ConfigError("empty reference set")
    return correct / total


def sequence_accuracy(hyps, refs) -> float:
    return sum(list(h) == list(r) for h, r in zip(hyps, refs)) / max(len(refs), 1)
