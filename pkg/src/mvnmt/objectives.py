"""Multi-view training loss.

The total loss interpolates the mean of both streams' token-level NLL with a
KL consistency term that pulls the auxiliary stream's predictive
distribution toward the primary stream's::

    nll_joint = (nll_pri + nll_aux) / 2
    cr        = mean_j  sum_v p_pri(v) log(p_pri(v) / p_aux(v))
    total     = (1 - alpha) * nll_joint + alpha * cr

Unlike standard distillation the teacher (primary) distribution is *not*
detached by default, so the consistency term trains both streams.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from . import autograd as ag
from .autograd import Tensor
from .errors import ConfigError, EmptyBatchError
from .functional import label_smoothed_nll, log_softmax_with_temperature
from .model import TwoStreamLogits

DarkMode = Union[str, Tuple[int, int]]
_RANGE = re.compile(r"^(?:dark_rank_range|rank)[(:]?\s*(\d+)\s*[,-]\s*(\d+)\)?$")


def parse_dark_mode(mode: DarkMode) -> DarkMode:
    """Normalize ``mode`` to ``"full" | "gold_only" | "dark_only" | (a, b)``.

    Rank ranges may be given as a tuple or as strings like ``"rank:1-100"``
    or ``"dark_rank_range(1,100)"``.  An open upper end (``[100,]`` in the
    usual notation) is written with ``b = 0`` and means "to the last rank".
    """
    if isinstance(mode, (tuple, list)):
        a, b = int(mode[0]), int(mode[1])
    elif mode in ("full", "gold_only", "dark_only"):
        return mode
    else:
        m = _RANGE.match(str(mode).strip())
        if not m:
            raise ConfigError(f"unknown dark mode {mode!r}")
        a, b = int(m.group(1)), int(m.group(2))
    if a < 1 or (b != 0 and b <= a):
        raise ConfigError(f"invalid dark rank range ({a}, {b}); need 1 <= a < b")
    return (a, b)


def dark_mode_str(mode: DarkMode) -> str:
    mode = parse_dark_mode(mode)
    return mode if isinstance(mode, str) else f"rank:{mode[0]}-{mode[1]}"


@dataclass
class LossConfig:
    alpha: float = 0.4
    eps_ls: float = 0.1
    tau: float = 1.0
    detach_teacher: bool = False
    dark_mode: DarkMode = "full"
    renormalize: bool = True

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.0 <= self.eps_ls < 1.0:
            raise ConfigError(f"label smoothing must lie in [0, 1), got {self.eps_ls}")
        if not self.tau > 0:
            raise ConfigError("temperature must be positive")
        self.dark_mode = parse_dark_mode(self.dark_mode)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["dark_mode"] = dark_mode_str(self.dark_mode)
        return d


@dataclass
class LossBreakdown:
    nll_pri: float
    nll_aux: float
    nll_joint: float
    cr: float
    alpha: float
    total: float
    token_count: int
    loss: Optional[Tensor] = dataclasses.field(default=None, repr=False, compare=False)

    def check(self, tol: float = 1e-6) -> None:
        """Assert the internal identities between the fields."""
        assert abs(self.nll_joint - (self.nll_pri + self.nll_aux) / 2) <= tol * max(1.0, abs(self.nll_joint))
        expected = (1 - self.alpha) * self.nll_joint + self.alpha * self.cr
        assert abs(self.total - expected) <= tol * max(1.0, abs(self.total))

    def as_row(self) -> dict:
        return {k: getattr(self, k) for k in ("nll_pri", "nll_aux", "nll_joint", "cr", "total")}


def _token_mean(per_token: Tensor, keep: np.ndarray) -> Tensor:
    n = int(keep.sum())
    if n == 0:
        raise EmptyBatchError("batch has no non-pad target tokens")
    weights = Tensor(keep.astype(per_token.dtype) / n)
    return ag.sum_(ag.mul(per_token, weights))


def stream_nll(logits: Tensor, gold_ids: np.ndarray, pad_mask: np.ndarray, eps_ls: float) -> Tensor:
    """Label-smoothed NLL of one stream, averaged over non-pad tokens."""
    keep = ~np.asarray(pad_mask, dtype=bool)
    per_token = label_smoothed_nll(ag.log_softmax(logits), gold_ids, eps_ls)
    return _token_mean(per_token, keep)


def mv_nll(logits: TwoStreamLogits, gold_ids, pad_mask, eps_ls: float = 0.0) -> Tuple[Tensor, Tensor, Tensor]:
    """Per-stream losses and their mean."""
    pri = stream_nll(logits.logits_pri, gold_ids, pad_mask, eps_ls)
    aux = stream_nll(logits.logits_aux, gold_ids, pad_mask, eps_ls)
    return pri, aux, ag.scale(ag.add(pri, aux), 0.5)


def build_dark_mask(p_teacher: np.ndarray, gold: np.ndarray, mode: DarkMode) -> np.ndarray:
    """Boolean mask of the labels kept in the consistency sum.

    Works row-wise on ``p_teacher[..., V]`` with ``gold[...]``.  Rank-range
    modes keep non-gold labels whose rank among the non-gold labels (by
    descending teacher probability, ties broken by label id) lies in
    ``[a, b]``.
    """
    mode = parse_dark_mode(mode)
    p_teacher = np.asarray(p_teacher)
    gold = np.asarray(gold)
    vocab = p_teacher.shape[-1]
    if vocab < 2:
        raise ConfigError("dark-knowledge masking needs a vocabulary of at least 2")
    if gold.shape != p_teacher.shape[:-1]:
        raise ConfigError("gold shape does not match teacher rows")
    is_gold = np.arange(vocab) == gold[..., None]
    if mode == "full":
        return np.ones(p_teacher.shape, dtype=bool)
    if mode == "gold_only":
        return is_gold
    if mode == "dark_only":
        return ~is_gold
    a, b = mode
    if vocab - 1 < a:
        raise ConfigError(f"rank range starts at {a} but only {vocab - 1} non-gold labels exist")
    # gold sorts last so ranks count non-gold labels only
    key = np.where(is_gold, np.inf, -p_teacher)
    order = np.argsort(key, axis=-1, kind="stable")
    rank = np.empty_like(order)
    np.put_along_axis(rank, order, np.arange(1, vocab + 1) * np.ones_like(order), axis=-1)
    upper = vocab if b == 0 else b
    return (~is_gold) & (rank >= a) & (rank <= upper)


def consistency_kl(
    logits: TwoStreamLogits,
    pad_mask,
    cfg: LossConfig,
    gold_ids: Optional[np.ndarray] = None,
) -> Tensor:
    """KL(p_pri || p_aux) per token, averaged over non-pad tokens.

    ``gold_ids`` is needed for every dark mode other than ``full``.  With a
    restricted mode both distributions are cut down to the retained labels
    and (unless ``cfg.renormalize`` is off) renormalized over them.
    ``gold_only`` is never renormalized, since a one-label distribution is
    trivially 1; it reduces to ``p_pri(gold) log(p_pri(gold) / p_aux(gold))``.
    Per-token values are clamped at zero.
    """
    keep = ~np.asarray(pad_mask, dtype=bool)
    lp_pri = log_softmax_with_temperature(logits.logits_pri, cfg.tau)
    lp_aux = log_softmax_with_temperature(logits.logits_aux, cfg.tau)
    if cfg.detach_teacher:
        lp_pri = ag.detach(lp_pri)
    if cfg.dark_mode != "full":
        if gold_ids is None:
            raise ConfigError("dark-knowledge masking needs gold ids")
        retained = build_dark_mask(np.exp(lp_pri.data), np.asarray(gold_ids), cfg.dark_mode)
        dropped = ~retained
        lp_pri = ag.masked_fill(lp_pri, dropped, -1e9)
        lp_aux = ag.masked_fill(lp_aux, dropped, -1e9)
        if cfg.renormalize and cfg.dark_mode != "gold_only":
            lp_pri = ag.log_softmax(lp_pri)
            lp_aux = ag.log_softmax(lp_aux)
        p_pri = ag.masked_fill(ag.exp(lp_pri), dropped, 0.0)
        log_ratio = ag.masked_fill(ag.add(lp_pri, ag.neg(lp_aux)), dropped, 0.0)
    else:
        p_pri = ag.exp(lp_pri)
        log_ratio = ag.add(lp_pri, ag.neg(lp_aux))
    per_token = ag.relu(ag.sum_(ag.mul(p_pri, log_ratio), axis=-1))
    return _token_mean(per_token, keep)


def total_loss(nll_joint, cr, alpha: float):
    """``(1 - alpha) * nll_joint + alpha * cr`` for floats or tensors."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha must lie in [0, 1], got {alpha}")
    if isinstance(nll_joint, Tensor):
        return ag.add(ag.scale(nll_joint, 1.0 - alpha), ag.scale(cr, alpha))
    return (1.0 - alpha) * nll_joint + alpha * cr


def multiview_loss(logits: TwoStreamLogits, gold_ids, pad_mask, cfg: LossConfig) -> LossBreakdown:
    """Everything a training step needs from the two streams' logits."""
    pri, aux, joint = mv_nll(logits, gold_ids, pad_mask, cfg.eps_ls)
    cr = consistency_kl(logits, pad_mask, cfg, gold_ids)
    total = total_loss(joint, cr, cfg.alpha)
    return LossBreakdown(
        nll_pri=pri.item(),
        nll_aux=aux.item(),
        nll_joint=joint.item(),
        cr=cr.item(),
        alpha=cfg.alpha,
        total=total.item(),
        token_count=int((~np.asarray(pad_mask, dtype=bool)).sum()),
        loss=total,
    )


def single_view_loss(logits: Tensor, gold_ids, pad_mask, cfg: LossConfig) -> LossBreakdown:
    """Plain NLL for a single-view baseline, reported in the same layout."""
    nll = stream_nll(logits, gold_ids, pad_mask, cfg.eps_ls)
    v = nll.item()
    return LossBreakdown(v, v, v, 0.0, 0.0, v, int((~np.asarray(pad_mask, dtype=bool)).sum()), loss=nll)
