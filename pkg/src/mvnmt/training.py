"""Optimization: inverse-sqrt warmup schedule, Adam, and the training loop."""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from .data import Batch, BatchStats, ParallelCorpus, batch_iterator
from .errors import ConfigError, NonFiniteLossError
from .model import DropoutRng, Model, decode_single, decode_two_stream, encode_views
from .objectives import LossBreakdown, LossConfig, multiview_loss, single_view_loss

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    base_lr: float = 2e-3
    warmup_steps: int = 200
    max_updates: int = 2000
    batch_tokens: int = 1024
    seed: int = 1
    adam_beta1: float = 0.9
    adam_beta2: float = 0.98
    adam_eps: float = 1e-9
    clip_norm: float = 5.0
    update_freq: int = 1
    checkpoint_every: int = 0
    keep_last_k: int = 5
    log_every: int = 10

    def __post_init__(self):
        if self.warmup_steps < 1:
            raise ConfigError("warmup_steps must be >= 1")
        if self.max_updates < 0 or self.batch_tokens < 1 or self.update_freq < 1:
            raise ConfigError("max_updates, batch_tokens and update_freq must be positive")
        if self.base_lr <= 0:
            raise ConfigError("base_lr must be positive")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def lr_at(step: int, base_lr: float, warmup: int) -> float:
    """Linear warmup to ``base_lr`` at ``warmup``, then decay as ``1/sqrt(step)``."""
    if step < 1:
        raise ValueError(f"learning-rate schedule starts at step 1, got {step}")
    return base_lr * min(step / warmup, math.sqrt(warmup / step))


@dataclass
class OptimizerState:
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_model(cls, model: Model) -> "OptimizerState":
        return cls(0, {k: np.zeros_like(p.data) for k, p in model.params.items()},
                   {k: np.zeros_like(p.data) for k, p in model.params.items()})


def adam_update(
    params: Dict[str, "object"],
    state: OptimizerState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.98,
    eps: float = 1e-9,
) -> None:
    """One bias-corrected Adam step over every parameter that has a gradient."""
    state.step += 1
    t = state.step
    c1 = 1.0 - beta1**t
    c2 = 1.0 - beta2**t
    for name, p in params.items():
        g = p.grad
        if g is None:
            continue
        m, v = state.m[name], state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        p.data -= (lr * (m / c1) / (np.sqrt(v / c2) + eps)).astype(p.dtype, copy=False)


def global_grad_norm(model: Model) -> float:
    return math.sqrt(sum(float(np.sum(p.grad.astype(np.float64) ** 2)) for p in model.params.values() if p.grad is not None))


def clip_gradients(model: Model, max_norm: float) -> float:
    norm = global_grad_norm(model)
    if max_norm and max_norm > 0 and norm > max_norm:
        factor = max_norm / (norm + 1e-6)
        for p in model.params.values():
            if p.grad is not None:
                p.grad *= p.grad.dtype.type(factor)
    return norm


def compute_loss(
    model: Model,
    batch: Batch,
    loss_cfg: LossConfig,
    drop: Optional[DropoutRng] = None,
    consistency: bool = True,
) -> LossBreakdown:
    """Forward pass of both streams and the interpolated loss.

    ``consistency=False`` trains on the joint NLL alone (no KL term).
    """
    views = encode_views(model, batch.src_ids, batch.src_mask, drop=drop)
    if not model.config.multiview:
        logits = decode_single(model, model.config.view, views.primary, batch.src_mask, batch.tgt_in_ids, batch.tgt_mask, drop)
        return single_view_loss(logits, batch.tgt_out_ids, batch.tgt_mask, loss_cfg)
    logits = decode_two_stream(model, views, batch.tgt_in_ids, batch.tgt_mask, drop)
    if consistency:
        return multiview_loss(logits, batch.tgt_out_ids, batch.tgt_mask, loss_cfg)
    from .objectives import mv_nll

    pri, aux, joint = mv_nll(logits, batch.tgt_out_ids, batch.tgt_mask, loss_cfg.eps_ls)
    return LossBreakdown(pri.item(), aux.item(), joint.item(), 0.0, 0.0, joint.item(),
                         batch.num_tokens, loss=joint)


def _diagnostics(step, bd: LossBreakdown, model: Model) -> dict:
    return {
        "step": step,
        "losses": bd.as_row() if bd is not None else None,
        "grad_norms": {k: float(np.linalg.norm(p.grad)) for k, p in model.params.items() if p.grad is not None},
    }


def train_step(
    model: Model,
    batch: Union[Batch, Sequence[Batch]],
    loss_cfg: LossConfig,
    opt_state: OptimizerState,
    train_cfg: Optional[TrainConfig] = None,
    consistency: bool = True,
    training: bool = True,
) -> LossBreakdown:
    """Forward, backward and one Adam update.

    A sequence of batches is treated as one update with gradients averaged
    over the micro-batches.  Dropout masks depend only on
    ``(train_cfg.seed, step, micro-batch)``.
    """
    train_cfg = train_cfg or TrainConfig()
    batches = [batch] if isinstance(batch, Batch) else list(batch)
    step = opt_state.step + 1
    model.zero_grad()
    parts = []
    for k, b in enumerate(batches):
        drop = DropoutRng(train_cfg.seed, step, k) if training else None
        bd = compute_loss(model, b, loss_cfg, drop, consistency)
        if not np.isfinite(bd.total):
            raise NonFiniteLossError(f"non-finite loss at step {step}", _diagnostics(step, bd, model))
        loss = bd.loss if len(batches) == 1 else bd.loss * (1.0 / len(batches))
        loss.backward()
        bd.loss = None
        parts.append(bd)
    norm = clip_gradients(model, train_cfg.clip_norm)
    if not np.isfinite(norm):
        raise NonFiniteLossError(f"non-finite gradient at step {step}", _diagnostics(step, parts[-1], model))
    lr = lr_at(step, train_cfg.base_lr, train_cfg.warmup_steps)
    adam_update(model.params, opt_state, lr, train_cfg.adam_beta1, train_cfg.adam_beta2, train_cfg.adam_eps)
    model.zero_grad()
    if len(parts) == 1:
        return parts[0]
    avg = {k: float(np.mean([getattr(p, k) for p in parts])) for k in ("nll_pri", "nll_aux", "cr")}
    joint = (avg["nll_pri"] + avg["nll_aux"]) / 2
    return LossBreakdown(avg["nll_pri"], avg["nll_aux"], joint, avg["cr"], parts[0].alpha,
                         (1 - parts[0].alpha) * joint + parts[0].alpha * avg["cr"],
                         sum(p.token_count for p in parts))


@dataclass
class LogRow:
    step: int
    lr: float
    nll_pri: float
    nll_aux: float
    cr: float
    total: float


class Trainer:
    """Runs ``max_updates`` Adam steps over token-budgeted epochs.

    ``on_step(trainer, breakdown)`` is called after every update; when
    ``out_dir`` is given, checkpoints are written every
    ``checkpoint_every`` updates (and at the end) keeping the last
    ``keep_last_k``.
    """

    def __init__(
        self,
        model: Model,
        train_cfg: TrainConfig,
        loss_cfg: LossConfig,
        out_dir: Optional[Union[str, Path]] = None,
        consistency: bool = True,
        vocab=None,
        metadata: Optional[dict] = None,
    ):
        self.model = model
        self.train_cfg = train_cfg
        self.loss_cfg = loss_cfg
        self.opt = OptimizerState.for_model(model)
        self.out_dir = Path(out_dir) if out_dir else None
        self.consistency = consistency
        self.vocab = vocab
        self.metadata = metadata or {}
        self.history: List[LossBreakdown] = []
        self.log_rows: List[LogRow] = []
        self.checkpoints: List[Path] = []
        self.epoch = 0
        self.batch_stats = BatchStats()

    @property
    def step(self) -> int:
        return self.opt.step

    def _batches(self, corpus: ParallelCorpus):
        while True:
            produced = False
            for b in batch_iterator(corpus, self.train_cfg.batch_tokens, self.train_cfg.seed, self.epoch, self.batch_stats):
                produced = True
                yield b
            if not produced:
                raise ConfigError("batch budget too small for every sentence in the corpus")
            self.epoch += 1

    def fit(self, corpus: ParallelCorpus, on_step: Optional[Callable] = None) -> "Trainer":
        cfg = self.train_cfg
        stream = self._batches(corpus)
        while self.step < cfg.max_updates:
            group = [next(stream) for _ in range(cfg.update_freq)]
            bd = train_step(self.model, group if cfg.update_freq > 1 else group[0], self.loss_cfg,
                            self.opt, cfg, consistency=self.consistency)
            self.history.append(bd)
            if cfg.log_every and (self.step % cfg.log_every == 0 or self.step == 1):
                lr = lr_at(self.step, cfg.base_lr, cfg.warmup_steps)
                self.log_rows.append(LogRow(self.step, lr, bd.nll_pri, bd.nll_aux, bd.cr, bd.total))
                log.info("step %d lr %.3g nll_pri %.4f nll_aux %.4f cr %.4f total %.4f",
                         self.step, lr, bd.nll_pri, bd.nll_aux, bd.cr, bd.total)
            if on_step is not None:
                on_step(self, bd)
            if self.out_dir and cfg.checkpoint_every and self.step % cfg.checkpoint_every == 0:
                self.save()
        if self.out_dir and (not self.checkpoints or self.checkpoints[-1].name != f"checkpoint{self.step}.ckpt"):
            self.save()
        return self

    def save(self) -> Path:
        from .checkpoint import save_checkpoint

        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / f"checkpoint{self.step}.ckpt"
        rng_state = {"seed": self.train_cfg.seed, "step": self.step, "epoch": self.epoch}
        save_checkpoint(self.model, self.opt, path, step=self.step, rng_state=rng_state,
                        vocab=self.vocab, metadata=self.metadata)
        save_checkpoint(self.model, None, self.out_dir / "last.ckpt", step=self.step, rng_state=rng_state,
                        vocab=self.vocab, metadata=self.metadata)
        self.checkpoints.append(path)
        while len(self.checkpoints) > self.train_cfg.keep_last_k:
            old = self.checkpoints.pop(0)
            old.unlink(missing_ok=True)
        return path
