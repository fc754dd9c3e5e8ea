"""Analysis protocols: encoder-noise robustness, layer similarity, sweeps.

Every experiment returns a :class:`SweepResult` whose rows go to CSV with
the header ``axis,value,model,view,metric,seed,config_digest``.  ``metric``
is token accuracy on the toy tasks unless BLEU is requested.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import spearmanr

from . import autograd as ag
from .errors import CheckpointError, ConfigError, EmptyBatchError
from .model import PAD, Model, NoiseSpec, build_model, encode_views

log = logging.getLogger(__name__)

CSV_FIELDS = ("axis", "value", "model", "view", "metric", "seed", "config_digest")
SWEEP_AXES = ("alpha", "aux_position", "dark_mode", "detach", "share_can")


# ------------------------------------------------------------------- noise


def inject_encoder_noise(normalized: np.ndarray, spec: NoiseSpec) -> np.ndarray:
    """Add i.i.d. ``N(0, eps_noise^2)`` noise to a normalized representation.

    The noise is a pure function of ``spec.seed`` and the array shape.  With
    ``eps_noise == 0`` the input array itself is returned.
    """
    if not spec.eps_noise >= 0:
        raise ValueError(f"noise std must be non-negative, got {spec.eps_noise}")
    if spec.eps_noise == 0:
        return normalized
    rng = np.random.default_rng(spec.seed)
    noise = rng.normal(0.0, spec.eps_noise, size=np.shape(normalized))
    return (normalized + noise).astype(np.asarray(normalized).dtype, copy=False)


# -------------------------------------------------------- layer similarity


def _normalize_rows(x: np.ndarray, eps: float) -> np.ndarray:
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mu) / np.sqrt(var + eps)


def _cosine(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    num = (a * b).sum(-1)
    den = np.linalg.norm(a, axis=-1) * np.linalg.norm(b, axis=-1)
    return np.where(den > 0, num / np.maximum(den, 1e-300), 0.0)


def similarity_profile_from_layers(
    layers: Sequence[np.ndarray],
    pad_mask: np.ndarray,
    normalize: bool = True,
    pooling: str = "token",
    eps: float = 1e-5,
) -> np.ndarray:
    """Cosine similarity of each ``[B, T, d]`` layer output with the last one.

    ``pooling="token"`` averages per-token cosines over non-pad tokens;
    ``"sentence"`` mean-pools each sentence first.  The last entry is 1.
    """
    if pooling not in ("token", "sentence"):
        raise ConfigError(f"unknown pooling {pooling!r}")
    keep = ~np.asarray(pad_mask, dtype=bool)
    if not keep.any():
        raise EmptyBatchError("no non-pad tokens in the sample")
    mats = [np.asarray(x, dtype=np.float64) for x in layers]
    if normalize:
        mats = [_normalize_rows(x, eps) for x in mats]
    top = mats[-1]
    profile = []
    for x in mats:
        if pooling == "token":
            profile.append(float(_cosine(x, top)[keep].mean()))
        else:
            w = keep[..., None].astype(np.float64)
            pooled = (x * w).sum(1) / w.sum(1)
            pooled_top = (top * w).sum(1) / w.sum(1)
            profile.append(float(_cosine(pooled, pooled_top).mean()))
    profile[-1] = 1.0
    return np.asarray(profile)


def layer_similarity_profile(
    model: Model,
    sources: Sequence[Sequence[int]],
    normalize: bool = True,
    pooling: str = "token",
) -> np.ndarray:
    """Similarity of encoder layer ``i`` (``0`` = embeddings) to layer ``M``.

    Each layer output is compared after the final norm's standardization
    (no gain or bias) unless ``normalize`` is off.
    """
    if len(sources) == 0:
        raise EmptyBatchError("empty sample for layer similarity")
    width = max(len(s) for s in sources)
    ids = np.full((len(sources), width), PAD, dtype=np.int64)
    for i, s in enumerate(sources):
        ids[i, : len(s)] = s
    with ag.no_grad():
        views = encode_views(model, ids, keep_layers=True)
    layers = [t.data for t in views.per_layer]
    return similarity_profile_from_layers(layers, views.src_mask, normalize, pooling, model.config.ln_eps)


def profile_trend(profile: Sequence[float]) -> float:
    """Spearman rank correlation between layer index and similarity."""
    profile = np.asarray(profile, dtype=np.float64)
    if profile.size < 2:
        raise ConfigError("a trend needs at least two layers")
    if np.all(profile == profile[0]):
        return 0.0
    return float(spearmanr(np.arange(profile.size), profile)[0])


# ------------------------------------------------------------------ results


def config_digest(obj) -> str:
    """Short stable hash of a JSON-serializable configuration.

    A run config's ``output_dir`` is left out: where results are written
    does not change what was run.
    """
    if isinstance(obj, dict) and isinstance(obj.get("run"), dict) and "output_dir" in obj["run"]:
        obj = {**obj, "run": {k: v for k, v in obj["run"].items() if k != "output_dir"}}
    blob = json.dumps(obj, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class SweepResult:
    axis: str
    rows: List[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, value, model: str, view: str, metric: float, seed: int, digest: str) -> None:
        self.rows.append({"axis": self.axis, "value": value, "model": model, "view": view,
                          "metric": metric, "seed": seed, "config_digest": digest})

    @property
    def values(self) -> list:
        seen = []
        for r in self.rows:
            if r["value"] not in seen:
                seen.append(r["value"])
        return seen

    def metric(self, value, view: str, model: Optional[str] = None) -> float:
        for r in self.rows:
            if r["value"] == value and r["view"] == view and (model is None or r["model"] == model):
                return r["metric"]
        raise KeyError((value, view, model))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def merge(cls, parts: Sequence["SweepResult"]) -> "SweepResult":
        if not parts:
            raise ConfigError("nothing to merge")
        out = cls(parts[0].axis, metadata=dict(parts[0].metadata))
        for p in parts:
            if p.axis != out.axis:
                raise ConfigError(f"cannot merge axes {out.axis!r} and {p.axis!r}")
            out.rows.extend(p.rows)
        return out


def read_csv(path) -> List[dict]:
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != CSV_FIELDS:
            raise ConfigError(f"{path}: unexpected CSV header {reader.fieldnames}")
        return list(reader)


# --------------------------------------------------------------- evaluation


def evaluate(
    model: Model,
    view: str,
    corpus,
    metric: str = "token_accuracy",
    noise: Optional[NoiseSpec] = None,
    max_out_len: int = 0,
) -> float:
    """Greedy-decode ``corpus.src`` through ``view`` and score against ``corpus.tgt``."""
    from .bleu import corpus_bleu
    from .decoding import greedy_decode_batch, token_accuracy

    hyps = greedy_decode_batch(model, view, corpus.src, max_out_len, noise)
    if metric == "token_accuracy":
        return token_accuracy(hyps, corpus.tgt)
    if metric == "bleu":
        return corpus_bleu(hyps, corpus.tgt).bleu
    raise ConfigError(f"unknown metric {metric!r}")


def _load_model(item) -> Tuple[str, Model]:
    if isinstance(item, Model):
        return f"model{id(item) % 10000}", item
    if isinstance(item, tuple):
        return item[0], item[1]
    from .checkpoint import load_checkpoint

    path = Path(item)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    return path.name, load_checkpoint(path).to_model()


@dataclass
class NoiseSweepConfig:
    seed: int = 0
    metric: str = "token_accuracy"
    views: Optional[Tuple[str, ...]] = None  # default: every view the model has
    max_out_len: int = 0


def run_noise_sweep(model_paths, eps_grid: Sequence[float], testset, cfg: Optional[NoiseSweepConfig] = None) -> SweepResult:
    """Score each model and view with noise of every std in ``eps_grid``.

    ``model_paths`` holds checkpoint paths, models, or ``(name, model)``
    pairs.  The same noise seed is used at every grid point.
    """
    cfg = cfg or NoiseSweepConfig()
    eps_grid = [float(e) for e in eps_grid]
    if not eps_grid:
        raise ConfigError("eps grid is empty")
    if any(e < 0 for e in eps_grid) or any(b <= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise ConfigError(f"eps grid must be non-negative and strictly ascending: {eps_grid}")
    models = [_load_model(m) for m in model_paths]
    result = SweepResult("eps_noise", metadata={"eps_grid": eps_grid, "noise_seed": cfg.seed, "metric": cfg.metric})
    for name, model in models:
        digest = config_digest(model.config.to_dict())
        views = cfg.views or tuple(model.views)
        for eps in eps_grid:
            spec = NoiseSpec(eps, cfg.seed)
            for view in views:
                score = evaluate(model, view, testset, cfg.metric, spec, cfg.max_out_len)
                result.add(eps, name, view, score, cfg.seed, digest)
                log.info("noise %s eps=%g view=%s %s=%.4f", name, eps, view, cfg.metric, score)
    return result


# ------------------------------------------------------------------- sweeps


def build_corpora(data_cfg, vocab=None):
    """Training and held-out corpora for a :class:`~mvnmt.config.DataConfig`."""
    from .data import Vocabulary, gen_toy_corpus, load_parallel_corpus

    if data_cfg.uses_files:
        train, vocab = load_parallel_corpus(data_cfg.train_src, data_cfg.train_tgt, vocab)
        test = None
        if data_cfg.valid_src:
            test, _ = load_parallel_corpus(data_cfg.valid_src, data_cfg.valid_tgt, vocab)
        return train, test, vocab
    span = (data_cfg.len_min, data_cfg.len_max)
    train = gen_toy_corpus(data_cfg.task, data_cfg.vocab_size, span, data_cfg.train_count, data_cfg.data_seed)
    test = gen_toy_corpus(data_cfg.task, data_cfg.vocab_size, span, data_cfg.test_count, data_cfg.test_seed)
    return train, test, vocab or Vocabulary.for_toy(data_cfg.vocab_size)


def train_run(run_cfg, train_corpus, out_dir=None, vocab=None, on_step: Optional[Callable] = None):
    """Build and train one model as described by ``run_cfg``; returns the trainer."""
    from .training import Trainer

    model = build_model(run_cfg.model, seed=run_cfg.run.model_seed)
    trainer = Trainer(model, run_cfg.train, run_cfg.loss, out_dir, consistency=run_cfg.run.consistency,
                      vocab=vocab, metadata={"run_config": run_cfg.as_dict()})
    return trainer.fit(train_corpus, on_step)


def _apply_axis(base, axis: str, value):
    """The run config for one sweep point, validating ``value`` for ``axis``."""
    from .objectives import parse_dark_mode

    m = base.model
    if axis == "alpha":
        a = float(value)
        if not 0.0 <= a <= 1.0:
            raise ConfigError(f"alpha {value} outside [0, 1]")
        return base.with_overrides({"loss": {"alpha": a}})
    if axis == "aux_position":
        pos = int(value)
        if not 1 <= pos <= m.M:
            raise ConfigError(f"aux_position {value} outside 1..{m.M}")
        return base.with_overrides({"model": {"M_a": pos}})
    if axis == "dark_mode":
        parse_dark_mode(value)
        return base.with_overrides({"loss": {"dark_mode": value}})
    if axis == "detach":
        flag = _as_bool(value, {"oneway": True, "one-way": True, "mutual": False})
        return base.with_overrides({"loss": {"detach_teacher": flag}})
    if axis == "share_can":
        return base.with_overrides({"model": {"share_can": _as_bool(value, {})}})
    raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")


def _as_bool(value, names: Dict[str, bool]) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in names:
        return names[text]
    if text in ("true", "1", "yes"):
        return True
    if text in ("false", "0", "no"):
        return False
    raise ConfigError(f"cannot read {value!r} as a boolean sweep value")


def run_sweep(axis: str, values: Sequence, base_cfg, corpora=None, out_dir=None) -> SweepResult:
    """Train one model per axis value from the same seed and score every view.

    ``corpora`` is an optional ``(train, test)`` pair; by default the
    config's data section is used.  Per-value loss trajectories (total loss
    per update) are kept in ``metadata["trajectories"]``.
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    if not values:
        raise ConfigError("no sweep values")
    points = [(v, _apply_axis(base_cfg, axis, v)) for v in values]  # validate all first
    if corpora is None:
        train, test, vocab = build_corpora(base_cfg.data)
    else:
        (train, test), vocab = corpora, None
    if test is None:
        raise ConfigError("sweeps need held-out data")
    result = SweepResult(axis, metadata={"base_config": base_cfg.as_dict(), "trajectories": {}})
    for value, cfg in points:
        sub = Path(out_dir) / f"{axis}={value}" if out_dir else None
        trainer = train_run(cfg, train, sub, vocab)
        digest = config_digest(cfg.as_dict())
        result.metadata["trajectories"][str(value)] = [bd.total for bd in trainer.history]
        for view in trainer.model.views:
            score = evaluate(trainer.model, view, test, cfg.run.metric)
            result.add(value, axis, view, score, cfg.run.model_seed, digest)
            log.info("sweep %s=%s view=%s %s=%.4f", axis, value, view, cfg.run.metric, score)
    return result


# ------------------------------------------------------------------ seq-KD


def distill_corpus(teacher: Model, sources: Sequence[Sequence[int]], beam: int = 1, view: str = "primary"):
    """Pair each source with the teacher's translation of it."""
    from .data import ParallelCorpus
    from .decoding import DecodeConfig, beam_search, greedy_decode_batch

    if beam < 1:
        raise ConfigError("beam must be >= 1")
    if beam == 1:
        outs = greedy_decode_batch(teacher, view, sources)
    else:
        cfg = DecodeConfig(view=view, beam_size=beam)
        outs = [beam_search(teacher, view, s, cfg)[0] for s in sources]
    src, tgt, dropped = [], [], 0
    for s, t in zip(sources, outs):
        if not t:  # an empty output cannot be a training target
            dropped += 1
            t = [s[0]]
        src.append(list(s))
        tgt.append(list(t))
    if dropped:
        log.warning("%d empty teacher outputs replaced by a one-token target", dropped)
    return ParallelCorpus(src, tgt, provenance=f"seq-kd:beam{beam}")


def run_seq_kd(teacher_path, student_cfg, train_corpus, beam: int = 4, test_corpus=None, out_dir=None):
    """Sequence-level distillation: decode the training sources with the
    teacher, then train a student on the resulting pairs.

    Returns ``(student_model, distilled_corpus, SweepResult)``.
    """
    name, teacher = _load_model(teacher_path)
    tc, sc = teacher.config, student_cfg.model
    if (tc.src_vocab, tc.tgt_vocab) != (sc.src_vocab, sc.tgt_vocab):
        raise ConfigError(f"teacher vocabularies {(tc.src_vocab, tc.tgt_vocab)} differ from student "
                          f"{(sc.src_vocab, sc.tgt_vocab)}")
    distilled = distill_corpus(teacher, train_corpus.src, beam)
    trainer = train_run(student_cfg, distilled, out_dir)
    result = SweepResult("seq_kd", metadata={"teacher": name, "beam": beam})
    if test_corpus is not None:
        digest = config_digest(student_cfg.as_dict())
        for view in trainer.model.views:
            score = evaluate(trainer.model, view, test_corpus, student_cfg.run.metric)
            result.add(beam, "student", view, score, student_cfg.run.model_seed, digest)
    return trainer.model, distilled, result
