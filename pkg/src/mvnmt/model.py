"""Multi-view Transformer encoder-decoder.

One encoder pass produces two views of the source: the *primary* view
(topmost layer) and the *auxiliary* view (an intermediate layer followed by
its own layer norm).  The decoder runs one stream per view.  Self-attention
and feed-forward sublayers are shared between streams; each stream owns its
cross-attention sublayer and the layer norm in front of it.

Parameters live in a flat ``{name: Tensor}`` dict.  Names follow::

    src_embed, tgt_embed
    enc.{i}.san.{wq,bq,wk,bk,wv,bv,wo,bo}  enc.{i}.ffn.{w1,b1,w2,b2}
    enc.{i}.ln1.{g,b}  enc.{i}.ln2.{g,b}  enc.ln.{g,b}  enc.aux_ln.{g,b}
    dec.{i}.san.*  dec.{i}.ln_san.*  dec.{i}.can.*  dec.{i}.ln_can.*
    dec.{i}.can_aux.*  dec.{i}.ln_can_aux.*  dec.{i}.ffn.*  dec.{i}.ln_ffn.*
    dec.ln.{g,b}  out.w  out.b

Layer indices in names are zero based; layer ``i`` in the names is encoder
layer ``i + 1`` in the usual one-based counting.
"""

from __future__ import annotations

import dataclasses
import zlib
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from . import autograd as ag
from .autograd import Tensor
from .errors import ConfigError, ShapeError

PAD, BOS, EOS, UNK = 0, 1, 2, 3
VIEWS = ("primary", "auxiliary")
NEG_INF = -1e9


@dataclass
class ModelConfig:
    """Architecture hyperparameters.

    ``M``/``N`` are encoder/decoder depths and ``M_a`` the (one-based)
    encoder layer tapped for the auxiliary view.  ``multiview=False`` builds
    a plain single-view Transformer.  ``top_ln`` controls the norm on top of
    the encoder; ``None`` means prenorm gets one and postnorm does not.  The
    decoder has a final norm exactly when the style is prenorm.  ``view``
    names the view a single-view model serves (``"auxiliary"`` only for a
    model stripped down to the auxiliary view).
    """

    M: int = 4
    N: int = 2
    M_a: int = 2
    d_model: int = 64
    d_ffn: int = 128
    heads: int = 4
    norm_style: str = "prenorm"
    share_can: bool = False
    dropout: float = 0.1
    attn_dropout: float = 0.0
    src_vocab: int = 20
    tgt_vocab: int = 20
    max_len: int = 64
    tau: float = 1.0
    multiview: bool = True
    postnorm_aux_ln: bool = True
    top_ln: Optional[bool] = None
    tie_embeddings: bool = False
    view: str = "primary"
    ln_eps: float = 1e-5

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.M < 1 or self.N < 1:
            raise ConfigError(f"encoder and decoder depth must be >= 1 (M={self.M}, N={self.N})")
        if self.multiview and not 1 <= self.M_a <= self.M:
            raise ConfigError(f"auxiliary layer M_a={self.M_a} must lie in [1, M={self.M}]")
        if self.d_model % self.heads:
            raise ConfigError(f"d_model={self.d_model} not divisible by heads={self.heads}")
        if self.norm_style not in ("prenorm", "postnorm"):
            raise ConfigError(f"norm_style must be prenorm or postnorm, got {self.norm_style!r}")
        if not (0 <= self.dropout < 1 and 0 <= self.attn_dropout < 1):
            raise ConfigError("dropout probabilities must lie in [0, 1)")
        if self.src_vocab < 5 or self.tgt_vocab < 5:
            raise ConfigError("vocabularies need the 4 reserved ids plus at least one token")
        if self.tie_embeddings and self.src_vocab != self.tgt_vocab:
            raise ConfigError("tie_embeddings needs equal source and target vocabularies")
        if self.view not in VIEWS or (self.multiview and self.view != "primary"):
            raise ConfigError(f"invalid view {self.view!r} for this config")
        if self.tau <= 0:
            raise ConfigError("temperature must be positive")

    @property
    def has_top_ln(self) -> bool:
        return self.norm_style == "prenorm" if self.top_ln is None else self.top_ln

    @property
    def has_decoder_ln(self) -> bool:
        return self.norm_style == "prenorm"

    @property
    def has_aux_ln(self) -> bool:
        return self.multiview and (self.norm_style == "prenorm" or self.postnorm_aux_ln)

    @property
    def separate_can(self) -> bool:
        return self.multiview and not self.share_can

    def replace(self, **changes) -> "ModelConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**d)


# ---------------------------------------------------------------- structures


@dataclass
class NoiseSpec:
    """Gaussian noise added inside the view-producing layer norms."""

    eps_noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.eps_noise >= 0:
            raise ValueError(f"noise std must be non-negative, got {self.eps_noise}")


@dataclass
class EncoderViews:
    primary: Tensor
    auxiliary: Optional[Tensor]
    src_mask: np.ndarray
    per_layer: Optional[List[Tensor]] = None

    def get(self, view: str) -> Tensor:
        out = self.primary if view == "primary" else self.auxiliary
        if out is None:
            raise ConfigError(f"model has no {view} view")
        return out


@dataclass
class ActivationTrace:
    """Decoder intermediates for one stream, per layer (debug only)."""

    post_san: List[np.ndarray] = field(default_factory=list)
    post_can: List[np.ndarray] = field(default_factory=list)
    final: Optional[np.ndarray] = None


@dataclass
class TwoStreamLogits:
    logits_pri: Tensor
    logits_aux: Tensor

    def __post_init__(self):
        if self.logits_pri.shape != self.logits_aux.shape:
            raise ShapeError("stream logits differ in shape")


class DropoutRng:
    """Hands out one generator per dropout site, keyed by (seed, step, site).

    Sites are numbered in call order, which is fixed by the architecture, so
    a training step is reproducible from ``(seed, step)`` alone.  ``micro``
    separates micro-batches accumulated into one update.
    """

    def __init__(self, seed: int, step: int, micro: int = 0):
        self.key = [int(seed), int(step), int(micro)]
        self.site = 0

    def __call__(self) -> np.random.Generator:
        self.site += 1
        return np.random.default_rng(self.key + [self.site])


# ---------------------------------------------------------------- building


def _name_seed(seed: int, name: str) -> np.random.Generator:
    # per-name streams: a parameter's init never depends on which others exist
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


def _attn_shapes(d: int) -> Dict[str, tuple]:
    return {"wq": (d, d), "bq": (d,), "wk": (d, d), "bk": (d,), "wv": (d, d), "bv": (d,), "wo": (d, d), "bo": (d,)}


def _ffn_shapes(d: int, f: int) -> Dict[str, tuple]:
    return {"w1": (d, f), "b1": (f,), "w2": (f, d), "b2": (d,)}


def _ln_shapes(d: int) -> Dict[str, tuple]:
    return {"g": (d,), "b": (d,)}


def parameter_shapes(cfg: ModelConfig) -> Dict[str, tuple]:
    """Name -> shape for every parameter ``cfg`` calls for, in build order."""
    d = cfg.d_model
    shapes: Dict[str, tuple] = {"src_embed": (cfg.src_vocab, d)}
    if not cfg.tie_embeddings:
        shapes["tgt_embed"] = (cfg.tgt_vocab, d)

    def group(prefix, sub):
        shapes.update({f"{prefix}.{k}": v for k, v in sub.items()})

    for i in range(cfg.M):
        group(f"enc.{i}.san", _attn_shapes(d))
        group(f"enc.{i}.ln1", _ln_shapes(d))
        group(f"enc.{i}.ffn", _ffn_shapes(d, cfg.d_ffn))
        group(f"enc.{i}.ln2", _ln_shapes(d))
    if cfg.has_top_ln:
        group("enc.ln", _ln_shapes(d))
    if cfg.has_aux_ln:
        group("enc.aux_ln", _ln_shapes(d))
    for i in range(cfg.N):
        group(f"dec.{i}.san", _attn_shapes(d))
        group(f"dec.{i}.ln_san", _ln_shapes(d))
        group(f"dec.{i}.can", _attn_shapes(d))
        group(f"dec.{i}.ln_can", _ln_shapes(d))
        if cfg.separate_can:
            group(f"dec.{i}.can_aux", _attn_shapes(d))
            group(f"dec.{i}.ln_can_aux", _ln_shapes(d))
        group(f"dec.{i}.ffn", _ffn_shapes(d, cfg.d_ffn))
        group(f"dec.{i}.ln_ffn", _ln_shapes(d))
    if cfg.has_decoder_ln:
        group("dec.ln", _ln_shapes(d))
    shapes["out.w"] = (d, cfg.tgt_vocab)
    shapes["out.b"] = (cfg.tgt_vocab,)
    return shapes


def _init_param(name: str, shape: tuple, seed: int, d_model: int) -> np.ndarray:
    leaf = name.rsplit(".", 1)[-1]
    if name.endswith("_embed"):
        return _name_seed(seed, name).normal(0.0, d_model**-0.5, shape)
    if len(shape) == 1:
        return np.ones(shape) if leaf == "g" else np.zeros(shape)
    limit = np.sqrt(6.0 / (shape[0] + shape[1]))  # Xavier uniform
    return _name_seed(seed, name).uniform(-limit, limit, shape)


def sinusoidal_positions(length: int, d: int) -> np.ndarray:
    pos = np.arange(length)[:, None]
    rate = np.exp(-np.log(10000.0) * (np.arange(0, d, 2) / d))
    pe = np.zeros((length, d))
    pe[:, 0::2] = np.sin(pos * rate)
    pe[:, 1::2] = np.cos(pos * rate[: d // 2])
    return pe


class Model:
    """Parameters plus the config that gives them meaning.

    Forward logic lives in module-level functions (:func:`encode_views`,
    :func:`decode_two_stream`, ...) that read ``model.params``.
    """

    def __init__(self, config: ModelConfig, params: Dict[str, Tensor]):
        expected = parameter_shapes(config)
        if list(params) != list(expected):
            missing = set(expected) - set(params)
            extra = set(params) - set(expected)
            if missing or extra:
                raise ConfigError(f"parameter set does not match config (missing={sorted(missing)[:4]}, extra={sorted(extra)[:4]})")
            params = {k: params[k] for k in expected}
        for name, shape in expected.items():
            if params[name].shape != shape:
                raise ShapeError(f"{name}: expected shape {shape}, got {params[name].shape}")
        self.config = config
        self.params = params
        self.counters: Counter = Counter()
        self._pe = sinusoidal_positions(config.max_len + 2, config.d_model)

    @property
    def dtype(self):
        return next(iter(self.params.values())).dtype

    @property
    def views(self) -> tuple:
        return VIEWS if self.config.multiview else (self.config.view,)

    def num_parameters(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def parameters(self) -> List[Tensor]:
        return list(self.params.values())

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    def astype(self, dtype) -> "Model":
        return Model(self.config, {k: ag.parameter(v.data, dtype) for k, v in self.params.items()})

    def copy(self) -> "Model":
        return Model(self.config, {k: ag.parameter(v.data.copy(), v.dtype) for k, v in self.params.items()})

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {k: v.data for k, v in self.params.items()}

    def positions(self, length: int) -> np.ndarray:
        if length > self._pe.shape[0]:
            raise ShapeError(f"sequence length {length} exceeds max_len {self.config.max_len}")
        return self._pe[:length].astype(self.dtype)

    def __repr__(self):
        c = self.config
        kind = "multi-view" if c.multiview else f"single-view[{c.view}]"
        return f"Model({kind}, {c.norm_style}, M={c.M}, N={c.N}, M_a={c.M_a}, params={self.num_parameters()})"


def build_model(config: ModelConfig, seed: int = 0, dtype=None) -> Model:
    """Deterministically initialize every parameter ``config`` calls for.

    Each parameter draws from its own generator keyed by ``(seed, name)``,
    so a multi-view model and a single-view model built from the same seed
    share the values of every parameter they have in common.
    """
    config.validate()
    dtype = dtype or ag.get_default_dtype()
    params = {
        name: ag.parameter(_init_param(name, shape, seed, config.d_model), dtype)
        for name, shape in parameter_shapes(config).items()
    }
    return Model(config, params)


# ------------------------------------------------------------------ forward


def _ln(model: Model, prefix: str, x: Tensor, noise: Optional[np.ndarray] = None) -> Tensor:
    p = model.params
    return ag.layer_norm(x, p[prefix + ".g"], p[prefix + ".b"], model.config.ln_eps, noise)


def _linear(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    return ag.add(ag.matmul(x, w), b)


def _split_heads(x: Tensor, heads: int) -> Tensor:
    b, t, d = x.shape
    return ag.transpose(ag.reshape(x, (b, t, heads, d // heads)), (0, 2, 1, 3))


def _merge_heads(x: Tensor) -> Tensor:
    b, h, t, dh = x.shape
    return ag.reshape(ag.transpose(x, (0, 2, 1, 3)), (b, t, h * dh))


def attention(model: Model, prefix: str, query: Tensor, memory: Tensor, blocked: np.ndarray, drop) -> Tensor:
    """Multi-head scaled dot-product attention.

    ``blocked`` broadcasts to ``[B, heads, Tq, Tk]`` and is true where a
    query may not attend.
    """
    p, cfg = model.params, model.config
    q = _split_heads(_linear(query, p[prefix + ".wq"], p[prefix + ".bq"]), cfg.heads)
    k = _split_heads(_linear(memory, p[prefix + ".wk"], p[prefix + ".bk"]), cfg.heads)
    v = _split_heads(_linear(memory, p[prefix + ".wv"], p[prefix + ".bv"]), cfg.heads)
    scores = ag.scale(ag.matmul(q, ag.transpose(k, (0, 1, 3, 2))), 1.0 / np.sqrt(cfg.d_model // cfg.heads))
    weights = ag.softmax(ag.masked_fill(scores, blocked, NEG_INF), axis=-1)
    weights = ag.dropout(weights, cfg.attn_dropout, drop() if drop else None)
    ctx = _merge_heads(ag.matmul(weights, v))
    return _linear(ctx, p[prefix + ".wo"], p[prefix + ".bo"])


def _ffn(model: Model, prefix: str, x: Tensor, drop) -> Tensor:
    p = model.params
    h = ag.relu(_linear(x, p[prefix + ".w1"], p[prefix + ".b1"]))
    return _linear(h, p[prefix + ".w2"], p[prefix + ".b2"])


def _drop(model: Model, x: Tensor, drop) -> Tensor:
    return ag.dropout(x, model.config.dropout, drop() if drop else None)


def _embed(model: Model, table: str, ids: np.ndarray, drop) -> Tensor:
    x = ag.embedding(model.params[table], ids)
    x = ag.add(ag.scale(x, np.sqrt(model.config.d_model)), Tensor(model.positions(ids.shape[1])))
    return _drop(model, x, drop)


def _sublayer(model: Model, x: Tensor, ln: str, fn, drop) -> Tensor:
    """Residual block in the configured norm style."""
    if model.config.norm_style == "prenorm":
        return ag.add(x, _drop(model, fn(_ln(model, ln, x)), drop))
    return _ln(model, ln, ag.add(x, _drop(model, fn(x), drop)))


def _check_ids(ids: np.ndarray, vocab: int, what: str) -> np.ndarray:
    ids = np.asarray(ids, dtype=np.int64)
    if ids.ndim != 2:
        raise ShapeError(f"{what} ids must be a [batch, length] matrix, got shape {ids.shape}")
    if ids.size and (ids.min() < 0 or ids.max() >= vocab):
        raise IndexError(f"{what} id out of range for vocabulary of size {vocab}")
    return ids


def _noise_array(noise: Optional[NoiseSpec], shape: tuple) -> Optional[np.ndarray]:
    if noise is None or noise.eps_noise == 0:
        return None
    from .analysis import inject_encoder_noise

    return inject_encoder_noise(np.zeros(shape), noise)


def encode_views(
    model: Model,
    src_ids: np.ndarray,
    src_mask: Optional[np.ndarray] = None,
    noise: Optional[NoiseSpec] = None,
    keep_layers: bool = False,
    drop: Optional[DropoutRng] = None,
) -> EncoderViews:
    """Run the encoder once and return both views.

    ``src_mask`` is true at pad positions (derived from ``src_ids`` when
    omitted).  With ``keep_layers`` the outputs of the embedding layer and
    of every encoder layer (M + 1 entries, pre final norm) are retained.
    ``noise`` perturbs the normalized value inside whichever layer norm
    produces each view.
    """
    cfg = model.config
    src_ids = _check_ids(src_ids, cfg.src_vocab, "source")
    src_mask = (src_ids == PAD) if src_mask is None else np.asarray(src_mask, dtype=bool)
    if src_mask.shape != src_ids.shape:
        raise ShapeError("source mask and ids differ in shape")
    blocked = src_mask[:, None, None, :]
    noise_arr = _noise_array(noise, src_ids.shape + (cfg.d_model,))
    postnorm = cfg.norm_style == "postnorm"

    h = _embed(model, "src_embed", src_ids, drop)
    layers = [h] if keep_layers else None
    aux = None
    for i in range(cfg.M):
        model.counters["encoder_layer"] += 1
        pre = f"enc.{i}"
        h = _sublayer(model, h, pre + ".ln1", lambda x: attention(model, pre + ".san", x, x, blocked, drop), drop)
        if postnorm:
            resid = ag.add(h, _drop(model, _ffn(model, pre + ".ffn", h, drop), drop))
            h = _ln(model, pre + ".ln2", resid)
        else:
            h = _sublayer(model, h, pre + ".ln2", lambda x: _ffn(model, pre + ".ffn", x, drop), drop)
        if keep_layers:
            layers.append(h)
        if cfg.multiview and i + 1 == cfg.M_a:
            if cfg.has_aux_ln:
                aux = _ln(model, "enc.aux_ln", h, noise_arr)
            elif noise_arr is not None:
                # postnorm without the extra norm: perturb a side copy only
                aux = _ln(model, pre + ".ln2", resid, noise_arr)
            else:
                aux = h
        if postnorm and i + 1 == cfg.M and noise_arr is not None and not cfg.has_top_ln:
            h = _ln(model, pre + ".ln2", resid, noise_arr)
    primary = _ln(model, "enc.ln", h, noise_arr) if cfg.has_top_ln else h
    return EncoderViews(primary=primary, auxiliary=aux, src_mask=src_mask, per_layer=layers)


def causal_mask(length: int) -> np.ndarray:
    return np.triu(np.ones((length, length), dtype=bool), k=1)


def _decode_stream(
    model: Model,
    stream: str,
    memory: Tensor,
    src_mask: np.ndarray,
    tgt_in_ids: np.ndarray,
    tgt_mask: Optional[np.ndarray],
    drop,
    trace: Optional[ActivationTrace] = None,
) -> Tensor:
    cfg = model.config
    tgt_in_ids = _check_ids(tgt_in_ids, cfg.tgt_vocab, "target")
    b, t = tgt_in_ids.shape
    if memory.shape[0] != b or memory.shape[1:] != (src_mask.shape[1], cfg.d_model) or src_mask.shape[0] != b:
        raise ShapeError(f"view {memory.shape} does not fit source mask {src_mask.shape} / batch {b}")
    if tgt_mask is not None and np.shape(tgt_mask) != (b, t):
        raise ShapeError("target mask and ids differ in shape")
    self_blocked = causal_mask(t)[None, None]
    if tgt_mask is not None:
        self_blocked = self_blocked | np.asarray(tgt_mask, dtype=bool)[:, None, None, :]
    cross_blocked = src_mask[:, None, None, :]
    aux_stream = stream == "auxiliary" and cfg.separate_can
    can, ln_can = ("can_aux", "ln_can_aux") if aux_stream else ("can", "ln_can")

    z = _embed(model, "src_embed" if cfg.tie_embeddings else "tgt_embed", tgt_in_ids, drop)
    for i in range(cfg.N):
        pre = f"dec.{i}"
        z = _sublayer(model, z, pre + ".ln_san", lambda x: attention(model, pre + ".san", x, x, self_blocked, drop), drop)
        if trace is not None:
            trace.post_san.append(z.data)
        z = _sublayer(model, z, f"{pre}.{ln_can}", lambda x: attention(model, f"{pre}.{can}", x, memory, cross_blocked, drop), drop)
        if trace is not None:
            trace.post_can.append(z.data)
        z = _sublayer(model, z, pre + ".ln_ffn", lambda x: _ffn(model, pre + ".ffn", x, drop), drop)
    if cfg.has_decoder_ln:
        z = _ln(model, "dec.ln", z)
    if trace is not None:
        trace.final = z.data
    return _linear(z, model.params["out.w"], model.params["out.b"])


def decode_two_stream(
    model: Model,
    views: EncoderViews,
    tgt_in_ids: np.ndarray,
    tgt_mask: Optional[np.ndarray] = None,
    drop: Optional[DropoutRng] = None,
    traces: Optional[Dict[str, ActivationTrace]] = None,
) -> TwoStreamLogits:
    """Decode the primary stream from ``views.primary`` and the auxiliary
    stream from ``views.auxiliary`` with shared SAN/FFN parameters."""
    if not model.config.multiview:
        raise ConfigError("two-stream decoding needs a multi-view model")
    traces = traces or {}
    pri = _decode_stream(model, "primary", views.primary, views.src_mask, tgt_in_ids, tgt_mask, drop, traces.get("primary"))
    aux = _decode_stream(model, "auxiliary", views.auxiliary, views.src_mask, tgt_in_ids, tgt_mask, drop, traces.get("auxiliary"))
    return TwoStreamLogits(pri, aux)


def _stream_for(model: Model, view: str) -> str:
    if view not in VIEWS:
        raise ConfigError(f"unknown view {view!r}")
    if model.config.multiview:
        return view
    if view != model.config.view:
        raise ConfigError(f"this single-view model only serves the {model.config.view} view")
    return "primary"


def decode_single(
    model: Model,
    view: str,
    memory: Tensor,
    src_mask: np.ndarray,
    tgt_in_ids: np.ndarray,
    tgt_mask: Optional[np.ndarray] = None,
    drop: Optional[DropoutRng] = None,
) -> Tensor:
    """Logits of one stream; identical to that stream of :func:`decode_two_stream`."""
    return _decode_stream(model, _stream_for(model, view), memory, src_mask, tgt_in_ids, tgt_mask, drop)


def view_memory(model: Model, views: EncoderViews, view: str) -> Tensor:
    return views.get(_stream_for(model, view))


def forward_logits(model: Model, view: str, src_ids, tgt_in_ids, noise: Optional[NoiseSpec] = None) -> Tensor:
    """Encode and decode one view in a single call."""
    views = encode_views(model, src_ids, noise=noise)
    return decode_single(model, view, view_memory(model, views, view), views.src_mask, tgt_in_ids)


# ---------------------------------------------------------------- stripping


def strip_to_view(model: Model, view: str) -> Model:
    """Drop every parameter the chosen view never reads.

    The result is a single-view model whose outputs match the chosen stream
    of ``model`` exactly.  Stripping to the auxiliary view also drops the
    encoder layers above ``M_a``.
    """
    cfg = model.config
    if view not in VIEWS:
        raise ConfigError(f"unknown view {view!r}")
    if not cfg.multiview:
        if view != cfg.view:
            raise ConfigError(f"model was already stripped to the {cfg.view} view")
        return model.copy()
    p = model.params
    if view == "primary":
        new_cfg = cfg.replace(multiview=False, top_ln=cfg.has_top_ln)
        rename = {}
    else:
        new_cfg = cfg.replace(multiview=False, M=cfg.M_a, view="auxiliary", top_ln=cfg.has_aux_ln)
        rename = {"enc.ln.g": "enc.aux_ln.g", "enc.ln.b": "enc.aux_ln.b"}
        if cfg.separate_can:
            for name in p:
                if ".can_aux." in name or ".ln_can_aux." in name:
                    rename[name.replace("_aux", "")] = name
    new_params = {}
    for name in parameter_shapes(new_cfg):
        src = rename.get(name, name)
        new_params[name] = ag.parameter(p[src].data.copy(), p[src].dtype)
    return Model(new_cfg, new_params)


def auxiliary_only_parameters(model: Model) -> List[str]:
    """Names of parameters read only by the auxiliary stream."""
    return [n for n in model.params if n.startswith("enc.aux_ln") or "_aux." in n]


def primary_only_parameters(model: Model) -> List[str]:
    """Names of parameters read only by the primary stream."""
    cfg = model.config
    names = []
    for n in model.params:
        if n.startswith("enc.ln.") or (cfg.separate_can and (".can." in n or ".ln_can." in n)):
            names.append(n)
        elif n.startswith("enc.") and not n.startswith("enc.aux_ln"):
            layer = int(n.split(".")[1]) if n.split(".")[1].isdigit() else -1
            if layer >= cfg.M_a:
                names.append(n)
    return names
