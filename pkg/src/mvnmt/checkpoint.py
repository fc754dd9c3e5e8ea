"""Self-describing checkpoint files.

Layout::

    b"MVNMTCKP"                     8-byte magic
    uint64 little-endian            length H of the metadata block
    H bytes UTF-8 JSON metadata     format version, model config, manifest, ...
    payload                         raw little-endian arrays in manifest order

Each manifest entry records ``name``, ``shape``, ``dtype`` (``"<f4"`` for
training checkpoints), ``offset`` and ``nbytes`` relative to the payload
start.  A SHA-256 of the payload guards against corruption and truncation.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import autograd as ag
from .errors import CheckpointError, ConfigMismatchError, IntegrityError
from .model import Model, ModelConfig, parameter_shapes

MAGIC = b"MVNMTCKP"
FORMAT_VERSION = 1
_OPT_M, _OPT_V = "opt.m/", "opt.v/"


@dataclass
class Checkpoint:
    config: ModelConfig
    params: Dict[str, np.ndarray]
    step: int = 0
    rng_state: dict = field(default_factory=dict)
    optimizer: Optional[dict] = None  # {"step": int, "m": {...}, "v": {...}}
    vocab: Optional[List[str]] = None
    metadata: dict = field(default_factory=dict)

    def to_model(self) -> Model:
        return Model(self.config, {k: ag.parameter(v.copy(), v.dtype) for k, v in self.params.items()})

    def optimizer_state(self):
        from .training import OptimizerState

        if self.optimizer is None:
            return None
        return OptimizerState(self.optimizer["step"], dict(self.optimizer["m"]), dict(self.optimizer["v"]))

    def vocabulary(self):
        from .data import Vocabulary

        return None if self.vocab is None else Vocabulary.from_list(self.vocab)


def _le(a: np.ndarray) -> np.ndarray:
    if a.dtype not in (np.float32, np.float64):
        raise CheckpointError(f"unsupported array dtype {a.dtype}")
    return np.ascontiguousarray(a, dtype=a.dtype.newbyteorder("<"))


def write_checkpoint(ckpt: Checkpoint, path) -> Path:
    arrays = list(ckpt.params.items())
    if ckpt.optimizer is not None:
        arrays += [(_OPT_M + k, v) for k, v in ckpt.optimizer["m"].items()]
        arrays += [(_OPT_V + k, v) for k, v in ckpt.optimizer["v"].items()]
    manifest, chunks, offset = [], [], 0
    for name, arr in arrays:
        le = _le(np.asarray(arr))
        raw = le.tobytes()
        manifest.append({"name": name, "shape": list(le.shape), "dtype": le.dtype.str, "offset": offset, "nbytes": len(raw)})
        chunks.append(raw)
        offset += len(raw)
    payload = b"".join(chunks)
    header = {
        "format_version": FORMAT_VERSION,
        "model_config": ckpt.config.to_dict(),
        "step": int(ckpt.step),
        "rng_state": ckpt.rng_state,
        "optimizer_step": None if ckpt.optimizer is None else int(ckpt.optimizer["step"]),
        "vocab": ckpt.vocab,
        "metadata": ckpt.metadata,
        "manifest": manifest,
        "payload_bytes": len(payload),
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<Q", len(blob)))
        f.write(blob)
        f.write(payload)
    os.replace(tmp, path)
    return path


def save_checkpoint(
    model: Model,
    opt_state,
    path,
    step: Optional[int] = None,
    rng_state: Optional[dict] = None,
    vocab=None,
    metadata: Optional[dict] = None,
) -> Path:
    """Write ``model`` (and optionally its optimizer state) to ``path``."""
    optimizer = None
    if opt_state is not None:
        optimizer = {"step": opt_state.step, "m": opt_state.m, "v": opt_state.v}
    if vocab is not None and not isinstance(vocab, list):
        vocab = vocab.to_list()
    ckpt = Checkpoint(
        config=model.config,
        params=model.state_dict(),
        step=int(step if step is not None else (opt_state.step if opt_state is not None else 0)),
        rng_state=rng_state or {},
        optimizer=optimizer,
        vocab=vocab,
        metadata=metadata or {},
    )
    return write_checkpoint(ckpt, path)


def load_checkpoint(path, expected_config: Optional[ModelConfig] = None) -> Checkpoint:
    """Read and validate a checkpoint; nothing partial is ever returned."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    if len(data) < len(MAGIC) + 8 or data[: len(MAGIC)] != MAGIC:
        raise IntegrityError(f"{path}: not a checkpoint file (bad magic)")
    (hlen,) = struct.unpack("<Q", data[len(MAGIC): len(MAGIC) + 8])
    start = len(MAGIC) + 8
    if start + hlen > len(data):
        raise IntegrityError(f"{path}: truncated metadata block")
    try:
        header = json.loads(data[start: start + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise IntegrityError(f"{path}: corrupt metadata block: {e}") from e
    version = header.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported format version {version} (expected {FORMAT_VERSION})")
    payload = data[start + hlen:]
    if len(payload) != header["payload_bytes"]:
        raise IntegrityError(f"{path}: payload is {len(payload)} bytes, expected {header['payload_bytes']}")
    if hashlib.sha256(payload).hexdigest() != header["payload_sha256"]:
        raise IntegrityError(f"{path}: payload checksum mismatch")

    config = ModelConfig.from_dict(header["model_config"])
    if expected_config is not None and expected_config != config:
        diff = {k: (v, getattr(config, k)) for k, v in expected_config.to_dict().items() if getattr(config, k) != v}
        raise ConfigMismatchError(f"{path}: model config differs from expected: {diff}")
    arrays = {}
    for entry in header["manifest"]:
        raw = payload[entry["offset"]: entry["offset"] + entry["nbytes"]]
        arr = np.frombuffer(raw, dtype=np.dtype(entry["dtype"])).reshape(entry["shape"])
        arrays[entry["name"]] = arr.astype(arr.dtype.newbyteorder("="))
    params = {k: v for k, v in arrays.items() if not k.startswith(("opt.m/", "opt.v/"))}
    expected = parameter_shapes(config)
    if set(params) != set(expected):
        raise ConfigMismatchError(f"{path}: stored parameters do not match the stored config")
    for name, shape in expected.items():
        if params[name].shape != tuple(shape):
            raise ConfigMismatchError(f"{path}: {name} has shape {params[name].shape}, config implies {shape}")
    params = {k: params[k] for k in expected}
    optimizer = None
    if header.get("optimizer_step") is not None:
        optimizer = {
            "step": header["optimizer_step"],
            "m": {k[len(_OPT_M):]: v for k, v in arrays.items() if k.startswith(_OPT_M)},
            "v": {k[len(_OPT_V):]: v for k, v in arrays.items() if k.startswith(_OPT_V)},
        }
    return Checkpoint(config, params, header["step"], header.get("rng_state") or {}, optimizer,
                      header.get("vocab"), header.get("metadata") or {})


def average_checkpoints(paths: Sequence) -> Checkpoint:
    """Element-wise mean of the parameters of several checkpoints.

    The sum is accumulated in float64 and cast back to the stored dtype.
    Optimizer state is dropped.
    """
    paths = list(paths)
    if not paths:
        raise CheckpointError("no checkpoints to average")
    first = load_checkpoint(paths[0])
    sums = {k: v.astype(np.float64) for k, v in first.params.items()}
    for p in paths[1:]:
        ck = load_checkpoint(p)
        if ck.config != first.config:
            raise ConfigMismatchError(f"{p}: model config differs from {paths[0]}")
        for k, v in ck.params.items():
            sums[k] += v
    n = len(paths)
    params = {k: (s / n).astype(first.params[k].dtype) for k, s in sums.items()}
    meta = dict(first.metadata, averaged_from=[str(p) for p in paths])
    return Checkpoint(first.config, params, first.step, {}, None, first.vocab, meta)
