"""Command-line front end.

Subcommands::

    train         train a model from a run config
    decode        translate a file of source sentences with one view
    eval-bleu     corpus BLEU of a hypothesis file against a reference file
    experiment    noise-sweep | sweep | layer-sim | seq-kd
    strip         drop the parameters of the unused view from a checkpoint
    average-ckpt  average the parameters of several checkpoints

Usage errors exit with status 2.  Runtime failures print one JSON line
``{"error": <kind>, "message": <text>}`` to stderr and exit with status 1.
Outputs are never overwritten unless ``--force`` is given.  Settings are
resolved as defaults < ``--config`` file < ``--set section.key=value`` and
explicit flags.  ``MVNMT_LOG_LEVEL`` (e.g. ``DEBUG``) sets log verbosity.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import shutil
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from .errors import MVNMTError

log = logging.getLogger("mvnmt")


class OutputExists(MVNMTError):
    kind = "output-exists"


def _claim_dir(path: Path, force: bool) -> Path:
    if path.exists() and (not path.is_dir() or any(path.iterdir())):
        if not force:
            raise OutputExists(f"{path} exists and is not empty; pass --force to overwrite")
        if path.is_dir():
            shutil.rmtree(path)
        else:
            path.unlink()
    path.mkdir(parents=True, exist_ok=True)
    return path


def _claim_file(path: Path, force: bool) -> Path:
    if path.exists() and not force:
        raise OutputExists(f"{path} exists; pass --force to overwrite")
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _resolve_config(args):
    from . import config as C

    cfg = C.load(args.config) if getattr(args, "config", None) else C.RunConfig()
    overrides = {}
    for item in getattr(args, "set", None) or []:
        section, key, value = C.parse_override(item)
        overrides.setdefault(section, {})[key] = value
    if getattr(args, "output_dir", None):
        overrides.setdefault("run", {})["output_dir"] = args.output_dir
    if getattr(args, "seed", None) is not None:
        overrides.setdefault("run", {})["model_seed"] = args.seed
    return cfg.with_overrides(overrides) if overrides else cfg


def _prepare_data(cfg):
    """Corpora plus a config whose vocabulary sizes match the data."""
    from .analysis import build_corpora
    from .errors import ConfigError

    train, test, vocab = build_corpora(cfg.data)
    if cfg.data.uses_files:
        n = len(vocab)
        if (cfg.model.src_vocab, cfg.model.tgt_vocab) != (n, n):
            log.info("setting model vocabulary sizes to %d from the training files", n)
            cfg = cfg.with_overrides({"model": {"src_vocab": n, "tgt_vocab": n}})
    elif (cfg.model.src_vocab, cfg.model.tgt_vocab) != (cfg.data.vocab_size,) * 2:
        raise ConfigError(f"model vocabularies ({cfg.model.src_vocab}, {cfg.model.tgt_vocab}) "
                          f"differ from data vocab_size {cfg.data.vocab_size}")
    need = train.max_length()
    if need > cfg.model.max_len:
        raise ConfigError(f"training pairs need {need} positions but model max_len is {cfg.model.max_len}")
    return cfg, train, test, vocab


# ---------------------------------------------------------------- commands


def cmd_train(args) -> int:
    from .analysis import evaluate, train_run

    cfg, train, test, vocab = _prepare_data(_resolve_config(args))
    out = _claim_dir(Path(cfg.run.output_dir), args.force)
    cfg.save(out / "resolved.cfg")
    trainer = train_run(cfg, train, out, vocab)
    with open(out / "loss_log.csv", "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["step", "lr", "nll_pri", "nll_aux", "cr", "total"])
        for r in trainer.log_rows:
            w.writerow([r.step, repr(r.lr), repr(r.nll_pri), repr(r.nll_aux), repr(r.cr), repr(r.total)])
    summary = {"steps": trainer.step, "final_total": trainer.history[-1].total if trainer.history else None,
               "skipped_pairs": trainer.batch_stats.skipped}
    if test is not None and args.eval:
        summary["eval"] = {v: evaluate(trainer.model, v, test, cfg.run.metric) for v in trainer.model.views}
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    print(json.dumps(summary))
    return 0


def _load_vocab(ckpt, path: Optional[str]):
    from .data import Vocabulary
    from .errors import ConfigError

    if path:
        return Vocabulary.load(path)
    vocab = ckpt.vocabulary()
    if vocab is None:
        raise ConfigError("checkpoint carries no vocabulary; pass --vocab")
    return vocab


def cmd_decode(args) -> int:
    from .checkpoint import load_checkpoint
    from .data import read_lines
    from .decoding import DecodeConfig, beam_search, greedy_decode_batch
    from .model import NoiseSpec

    ckpt = load_checkpoint(args.ckpt)
    model = ckpt.to_model()
    vocab = _load_vocab(ckpt, args.vocab)
    sources = [vocab.encode(line) for line in read_lines(args.input)]
    out_path = _claim_file(Path(args.output or f"{args.input}.{args.view}.hyp"), args.force)
    noise = NoiseSpec(args.noise_eps, args.noise_seed) if args.noise_eps else None
    results: List[List[int]] = [[] for _ in sources]
    nonempty = [i for i, s in enumerate(sources) if s]
    if args.beam == 1:
        outs = greedy_decode_batch(model, args.view, [sources[i] for i in nonempty], args.max_out_len, noise)
    else:
        cfg = DecodeConfig(args.view, args.beam, args.max_out_len, args.length_penalty)
        outs = [beam_search(model, args.view, sources[i], cfg, noise)[0] for i in nonempty]
    for i, o in zip(nonempty, outs):
        results[i] = o
    text = "".join(" ".join(vocab.decode(o)) + "\n" for o in results)
    out_path.write_text(text, encoding="utf-8")
    print(json.dumps({"output": str(out_path), "lines": len(results)}))
    return 0


def cmd_eval_bleu(args) -> int:
    from .bleu import corpus_bleu
    from .data import read_lines

    report = corpus_bleu(read_lines(args.hyp), read_lines(args.ref))
    print(json.dumps({"bleu": report.bleu, "precisions": report.precisions,
                      "brevity_penalty": report.brevity_penalty,
                      "hyp_len": report.hyp_len, "ref_len": report.ref_len}) if args.json else str(report))
    return 0


def _floats(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _test_corpus(args, cfg, vocab=None):
    from .analysis import build_corpora
    from .data import load_parallel_corpus

    if getattr(args, "test_src", None):
        return load_parallel_corpus(args.test_src, args.test_tgt, vocab)[0]
    return build_corpora(cfg.data, vocab)[1]


def cmd_noise_sweep(args) -> int:
    from .analysis import NoiseSweepConfig, run_noise_sweep
    from .checkpoint import load_checkpoint

    cfg = _resolve_config(args)
    out = _claim_file(Path(args.output), args.force)
    vocab = load_checkpoint(args.ckpt[0]).vocabulary() if args.test_src else None
    test = _test_corpus(args, cfg, vocab)
    views = tuple(args.views.split(",")) if args.views else None
    res = run_noise_sweep(args.ckpt, args.eps, test, NoiseSweepConfig(args.noise_seed, cfg.run.metric, views))
    res.to_csv(out)
    print(json.dumps({"output": str(out), "rows": len(res.rows)}))
    return 0


def cmd_sweep(args) -> int:
    from .analysis import run_sweep

    cfg, train, test, _ = _prepare_data(_resolve_config(args))
    out = _claim_dir(Path(cfg.run.output_dir), args.force)
    cfg.save(out / "resolved.cfg")
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    res = run_sweep(args.axis, values, cfg, corpora=(train, test), out_dir=out if args.keep_checkpoints else None)
    res.to_csv(out / "sweep.csv")
    print(json.dumps({"output": str(out / "sweep.csv"), "rows": len(res.rows)}))
    return 0


def cmd_layer_sim(args) -> int:
    from .analysis import SweepResult, config_digest, layer_similarity_profile
    from .checkpoint import load_checkpoint

    cfg = _resolve_config(args)
    out = _claim_file(Path(args.output), args.force)
    ckpt = load_checkpoint(args.ckpt)
    model = ckpt.to_model()
    test = _test_corpus(args, cfg, ckpt.vocabulary() if args.test_src else None)
    profile = layer_similarity_profile(model, test.src, normalize=not args.raw, pooling=args.pooling)
    res = SweepResult("layer")
    digest = config_digest(model.config.to_dict())
    for i, s in enumerate(profile):
        res.add(i, Path(args.ckpt).name, "encoder", float(s), cfg.run.model_seed, digest)
    res.to_csv(out)
    print(json.dumps({"output": str(out), "profile": [float(x) for x in profile]}))
    return 0


def cmd_seq_kd(args) -> int:
    from .analysis import run_seq_kd
    from .checkpoint import save_checkpoint

    cfg, train, test, vocab = _prepare_data(_resolve_config(args))
    out = _claim_dir(Path(cfg.run.output_dir), args.force)
    cfg.save(out / "resolved.cfg")
    student, distilled, res = run_seq_kd(args.teacher, cfg, train, args.beam, test)
    with open(out / "distilled.tgt", "w", encoding="utf-8") as f:
        for t in distilled.tgt:
            f.write(" ".join(vocab.decode(t, strip=False)) + "\n")
    save_checkpoint(student, None, out / "student.ckpt", vocab=vocab)
    res.to_csv(out / "seq_kd.csv")
    print(json.dumps({"output": str(out), "rows": len(res.rows)}))
    return 0


def cmd_strip(args) -> int:
    from .checkpoint import Checkpoint, load_checkpoint, write_checkpoint
    from .model import strip_to_view

    ckpt = load_checkpoint(args.ckpt)
    out = _claim_file(Path(args.output), args.force)
    stripped = strip_to_view(ckpt.to_model(), args.view)
    meta = dict(ckpt.metadata, stripped_from=str(args.ckpt), view=args.view)
    write_checkpoint(Checkpoint(stripped.config, stripped.state_dict(), ckpt.step, ckpt.rng_state, None,
                                ckpt.vocab, meta), out)
    print(json.dumps({"output": str(out), "parameters": stripped.num_parameters()}))
    return 0


def cmd_average(args) -> int:
    from .checkpoint import average_checkpoints, write_checkpoint
    from .errors import CheckpointError

    paths = list(args.inputs or [])
    if args.dir:
        found = sorted(Path(args.dir).glob("checkpoint*.ckpt"), key=lambda p: int(p.stem[len("checkpoint"):]))
        paths += [str(p) for p in found[-args.last:]]
    if not paths:
        raise CheckpointError("no checkpoints given")
    out = _claim_file(Path(args.output), args.force)
    write_checkpoint(average_checkpoints(paths), out)
    print(json.dumps({"output": str(out), "averaged": paths}))
    return 0


# ------------------------------------------------------------------ parser


def _add_run_opts(p: argparse.ArgumentParser, config_required: bool = False) -> None:
    p.add_argument("--config", required=config_required, help="run config (INI)")
    p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override one config key")
    p.add_argument("--output-dir", help="overrides [run] output_dir")
    p.add_argument("--seed", type=int, help="overrides [run] model_seed")
    p.add_argument("--force", action="store_true", help="overwrite existing outputs")


def _add_test_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--test-src", help="held-out sources (default: the config's toy test split)")
    p.add_argument("--test-tgt")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvnmt", description="Multi-view Transformer NMT toolkit")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("train", help="train a model")
    _add_run_opts(p)
    p.add_argument("--no-eval", dest="eval", action="store_false", help="skip held-out evaluation")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("decode", help="translate a file")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--view", choices=("primary", "auxiliary"), default="primary")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--vocab", help="vocabulary file (default: the one stored in the checkpoint)")
    p.add_argument("--beam", type=int, default=1)
    p.add_argument("--max-out-len", type=int, default=0)
    p.add_argument("--length-penalty", type=float, default=1.0)
    p.add_argument("--noise-eps", type=float, default=0.0)
    p.add_argument("--noise-seed", type=int, default=0)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("eval-bleu", help="corpus BLEU")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval_bleu)

    p = sub.add_parser("experiment", help="analysis experiments")
    exp = p.add_subparsers(dest="experiment", metavar="experiment")
    exp.required = True

    q = exp.add_parser("noise-sweep", help="accuracy under encoder noise")
    q.add_argument("--ckpt", nargs="+", required=True)
    q.add_argument("--eps", type=_floats, required=True, help="comma-separated noise stds, ascending")
    q.add_argument("--views", help="comma-separated views (default: all views of each model)")
    q.add_argument("--noise-seed", type=int, default=0)
    q.add_argument("--output", default="noise_sweep.csv")
    _add_run_opts(q)
    _add_test_opts(q)
    q.set_defaults(func=cmd_noise_sweep)

    q = exp.add_parser("sweep", help="train one model per hyperparameter value")
    q.add_argument("--axis", required=True, choices=("alpha", "aux_position", "dark_mode", "detach", "share_can"))
    q.add_argument("--values", required=True, help="comma-separated values")
    q.add_argument("--keep-checkpoints", action="store_true")
    _add_run_opts(q)
    q.set_defaults(func=cmd_sweep)

    q = exp.add_parser("layer-sim", help="encoder layer similarity profile")
    q.add_argument("--ckpt", required=True)
    q.add_argument("--pooling", choices=("token", "sentence"), default="token")
    q.add_argument("--raw", action="store_true", help="compare raw layer outputs (no standardization)")
    q.add_argument("--output", default="layer_sim.csv")
    _add_run_opts(q)
    _add_test_opts(q)
    q.set_defaults(func=cmd_layer_sim)

    q = exp.add_parser("seq-kd", help="sequence-level distillation from a teacher")
    q.add_argument("--teacher", required=True)
    q.add_argument("--beam", type=int, default=4)
    _add_run_opts(q)
    q.set_defaults(func=cmd_seq_kd)

    p = sub.add_parser("strip", help="keep only one view's parameters")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--view", choices=("primary", "auxiliary"), default="primary")
    p.add_argument("--output", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_strip)

    p = sub.add_parser("average-ckpt", help="average checkpoints")
    p.add_argument("--inputs", nargs="+")
    p.add_argument("--dir", help="take the last --last checkpoints from this training directory")
    p.add_argument("--last", type=int, default=5)
    p.add_argument("--output", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_average)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    level = os.environ.get("MVNMT_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except (MVNMTError, OSError, ValueError, KeyError) as e:
        kind = getattr(e, "kind", None) or type(e).__name__
        print(json.dumps({"error": kind, "message": str(e)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
