"""Decoding, scoring and saving: beam search, BLEU, ensembles, averaging."""

import tempfile
from pathlib import Path

from mvnmt import (LossConfig, ModelConfig, TrainConfig, Trainer, average_checkpoints, build_model,
                   corpus_bleu, ensemble_decode, gen_toy_corpus, load_checkpoint)
from mvnmt.decoding import DecodeConfig, beam_search, greedy_decode

# BLEU on whitespace tokens.  One missing word costs only the brevity penalty.
print(corpus_bleu(["a b c d"], ["a b c d e"]))

train = gen_toy_corpus("reverse", 16, (3, 8), 800, seed=1)
out = Path(tempfile.mkdtemp())
model = build_model(ModelConfig(M=2, N=1, M_a=1, d_model=32, d_ffn=64, heads=2, src_vocab=16, tgt_vocab=16), seed=1)
trainer = Trainer(model, TrainConfig(max_updates=200, checkpoint_every=50, log_every=0), LossConfig(), out_dir=out)
trainer.fit(train)
print("checkpoints:", [p.name for p in trainer.checkpoints])

src = [4, 9, 13, 6, 11]
print("greedy:", greedy_decode(model, "primary", src))
for k in (1, 2, 4):
    tokens, score = beam_search(model, "primary", src, DecodeConfig("primary", beam_size=k))
    print(f"beam {k}: {tokens} (length-normalized log prob {score:.3f})")

# Loading verifies a checksum; averaging the last few checkpoints is a cheap ensemble.
avg = average_checkpoints(trainer.checkpoints[-3:]).to_model()
first = load_checkpoint(trainer.checkpoints[0]).to_model()
print("averaged:", greedy_decode(avg, "primary", src))
print("ensemble of first and last, both views:",
      ensemble_decode([first, model], ["primary", "auxiliary"], src, DecodeConfig(beam_size=2)))
