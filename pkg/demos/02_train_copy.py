"""Train a small multi-view model on the copy task and watch both views learn.

Takes a couple of minutes on one core.
"""

import logging

from mvnmt import LossConfig, ModelConfig, TrainConfig, Trainer, build_model, gen_toy_corpus
from mvnmt.decoding import greedy_decode_batch, token_accuracy

logging.basicConfig(level=logging.INFO, format="%(message)s")

train = gen_toy_corpus("copy", vocab_size=20, len_range=(3, 10), count=2000, seed=1)
test = gen_toy_corpus("copy", vocab_size=20, len_range=(3, 10), count=200, seed=2)
print("example pair:", train.src[0], "->", train.tgt[0])

# Four encoder layers; the auxiliary view taps layer 2.  alpha weights the
# KL term that keeps the two decoder streams in agreement.
cfg = ModelConfig(M=4, N=2, M_a=2, d_model=64, d_ffn=128, heads=4)
model = build_model(cfg, seed=1)
print(f"{sum(p.size for p in model.parameters())} parameters, views {model.views}")


def report(trainer, breakdown):
    if trainer.step % 250 == 0:
        accs = {v: token_accuracy(greedy_decode_batch(model, v, test.src), test.tgt) for v in model.views}
        print(f"step {trainer.step}: loss {breakdown.total:.3f}, cr {breakdown.cr:.4f}, accuracy {accs}")


Trainer(model, TrainConfig(max_updates=750, log_every=50), LossConfig(alpha=0.4)).fit(train, report)

for src in test.src[:3]:
    print(src, "->", greedy_decode_batch(model, "primary", [src])[0], "/",
          greedy_decode_batch(model, "auxiliary", [src])[0])
