"""How similar is each encoder layer to the top one?"""

import numpy as np

from mvnmt import LossConfig, ModelConfig, TrainConfig, Trainer, build_model, gen_toy_corpus
from mvnmt.analysis import layer_similarity_profile, profile_trend

train = gen_toy_corpus("copy", 20, (3, 10), 1000, seed=1)
probe = gen_toy_corpus("copy", 20, (3, 10), 100, seed=2).src

model = build_model(ModelConfig(M=6, M_a=3), seed=1)
print("untrained:", np.round(layer_similarity_profile(model, probe), 3))

Trainer(model, TrainConfig(max_updates=300, log_every=0), LossConfig()).fit(train)
profile = layer_similarity_profile(model, probe)
# Index 0 is the embedding layer, the last entry is the top layer itself.
print("trained:  ", np.round(profile, 3))
print("spearman rank correlation with depth:", profile_trend(profile))
print("sentence pooling:", np.round(layer_similarity_profile(model, probe, pooling="sentence"), 3))
