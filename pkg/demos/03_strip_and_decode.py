"""Either view can serve alone: strip the other one away and nothing changes."""

import numpy as np

from mvnmt import ModelConfig, build_model, strip_to_view
from mvnmt.decoding import DecodeConfig, beam_search, greedy_decode
from mvnmt.model import forward_logits

# Untrained weights are enough here: the point is equality, not quality.
model = build_model(ModelConfig(M=4, M_a=2), seed=3)
full = sum(p.size for p in model.parameters())

for view in ("primary", "auxiliary"):
    small = strip_to_view(model, view)
    kept = sum(p.size for p in small.parameters())
    print(f"{view}: keeps {kept} of {full} parameters ({small.config.M} encoder layers)")

    src = [5, 9, 4, 12, 7]
    out = greedy_decode(model, view, src, 8)
    assert out == greedy_decode(small, view, src, 8)
    # The per-step logits are bitwise equal, not merely close.
    tgt_in = np.array([[1] + out])
    same = np.array_equal(forward_logits(model, view, np.array([src]), tgt_in).data,
                          forward_logits(small, view, np.array([src]), tgt_in).data)
    print(f"  greedy {out}; logits identical: {same}")
    print(f"  beam 4 {beam_search(small, view, src, DecodeConfig(view, beam_size=4, max_out_len=8))}")
