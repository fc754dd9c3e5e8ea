"""A tour of the tape-based autodiff engine the model is built on."""

import numpy as np

from mvnmt import autograd as ag
from mvnmt.autograd import Tensor
from mvnmt.gradcheck import check_gradients

rng = np.random.default_rng(0)

# Tensors are thin wrappers around numpy arrays.  Anything marked
# requires_grad gets a .grad after backward().
x = Tensor(rng.standard_normal((2, 3)), requires_grad=True, dtype=np.float64)
w = Tensor(rng.standard_normal((3, 4)), requires_grad=True, dtype=np.float64)

loss = ag.sum_(ag.softmax(ag.matmul(x, w)) * ag.matmul(x, w))
loss.backward()
print("loss", loss.item())
print("dL/dw\n", np.round(w.grad, 4))

# Central finite differences agree with the tape to about 1e-9 at float64.
errors = check_gradients(lambda: ag.sum_(ag.softmax(ag.matmul(x, w)) * ag.matmul(x, w)), [x, w])
print("relative errors per parameter:", {k: f"{v:.1e}" for k, v in errors.items()})

# Layer norm accepts an additive noise term on the normalized value; this is
# the hook the robustness experiments use.
g = Tensor(np.ones(4), requires_grad=True, dtype=np.float64)
b = Tensor(np.zeros(4), requires_grad=True, dtype=np.float64)
h = ag.layer_norm(ag.matmul(x, w), g, b, noise=0.1 * rng.standard_normal((2, 4)))
print("noisy layer norm rows have mean", np.round(h.data.mean(-1), 3))

# Inside no_grad() nothing is recorded, which is how decoding runs.
with ag.no_grad():
    y = ag.matmul(x, w)
print("recorded under no_grad:", y.requires_grad)
