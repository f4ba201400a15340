"""
Checking backpropagation through time
=====================================

Compare the hand-written gradients of every model with central finite
differences on small random networks.
"""

import numpy as np

from chronocast.models import init_params, loss_and_grads
from chronocast.nn import grad_check

rng = np.random.default_rng(0)
for kind in ("lstm", "gru", "fnn"):
    worst = []
    for seed in range(10):
        params = init_params(kind, f=2, hidden=3, seed=seed, window=5)
        for k in params:
            if k.startswith("b_"):
                params[k] = rng.uniform(-0.5, 0.5, params[k].shape)
        x, y = rng.uniform(size=(5, 2)), rng.uniform()
        _, grads = loss_and_grads(kind, x, y, params, length=5)
        worst.append(grad_check(lambda p: loss_and_grads(kind, x, y, p, length=5)[0], grads, params))
    # gradient entries near 1e-8 are dominated by finite-difference roundoff,
    # so an occasional worst case sits a little above 1e-6
    print(f"{kind}: median {np.median(worst):.2e}, worst {max(worst):.2e} relative error over 10 networks")

# one block in detail
params = init_params("lstm", 2, 3, seed=3, window=5)
x, y = rng.uniform(size=(5, 2)), 0.7
_, grads = loss_and_grads("lstm", x, y, params, length=5)
print("\ndL/dU_f for one LSTM:\n", np.array2string(grads["U_f"], precision=5))
