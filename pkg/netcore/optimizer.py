"""
SGD с моментом и weight decay:
  v <- momentum * v + grad + weight_decay * w
  w <- w - lr * v
Тензоры, до которых не дошёл ни один член лосса, не обновляются
(ни веса, ни буфер момента).
"""

from netcore.graph import Gradients
from netcore.params import ModelParams


def sgd_step(params: ModelParams, grads: Gradients, lr: float, momentum: float = 0.9,
             weight_decay: float = 1e-4) -> None:
    for name in sorted(grads.touched):
        w = params.tensors[name]
        g = grads.values[name]
        if g.shape != w.shape:
            raise ValueError(f"Gradient shape {g.shape} does not match tensor {name} {w.shape}")
        v = params.momentum[name]
        v *= momentum
        v += g + weight_decay * w
        w -= lr * v
