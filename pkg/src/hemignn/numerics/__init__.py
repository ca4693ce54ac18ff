"""Dense float64 linear algebra with reverse-mode differentiation.

Everything trainable in the package is built from the ops exported here;
their gradients are guaranteed by the finite-difference checker rather
than by construction, see `gradcheck`.
"""

from .rng import SeedFanout, named_stream
from .tensor import (
    Parameter,
    Tensor,
    add,
    clamped_log,
    constant,
    dropout,
    gather_rows,
    hadamard,
    matmul,
    mean_all,
    relu,
    row_sums,
    scale,
    shift,
    sigmoid,
    softmax_rows,
    sum_all,
    transpose,
    vstack,
)
from .optim import Adam
from .gradcheck import gradient_check

__all__ = [
    "Adam",
    "Parameter",
    "SeedFanout",
    "Tensor",
    "add",
    "clamped_log",
    "constant",
    "dropout",
    "gather_rows",
    "gradient_check",
    "hadamard",
    "matmul",
    "mean_all",
    "named_stream",
    "relu",
    "row_sums",
    "scale",
    "shift",
    "sigmoid",
    "softmax_rows",
    "sum_all",
    "transpose",
    "vstack",
]
