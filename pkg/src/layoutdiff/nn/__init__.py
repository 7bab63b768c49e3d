"""Self-contained differentiable kernel backing the layout matcher.

Dense 64-bit tensors with reverse-mode gradients, the layer set the
matcher architecture needs, Sinkhorn normalization, an optimal-assignment
solver, the matching loss, Adam, model serialization and a
finite-difference gradient checker.
"""

from .tensor import Tensor, NonFiniteError, concat, gather_rows, segment_sum
from .layers import linear, relu, softmax, attention_pool, gconv_intra, gconv_cross
from .sinkhorn import sinkhorn
from .assignment import hungarian
from .loss import perm_xent_loss
from .optim import Adam, adam_step
from .model import Parameter, Model, DEFAULT_HYPER
from .gradcheck import gradcheck, run_gradcheck_suite

__all__ = [
    "Tensor",
    "NonFiniteError",
    "concat",
    "gather_rows",
    "segment_sum",
    "linear",
    "relu",
    "softmax",
    "attention_pool",
    "gconv_intra",
    "gconv_cross",
    "sinkhorn",
    "hungarian",
    "perm_xent_loss",
    "Adam",
    "adam_step",
    "Parameter",
    "Model",
    "DEFAULT_HYPER",
    "gradcheck",
    "run_gradcheck_suite",
]
