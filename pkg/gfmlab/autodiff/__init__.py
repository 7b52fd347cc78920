from .rng import Rng, fnv1a64
from .tensor import Tensor, ComputeTape, backward, as_tensor
from .ops import op_apply, OPS
from .gradcheck import gradient_check
