from ..autodiff import ops
from ..autodiff.tensor import as_tensor
from ..data.sampling import normalize_adjacency
from .encoder import Encoder, glorot_uniform


def gcn_layer_forward(a_norm, h, w, activation=True):
    """
    One graph convolution, ReLU(A_norm H W), linear when activation is False

    :param a_norm: Normalized adjacency with self-loops (constant)
    :param h:      Node representations
    :param w:      Layer weight
    """
    out = ops.matmul(ops.matmul(as_tensor(a_norm), h), w)
    return ops.relu(out) if activation else out


class GCNEncoder(Encoder):
    """
    Stack of graph convolutions with a linear final layer
    """

    def _build_parameters(self, rng):
        self.weights = []
        for i, (d_in, d_out) in enumerate(self.config.layer_dims()):
            self.weights.append(self._add_parameter(
                'layer%d.W' % i,
                glorot_uniform(rng.split('layer%d' % i), d_in, d_out)))

    def node_representations(self, subgraph):
        h = as_tensor(self._check_input(subgraph))
        a_norm = normalize_adjacency(subgraph.adjacency)
        last = len(self.weights) - 1
        for i, w in enumerate(self.weights):
            h = self._bias(gcn_layer_forward(a_norm, h, w, activation=False), i)
            if i < last:
                h = ops.relu(h)
        return h
