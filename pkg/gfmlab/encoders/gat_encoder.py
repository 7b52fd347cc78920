import numpy as np

from ..autodiff import ops
from ..autodiff.tensor import as_tensor
from .encoder import Encoder, glorot_uniform

LEAKY_SLOPE = 0.2
MASK_VALUE = -1e9


def attention_mask(adjacency):
    """
    Additive mask: 0 on edges and self-loops, a large negative value elsewhere
    """
    a = np.asarray(adjacency) + np.eye(len(adjacency))
    return np.where(a > 0, 0.0, MASK_VALUE)


def gat_head_forward(mask, h, w, a_src, a_dst):
    """
    One attention head: e_vu = LeakyReLU(a_src^T W h_v + a_dst^T W h_u)
    normalized by softmax over N(v) and v, returns sum_u alpha_vu W h_u
    """
    wh = ops.matmul(h, w)
    n = wh.shape[0]
    s_src = ops.matmul(wh, a_src)
    s_dst = ops.matmul(wh, a_dst)
    scores = ops.add(ops.matmul(s_src, as_tensor(np.ones((1, n)))),
                     ops.matmul(as_tensor(np.ones((n, 1))),
                                ops.transpose(s_dst)))
    scores = ops.add(ops.leaky_relu(scores, LEAKY_SLOPE), as_tensor(mask))
    alpha = ops.softmax_rows(scores)
    return ops.matmul(alpha, wh)


def gat_layer_forward(adjacency, h, heads, activation=True):
    """
    Multi-head attention layer, head outputs concatenated

    :param heads: list of (W, a_src, a_dst) per head
    """
    mask = attention_mask(adjacency)
    outs = [gat_head_forward(mask, h, w, a_src, a_dst)
            for w, a_src, a_dst in heads]
    out = outs[0] if len(outs) == 1 else ops.concat_cols(*outs)
    return ops.relu(out) if activation else out


class GATEncoder(Encoder):
    """
    Graph attention encoder. Every layer has config.heads heads of width
    out/heads, a weight matrix and two attention vectors each.
    """

    def _build_parameters(self, rng):
        self.attention_layers = []
        heads = self.config.heads
        for i, (d_in, d_out) in enumerate(self.config.layer_dims()):
            width = d_out // heads
            layer = []
            for k in range(heads):
                r = rng.split('layer%d/head%d' % (i, k))
                prefix = 'layer%d.head%d' % (i, k)
                w = self._add_parameter(prefix + '.W',
                                        glorot_uniform(r.split('W'), d_in,
                                                       width))
                a_src = self._add_parameter(prefix + '.a_src',
                                            glorot_uniform(r.split('a_src'),
                                                           width, 1))
                a_dst = self._add_parameter(prefix + '.a_dst',
                                            glorot_uniform(r.split('a_dst'),
                                                           width, 1))
                layer.append((w, a_src, a_dst))
            self.attention_layers.append(layer)

    def node_representations(self, subgraph):
        h = as_tensor(self._check_input(subgraph))
        last = len(self.attention_layers) - 1
        for i, layer in enumerate(self.attention_layers):
            h = self._bias(gat_layer_forward(subgraph.adjacency, h, layer,
                                             activation=False), i)
            if i < last:
                h = ops.relu(h)
        return h
