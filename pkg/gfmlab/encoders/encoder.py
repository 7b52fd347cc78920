import hashlib
import json
import logging
from collections import OrderedDict

import numpy as np

from ..autodiff import ops
from ..autodiff.rng import Rng
from ..autodiff.tensor import Tensor
from ..config import ConfigObject
from ..errors import ConfigError, DegenerateEmbeddingError, \
    DegenerateInputError, DimensionError

CHECKPOINT_FORMAT = 'gfmlab-encoder-1'
FAMILIES = ('gcn', 'gat')


class EncoderConfig(ConfigObject):
    """
    Architecture of a graph encoder.

    input_dim is the text-embedding dimension plus the positional-encoding
    width, output_dim the text-embedding dimension.
    """

    FIELDS = (
        ('family', 'gcn'),
        ('layers', 2),
        ('hidden_dim', 32),
        ('heads', 1),
        ('input_dim', 36),
        ('output_dim', 32),
        ('init_seed', 0),
        ('bias', False),
        ('readout', 'mean'),
    )

    def validate(self):
        if self.family not in FAMILIES:
            raise ConfigError("Unknown encoder family %s" % self.family,
                              field='family')
        for name in ('layers', 'hidden_dim', 'heads', 'input_dim',
                     'output_dim'):
            if int(getattr(self, name)) < 1:
                raise ConfigError("%s must be >= 1" % name, field=name)
        if self.readout not in ('mean', 'center'):
            raise ConfigError("Unknown readout %s" % self.readout,
                              field='readout')
        if self.family == 'gat':
            for name in ('hidden_dim', 'output_dim'):
                if getattr(self, name) % self.heads:
                    raise ConfigError("%s %d is not divisible by %d heads" %
                                      (name, getattr(self, name), self.heads),
                                      field=name)

    def layer_dims(self):
        """
        (in, out) widths of every layer
        """
        dims = [self.input_dim] + [self.hidden_dim] * (self.layers - 1) + \
            [self.output_dim]
        return list(zip(dims[:-1], dims[1:]))


def default_victim_config(input_dim=36, output_dim=32, init_seed=0):
    return EncoderConfig(family='gat', layers=3, hidden_dim=96, heads=4,
                         input_dim=input_dim, output_dim=output_dim,
                         init_seed=init_seed)


def default_attacker_config(family='gcn', input_dim=36, output_dim=32,
                            init_seed=0):
    if family == 'gat':
        return EncoderConfig(family='gat', layers=2, hidden_dim=32, heads=2,
                             input_dim=input_dim, output_dim=output_dim,
                             init_seed=init_seed)
    return EncoderConfig(family=family, layers=2, hidden_dim=32,
                         input_dim=input_dim, output_dim=output_dim,
                         init_seed=init_seed)


def glorot_uniform(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class Encoder(object):
    """
    Base class of the trainable graph encoders.

    Subclasses create their weights in _build_parameters() and implement
    node_representations(), the stack of message-passing layers.

    :ivar config:     The EncoderConfig
    :ivar parameters: List of requires_grad Tensors, in a fixed order
    """

    def __init__(self, config):
        self.config = EncoderConfig.from_dict(config)
        self.parameters = []
        self.log = logging.getLogger('gfmlab.encoders')
        rng = Rng(self.config.init_seed)
        self._build_parameters(rng)
        self.biases = []
        if self.config.bias:
            for i, (_, d_out) in enumerate(self.config.layer_dims()):
                self.biases.append(self._add_parameter(
                    'layer%d.bias' % i, np.zeros((1, d_out))))

    def _add_parameter(self, name, value):
        t = Tensor(value, requires_grad=True, name=name)
        self.parameters.append(t)
        return t

    def _build_parameters(self, rng):
        raise NotImplementedError()

    def node_representations(self, subgraph):
        """
        :returns: Tensor with one output row per subgraph node
        """
        raise NotImplementedError()

    def _bias(self, h, layer):
        if self.biases:
            return ops.add(h, self.biases[layer])
        return h

    def _check_input(self, subgraph):
        x = subgraph.input_matrix()
        if x.shape[1] != self.config.input_dim:
            raise DimensionError("Encoder expects %d input columns, subgraph "
                                 "of %s provides %d" %
                                 (self.config.input_dim, subgraph.graph_id,
                                  x.shape[1]))
        if x.shape[0] == 0:
            raise DimensionError("Cannot encode an empty subgraph")
        return x

    def encode_tensor(self, subgraph):
        """
        Differentiable embedding of subgraph as a 1 x d Tensor of unit norm
        """
        h = self.node_representations(subgraph)
        if self.config.readout == 'center':
            pooled = ops.gather_rows(h, [subgraph.center_index])
        else:
            pooled = ops.mean_rows(h)
        try:
            return ops.l2_normalize_rows(pooled)
        except DegenerateInputError:
            raise DegenerateEmbeddingError(
                "Subgraph around node %d of %s pools to the zero vector" %
                (subgraph.center, subgraph.graph_id))

    def encode_batch(self, subgraphs):
        """
        Differentiable N x d embedding matrix of a list of subgraphs
        """
        return ops.concat_rows(*[self.encode_tensor(s) for s in subgraphs])

    def encode_subgraph(self, subgraph):
        """
        :returns: unit-norm numpy d-vector
        """
        return self.encode_tensor(subgraph).data[0].copy()

    def encode_many(self, subgraphs):
        if not subgraphs:
            return np.zeros((0, self.config.output_dim))
        return np.stack([self.encode_subgraph(s) for s in subgraphs])

    def count_parameters(self):
        return int(sum(p.data.size for p in self.parameters))

    def parameter_vector(self):
        return np.concatenate([p.data.reshape(-1) for p in self.parameters])

    def set_parameter_vector(self, vector):
        vector = np.asarray(vector, dtype=np.float64)
        if vector.size != self.count_parameters():
            raise DimensionError("Expected %d parameters, got %d" %
                                 (self.count_parameters(), vector.size))
        offset = 0
        for p in self.parameters:
            size = p.data.size
            p.data[...] = vector[offset:offset + size].reshape(p.data.shape)
            offset += size

    def zero_grad(self):
        for p in self.parameters:
            p.zero_grad()

    def parameter_hash(self):
        return hashlib.sha256(
            self.parameter_vector().astype('<f8').tobytes()).hexdigest()

    def to_bytes(self):
        """
        Checkpoint: one JSON header line followed by the little-endian f64
        parameter blob
        """
        header = OrderedDict()
        header['format'] = CHECKPOINT_FORMAT
        header['config'] = self.config.dictify()
        header['n_params'] = self.count_parameters()
        return (json.dumps(header, sort_keys=True).encode('utf-8') + b'\n' +
                self.parameter_vector().astype('<f8').tobytes())

    def save(self, path):
        with open(path, 'wb') as f:
            f.write(self.to_bytes())

    def __repr__(self):
        c = self.config
        return "%s(layers=%d, hidden=%d, heads=%d, params=%d)" % (
            self.__class__.__name__, c.layers, c.hidden_dim, c.heads,
            self.count_parameters())
