import numpy as np

from ..autodiff.rng import Rng
from ..config import ConfigObject
from ..errors import ConfigError, MissingDataError, TooSmallError
from .graph import NodeSplit, Subgraph

SAMPLING_METHODS = ('khop', 'rw')
READOUTS = ('mean', 'center')


class SamplerConfig(ConfigObject):
    """
    How subgraphs are cut out of a graph around their center node.

    split_seed seeds both the node splits and the random-walk sampler.
    """

    FIELDS = (
        ('method', 'khop'),
        ('k', 2),
        ('max_nodes', 32),
        ('walk_len', 16),
        ('n_walks', 4),
        ('restart_p', 0.2),
        ('pe_dim', 4),
        ('split_seed', 0),
        ('readout', 'mean'),
    )

    def validate(self):
        if self.method not in SAMPLING_METHODS:
            raise ConfigError("Unknown sampling method %s" % self.method,
                              field='method')
        if self.readout not in READOUTS:
            raise ConfigError("Unknown readout %s" % self.readout,
                              field='readout')
        for name, low in (('k', 0), ('max_nodes', 1), ('walk_len', 1),
                          ('n_walks', 1), ('pe_dim', 1), ('split_seed', 0)):
            if int(getattr(self, name)) < low:
                raise ConfigError("%s must be >= %d" % (name, low), field=name)
        if not 0.0 <= float(self.restart_p) < 1.0:
            raise ConfigError("restart_p must lie in [0, 1)", field='restart_p')

    @classmethod
    def from_settings(cls, settings):
        """
        Builds the sampler defaults from the [SAMPLER] section of LabSettings
        """
        return cls(method=settings.lookup('SAMPLER', 'method'),
                   k=settings.get_int('SAMPLER', 'k'),
                   max_nodes=settings.get_int('SAMPLER', 'max_nodes'),
                   walk_len=settings.get_int('SAMPLER', 'walk_len'),
                   n_walks=settings.get_int('SAMPLER', 'n_walks'),
                   restart_p=settings.get_float('SAMPLER', 'restart_p'),
                   pe_dim=settings.get_int('SAMPLER', 'pe_dim'),
                   split_seed=settings.get_int('SAMPLER', 'split_seed'),
                   readout=settings.lookup('SAMPLER', 'readout'))


def split_nodes(graph, seed):
    """
    Random 60/10/30 split of the nodes of graph.

    val and test get floor(n/10) and floor(3n/10) nodes, train the rest.

    :param graph: Any graph exposing node_count and graph_id
    :param seed:  Split seed
    :returns:     A NodeSplit with ascending id arrays
    """
    n = graph.node_count
    if n < 10:
        raise TooSmallError("Graph %s has %d nodes, at least 10 are needed "
                            "for a split" % (graph.graph_id, n))
    perm = Rng(seed).split('split/%s' % graph.graph_id).permutation(n)
    n_val = n // 10
    n_test = (3 * n) // 10
    n_train = n - n_val - n_test
    return NodeSplit(np.sort(perm[:n_train]),
                     np.sort(perm[n_train:n_train + n_val]),
                     np.sort(perm[n_train + n_val:]))


def induced_adjacency(graph, node_ids):
    """
    Local binary adjacency of graph restricted to node_ids (in that order)
    """
    index = dict((int(u), i) for i, u in enumerate(node_ids))
    a = np.zeros((len(node_ids), len(node_ids)))
    for i, u in enumerate(node_ids):
        for w in graph.neighbors(u):
            j = index.get(int(w))
            if j is not None:
                a[i, j] = 1.0
    return a


def compute_positional_encodings(adjacency, r):
    """
    Random-walk positional encodings: column t-1 holds the diagonal of
    (D^-1 A)^t, the probability of returning after t steps.

    :param adjacency: Local binary adjacency matrix
    :param r:         Number of walk lengths
    :returns:         |V| x r matrix, zero rows for isolated nodes
    """
    if r < 1:
        raise ConfigError("Positional encoding needs r >= 1", field='pe_dim')
    a = np.asarray(adjacency, dtype=np.float64)
    deg = a.sum(axis=1)
    transition = np.zeros_like(a)
    nz = deg > 0
    transition[nz] = a[nz] / deg[nz, None]

    pe = np.zeros((a.shape[0], r))
    power = np.eye(a.shape[0])
    for t in range(r):
        power = power @ transition
        pe[:, t] = np.diag(power)
    return pe


def normalize_adjacency(adjacency):
    """
    Symmetric normalization with self-loops, D^-1/2 (A + I) D^-1/2
    """
    a_hat = np.asarray(adjacency, dtype=np.float64) + np.eye(len(adjacency))
    d_inv_sqrt = 1.0 / np.sqrt(a_hat.sum(axis=1))
    return d_inv_sqrt[:, None] * a_hat * d_inv_sqrt[None, :]


def _make_subgraph(graph, center, node_ids, pe_dim):
    if graph.features is None:
        raise MissingDataError("Graph %s has no features; featurize it with "
                               "the text encoder first" % graph.graph_id)
    node_ids = np.asarray(node_ids, dtype=np.int64)
    adjacency = induced_adjacency(graph, node_ids)
    return Subgraph(graph.graph_id, center, node_ids,
                    graph.features[node_ids], adjacency,
                    compute_positional_encodings(adjacency, pe_dim))


def khop_node_ids(graph, v, k, max_nodes=None):
    """
    Nodes within k hops of v, ordered by (BFS depth, node id)
    """
    depth = {int(v): 0}
    frontier = [int(v)]
    for d in range(1, k + 1):
        nxt = set()
        for u in frontier:
            for w in graph.neighbors(u):
                w = int(w)
                if w not in depth:
                    nxt.add(w)
        for w in nxt:
            depth[w] = d
        frontier = sorted(nxt)
        if not frontier:
            break
    ordered = sorted(depth, key=lambda u: (depth[u], u))
    if max_nodes is not None:
        ordered = ordered[:max_nodes]
    return ordered


def extract_khop_subgraph(graph, v, k, max_nodes, pe_dim=4):
    """
    Induced k-hop subgraph around v, truncated to max_nodes keeping the
    shallowest nodes first and lower ids on ties.
    """
    if k < 0:
        raise ConfigError("k must be >= 0", field='k')
    return _make_subgraph(graph, v, khop_node_ids(graph, v, k, max_nodes),
                          pe_dim)


def sample_rw_subgraph(graph, v, walk_len, n_walks, restart_p, seed,
                       pe_dim=4):
    """
    Induced subgraph over the nodes visited by n_walks random walks with
    restart from v.

    :param seed: int or Rng driving the walks
    """
    if walk_len < 1 or n_walks < 1 or not 0.0 <= restart_p < 1.0:
        raise ConfigError("Random walk needs walk_len >= 1, n_walks >= 1 "
                          "and restart_p in [0, 1)")
    rng = seed if isinstance(seed, Rng) else Rng(seed)
    v = int(v)
    visited = [v]
    seen = set(visited)
    if len(graph.neighbors(v)):
        for _ in range(n_walks):
            current = v
            for _ in range(walk_len):
                if restart_p > 0 and rng.random() < restart_p:
                    current = v
                    continue
                nbrs = graph.neighbors(current)
                current = int(nbrs[rng.integers(len(nbrs))])
                if current not in seen:
                    seen.add(current)
                    visited.append(current)
    return _make_subgraph(graph, v, visited, pe_dim)


def sample_subgraph(graph, v, config):
    """
    Subgraph around v as configured by the SamplerConfig config
    """
    if config.method == 'khop':
        return extract_khop_subgraph(graph, v, config.k, config.max_nodes,
                                     config.pe_dim)
    rng = Rng(config.split_seed).split('rw/%s/%d' % (graph.graph_id, v))
    return sample_rw_subgraph(graph, v, config.walk_len, config.n_walks,
                              config.restart_p, rng, config.pe_dim)
