from collections import OrderedDict

import numpy as np

from ..errors import ConfigError, ContractError, DimensionError

ROLES = ('pretrain', 'eval', 'extra')


class TextAttributedGraph(object):
    """
    A text-attributed graph: nodes carrying raw texts, dense features,
    labels, and one label sentence per class.

    :ivar graph_id:        Unique id of the graph
    :ivar domain:          Domain tag, e.g. 'academic'
    :ivar role:            One of pretrain, eval, extra
    :ivar node_count:      Number of nodes n
    :ivar edges:           (m, 2) int array of undirected edges, u < v, sorted
    :ivar texts:           n raw node texts
    :ivar labels:          n class indices in [0, K)
    :ivar label_sentences: K label sentences
    :ivar features:        n x d feature matrix, None until featurized
    """

    def __init__(self, graph_id, domain, node_count, edges, texts, labels,
                 label_sentences, role='pretrain', features=None):
        self.graph_id = graph_id
        self.domain = domain
        self.role = role
        self.node_count = int(node_count)
        self.edges = self._canonical_edges(edges)
        self.texts = list(texts)
        self.labels = np.asarray(labels, dtype=np.int64)
        self.label_sentences = list(label_sentences)
        self.features = None
        self._neighbors = None
        self.validate()
        if features is not None:
            self.set_features(features)

    def _canonical_edges(self, edges):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size == 0:
            return np.zeros((0, 2), dtype=np.int64)
        if np.any(edges[:, 0] == edges[:, 1]):
            raise ContractError("Graph %s: self-loops are not stored" %
                                self.graph_id)
        edges = np.sort(edges, axis=1)
        return np.unique(edges, axis=0)

    def validate(self):
        n = self.node_count
        if self.role not in ROLES:
            raise ConfigError("Graph %s: unknown role %s" %
                              (self.graph_id, self.role), field='role')
        if len(self.texts) != n or len(self.labels) != n:
            raise ContractError("Graph %s: expected %d texts and labels" %
                                (self.graph_id, n))
        if self.edges.size and (self.edges.min() < 0 or self.edges.max() >= n):
            raise ContractError("Graph %s: edge endpoint out of range" %
                                self.graph_id)
        for v, text in enumerate(self.texts):
            if not text or not text.strip():
                raise ContractError("Graph %s: node %d has empty text" %
                                    (self.graph_id, v))
        k = len(self.label_sentences)
        if n and (self.labels.min() < 0 or self.labels.max() >= k):
            raise ContractError("Graph %s: labels must lie in [0, %d)" %
                                (self.graph_id, k))

    @property
    def class_count(self):
        return len(self.label_sentences)

    @property
    def edge_count(self):
        return len(self.edges)

    def _build_neighbors(self):
        buckets = [[] for _ in range(self.node_count)]
        for u, v in self.edges:
            buckets[u].append(v)
            buckets[v].append(u)
        self._neighbors = [np.array(sorted(b), dtype=np.int64) for b in buckets]

    def neighbors(self, v):
        """
        Returns the neighbors of v in ascending order
        """
        if self._neighbors is None:
            self._build_neighbors()
        return self._neighbors[v]

    def degree(self, v):
        return len(self.neighbors(v))

    def adjacency_matrix(self):
        a = np.zeros((self.node_count, self.node_count))
        if self.edges.size:
            a[self.edges[:, 0], self.edges[:, 1]] = 1.0
            a[self.edges[:, 1], self.edges[:, 0]] = 1.0
        return a

    def set_features(self, features):
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[0] != self.node_count:
            raise DimensionError("Graph %s: features of shape %s for %d nodes" %
                                 (self.graph_id, features.shape,
                                  self.node_count))
        self.features = features

    def edge_homophily(self):
        """
        Fraction of edges joining nodes of the same class
        """
        if not self.edge_count:
            return float('nan')
        same = self.labels[self.edges[:, 0]] == self.labels[self.edges[:, 1]]
        return float(same.mean())

    def dictify(self):
        """
        Returns the graph in its on-disk JSON layout (features excluded)
        """
        d = OrderedDict()
        d['graph_id'] = self.graph_id
        d['domain'] = self.domain
        d['n'] = self.node_count
        d['edges'] = self.edges.tolist()
        d['texts'] = self.texts
        d['labels'] = self.labels.tolist()
        d['label_sentences'] = self.label_sentences
        return d

    @classmethod
    def from_dict(cls, d, role='pretrain'):
        try:
            return cls(d['graph_id'], d['domain'], d['n'], d['edges'],
                       d['texts'], d['labels'], d['label_sentences'], role=role)
        except KeyError as e:
            raise ConfigError("Graph document lacks field %s" % e,
                              field=str(e))

    def __repr__(self):
        return "TextAttributedGraph(%s, %s, n=%d, m=%d, K=%d)" % (
            self.graph_id, self.role, self.node_count, self.edge_count,
            self.class_count)


class Subgraph(object):
    """
    Induced subgraph around a center node, ready to be encoded.

    :ivar graph_id:   Id of the parent graph
    :ivar center:     Center node id (parent numbering)
    :ivar origin:     Id of the center in the graph the attacker started
                      from; differs from center on synthetic graphs
    :ivar node_ids:   Parent ids of the subgraph nodes, center first
    :ivar features:   |V_sub| x d feature rows
    :ivar adjacency:  |V_sub| x |V_sub| symmetric binary matrix
    :ivar positional: |V_sub| x r random-walk positional encodings
    """

    def __init__(self, graph_id, center, node_ids, features, adjacency,
                 positional, origin=None):
        self.graph_id = graph_id
        self.center = int(center)
        self.origin = self.center if origin is None else int(origin)
        self.node_ids = np.asarray(node_ids, dtype=np.int64)
        self.features = np.asarray(features, dtype=np.float64)
        self.adjacency = np.asarray(adjacency, dtype=np.float64)
        self.positional = np.asarray(positional, dtype=np.float64)
        if self.center not in self.node_ids:
            raise ContractError("Subgraph of %s: center %d not in node set" %
                                (graph_id, self.center))

    @property
    def size(self):
        return len(self.node_ids)

    @property
    def edge_count(self):
        return int(np.triu(self.adjacency, 1).sum())

    @property
    def center_index(self):
        return int(np.flatnonzero(self.node_ids == self.center)[0])

    def input_matrix(self):
        """
        Features concatenated with positional encodings, the encoder input
        """
        return np.hstack([self.features, self.positional])

    def __repr__(self):
        return "Subgraph(%s, center=%d, nodes=%d)" % (self.graph_id,
                                                      self.center, self.size)


class NodeSplit(object):
    """
    Disjoint train/val/test node sets of one graph
    """

    def __init__(self, train_ids, val_ids, test_ids):
        self.train_ids = np.asarray(train_ids, dtype=np.int64)
        self.val_ids = np.asarray(val_ids, dtype=np.int64)
        self.test_ids = np.asarray(test_ids, dtype=np.int64)

    @property
    def sizes(self):
        return (len(self.train_ids), len(self.val_ids), len(self.test_ids))

    def __repr__(self):
        return "NodeSplit(train=%d, val=%d, test=%d)" % self.sizes
