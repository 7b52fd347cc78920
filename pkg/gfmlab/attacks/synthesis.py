import logging

import numpy as np

from ..autodiff.rng import Rng
from ..data.sampling import SamplerConfig, split_nodes
from ..errors import ConfigError, UnsynthesizableError

log = logging.getLogger('gfmlab.attacks.synthesis')


class PartialGraphView(object):
    """
    What an adversary controlling visible_ids knows about a graph: the
    features of its own nodes and the edges touching nodes within one hop
    of them.

    :ivar graph_id:         Id of the parent graph
    :ivar visible_ids:      Sorted array of controlled nodes
    :ivar visible_features: dict node -> feature vector
    :ivar known_edges:      (m, 2) subset of the parent edges
    """

    def __init__(self, graph, visible_ids):
        self.graph_id = graph.graph_id
        self.node_count = graph.node_count
        self.visible_ids = np.unique(np.asarray(visible_ids, dtype=np.int64))
        self._visible = set(int(v) for v in self.visible_ids)
        self.visible_features = dict((v, graph.features[v].copy())
                                     for v in self._visible)

        near = set(self._visible)
        for v in self._visible:
            near.update(int(u) for u in graph.neighbors(v))
        edges = graph.edges
        if len(edges):
            touch = np.array([u in near or w in near for u, w in edges])
            self.known_edges = edges[touch]
        else:
            self.known_edges = edges

        self._adj = dict((v, set()) for v in range(self.node_count))
        for u, w in self.known_edges:
            self._adj[int(u)].add(int(w))
            self._adj[int(w)].add(int(u))

    def is_visible(self, v):
        return int(v) in self._visible

    def known_neighbors(self, v):
        return sorted(self._adj[int(v)])

    def hop_sets(self, v):
        """
        Known nodes at distance exactly 1 and exactly 2 from v
        """
        one = set(self._adj[int(v)])
        two = set()
        for u in one:
            two.update(self._adj[u])
        two -= one
        two.discard(int(v))
        return sorted(one), sorted(two)


def _visible_mean(view, nodes):
    rows = [view.visible_features[u] for u in nodes if view.is_visible(u)]
    return np.mean(rows, axis=0) if rows else None


def synthesize_attributes(view, target, alpha):
    """
    alpha * mean(visible 1-hop features) + (1 - alpha) * mean(visible 2-hop
    features). An empty hop set hands its weight to the other one.

    :raises UnsynthesizableError: no visible node within two hops
    """
    one, two = view.hop_sets(target)
    m1, m2 = _visible_mean(view, one), _visible_mean(view, two)
    if m1 is None and m2 is None:
        raise UnsynthesizableError("Node %d of %s has no visible node within "
                                   "two hops" % (target, view.graph_id))
    if m2 is None:
        return m1
    if m1 is None:
        return m2
    return alpha * m1 + (1.0 - alpha) * m2


class SyntheticGraph(object):
    """
    Graph assembled by the adversary from visible and imputed nodes.

    Nodes are renumbered monotonically, so full visibility reproduces the
    parent graph. graph_id equals the parent's id.

    :ivar node_ids: Parent id of every node
    :ivar centers:  Local ids of the visible training-split nodes
    :ivar imputed:  Boolean mask of imputed nodes
    """

    def __init__(self, graph_id, node_ids, edges, features, centers, imputed):
        self.graph_id = graph_id
        self.node_ids = np.asarray(node_ids, dtype=np.int64)
        self.node_count = len(self.node_ids)
        self.edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        self.features = np.asarray(features, dtype=np.float64)
        self.centers = np.asarray(centers, dtype=np.int64)
        self.imputed = np.asarray(imputed, dtype=bool)
        buckets = [[] for _ in range(self.node_count)]
        for u, w in self.edges:
            buckets[u].append(w)
            buckets[w].append(u)
        self._neighbors = [np.array(sorted(b), dtype=np.int64)
                           for b in buckets]

    def neighbors(self, v):
        return self._neighbors[v]

    def __repr__(self):
        return "SyntheticGraph(%s, nodes=%d, imputed=%d, centers=%d)" % (
            self.graph_id, self.node_count, int(self.imputed.sum()),
            len(self.centers))


def sample_visible(graph, fraction, rng):
    n = graph.node_count
    if fraction >= 1.0:
        return np.arange(n)
    count = min(n, max(1, int(round(fraction * n))))
    return np.sort(rng.choice(n, size=count, replace=False))


def synthesize_graph(graph, visible_ids, alpha, sampler_config):
    """
    Imputes every hidden node reachable within two hops of a visible node and
    drops the rest.
    """
    view = PartialGraphView(graph, visible_ids)
    features, imputed, kept = {}, {}, []
    for v in range(graph.node_count):
        if view.is_visible(v):
            features[v] = view.visible_features[v]
            imputed[v] = False
        else:
            try:
                features[v] = synthesize_attributes(view, v, alpha)
            except UnsynthesizableError:
                continue
            imputed[v] = True
        kept.append(v)

    local = dict((v, i) for i, v in enumerate(kept))
    edges = [(local[int(u)], local[int(w)]) for u, w in view.known_edges
             if int(u) in local and int(w) in local]
    train = set(int(v) for v in
                split_nodes(graph, sampler_config.split_seed).train_ids)
    centers = [local[int(v)] for v in view.visible_ids if int(v) in train]
    dropped = graph.node_count - len(kept)
    if dropped:
        log.warning("%s: %d of %d nodes are unsynthesizable and dropped" %
                    (graph.graph_id, dropped, graph.node_count))
    return SyntheticGraph(graph.graph_id, kept, edges,
                          np.stack([features[v] for v in kept]), centers,
                          [imputed[v] for v in kept])


def build_synthetic_query_graphs(graphs, visibility_fraction, alpha, seed,
                                 sampler_config=None, overrides=None):
    """
    One SyntheticGraph per source graph.

    :param overrides: optional dict graph_id -> visibility fraction
    """
    sampler_config = SamplerConfig.from_dict(sampler_config)
    overrides = overrides or {}
    root = Rng(seed).split('visibility')
    synthetic = []
    for g in graphs:
        fraction = float(overrides.get(g.graph_id, visibility_fraction))
        if not 0.0 < fraction <= 1.0:
            raise ConfigError("Visibility of %s must lie in (0, 1]" %
                              g.graph_id, field='visibility_fraction')
        visible = sample_visible(g, fraction, root.split(g.graph_id))
        synthetic.append(synthesize_graph(g, visible, alpha, sampler_config))
    return synthetic
