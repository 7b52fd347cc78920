import logging
from collections import OrderedDict
from fnmatch import fnmatchcase

import intervaltree
import numpy as np

from ..autodiff.rng import Rng
from ..data.sampling import SamplerConfig, sample_subgraph, split_nodes
from ..errors import ConfigError
from .scenario import ScenarioKinds
from .synthesis import build_synthetic_query_graphs

log = logging.getLogger('gfmlab.attacks')


class QuerySet(object):
    """
    Ordered query records of one scenario.

    :ivar records: QueryRecords ordered by (source graph id, center)
    :ivar origins: (graph_id, center in the source graph) per record
    :ivar sources: IntervalTree from query-index ranges to source graph ids
    """

    def __init__(self, records, origins):
        self.records = list(records)
        self.origins = list(origins)
        self.sources = intervaltree.IntervalTree()
        start = 0
        while start < len(self.records):
            graph_id = self.records[start].graph_id
            end = start
            while end < len(self.records) and \
                    self.records[end].graph_id == graph_id:
                end += 1
            self.sources[self.records[start].query_index:
                         self.records[end - 1].query_index + 1] = graph_id
            start = end

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def subgraphs(self):
        return [r.subgraph for r in self.records]

    def source_of(self, query_index):
        hits = self.sources[query_index]
        if not hits:
            return None
        return hits.pop().data

    def counts_per_source(self):
        counts = OrderedDict()
        for interval in sorted(self.sources):
            counts[interval.data] = counts.get(interval.data, 0) + \
                interval.end - interval.begin
        return counts

    def embeddings(self):
        return np.stack([r.embedding for r in self.records])


def allocate_budget(budget, weights):
    """
    floor(w_i * B) queries per source, the remainder goes to the last one
    """
    counts = [int(np.floor(w * budget + 1e-9)) for w in weights]
    counts[-1] += budget - sum(counts)
    return counts


def select_graphs(corpus, selectors, default):
    """
    Graphs matched by the selectors (graph id, fnmatch pattern or domain),
    in selector order, without duplicates. Empty selectors give default.
    """
    if not selectors:
        return list(default)
    selected = OrderedDict()
    for sel in selectors:
        matched = [g for g in corpus.graphs.values()
                   if g.graph_id == sel or g.domain == sel or
                   fnmatchcase(g.graph_id, sel)]
        if not matched:
            raise ConfigError("Query source %s matches no graph" % sel,
                              field='query_sources')
        for g in matched:
            selected.setdefault(g.graph_id, g)
    return list(selected.values())


def resolve_sources(config, corpus):
    """
    Source graphs of the scenario's queries
    """
    kinds = ScenarioKinds
    if config.kind == kinds.DOMAIN_SPECIFIC:
        graphs = [g for g in select_graphs(corpus, config.query_sources,
                                           corpus.pretrain_graphs)
                  if g.domain == config.target_domain]
    elif config.kind == kinds.GRAPH_SPECIFIC:
        graphs = [corpus.graph(config.target_graph)]
    elif config.kind == kinds.DATA_FREE:
        graphs = select_graphs(corpus, config.query_sources,
                               corpus.extra_graphs)
    else:
        graphs = select_graphs(corpus, config.query_sources,
                               corpus.pretrain_graphs)
    if not graphs:
        raise ConfigError("Scenario %s has no query source graphs" %
                          config.name, field='query_sources')
    return graphs


def draw_indices(pool_size, count, rng):
    """
    count indices into a pool: whole passes over the pool when count exceeds
    it, then a draw without replacement for the remainder
    """
    passes, rest = divmod(count, pool_size)
    picked = np.tile(np.arange(pool_size), passes)
    if rest:
        picked = np.concatenate([picked, rng.choice(pool_size, size=rest,
                                                    replace=False)])
    return picked


def _sample_centers(graph, count, rng, sampler_config):
    train_ids = split_nodes(graph, sampler_config.split_seed).train_ids
    if count > len(train_ids):
        log.warning("Budget of %d exceeds the %d training nodes of %s, "
                    "centers repeat" % (count, len(train_ids), graph.graph_id))
    return np.sort(train_ids[draw_indices(len(train_ids), count, rng)])


def plan_centers(config, sources, sampler_config):
    """
    (graph, center) pairs to query, sorted by (graph id, center)
    """
    sampler_config = SamplerConfig.from_dict(sampler_config)
    rng = Rng(config.seed).split('queries/%s' % config.name)
    budget = config.resolved_budget()
    plan = []
    if budget is None:
        for g in sources:
            plan.extend((g, int(v)) for v in
                        split_nodes(g, sampler_config.split_seed).train_ids)
    elif config.mix_weights is not None:
        for g, count in zip(sources, allocate_budget(budget,
                                                     config.mix_weights)):
            plan.extend((g, int(v)) for v in
                        _sample_centers(g, count, rng.split(g.graph_id),
                                        sampler_config))
    else:
        pool = [(g, int(v)) for g in sources for v in
                split_nodes(g, sampler_config.split_seed).train_ids]
        if budget > len(pool):
            log.warning("Budget of %d exceeds the %d available centers, "
                        "centers repeat" % (budget, len(pool)))
        picked = draw_indices(len(pool), budget, rng)
        plan = [pool[i] for i in picked]
    return sorted(plan, key=lambda gv: (gv[0].graph_id, gv[1]))


def build_query_set(config, corpus, handle, sampler_config=None):
    """
    Samples the scenario's subgraphs and queries the handle for each of them.

    :returns: QuerySet; budget errors of the handle propagate
    """
    sampler_config = SamplerConfig.from_dict(sampler_config)
    sources = resolve_sources(config, corpus)

    if config.kind == ScenarioKinds.SYNTHETIC_GRAPHS:
        synthetic = build_synthetic_query_graphs(
            sources, config.visibility_fraction, config.alpha, config.seed,
            sampler_config, overrides=config.visibility_overrides)
        jobs = []
        for sg in sorted(synthetic, key=lambda s: s.graph_id):
            jobs.extend((sg, int(c), int(sg.node_ids[c])) for c in sg.centers)
    else:
        jobs = [(g, v, v) for g, v in plan_centers(config, sources,
                                                   sampler_config)]

    records, origins = [], []
    for graph, center, origin in jobs:
        subgraph = sample_subgraph(graph, center, sampler_config)
        subgraph.origin = origin
        records.append(handle.query(subgraph, session=config.session))
        origins.append((graph.graph_id, origin))
    log.info("Scenario %s: %d queries from %d source graphs" %
             (config.name, len(records), len(sources)))
    return QuerySet(records, origins)
