import json
import logging
from collections import OrderedDict
from os import listdir, makedirs
from os.path import exists, isdir, join

import numpy as np

from ..autodiff.rng import Rng
from ..config import ConfigObject
from ..errors import ConfigError, MissingDataError
from .graph import ROLES, TextAttributedGraph

# Filler words shared by every domain, drawn as feature noise
GENERIC_WORDS = [
    'new', 'old', 'small', 'large', 'common', 'rare', 'simple', 'general',
    'recent', 'early', 'basic', 'typical', 'popular', 'local', 'global',
    'main', 'other', 'several', 'various', 'useful', 'open', 'public',
    'short', 'long', 'first', 'second', 'final', 'annual', 'daily', 'broad',
    'minor', 'major', 'quick', 'direct', 'formal', 'plain', 'extra', 'single',
    'double', 'modern',
]

WORDS_PER_CLASS = 8


class GraphConfig(ConfigObject):
    """
    Generation parameters of one graph.

    homophily is the probability that an edge joins two same-class nodes,
    feature_noise the expected number of generic words per topic word.
    """

    FIELDS = (
        ('node_count', 200),
        ('edge_density', 0.03),
        ('homophily', 0.8),
        ('feature_noise', 1.0),
        ('role', 'pretrain'),
    )

    def validate(self):
        if int(self.node_count) < 1:
            raise ConfigError("node_count must be positive", field='node_count')
        if not 0.0 <= float(self.homophily) <= 1.0:
            raise ConfigError("homophily %s is outside [0, 1]" % self.homophily,
                              field='homophily')
        if not 0.0 <= float(self.edge_density) <= 1.0:
            raise ConfigError("edge_density %s is outside [0, 1]" %
                              self.edge_density, field='edge_density')
        if float(self.feature_noise) < 0:
            raise ConfigError("feature_noise must be >= 0",
                              field='feature_noise')
        if self.role not in ROLES:
            raise ConfigError("Unknown graph role %s" % self.role, field='role')


class DomainConfig(ConfigObject):
    FIELDS = (
        ('name', 'academic'),
        ('class_count', 4),
        ('topic_vocab', []),
        ('topic_words_per_node', 3),
        ('graphs', []),
    )

    def validate(self):
        if int(self.class_count) < 2:
            raise ConfigError("Domain %s: class_count must be >= 2" % self.name,
                              field='class_count')
        if int(self.topic_words_per_node) < 1:
            raise ConfigError("Domain %s: topic_words_per_node must be >= 1" %
                              self.name, field='topic_words_per_node')
        if self.topic_vocab and len(self.topic_vocab) < self.class_count:
            raise ConfigError("Domain %s: topic_vocab needs at least one word "
                              "per class" % self.name, field='topic_vocab')
        self.graphs = [GraphConfig.from_dict(g) for g in self.graphs]
        for g in self.graphs:
            if g.node_count < self.class_count:
                raise ConfigError("Domain %s: node_count %d is below "
                                  "class_count %d" % (self.name, g.node_count,
                                                      self.class_count),
                                  field='node_count')

    def vocabulary(self):
        """
        The topic vocabulary, generated from the domain name when not given
        """
        if self.topic_vocab:
            return list(self.topic_vocab)
        return ['%sx%d' % (self.name, i)
                for i in range(self.class_count * WORDS_PER_CLASS)]

    def class_words(self):
        return [list(chunk) for chunk in
                np.array_split(np.array(self.vocabulary(), dtype=object),
                               self.class_count)]


class CorpusConfig(ConfigObject):
    FIELDS = (
        ('domains', []),
        ('summary_neighbors', 3),
        ('seed', 0),
    )

    def validate(self):
        self.domains = [DomainConfig.from_dict(d) for d in self.domains]
        names = [d.name for d in self.domains]
        if len(set(names)) != len(names):
            raise ConfigError("Duplicate domain names in %s" % names,
                              field='domains')
        if int(self.seed) < 0:
            raise ConfigError("seed must be >= 0", field='seed')


def default_corpus_config(seed=0):
    """
    Three domains with two pretraining graphs and one unseen evaluation graph
    each, plus two extra domains with disjoint vocabularies.
    """
    domains = []
    for name, k in (('academic', 4), ('ecommerce', 4), ('social', 3)):
        graphs = [dict(role='pretrain'), dict(role='pretrain'),
                  dict(role='eval')]
        domains.append(dict(name=name, class_count=k, graphs=graphs))
    for name, k in (('biomedical', 4), ('news', 3)):
        domains.append(dict(name=name, class_count=k,
                            graphs=[dict(role='extra'), dict(role='extra')]))
    return CorpusConfig(domains=domains, seed=seed)


def edge_probabilities(n, labels, density, homophily, graph_id=''):
    """
    Calibrates (p_in, p_out) so that the expected edge count is
    density * C(n, 2) with a homophily share of same-class edges.
    """
    pairs = n * (n - 1) / 2.0
    counts = np.bincount(labels)
    same = float((counts * (counts - 1) / 2.0).sum())
    diff = pairs - same
    expected = density * pairs
    p_in = homophily * expected / same if same else 0.0
    p_out = (1.0 - homophily) * expected / diff if diff else 0.0
    if (homophily > 0 and expected > 0 and not same) or p_in > 1.0:
        raise ConfigError("Graph %s: density %g with homophily %g needs "
                          "p_in = %.3g > 1" % (graph_id, density, homophily,
                                               p_in), field='homophily')
    if (homophily < 1 and expected > 0 and not diff) or p_out > 1.0:
        raise ConfigError("Graph %s: density %g with homophily %g needs "
                          "p_out = %.3g > 1" % (graph_id, density, homophily,
                                                p_out), field='edge_density')
    return p_in, p_out


def _generate_graph(domain, gconf, graph_id, rng, summary_neighbors):
    n, k = gconf.node_count, domain.class_count
    class_words = domain.class_words()

    labels = rng.split('labels').integers(k, size=n)
    p_in, p_out = edge_probabilities(n, labels, gconf.edge_density,
                                     gconf.homophily, graph_id)
    iu, ju = np.triu_indices(n, 1)
    prob = np.where(labels[iu] == labels[ju], p_in, p_out)
    keep = rng.split('edges').random(len(iu)) < prob
    edges = np.stack([iu[keep], ju[keep]], axis=1)

    text_rng = rng.split('texts')
    topics, texts = [], []
    for v in range(n):
        words = list(text_rng.choice(class_words[labels[v]],
                                     size=domain.topic_words_per_node))
        n_noise = int(text_rng.poisson(gconf.feature_noise *
                                       domain.topic_words_per_node))
        noise = list(text_rng.choice(GENERIC_WORDS, size=n_noise)) \
            if n_noise else []
        topics.append(words)
        texts.append(' '.join(['a', domain.name, 'item', 'about'] +
                              words + noise))

    label_sentences = ['a %s item about %s' % (domain.name, ' '.join(w))
                       for w in class_words]
    graph = TextAttributedGraph(graph_id, domain.name, n, edges, texts,
                                labels, label_sentences, role=gconf.role)

    summary_rng = rng.split('summaries')
    summaries = []
    for v in range(n):
        nbrs = graph.neighbors(v)
        if len(nbrs) > summary_neighbors:
            nbrs = np.sort(summary_rng.choice(nbrs, size=summary_neighbors,
                                              replace=False))
        extra = [w for u in nbrs for w in topics[u]]
        summaries.append(texts[v] + (' near ' + ' '.join(extra)
                                     if extra else ''))
    return graph, summaries


class Corpus(object):
    """
    A generated or loaded collection of text-attributed graphs with the
    per-node summary texts used for pretraining.

    :ivar config:    The CorpusConfig that produced the corpus (may be None)
    :ivar graphs:    OrderedDict graph_id -> TextAttributedGraph, ordered by
                     role and graph id
    :ivar summaries: dict graph_id -> list of per-node summary strings
    """

    def __init__(self, graphs, summaries=None, config=None):
        self.config = config
        self.graphs = OrderedDict(
            (g.graph_id, g) for g in
            sorted(graphs, key=lambda g: (ROLES.index(g.role), g.graph_id)))
        self.summaries = dict(summaries or {})
        self.log = logging.getLogger('gfmlab.corpus')

    def graphs_with_role(self, role):
        return [g for g in self.graphs.values() if g.role == role]

    @property
    def pretrain_graphs(self):
        return self.graphs_with_role('pretrain')

    @property
    def eval_graphs(self):
        return self.graphs_with_role('eval')

    @property
    def extra_graphs(self):
        return self.graphs_with_role('extra')

    @property
    def domains(self):
        return sorted(set(g.domain for g in self.graphs.values()))

    def graph(self, graph_id):
        try:
            return self.graphs[graph_id]
        except KeyError:
            raise MissingDataError("No graph with id %s in the corpus" %
                                   graph_id)

    def summaries_for(self, graph_id):
        if graph_id not in self.summaries:
            raise MissingDataError("No summaries for graph %s" % graph_id)
        return self.summaries[graph_id]

    def featurize(self, text_encoder):
        """
        Sets the features of every graph to the embeddings of its node texts
        """
        for g in self.graphs.values():
            g.set_features(text_encoder.embed_many(g.texts))
        return self

    @property
    def featurized(self):
        return all(g.features is not None for g in self.graphs.values())

    def summary_rows(self):
        rows = []
        for g in self.graphs.values():
            rows.append(OrderedDict([('graph_id', g.graph_id),
                                     ('domain', g.domain),
                                     ('role', g.role),
                                     ('nodes', g.node_count),
                                     ('edges', g.edge_count),
                                     ('classes', g.class_count)]))
        return rows

    def summary_table(self):
        lines = ['%-24s %-12s %-9s %6s %6s %7s' %
                 ('graph_id', 'domain', 'role', 'nodes', 'edges', 'classes')]
        for r in self.summary_rows():
            lines.append('%-24s %-12s %-9s %6d %6d %7d' % tuple(r.values()))
        return '\n'.join(lines)

    def save(self, directory):
        """
        Writes the corpus as <role>/<domain>/<graph_id>.json plus
        summaries/<graph_id>.json and manifest.json
        """
        for g in self.graphs.values():
            path = join(directory, g.role, g.domain)
            if not exists(path):
                makedirs(path)
            _write_json(join(path, '%s.json' % g.graph_id), g.dictify())
        path = join(directory, 'summaries')
        if not exists(path):
            makedirs(path)
        for graph_id, summaries in sorted(self.summaries.items()):
            _write_json(join(path, '%s.json' % graph_id), summaries)
        manifest = OrderedDict()
        manifest['config'] = (self.config.dictify()
                              if self.config is not None else None)
        manifest['graphs'] = self.summary_rows()
        _write_json(join(directory, 'manifest.json'), manifest)
        self.log.info("Saved %d graphs to %s" % (len(self.graphs), directory))

    @classmethod
    def load(cls, directory):
        if not isdir(directory):
            raise MissingDataError("Corpus directory %s does not exist" %
                                   directory)
        graphs = []
        for role in ROLES:
            role_dir = join(directory, role)
            if not isdir(role_dir):
                continue
            for domain in sorted(listdir(role_dir)):
                for fname in sorted(listdir(join(role_dir, domain))):
                    if fname.endswith('.json'):
                        graphs.append(TextAttributedGraph.from_dict(
                            _read_json(join(role_dir, domain, fname)),
                            role=role))
        if not graphs:
            raise MissingDataError("No graphs found below %s" % directory)

        summaries = {}
        sum_dir = join(directory, 'summaries')
        for g in graphs:
            path = join(sum_dir, '%s.json' % g.graph_id)
            if exists(path):
                summaries[g.graph_id] = _read_json(path)

        config = None
        manifest = join(directory, 'manifest.json')
        if exists(manifest):
            config_dict = _read_json(manifest).get('config')
            if config_dict is not None:
                config = CorpusConfig.from_dict(config_dict)
        return cls(graphs, summaries, config)

    def __repr__(self):
        return "Corpus(%d pretrain, %d eval, %d extra graphs)" % (
            len(self.pretrain_graphs), len(self.eval_graphs),
            len(self.extra_graphs))


def _write_json(path, obj):
    with open(path, 'w') as f:
        f.write(json.dumps(obj, sort_keys=True))
        f.write('\n')


def _read_json(path):
    with open(path) as f:
        return json.load(f)


def generate_corpus(config):
    """
    Generates the graphs of every domain with a planted-partition process.

    :param config: CorpusConfig (or a dict accepted by CorpusConfig)
    :returns:      A Corpus holding graphs and summaries, not yet featurized
    """
    config = CorpusConfig.from_dict(config)
    root = Rng(config.seed)
    graphs, summaries = [], {}
    for domain in config.domains:
        per_role = {}
        for gconf in domain.graphs:
            idx = per_role.get(gconf.role, 0)
            per_role[gconf.role] = idx + 1
            graph_id = '%s-%s-%d' % (domain.name, gconf.role, idx)
            graph, summ = _generate_graph(domain, gconf, graph_id,
                                          root.split('graph/%s' % graph_id),
                                          config.summary_neighbors)
            graphs.append(graph)
            summaries[graph_id] = summ
    if len(set(g.graph_id for g in graphs)) != len(graphs):
        raise ConfigError("Generated graph ids are not unique",
                          field='domains')
    return Corpus(graphs, summaries, config)
