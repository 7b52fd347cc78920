import csv
import json
import logging
from collections import OrderedDict

import numpy as np

from ..autodiff.rng import fnv1a64
from ..data.sampling import SamplerConfig, sample_subgraph, split_nodes
from ..errors import DimensionError, MissingDataError
from ..watchmen import watch
from .lemma import lemma1_verify_embeddings
from .metrics import accuracy, fidelity, predict_many

CSV_COLUMNS = ('graph_id', 'attacker_acc', 'victim_acc', 'fidelity', 'n_test',
               'frac_bound_holds', 'max_delta')


class ScenarioReport(object):
    """
    Per-graph accuracy, fidelity and margin-bound summary of one attacker.

    Wall times live in timing, which is written to its own file so that the
    CSV and JSON outputs stay byte-identical across reruns.
    """

    def __init__(self, name, rows=None, lemma=None, kind=None):
        self.name = name
        self.kind = kind
        self.rows = list(rows or [])
        self.lemma = OrderedDict(lemma or {})
        self.query_count = 0
        self.queries_per_source = OrderedDict()
        self.attacker_params = None
        self.victim_params = None
        self.budget = None
        self.defense = None
        self.seed = None
        self.timing = OrderedDict()
        self.train_log = None
        self._run_id = None

    @property
    def defense_digest(self):
        """
        Eight hex digits of the FNV-1a hash over the sorted defense JSON,
        'none' for runs without a recorded defense
        """
        if not self.defense:
            return 'none'
        text = json.dumps(self.defense, sort_keys=True)
        return ('%016x' % fnv1a64(text))[:8]

    @property
    def run_id(self):
        if self._run_id is not None:
            return self._run_id
        return '%s-s%s-%s' % (self.name, self.seed, self.defense_digest)

    @run_id.setter
    def run_id(self, value):
        self._run_id = value

    def _mean(self, key):
        if not self.rows:
            return float('nan')
        return float(np.mean([r[key] for r in self.rows]))

    @property
    def mean_fidelity(self):
        return self._mean('fidelity')

    @property
    def mean_attacker_acc(self):
        return self._mean('attacker_acc')

    @property
    def mean_victim_acc(self):
        return self._mean('victim_acc')

    @property
    def frac_bound_holds(self):
        n = sum(r['n_test'] for r in self.rows)
        if not n:
            return float('nan')
        return float(sum(r['frac_bound_holds'] * r['n_test']
                         for r in self.rows) / n)

    @property
    def lemma_violations(self):
        return int(sum(len(d.counterexamples) for d in self.lemma.values()))

    def row(self, graph_id):
        for r in self.rows:
            if r['graph_id'] == graph_id:
                return r
        raise MissingDataError("Report %s has no row for %s" %
                               (self.name, graph_id))

    def to_csv(self, path):
        with open(path, 'w') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(CSV_COLUMNS)
            for r in self.rows:
                writer.writerow([r['graph_id']] +
                                [repr(r[c]) if isinstance(r[c], float)
                                 else r[c] for c in CSV_COLUMNS[1:]])

    def dictify(self, verbose=False):
        d = OrderedDict()
        d['name'] = self.name
        d['kind'] = self.kind
        d['seed'] = self.seed
        d['budget'] = self.budget
        d['defense'] = self.defense
        d['query_count'] = self.query_count
        d['queries_per_source'] = self.queries_per_source
        d['attacker_params'] = self.attacker_params
        d['victim_params'] = self.victim_params
        d['rows'] = self.rows
        d['mean_attacker_acc'] = self.mean_attacker_acc
        d['mean_victim_acc'] = self.mean_victim_acc
        d['mean_fidelity'] = self.mean_fidelity
        d['frac_bound_holds'] = self.frac_bound_holds
        d['lemma_violations'] = self.lemma_violations
        if verbose:
            d['lemma'] = OrderedDict((g, diag.dictify())
                                     for g, diag in self.lemma.items())
        return d

    def to_json(self, path, verbose=False):
        with open(path, 'w') as f:
            f.write(json.dumps(self.dictify(verbose), sort_keys=True,
                               indent=2))
            f.write('\n')

    def write_timing(self, path):
        with open(path, 'w') as f:
            f.write(json.dumps(self.timing, sort_keys=True, indent=2))
            f.write('\n')

    @classmethod
    def from_dict(cls, d):
        report = cls(d['name'], d.get('rows'), kind=d.get('kind'))
        report.seed = d.get('seed')
        report.budget = d.get('budget')
        report.defense = d.get('defense')
        report.query_count = d.get('query_count', 0)
        report.queries_per_source = OrderedDict(
            d.get('queries_per_source') or {})
        report.attacker_params = d.get('attacker_params')
        report.victim_params = d.get('victim_params')
        return report

    @classmethod
    def from_json(cls, path):
        with open(path) as f:
            return cls.from_dict(json.load(f))

    def table(self):
        lines = ['%-24s %8s %8s %8s %6s %8s' % ('graph_id', 'atk_acc',
                                                'vic_acc', 'fid', 'n',
                                                'bound')]
        for r in self.rows:
            lines.append('%-24s %8.4f %8.4f %8.4f %6d %8.4f' %
                         (r['graph_id'], r['attacker_acc'], r['victim_acc'],
                          r['fidelity'], r['n_test'], r['frac_bound_holds']))
        return '\n'.join(lines)

    def __repr__(self):
        return "ScenarioReport(%s, graphs=%d, fidelity=%.4f)" % (
            self.name, len(self.rows), self.mean_fidelity)


class Evaluator(object):
    """
    The experimenter's view: holds the victim and scores attackers against
    it by zero-shot prediction on the test split of every evaluation graph.

    :param victim:         The victim Encoder
    :param text_encoder:   The shared FrozenTextEncoder
    :param sampler_config: SamplerConfig used for the test subgraphs
    :param lab:            Optional Lab, enables the Evaluate watchmen
    """

    def __init__(self, victim, text_encoder, sampler_config=None, lab=None):
        self.victim = victim
        self.text_encoder = text_encoder
        self.sampler_config = SamplerConfig.from_dict(sampler_config)
        self.lab = lab
        self._tests = {}
        self.log = logging.getLogger('gfmlab.evaluation')

    @property
    def victim_params(self):
        return self.victim.count_parameters()

    def test_set(self, graph):
        """
        (node ids, subgraphs, victim embeddings, label matrix) of the test
        split of graph, cached per graph id
        """
        cached = self._tests.get(graph.graph_id)
        if cached is None:
            node_ids = split_nodes(graph, self.sampler_config.split_seed).test_ids
            subgraphs = [sample_subgraph(graph, v, self.sampler_config)
                         for v in node_ids]
            cached = (node_ids, subgraphs, self.victim.encode_many(subgraphs),
                      self.text_encoder.embed_labels(graph.label_sentences))
            self._tests[graph.graph_id] = cached
        return cached

    def victim_embeddings(self, subgraphs):
        return self.victim.encode_many(subgraphs)

    def attacker_embeddings(self, attacker, subgraphs, output_basis=None):
        """
        Attacker embeddings in the victim's output space. Attackers trained
        on basis coordinates are mapped back through output_basis.
        """
        embs = attacker.encode_many(subgraphs)
        d = self.victim.config.output_dim
        if embs.shape[1] == d:
            return embs
        if output_basis is None:
            raise DimensionError("Attacker emits %d dimensions, the victim %d"
                                 % (embs.shape[1], d))
        return embs @ output_basis[:, :embs.shape[1]].T

    @watch('Evaluate')
    def evaluate(self, attacker, eval_graphs, query_subgraphs=None,
                 name='attacker', output_basis=None):
        """
        :param query_subgraphs: Subgraphs the attacker queried, used to
                                measure the margin bound; defaults to each
                                graph's own test subgraphs
        :returns:               ScenarioReport with one row per graph
        """
        report = ScenarioReport(name)
        query_victim = query_attacker = None
        if query_subgraphs:
            query_victim = self.victim_embeddings(query_subgraphs)
            query_attacker = self.attacker_embeddings(attacker,
                                                      query_subgraphs,
                                                      output_basis)
        for graph in eval_graphs:
            node_ids, subgraphs, victim_embs, labels = self.test_set(graph)
            attacker_embs = self.attacker_embeddings(attacker, subgraphs,
                                                     output_basis)
            truth = graph.labels[node_ids]
            victim_pred = predict_many(victim_embs, labels, node_ids)
            attacker_pred = predict_many(attacker_embs, labels, node_ids)
            if query_subgraphs:
                qa, qv = query_attacker, query_victim
            else:
                qa, qv = attacker_embs, victim_embs
            diag = lemma1_verify_embeddings(attacker_embs, victim_embs, qa, qv,
                                            labels, node_ids, graph.graph_id)
            row = OrderedDict()
            row['graph_id'] = graph.graph_id
            row['domain'] = graph.domain
            row['attacker_acc'] = accuracy(attacker_pred.predictions, truth)
            row['victim_acc'] = accuracy(victim_pred.predictions, truth)
            row['fidelity'] = fidelity(attacker_pred.predictions,
                                       victim_pred.predictions)
            row['n_test'] = len(node_ids)
            row['frac_bound_holds'] = diag.frac_bound_holds
            row['max_delta'] = diag.max_delta
            report.rows.append(row)
            report.lemma[graph.graph_id] = diag
            self.log.info("%s on %s: acc %.4f (victim %.4f), fidelity %.4f" %
                          (name, graph.graph_id, row['attacker_acc'],
                           row['victim_acc'], row['fidelity']))
        report.attacker_params = attacker.count_parameters()
        report.victim_params = self.victim_params
        return report


def evaluate_pair(attacker, victim, eval_graphs, text_encoder,
                  sampler_config=None, query_subgraphs=None):
    """
    Scores attacker against victim on every graph of eval_graphs
    """
    return Evaluator(victim, text_encoder, sampler_config).evaluate(
        attacker, eval_graphs, query_subgraphs)
