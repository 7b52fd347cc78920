import logging
import time

from ..data.sampling import SamplerConfig
from ..training import train_attacker
from ..victim_api import defense_basis
from ..watchmen import watch
from .query_sets import build_query_set
from .scenario import ScenarioConfig, ScenarioKinds


class ScenarioRunner(object):
    """
    Runs one extraction scenario end to end: query the handle, train the
    attacker on the answers, score it with the evaluator.

    The runner only sees the victim through handle and evaluator.
    """

    def __init__(self, config, corpus, handle, evaluator, sampler_config=None,
                 lab=None):
        self.config = ScenarioConfig.from_dict(config)
        self.corpus = corpus
        self.handle = handle
        self.evaluator = evaluator
        self.sampler_config = SamplerConfig.from_dict(
            sampler_config if sampler_config is not None
            else evaluator.sampler_config)
        self.lab = lab
        self.log = logging.getLogger('gfmlab.attacks.%s' % self.config.name)

    def eval_graphs(self):
        if self.config.kind == ScenarioKinds.GRAPH_SPECIFIC:
            return [self.corpus.graph(self.config.target_graph)]
        return self.corpus.eval_graphs

    def center_text_embeddings(self, query_set):
        text_encoder = self.evaluator.text_encoder
        return text_encoder.embed_many(
            [self.corpus.graph(graph_id).texts[center]
             for graph_id, center in query_set.origins])

    @watch('ScenarioRun')
    def run(self):
        config = self.config
        self.log.info("Starting scenario %s (%s)" % (config.name, config.kind))
        start = time.perf_counter()
        query_set = build_query_set(config, self.corpus, self.handle,
                                    self.sampler_config)
        query_seconds = time.perf_counter() - start

        train_config = config.resolved_train_config()
        text_embs = (self.center_text_embeddings(query_set)
                     if train_config.lambda_contrast else None)
        input_dim = self.evaluator.text_encoder.embed_dim + \
            self.sampler_config.pe_dim
        attacker_config = config.resolved_attacker_config(
            input_dim, self.handle.output_dim)
        attacker, train_log = train_attacker(
            query_set.records, attacker_config, train_config,
            normalize_targets=config.normalize_targets,
            text_embeddings=text_embs, name=config.name, lab=self.lab)

        defense = self.handle.defense
        output_basis = None
        if defense.truncate_dim is not None and \
                defense.truncate_output == 'coordinates':
            output_basis = defense_basis(
                defense, self.evaluator.text_encoder.embed_dim)
        report = self.evaluator.evaluate(attacker, self.eval_graphs(),
                                         query_set.subgraphs, config.name,
                                         output_basis)
        report.kind = config.kind
        report.seed = config.seed
        report.budget = config.resolved_budget()
        report.defense = defense.dictify()
        report.query_count = len(query_set)
        report.queries_per_source = query_set.counts_per_source()
        report.train_log = train_log
        report.timing['query_seconds'] = query_seconds
        report.timing['attacker_train_seconds'] = train_log.total_wall_seconds
        self.log.info("Finished scenario %s: %d queries, mean fidelity %.4f" %
                      (config.name, len(query_set), report.mean_fidelity))
        return attacker, report


def run_scenario(config, corpus, handle, evaluator, sampler_config=None,
                 lab=None):
    """
    :returns: (attacker Encoder, ScenarioReport)
    """
    return ScenarioRunner(config, corpus, handle, evaluator, sampler_config,
                          lab).run()
