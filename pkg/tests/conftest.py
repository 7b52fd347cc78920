import numpy as np
import pytest

from gfmlab.data import CorpusConfig, SamplerConfig, TextAttributedGraph, \
    generate_corpus
from gfmlab.encoders import EncoderConfig
from gfmlab.text_encoder import FrozenTextEncoder
from gfmlab.training import TrainConfig, pretrain_victim


def tiny_corpus_config(seed=0, node_count=40, homophily=0.9):
    graph = dict(node_count=node_count, edge_density=0.12,
                 homophily=homophily)
    domains = []
    for name in ('academic', 'social'):
        domains.append(dict(name=name, class_count=3,
                            graphs=[dict(graph, role='pretrain'),
                                    dict(graph, role='eval')]))
    domains.append(dict(name='news', class_count=3,
                        graphs=[dict(graph, role='extra')]))
    return CorpusConfig(domains=domains, seed=seed)


def tiny_victim_config(seed=0):
    return EncoderConfig(family='gat', layers=2, hidden_dim=16, heads=2,
                         input_dim=36, output_dim=32, init_seed=seed)


def path_graph(n, features=None, graph_id='path'):
    """
    0 - 1 - ... - n-1 with one feature row per node
    """
    if features is None:
        features = np.eye(n, 2)
    return TextAttributedGraph(graph_id, 'test', n,
                               [(i, i + 1) for i in range(n - 1)],
                               ['node %d' % i for i in range(n)], [0] * n,
                               ['a test item', 'another test item'],
                               features=features)


def graph_from_edges(n, edges, dim=4, seed=0, graph_id='g'):
    features = np.random.RandomState(seed).normal(size=(n, dim))
    return TextAttributedGraph(graph_id, 'test', n, edges,
                               ['node %d' % i for i in range(n)],
                               [i % 2 for i in range(n)],
                               ['a test item', 'another test item'],
                               features=features)


@pytest.fixture(scope='session')
def text_encoder():
    return FrozenTextEncoder(seed=0)


@pytest.fixture(scope='session')
def sampler_config():
    return SamplerConfig(max_nodes=16)


@pytest.fixture(scope='session')
def tiny_corpus(text_encoder):
    return generate_corpus(tiny_corpus_config()).featurize(text_encoder)


@pytest.fixture(scope='session')
def tiny_victim(tiny_corpus, text_encoder, sampler_config):
    victim, _ = pretrain_victim(tiny_corpus.pretrain_graphs,
                                tiny_corpus.summaries, text_encoder,
                                tiny_victim_config(),
                                TrainConfig(learning_rate=5e-3, epochs=1),
                                sampler_config)
    return victim
