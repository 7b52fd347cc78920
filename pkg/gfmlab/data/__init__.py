from .graph import TextAttributedGraph, Subgraph, NodeSplit
from .corpus import Corpus, CorpusConfig, DomainConfig, GraphConfig, \
    generate_corpus, default_corpus_config
from .sampling import SamplerConfig, split_nodes, extract_khop_subgraph, \
    sample_rw_subgraph, sample_subgraph, compute_positional_encodings, \
    normalize_adjacency, induced_adjacency
