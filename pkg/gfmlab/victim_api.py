import logging
import threading
from collections import OrderedDict

import numpy as np

from .autodiff.rng import Rng
from .config import ConfigObject
from .errors import BudgetExhaustedError, ConfigError, ThrottleError
from .watchmen import watch

NOISE_KINDS = ('gaussian', 'laplacian')
TRUNCATE_OUTPUTS = ('ambient', 'coordinates')


class DefenseConfig(ConfigObject):
    """
    Output perturbations applied by a deployed victim.

    truncate_output 'ambient' returns the projection onto the first
    truncate_dim basis vectors in the original coordinates, 'coordinates'
    returns the truncate_dim basis coordinates.
    """

    FIELDS = (
        ('noise_std', 0.0),
        ('noise_kind', 'gaussian'),
        ('truncate_dim', None),
        ('truncate_output', 'ambient'),
        ('quantize_bits', None),
        ('rate_limit', None),
        ('seed', 0),
    )

    def validate(self):
        if float(self.noise_std) < 0:
            raise ConfigError("noise_std must be >= 0", field='noise_std')
        if self.noise_kind not in NOISE_KINDS:
            raise ConfigError("Unknown noise_kind %s" % self.noise_kind,
                              field='noise_kind')
        if self.truncate_output not in TRUNCATE_OUTPUTS:
            raise ConfigError("Unknown truncate_output %s" %
                              self.truncate_output, field='truncate_output')
        for name in ('truncate_dim', 'quantize_bits', 'rate_limit'):
            value = getattr(self, name)
            if value is not None and int(value) < 1:
                raise ConfigError("%s must be >= 1" % name, field=name)
        if self.truncate_dim is not None and self.quantize_bits is not None:
            raise ConfigError("truncate_dim and quantize_bits cannot be "
                              "combined", field='quantize_bits')

    @property
    def active(self):
        return bool(self.noise_std or self.truncate_dim or self.quantize_bits)


def defense_basis(defense, dim):
    """
    Fixed random orthonormal d x d basis of a defense, drawn from its seed
    """
    g = Rng(defense.seed).split('basis').normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)[None, :]


def quantize(x, bits):
    """
    Uniform symmetric quantizer with 2**bits buckets on [-1, 1], returning
    bucket centers
    """
    levels = 2 ** int(bits)
    width = 2.0 / levels
    idx = np.clip(np.floor((np.asarray(x) + 1.0) / width), 0, levels - 1)
    return -1.0 + (idx + 0.5) * width


def apply_defense(embedding, defense, rng, basis=None):
    """
    truncate/project, then quantize, then add noise. Noisy outputs are not
    re-normalized.

    :param embedding: Unit-norm victim embedding
    :param defense:   DefenseConfig
    :param rng:       Rng drawing the noise
    :param basis:     Optional precomputed defense_basis
    """
    y = np.array(embedding, dtype=np.float64)
    if defense.truncate_dim is not None:
        t = int(defense.truncate_dim)
        if t > len(y):
            raise ConfigError("truncate_dim %d exceeds the embedding "
                              "dimension %d" % (t, len(y)),
                              field='truncate_dim')
        if basis is None:
            basis = defense_basis(defense, len(y))
        coords = basis[:, :t].T @ y
        norm = np.linalg.norm(coords)
        if norm > 0:
            coords = coords / norm
        y = coords if defense.truncate_output == 'coordinates' \
            else basis[:, :t] @ coords
    if defense.quantize_bits is not None:
        y = quantize(y, defense.quantize_bits)
    if defense.noise_std:
        sigma = float(defense.noise_std)
        if defense.noise_kind == 'laplacian':
            y = y + rng.laplace(0.0, sigma / np.sqrt(2.0), size=y.shape)
        else:
            y = y + rng.normal(0.0, sigma, size=y.shape)
    return y


class QueryRecord(object):
    """
    One answered query: the submitted subgraph and the returned embedding
    """

    def __init__(self, subgraph, embedding, query_index):
        self.subgraph = subgraph
        self.embedding = np.asarray(embedding, dtype=np.float64)
        self.query_index = int(query_index)

    @property
    def graph_id(self):
        return self.subgraph.graph_id

    @property
    def center(self):
        return self.subgraph.center

    @property
    def origin(self):
        return self.subgraph.origin

    def dictify(self):
        d = OrderedDict()
        d['query_index'] = self.query_index
        d['graph_id'] = self.graph_id
        d['center'] = self.center
        d['origin'] = self.origin
        d['node_count'] = self.subgraph.size
        d['embedding'] = self.embedding.tolist()
        return d

    def __repr__(self):
        return "QueryRecord(#%d, %s:%d)" % (self.query_index, self.graph_id,
                                            self.center)


class VictimHandle(object):
    """
    Black-box access to a victim encoder: subgraphs in, defended embeddings
    out, with budget and per-session rate accounting.

    :param victim:  The victim Encoder, kept private to the handle
    :param budget:  Maximum number of queries, None for unlimited
    :param defense: DefenseConfig applied to every answer
    :param name:    Name of the handle, used for logging and transcripts
    :param lab:     Optional Lab, enables the VictimQuery watchmen
    """

    def __init__(self, victim, budget=None, defense=None, name='victim',
                 lab=None):
        if budget is not None and int(budget) < 0:
            raise ConfigError("budget must be >= 0", field='budget')
        self.__victim = victim
        self.budget = None if budget is None else int(budget)
        self.defense = DefenseConfig.from_dict(defense)
        self.name = name
        self.lab = lab
        self.spent = 0
        self._sessions = {}
        self._lock = threading.Lock()
        self._embed_dim = victim.config.output_dim
        self._noise_rng = Rng(self.defense.seed).split('noise/%s' % name)
        self._basis = (defense_basis(self.defense, self._embed_dim)
                       if self.defense.truncate_dim is not None else None)
        if self.defense.truncate_dim is not None and \
                self.defense.truncate_dim > self._embed_dim:
            raise ConfigError("truncate_dim %d exceeds the embedding "
                              "dimension %d" % (self.defense.truncate_dim,
                                                self._embed_dim),
                              field='truncate_dim')
        self.log = logging.getLogger('gfmlab.victim_api.%s' % name)

    @property
    def output_dim(self):
        if self.defense.truncate_dim is not None and \
                self.defense.truncate_output == 'coordinates':
            return int(self.defense.truncate_dim)
        return self._embed_dim

    @property
    def remaining(self):
        return None if self.budget is None else self.budget - self.spent

    def session_count(self, session='default'):
        return self._sessions.get(session, 0)

    @watch('VictimQuery')
    def query(self, subgraph, session='default'):
        """
        :returns: QueryRecord holding the defended embedding
        """
        with self._lock:
            if self.budget is not None and self.spent >= self.budget:
                raise BudgetExhaustedError(
                    "Handle %s: query budget of %d exhausted" %
                    (self.name, self.budget), self.spent)
            limit = self.defense.rate_limit
            if limit is not None and self._sessions.get(session, 0) >= limit:
                raise ThrottleError("Handle %s: session %s exceeded %d "
                                    "queries" % (self.name, session, limit))
            embedding = self.__victim.encode_subgraph(subgraph)
            if self.defense.active:
                embedding = apply_defense(embedding, self.defense,
                                          self._noise_rng, self._basis)
            record = QueryRecord(subgraph, embedding, self.spent)
            self.spent += 1
            self._sessions[session] = self._sessions.get(session, 0) + 1
        self.log.debug("Query #%d on %s:%d (%d nodes)" %
                       (record.query_index, record.graph_id, record.center,
                        subgraph.size))
        return record

    def query_many(self, subgraphs, session='default'):
        return [self.query(s, session=session) for s in subgraphs]

    def __repr__(self):
        return "VictimHandle(%s, spent=%d, budget=%s)" % (self.name,
                                                           self.spent,
                                                           self.budget)
