import logging
from collections import OrderedDict

import numpy as np

from ..errors import ContractError

log = logging.getLogger('gfmlab.evaluation.lemma')

# absorbs rounding in the provable inequality delta <= 3 kappa epsilon
BOUND_TOLERANCE = 1e-12


def lemma1_bound(a, b, label_matrix, epsilon):
    """
    Margin bound for a single node.

    :param a:       Attacker embedding
    :param b:       Victim embedding
    :param epsilon: Closeness radius
    :returns:       (delta, kappa, holds)
    """
    z = np.asarray(label_matrix)
    a, b = np.asarray(a), np.asarray(b)
    c_attack = int(np.argmax(z @ a))
    c_victim = int(np.argmax(z @ b))
    kappa = float(np.linalg.norm(z[c_attack] - z[c_victim]))
    delta = float(a @ z[c_attack] - a @ z[c_victim])
    holds = delta <= 0 or delta < 3.0 * kappa * epsilon + BOUND_TOLERANCE
    return delta, kappa, holds


class LemmaDiagnostics(object):
    """
    Per-node quantities of the margin bound.

    :ivar epsilon:     Largest of the three triangle legs through the nearest
                       queried node
    :ivar kappa:       Distance between the two predicted label embeddings
    :ivar delta:       Attacker similarity margin
    :ivar bound_holds: delta <= 0 or delta < 3 kappa epsilon
    :ivar coverage_nn: Index of the nearest queried node
    """

    def __init__(self, node_ids, epsilon, kappa, delta, bound_holds,
                 coverage_nn):
        self.node_ids = np.asarray(node_ids, dtype=np.int64)
        self.epsilon = np.asarray(epsilon, dtype=np.float64)
        self.kappa = np.asarray(kappa, dtype=np.float64)
        self.delta = np.asarray(delta, dtype=np.float64)
        self.bound_holds = np.asarray(bound_holds, dtype=bool)
        self.coverage_nn = np.asarray(coverage_nn, dtype=np.int64)

    def __len__(self):
        return len(self.node_ids)

    @property
    def frac_bound_holds(self):
        return float(self.bound_holds.mean()) if len(self) else float('nan')

    @property
    def max_delta(self):
        return float(self.delta.max()) if len(self) else float('nan')

    @property
    def counterexamples(self):
        return self.node_ids[~self.bound_holds]

    def dictify(self):
        d = OrderedDict()
        d['node_ids'] = self.node_ids.tolist()
        d['epsilon'] = self.epsilon.tolist()
        d['kappa'] = self.kappa.tolist()
        d['delta'] = self.delta.tolist()
        d['bound_holds'] = self.bound_holds.tolist()
        d['coverage_nn'] = self.coverage_nn.tolist()
        return d


def lemma1_verify_embeddings(attacker_embs, victim_embs, query_attacker_embs,
                             query_victim_embs, label_matrix, node_ids=None,
                             graph_id=''):
    """
    Checks the margin bound on every test node against the nearest queried
    node under the victim embedding distance.

    :param attacker_embs:       N x d attacker embeddings of the test nodes
    :param victim_embs:         N x d victim embeddings of the test nodes
    :param query_attacker_embs: M x d attacker embeddings of the queries
    :param query_victim_embs:   M x d clean victim embeddings of the queries
    """
    a = np.asarray(attacker_embs, dtype=np.float64)
    b = np.asarray(victim_embs, dtype=np.float64)
    qa = np.asarray(query_attacker_embs, dtype=np.float64)
    qb = np.asarray(query_victim_embs, dtype=np.float64)
    if not len(qb):
        raise ContractError("The margin bound needs at least one query")
    z = np.asarray(label_matrix, dtype=np.float64)
    if node_ids is None:
        node_ids = np.arange(len(a))

    dist = np.sqrt(np.maximum(
        (b * b).sum(axis=1)[:, None] - 2.0 * b @ qb.T +
        (qb * qb).sum(axis=1)[None, :], 0.0))
    nn = np.argmin(dist, axis=1)
    leg_victim = np.linalg.norm(b - qb[nn], axis=1)
    leg_attacker = np.linalg.norm(a - qa[nn], axis=1)
    leg_cross = np.linalg.norm(qa[nn] - qb[nn], axis=1)
    epsilon = np.maximum(np.maximum(leg_victim, leg_attacker), leg_cross)

    deltas, kappas, holds = [], [], []
    for i in range(len(a)):
        delta, kappa, ok = lemma1_bound(a[i], b[i], z, epsilon[i])
        deltas.append(delta)
        kappas.append(kappa)
        holds.append(ok)
    diag = LemmaDiagnostics(node_ids, epsilon, kappas, deltas, holds, nn)
    for v in diag.counterexamples:
        log.error("Margin bound violated on node %d of %s: this indicates an "
                  "implementation bug" % (v, graph_id))
    return diag


def lemma1_verify(attacker, victim, query_subgraphs, test_subgraphs,
                  label_matrix):
    """
    lemma1_verify_embeddings on encoders and subgraphs
    """
    return lemma1_verify_embeddings(
        attacker.encode_many(test_subgraphs), victim.encode_many(test_subgraphs),
        attacker.encode_many(query_subgraphs),
        victim.encode_many(query_subgraphs), label_matrix,
        [s.center for s in test_subgraphs])
