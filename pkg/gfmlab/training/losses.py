import numpy as np

from ..autodiff import ops
from ..autodiff.tensor import Tensor, as_tensor
from ..errors import ConfigError, ContractError, DimensionError, \
    MissingDataError

UNIT_TOLERANCE = 1e-6


def _check_unit_rows(name, x):
    norms = np.sqrt((x * x).sum(axis=1))
    bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_TOLERANCE)
    if bad.size:
        raise ContractError("%s row %d has norm %.9g, expected unit rows" %
                            (name, bad[0], norms[bad[0]]))


def contrastive_loss(graph_embs, text_embs, temperature):
    """
    Graph-to-text InfoNCE: -1/N sum_i log softmax_j(<g_i, t_j> / tau)_i

    :param graph_embs:  N x d Tensor of unit rows
    :param text_embs:   N x d unit rows, treated as constants
    :param temperature: tau > 0
    """
    graph_embs, text_embs = as_tensor(graph_embs), as_tensor(text_embs)
    if temperature <= 0:
        raise ConfigError("temperature must be positive", field='temperature')
    if graph_embs.shape != text_embs.shape:
        raise DimensionError("contrastive_loss: %s graph vs %s text rows" %
                             (graph_embs.shape, text_embs.shape))
    _check_unit_rows('graph_embs', graph_embs.data)
    _check_unit_rows('text_embs', text_embs.data)
    n = graph_embs.shape[0]
    logits = ops.scale(ops.matmul(graph_embs, ops.transpose(text_embs)),
                       1.0 / temperature)
    log_p = ops.log_softmax_rows(logits)
    diagonal = ops.sum_all(ops.mul(log_p, as_tensor(np.eye(n))))
    return ops.scale(diagonal, -1.0 / n)


def mse_regression_loss(attacker_embs, victim_embs):
    """
    sum_i ||a_i - b_i||^2, victim embeddings are constants
    """
    victim_embs = Tensor(as_tensor(victim_embs).data)
    diff = ops.sub(as_tensor(attacker_embs), victim_embs)
    return ops.sum_all(ops.mul(diff, diff))


def combined_loss(attacker_embs, victim_embs, text_embs=None, temperature=0.07,
                  lambda_mse=1.0, lambda_contrast=0.0):
    """
    lambda_mse * mse + lambda_contrast * contrastive(attacker, text)
    """
    loss = ops.scale(mse_regression_loss(attacker_embs, victim_embs),
                     lambda_mse)
    if lambda_contrast:
        if text_embs is None:
            raise MissingDataError("lambda_contrast = %g needs text "
                                   "embeddings" % lambda_contrast)
        loss = ops.add(loss, ops.scale(
            contrastive_loss(attacker_embs, text_embs, temperature),
            lambda_contrast))
    return loss
