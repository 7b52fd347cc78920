import numpy as np

from ..errors import DimensionError, UndefinedMetricError


def zero_shot_predict(embedding, label_matrix):
    """
    Nearest label sentence by dot product, ties broken by the lowest index.

    :returns: (class index, similarity vector over the K labels)
    """
    sims = np.asarray(label_matrix) @ np.asarray(embedding)
    return int(np.argmax(sims)), sims


class PredictionSet(object):
    """
    Zero-shot predictions over a set of nodes

    :ivar node_ids:     Predicted nodes
    :ivar predictions:  Class index per node
    :ivar similarities: N x K similarity matrix
    """

    def __init__(self, node_ids, predictions, similarities):
        self.node_ids = np.asarray(node_ids, dtype=np.int64)
        self.predictions = np.asarray(predictions, dtype=np.int64)
        self.similarities = np.asarray(similarities, dtype=np.float64)

    def __len__(self):
        return len(self.node_ids)


def predict_many(embeddings, label_matrix, node_ids=None):
    embeddings = np.asarray(embeddings, dtype=np.float64)
    sims = embeddings @ np.asarray(label_matrix).T
    if node_ids is None:
        node_ids = np.arange(len(embeddings))
    return PredictionSet(node_ids, np.argmax(sims, axis=1), sims)


def _agreement(name, a, b):
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError("%s: %d vs %d entries" % (name, a.size, b.size))
    if a.size == 0:
        raise UndefinedMetricError("%s of an empty set is undefined" % name)
    return float(np.mean(a == b))


def accuracy(predictions, labels):
    return _agreement('accuracy', predictions, labels)


def fidelity(attacker_predictions, victim_predictions):
    return _agreement('fidelity', attacker_predictions, victim_predictions)
