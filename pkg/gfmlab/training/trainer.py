import csv
import logging
import time
from collections import OrderedDict

import numpy as np

from ..autodiff.rng import Rng
from ..autodiff.tensor import ComputeTape, backward
from ..config import ConfigObject
from ..data.sampling import SamplerConfig, sample_subgraph, split_nodes
from ..encoders import build_encoder
from ..errors import ConfigError, ContractError, DimensionError, \
    MissingDataError
from ..watchmen import watch
from .losses import combined_loss, contrastive_loss
from .optim import AdamW


class TrainConfig(ConfigObject):
    """
    Optimization settings. loss_weights holds (lambda_mse, lambda_contrast);
    centers selects the pretraining centers, 'train' (training split) or
    'all' nodes.
    """

    FIELDS = (
        ('learning_rate', 1e-4),
        ('weight_decay', 1e-5),
        ('batch_size', 32),
        ('epochs', 2),
        ('temperature', 0.07),
        ('loss_weights', [1.0, 0.0]),
        ('centers', 'train'),
        ('seed', 0),
    )

    def validate(self):
        if not float(self.learning_rate) > 0:
            raise ConfigError("learning_rate must be positive",
                              field='learning_rate')
        if float(self.weight_decay) < 0:
            raise ConfigError("weight_decay must be >= 0",
                              field='weight_decay')
        if not float(self.temperature) > 0:
            raise ConfigError("temperature must be positive",
                              field='temperature')
        if int(self.batch_size) < 1:
            raise ConfigError("batch_size must be >= 1", field='batch_size')
        if int(self.epochs) < 0:
            raise ConfigError("epochs must be >= 0", field='epochs')
        if len(self.loss_weights) != 2 or min(self.loss_weights) < 0:
            raise ConfigError("loss_weights must be two non-negative numbers",
                              field='loss_weights')
        if self.centers not in ('train', 'all'):
            raise ConfigError("centers must be 'train' or 'all'",
                              field='centers')

    @property
    def lambda_mse(self):
        return float(self.loss_weights[0])

    @property
    def lambda_contrast(self):
        return float(self.loss_weights[1])


class TrainLog(object):
    """
    Outcome of one training run.

    :ivar losses:       Mean loss per epoch
    :ivar wall_seconds: Wall time per epoch
    :ivar initial_loss: Mean loss before the first update, when measured
    :ivar param_hash:   sha256 of the final parameters
    """

    def __init__(self, name, n_examples):
        self.name = name
        self.n_examples = n_examples
        self.losses = []
        self.wall_seconds = []
        self.initial_loss = None
        self.param_hash = None

    @property
    def total_wall_seconds(self):
        return float(sum(self.wall_seconds))

    @property
    def final_loss(self):
        return self.losses[-1] if self.losses else self.initial_loss

    def append(self, loss, seconds):
        if not np.isfinite(loss):
            raise ContractError("%s: epoch %d loss is not finite" %
                                (self.name, len(self.losses) + 1))
        self.losses.append(float(loss))
        self.wall_seconds.append(float(seconds))

    def rows(self):
        return [(i + 1, l, s) for i, (l, s) in
                enumerate(zip(self.losses, self.wall_seconds))]

    def to_csv(self, path):
        with open(path, 'w') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(['epoch', 'mean_loss', 'wall_seconds'])
            for epoch, loss, seconds in self.rows():
                writer.writerow([epoch, repr(loss), '%.6f' % seconds])

    def dictify(self):
        d = OrderedDict()
        d['name'] = self.name
        d['n_examples'] = self.n_examples
        d['initial_loss'] = self.initial_loss
        d['losses'] = self.losses
        d['param_hash'] = self.param_hash
        return d

    def __repr__(self):
        return "TrainLog(%s, epochs=%d, final_loss=%s)" % (
            self.name, len(self.losses), self.final_loss)


class Trainer(object):
    """
    Seeded mini-batch loop driving an AdamW optimizer over an encoder.

    :param encoder:      The encoder whose parameters are trained
    :param train_config: TrainConfig
    :param name:         Name used for logging and the shuffling stream
    :param lab:          Optional Lab, enables the TrainEpoch watchmen
    """

    def __init__(self, encoder, train_config, name='trainer', lab=None):
        self.encoder = encoder
        self.config = TrainConfig.from_dict(train_config)
        self.name = name
        self.lab = lab
        self.optimizer = AdamW(encoder.parameters, self.config.learning_rate,
                               self.config.weight_decay)
        self.rng = Rng(self.config.seed).split('shuffle/%s' % name)
        self.log = logging.getLogger('gfmlab.training.%s' % name)

    def batches(self, n, epoch):
        """
        Shuffled index batches of one epoch. A trailing batch of size 1 is
        merged into the previous one.
        """
        perm = self.rng.split('epoch%d' % epoch).permutation(n)
        size = self.config.batch_size
        batches = [perm[i:i + size] for i in range(0, n, size)]
        if len(batches) > 1 and len(batches[-1]) == 1:
            self.log.warning("Merging trailing batch of size 1 into the "
                             "previous batch in epoch %d" % epoch)
            batches[-2] = np.concatenate([batches[-2], batches[-1]])
            batches.pop()
        return batches

    @watch('TrainEpoch')
    def run_epoch(self, epoch, n_examples, loss_fn):
        """
        :param loss_fn: maps an index batch to (loss Tensor, mean loss per
                        example)
        :returns:       mean loss per example over the epoch
        """
        total = 0.0
        for batch in self.batches(n_examples, epoch):
            self.optimizer.zero_grad()
            with ComputeTape() as tape:
                loss, per_example = loss_fn(batch)
            backward(tape, loss)
            self.optimizer.step()
            total += per_example * len(batch)
        return total / n_examples

    def fit(self, n_examples, loss_fn, epochs=None):
        epochs = self.config.epochs if epochs is None else epochs
        train_log = TrainLog(self.name, n_examples)
        for epoch in range(1, epochs + 1):
            start = time.perf_counter()
            mean_loss = self.run_epoch(epoch, n_examples, loss_fn)
            train_log.append(mean_loss, time.perf_counter() - start)
            self.log.info("%s epoch %d/%d: mean loss %.6f" %
                          (self.name, epoch, epochs, mean_loss))
        train_log.param_hash = self.encoder.parameter_hash()
        return train_log


def pretraining_centers(graphs, train_config, sampler_config):
    """
    (graph, center) pairs used for contrastive pretraining
    """
    examples = []
    for g in graphs:
        if train_config.centers == 'all':
            ids = range(g.node_count)
        else:
            ids = split_nodes(g, sampler_config.split_seed).train_ids
        examples.extend((g, int(v)) for v in ids)
    return examples


def pretrain_victim(pretrain_graphs, summaries, text_encoder, encoder_config,
                    train_config, sampler_config=None, lab=None):
    """
    Contrastive graph-text pretraining of a fresh encoder. The text encoder
    stays frozen.

    :param pretrain_graphs: Featurized TextAttributedGraphs
    :param summaries:       dict graph_id -> per-node summary strings
    :returns:               (encoder, TrainLog)
    """
    train_config = TrainConfig.from_dict(train_config)
    sampler_config = SamplerConfig.from_dict(sampler_config)
    for g in pretrain_graphs:
        if g.graph_id not in summaries:
            raise MissingDataError("No summaries for pretraining graph %s" %
                                   g.graph_id)
        if len(summaries[g.graph_id]) != g.node_count:
            raise MissingDataError("Graph %s has %d summaries for %d nodes" %
                                   (g.graph_id, len(summaries[g.graph_id]),
                                    g.node_count))
    examples = pretraining_centers(pretrain_graphs, train_config,
                                   sampler_config)
    if not examples:
        raise MissingDataError("No pretraining centers")

    encoder = build_encoder(encoder_config)
    if encoder.config.output_dim != text_encoder.embed_dim:
        raise DimensionError("Encoder output_dim %d differs from the text "
                             "dimension %d" % (encoder.config.output_dim,
                                               text_encoder.embed_dim))
    subgraphs = [sample_subgraph(g, v, sampler_config) for g, v in examples]
    text_embs = np.stack([text_encoder.embed_text(summaries[g.graph_id][v])
                          for g, v in examples])

    def loss_fn(batch):
        loss = contrastive_loss(
            encoder.encode_batch([subgraphs[i] for i in batch]),
            text_embs[batch], train_config.temperature)
        return loss, loss.item()

    trainer = Trainer(encoder, train_config, name='victim', lab=lab)
    trainer.log.info("Pretraining %r on %d centers from %d graphs" %
                     (encoder, len(examples), len(pretrain_graphs)))
    return encoder, trainer.fit(len(examples), loss_fn)


def normalize_rows(x):
    x = np.asarray(x, dtype=np.float64)
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    return np.where(norms > 0, x / np.where(norms > 0, norms, 1.0), x)


def train_attacker(query_records, attacker_config, train_config,
                   normalize_targets=True, text_embeddings=None, name='attacker',
                   lab=None):
    """
    Embedding regression of a fresh attacker encoder onto the returned victim
    embeddings.

    The optimizer minimizes the summed loss of each batch, the log reports
    the mean per record.

    :param query_records:   QueryRecords (subgraph + returned embedding)
    :param text_embeddings: N x d text rows, needed when lambda_contrast > 0
    :returns:               (encoder, TrainLog)
    """
    if not query_records:
        raise MissingDataError("Cannot train an attacker without queries")
    train_config = TrainConfig.from_dict(train_config)
    encoder = build_encoder(attacker_config)
    subgraphs = [r.subgraph for r in query_records]
    targets = np.stack([r.embedding for r in query_records])
    if normalize_targets:
        targets = normalize_rows(targets)
    if targets.shape[1] != encoder.config.output_dim:
        raise DimensionError("Attacker output_dim %d differs from the %d "
                             "returned coordinates" %
                             (encoder.config.output_dim, targets.shape[1]))

    def loss_fn(batch):
        texts = text_embeddings[batch] if text_embeddings is not None else None
        loss = combined_loss(encoder.encode_batch([subgraphs[i] for i in batch]),
                             targets[batch], texts, train_config.temperature,
                             train_config.lambda_mse,
                             train_config.lambda_contrast)
        return loss, loss.item() / len(batch)

    trainer = Trainer(encoder, train_config, name=name, lab=lab)
    residual = encoder.encode_many(subgraphs) - targets
    initial_loss = float((residual ** 2).sum(axis=1).mean())
    trainer.log.info("Training %r on %d query records" %
                     (encoder, len(query_records)))
    train_log = trainer.fit(len(query_records), loss_fn)
    train_log.initial_loss = initial_loss
    return encoder, train_log


# Desk-scale victim runs are short, so the step size is larger than the
# TrainConfig default.
VICTIM_LEARNING_RATE = 5e-3


def default_victim_train_config(seed=0):
    return TrainConfig(learning_rate=VICTIM_LEARNING_RATE, epochs=2, seed=seed)
