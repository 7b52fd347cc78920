import json

import numpy as np

from ..errors import ConfigError
from .encoder import Encoder, EncoderConfig, CHECKPOINT_FORMAT, \
    default_victim_config, default_attacker_config
from .gcn_encoder import GCNEncoder, gcn_layer_forward
from .gat_encoder import GATEncoder, gat_layer_forward

ENCODER_CLASSES = {
    'gcn': GCNEncoder,
    'gat': GATEncoder,
}


def build_encoder(config):
    """
    Instantiates the encoder family named by config (EncoderConfig or dict)
    """
    config = EncoderConfig.from_dict(config)
    return ENCODER_CLASSES[config.family](config)


def encoder_from_bytes(blob):
    header, sep, data = blob.partition(b'\n')
    if not sep:
        raise ConfigError("Checkpoint lacks its header line")
    try:
        header = json.loads(header.decode('utf-8'))
    except ValueError as e:
        raise ConfigError("Malformed checkpoint header: %s" % e)
    if header.get('format') != CHECKPOINT_FORMAT:
        raise ConfigError("Unsupported checkpoint format %s" %
                          header.get('format'), field='format')
    encoder = build_encoder(header['config'])
    if len(data) != 8 * header['n_params']:
        raise ConfigError("Checkpoint holds %d bytes of parameters, expected "
                          "%d" % (len(data), 8 * header['n_params']))
    encoder.set_parameter_vector(np.frombuffer(data, dtype='<f8'))
    return encoder


def load_encoder(path):
    with open(path, 'rb') as f:
        return encoder_from_bytes(f.read())
