import numpy as np
import pytest

from gfmlab.config import LabSettings
from gfmlab.errors import ConfigError, EmptyTextError
from gfmlab.text_encoder import FrozenTextEncoder, tokenize


def reference_fnv1a64(text):
    h = 14695981039346656037
    for byte in text.encode('utf-8'):
        h = ((h ^ byte) * 1099511628211) % 2 ** 64
    return h


def test_tokenize():
    assert tokenize('A Graph, about GNN-2!') == ['a', 'graph', 'about',
                                                  'gnn', '2']


def test_embed_text_is_deterministic(text_encoder):
    assert text_encoder.embed_text('graph').tolist() == \
        text_encoder.embed_text('graph').tolist()
    assert FrozenTextEncoder(seed=0).embed_text('graph').tolist() == \
        text_encoder.embed_text('graph').tolist()


def test_embed_text_unit_norm(text_encoder):
    for text in ('graph', 'a social item about friends', 'x y z 1 2 3'):
        assert abs(np.linalg.norm(text_encoder.embed_text(text)) - 1) < 1e-12


def test_bucket_matches_reference_hash(text_encoder):
    for token in ('ai', 'graph', 'academicx3'):
        assert text_encoder.bucket(token) == reference_fnv1a64(token) % 4096


def test_empty_text(text_encoder):
    with pytest.raises(EmptyTextError):
        text_encoder.embed_text('  ...  ')


def test_embed_text_returns_copies(text_encoder):
    v = text_encoder.embed_text('graph')
    v[0] = 42.0
    assert text_encoder.embed_text('graph')[0] != 42.0


def test_projection_is_frozen(text_encoder):
    with pytest.raises(ValueError):
        text_encoder.projection[0, 0] = 1.0


def test_identical_labels_give_identical_rows(text_encoder):
    z = text_encoder.embed_labels(['an item about cats',
                                   'an item about cats'])
    assert z[0].tolist() == z[1].tolist()


def test_distinct_labels_are_distinct():
    sentences = ['an item about cats', 'an item about dogs',
                 'an item about birds']
    for seed in range(100):
        z = FrozenTextEncoder(seed=seed).embed_labels(sentences)
        assert np.abs(np.linalg.norm(z, axis=1) - 1).max() < 1e-12
        cos = z @ z.T
        assert cos[np.triu_indices(3, 1)].max() < 1 - 1e-6


def test_embed_labels_needs_two_sentences(text_encoder):
    with pytest.raises(ConfigError):
        text_encoder.embed_labels(['only one'])


def test_save_load(tmpdir, text_encoder):
    path = str(tmpdir.join('text_encoder.json'))
    text_encoder.save(path)
    loaded = FrozenTextEncoder.load(path)
    assert loaded.fingerprint() == text_encoder.fingerprint()


def test_from_settings(tmpdir, monkeypatch):
    monkeypatch.setenv('GFMLAB_TEXT_EMBED_DIM', '16')
    settings = LabSettings(str(tmpdir.join('settings.cfg')))
    assert FrozenTextEncoder.from_settings(settings).embed_dim == 16
