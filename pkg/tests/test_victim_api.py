import glob
import threading
from os import path

import numpy as np
import pytest

import gfmlab.attacks
from gfmlab.autodiff import Rng
from gfmlab.data import sample_subgraph
from gfmlab.errors import BudgetExhaustedError, ConfigError, ThrottleError
from gfmlab.victim_api import DefenseConfig, VictimHandle, apply_defense, \
    defense_basis, quantize

D = 32


def unit_vector(seed=0, d=D):
    x = np.random.RandomState(seed).normal(size=d)
    return x / np.linalg.norm(x)


def test_no_defense_is_identity():
    x = unit_vector()
    y = apply_defense(x, DefenseConfig(), Rng(0))
    assert np.array_equal(x, y)


def test_full_rank_truncation_renormalizes_input():
    x = unit_vector(1) * 3.0
    y = apply_defense(x, DefenseConfig(truncate_dim=D), Rng(0))
    assert np.allclose(y, x / 3.0, atol=1e-10)


def test_truncation_coordinates():
    defense = DefenseConfig(truncate_dim=8, truncate_output='coordinates')
    x = unit_vector(2)
    y = apply_defense(x, defense, Rng(0))
    assert y.shape == (8,)
    assert abs(np.linalg.norm(y) - 1.0) < 1e-12
    lifted = defense_basis(defense, D)[:, :8] @ y
    ambient = apply_defense(x, DefenseConfig(truncate_dim=8), Rng(0))
    assert np.allclose(lifted, ambient, atol=1e-12)


def test_defense_basis_is_orthonormal_and_seeded():
    q = defense_basis(DefenseConfig(seed=3), D)
    assert np.allclose(q.T @ q, np.eye(D), atol=1e-10)
    assert np.array_equal(q, defense_basis(DefenseConfig(seed=3), D))
    assert not np.allclose(q, defense_basis(DefenseConfig(seed=4), D))


def test_one_bit_quantization():
    y = quantize(np.array([-1.0, -0.3, 0.0, 0.7, 1.0]), 1)
    assert y.tolist() == [-0.5, -0.5, 0.5, 0.5, 0.5]


def test_quantization_defense_after_projection():
    x = unit_vector(5)
    y = apply_defense(x, DefenseConfig(quantize_bits=1), Rng(0))
    assert set(np.abs(y).tolist()) == {0.5}
    assert np.array_equal(np.sign(y), np.where(x >= 0, 1.0, -1.0))


@pytest.mark.parametrize('kind', ['gaussian', 'laplacian'])
def test_noise_energy(kind):
    defense = DefenseConfig(noise_std=0.1, noise_kind=kind)
    rng = Rng(11)
    x = unit_vector(6)
    energy = np.mean([np.sum((apply_defense(x, defense, rng) - x) ** 2)
                      for _ in range(1000)])
    assert abs(energy - 0.32) < 0.032


def test_noisy_output_is_not_renormalized():
    x = unit_vector(7)
    y = apply_defense(x, DefenseConfig(noise_std=0.5), Rng(0))
    assert abs(np.linalg.norm(y) - 1.0) > 1e-6


def test_defense_config_validation():
    with pytest.raises(ConfigError):
        DefenseConfig(noise_std=-1.0)
    with pytest.raises(ConfigError):
        DefenseConfig(truncate_dim=0)
    with pytest.raises(ConfigError) as e:
        DefenseConfig(truncate_dim=4, quantize_bits=2)
    assert e.value.field == 'quantize_bits'
    with pytest.raises(ConfigError):
        DefenseConfig(noise_kind='uniform')
    assert DefenseConfig(truncate_dim=4, noise_std=0.1).active


@pytest.fixture
def subgraphs(tiny_corpus, sampler_config):
    g = tiny_corpus.eval_graphs[0]
    return [sample_subgraph(g, v, sampler_config) for v in range(6)]


def test_handle_without_defense_matches_victim(tiny_victim, subgraphs):
    handle = VictimHandle(tiny_victim)
    record = handle.query(subgraphs[0])
    assert np.array_equal(record.embedding,
                          tiny_victim.encode_subgraph(subgraphs[0]))
    assert record.query_index == 0
    assert record.graph_id == subgraphs[0].graph_id
    assert handle.spent == 1 and handle.remaining is None


def test_budget_is_enforced(tiny_victim, subgraphs):
    handle = VictimHandle(tiny_victim, budget=4)
    records = handle.query_many(subgraphs[:4])
    assert [r.query_index for r in records] == [0, 1, 2, 3]
    with pytest.raises(BudgetExhaustedError) as e:
        handle.query(subgraphs[4])
    assert e.value.spent == 4
    assert handle.spent == 4 and handle.remaining == 0


def test_rate_limit_per_session(tiny_victim, subgraphs):
    handle = VictimHandle(tiny_victim, defense=dict(rate_limit=2))
    handle.query_many(subgraphs[:2], session='alice')
    with pytest.raises(ThrottleError):
        handle.query(subgraphs[2], session='alice')
    handle.query(subgraphs[2], session='bob')
    assert handle.session_count('alice') == 2
    assert handle.session_count('bob') == 1
    assert handle.spent == 3


def test_handle_output_dim(tiny_victim):
    assert VictimHandle(tiny_victim).output_dim == D
    coords = dict(truncate_dim=6, truncate_output='coordinates')
    assert VictimHandle(tiny_victim, defense=coords).output_dim == 6
    assert VictimHandle(tiny_victim,
                        defense=dict(truncate_dim=6)).output_dim == D
    with pytest.raises(ConfigError):
        VictimHandle(tiny_victim, defense=dict(truncate_dim=D + 1))


def test_defended_outputs_are_reproducible(tiny_victim, subgraphs):
    defense = dict(noise_std=0.2, seed=9)
    a = VictimHandle(tiny_victim, defense=defense).query_many(subgraphs)
    b = VictimHandle(tiny_victim, defense=defense).query_many(subgraphs)
    for ra, rb in zip(a, b):
        assert np.array_equal(ra.embedding, rb.embedding)


def test_concurrent_queries_respect_budget(tiny_victim, subgraphs):
    handle = VictimHandle(tiny_victim, budget=10)
    failures = []

    def worker():
        for s in subgraphs:
            try:
                handle.query(s)
            except BudgetExhaustedError:
                failures.append(1)

    threads = [threading.Thread(target=worker) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert handle.spent == 10
    assert len(failures) == 4 * len(subgraphs) - 10


def test_handle_hides_victim(tiny_victim):
    handle = VictimHandle(tiny_victim)
    public = [name for name in dir(handle) if not name.startswith('_')]
    for name in public:
        assert getattr(handle, name) is not tiny_victim


def test_attacks_never_touch_victim_internals():
    forbidden = ('_VictimHandle__victim', 'parameter_vector', 'load_encoder',
                 'encode_subgraph', '.parameters')
    package = path.dirname(gfmlab.attacks.__file__)
    sources = glob.glob(path.join(package, '*.py'))
    assert sources
    for source in sources:
        with open(source) as f:
            text = f.read()
        for token in forbidden:
            assert token not in text, '%s uses %s' % (source, token)
