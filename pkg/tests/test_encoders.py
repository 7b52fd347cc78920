import numpy as np
import pytest

from gfmlab.autodiff import Tensor, gradient_check
from gfmlab.autodiff import ops
from gfmlab.data import Subgraph, normalize_adjacency
from gfmlab.encoders import EncoderConfig, GATEncoder, GCNEncoder, \
    build_encoder, encoder_from_bytes, gat_layer_forward, \
    gcn_layer_forward, load_encoder
from gfmlab.encoders.encoder import default_attacker_config, \
    default_victim_config
from gfmlab.errors import ConfigError, DimensionError
from gfmlab.training import contrastive_loss, mse_regression_loss


def random_subgraph(n, dim=36, seed=0, pe_dim=0):
    rs = np.random.RandomState(seed)
    a = np.triu((rs.rand(n, n) > 0.5).astype(float), 1)
    a = a + a.T
    return Subgraph('random', 0, np.arange(n), rs.normal(size=(n, dim)), a,
                    np.zeros((n, pe_dim)))


def test_gcn_layer_isolated_node():
    out = gcn_layer_forward(normalize_adjacency(np.zeros((1, 1))),
                            Tensor([[2.0]]), Tensor([[0.5]]))
    assert out.data.tolist() == [[1.0]]


def test_gcn_layer_two_node_path():
    a_norm = normalize_adjacency(np.array([[0.0, 1.0], [1.0, 0.0]]))
    out = gcn_layer_forward(a_norm, Tensor([[1.0], [3.0]]), Tensor([[1.0]]))
    assert np.allclose(out.data, [[2.0], [2.0]], atol=1e-12)


def test_gcn_layer_zero_weight():
    a_norm = normalize_adjacency(np.array([[0.0, 1.0], [1.0, 0.0]]))
    out = gcn_layer_forward(a_norm, Tensor([[1.0], [3.0]]),
                            Tensor([[0.0, 0.0]]))
    assert out.data.tolist() == [[0.0, 0.0], [0.0, 0.0]]


def test_gat_layer_isolated_node():
    w = Tensor([[1.0, -2.0], [0.5, 1.0]])
    h = Tensor([[1.0, 2.0]])
    head = (w, Tensor([[0.3], [0.7]]), Tensor([[-0.1], [0.4]]))
    out = gat_layer_forward(np.zeros((1, 1)), h, [head])
    assert np.allclose(out.data, np.maximum(h.data @ w.data, 0), atol=1e-12)


def test_gat_layer_zero_attention_is_mean():
    adjacency = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    rs = np.random.RandomState(2)
    h, w = Tensor(rs.normal(size=(3, 4))), Tensor(rs.normal(size=(4, 2)))
    zero = Tensor(np.zeros((2, 1)))
    out = gat_layer_forward(adjacency, h, [(w, zero, zero)], activation=False)
    wh = h.data @ w.data
    expected = (adjacency + np.eye(3)) @ wh / (adjacency + np.eye(3)).sum(
        axis=1, keepdims=True)
    assert np.allclose(out.data, expected, atol=1e-12)


def dense_gat_head(adjacency, h, w, a_src, a_dst):
    wh = h @ w
    n = len(h)
    out = np.zeros_like(wh)
    for v in range(n):
        nbrs = [u for u in range(n) if u == v or adjacency[v, u]]
        e = np.array([float(a_src[:, 0] @ wh[v] + a_dst[:, 0] @ wh[u])
                      for u in nbrs])
        e = np.where(e > 0, e, 0.2 * e)
        alpha = np.exp(e - e.max())
        alpha /= alpha.sum()
        out[v] = sum(a * wh[u] for a, u in zip(alpha, nbrs))
    return out


def test_gat_layer_matches_dense_star():
    adjacency = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    rs = np.random.RandomState(5)
    h = rs.normal(size=(3, 4))
    heads = [(rs.normal(size=(4, 3)), rs.normal(size=(3, 1)),
              rs.normal(size=(3, 1))) for _ in range(2)]
    out = gat_layer_forward(adjacency, Tensor(h),
                            [tuple(Tensor(p) for p in head)
                             for head in heads], activation=False)
    expected = np.hstack([dense_gat_head(adjacency, h, *head)
                          for head in heads])
    assert np.abs(out.data - expected).max() < 1e-10


def test_parameter_counts():
    gcn = GCNEncoder(EncoderConfig(family='gcn', layers=1))
    assert gcn.count_parameters() == 36 * 32
    gat = GATEncoder(EncoderConfig(family='gat', layers=1))
    assert gat.count_parameters() == 36 * 32 + 2 * 32
    assert build_encoder(default_victim_config()).count_parameters() == 16192
    assert build_encoder(default_attacker_config('gcn')).count_parameters() \
        == 2176
    assert build_encoder(default_attacker_config('gat')).count_parameters() \
        == 2304


def test_doubling_hidden_quadruples_middle_layer():
    small = GCNEncoder(EncoderConfig(layers=3, hidden_dim=16))
    large = GCNEncoder(EncoderConfig(layers=3, hidden_dim=32))
    assert small.parameters[1].data.size * 4 == \
        large.parameters[1].data.size


def test_victim_is_larger_than_attackers():
    victim = build_encoder(default_victim_config()).count_parameters()
    for family in ('gcn', 'gat'):
        attacker = build_encoder(default_attacker_config(family))
        assert victim > 4 * attacker.count_parameters()


def test_config_validation():
    with pytest.raises(ConfigError):
        EncoderConfig(family='gps')
    with pytest.raises(ConfigError):
        EncoderConfig(family='gat', hidden_dim=30, heads=4)


@pytest.mark.parametrize('family', ['gcn', 'gat'])
def test_single_node_readout(family):
    encoder = build_encoder(EncoderConfig(family=family, heads=1))
    s = random_subgraph(1)
    nodes = encoder.node_representations(s).data
    assert np.allclose(encoder.encode_subgraph(s),
                       nodes[0] / np.linalg.norm(nodes[0]), atol=1e-12)


@pytest.mark.parametrize('family', ['gcn', 'gat'])
def test_isomorphic_subgraphs_embed_identically(family):
    encoder = build_encoder(EncoderConfig(family=family, heads=2,
                                          init_seed=3))
    s = random_subgraph(5, seed=1)
    perm = np.array([3, 0, 4, 1, 2])
    t = Subgraph('other', 3, np.arange(5), s.features[perm],
                 s.adjacency[np.ix_(perm, perm)], s.positional[perm])
    assert np.allclose(encoder.encode_subgraph(s), encoder.encode_subgraph(t),
                       atol=1e-12)


def test_embeddings_have_unit_norm():
    encoder = build_encoder(default_victim_config())
    for trial in range(100):
        s = random_subgraph(1 + trial % 7, seed=trial, dim=32, pe_dim=4)
        assert abs(np.linalg.norm(encoder.encode_subgraph(s)) - 1) < 1e-12


def test_center_readout():
    encoder = build_encoder(EncoderConfig(readout='center'))
    s = random_subgraph(4, seed=9)
    nodes = encoder.node_representations(s).data
    assert np.allclose(encoder.encode_subgraph(s),
                       nodes[0] / np.linalg.norm(nodes[0]), atol=1e-12)


def test_input_width_checked():
    with pytest.raises(DimensionError):
        build_encoder(EncoderConfig()).encode_subgraph(random_subgraph(3,
                                                                       dim=8))


@pytest.mark.parametrize('family', ['gcn', 'gat'])
def test_encoder_gradients(family):
    config = EncoderConfig(family=family, layers=2, hidden_dim=4, heads=2,
                           input_dim=5, output_dim=4, bias=True)
    for seed in range(10):
        encoder = build_encoder(config.replace(init_seed=seed))
        subgraphs = [random_subgraph(6, dim=5, seed=10 * seed + i)
                     for i in range(2)]
        rs = np.random.RandomState(seed)
        targets = rs.normal(size=(2, 4))
        targets /= np.linalg.norm(targets, axis=1, keepdims=True)

        def mse():
            return mse_regression_loss(encoder.encode_batch(subgraphs),
                                       targets)

        def contrastive():
            return contrastive_loss(encoder.encode_batch(subgraphs), targets,
                                    0.5)

        assert gradient_check(mse, encoder.parameters) < 1e-4
        assert gradient_check(contrastive, encoder.parameters) < 1e-4


def test_gcn_layer_loss_gradient():
    a_norm = normalize_adjacency(np.array([[0, 1, 0, 0], [1, 0, 1, 1],
                                           [0, 1, 0, 0], [0, 1, 0, 0]],
                                          dtype=float))
    rs = np.random.RandomState(0)
    h = Tensor(rs.normal(size=(4, 3)))
    w = Tensor(rs.normal(size=(3, 2)), requires_grad=True, name='W')

    def forward():
        out = gcn_layer_forward(a_norm, h, w)
        return ops.sum_all(ops.mul(out, out))

    assert gradient_check(forward, [w]) < 1e-4


def test_checkpoint_round_trip(tmpdir):
    encoder = build_encoder(default_attacker_config('gat', init_seed=4))
    path = str(tmpdir.join('encoder.ckpt'))
    encoder.save(path)
    loaded = load_encoder(path)
    assert loaded.parameter_hash() == encoder.parameter_hash()
    assert loaded.config == encoder.config
    assert loaded.to_bytes() == encoder.to_bytes()


def test_malformed_checkpoint():
    with pytest.raises(ConfigError):
        encoder_from_bytes(b'no header here')
    blob = build_encoder(EncoderConfig()).to_bytes()
    with pytest.raises(ConfigError):
        encoder_from_bytes(blob[:-8])


def test_init_seed_changes_parameters():
    a = build_encoder(EncoderConfig(init_seed=1))
    b = build_encoder(EncoderConfig(init_seed=2))
    assert a.parameter_hash() != b.parameter_hash()
