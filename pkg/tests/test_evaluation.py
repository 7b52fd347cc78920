import json
import math
from os import path

import numpy as np
import pytest

from gfmlab.encoders import EncoderConfig, build_encoder
from gfmlab.errors import ContractError, DimensionError, MissingDataError, \
    UndefinedMetricError
from gfmlab.evaluation import Evaluator, ScenarioReport, accuracy, \
    evaluate_pair, fidelity, lemma1_bound, lemma1_verify_embeddings, \
    predict_many, zero_shot_predict
from gfmlab.victim_api import DefenseConfig, defense_basis

EYE = np.eye(2)


def test_zero_shot_predict():
    label, sims = zero_shot_predict([0.8, 0.6], EYE)
    assert label == 0
    assert sims.tolist() == [0.8, 0.6]
    label, _ = zero_shot_predict([0.8, 0.6], [[1.0, 0.0], [1.0, 0.0]])
    assert label == 0


def test_predict_many():
    predictions = predict_many([[0.8, 0.6], [0.1, 0.9]], EYE, [4, 7])
    assert predictions.predictions.tolist() == [0, 1]
    assert predictions.node_ids.tolist() == [4, 7]
    assert len(predictions) == 2


def test_accuracy_and_fidelity():
    assert accuracy([1, 2, 2, 1], [1, 1, 2, 1]) == 0.75
    assert accuracy([1, 2], [1, 2]) == 1.0
    assert accuracy([1, 1], [2, 2]) == 0.0
    assert fidelity([1, 2, 2, 1], [1, 2, 1, 1]) == 0.75


def test_metrics_of_empty_or_mismatched_sets():
    with pytest.raises(UndefinedMetricError):
        accuracy([], [])
    with pytest.raises(UndefinedMetricError):
        fidelity([], [])
    with pytest.raises(DimensionError):
        fidelity([1, 2], [1])


def test_zero_shot_predict_ignores_positive_scaling():
    rs = np.random.RandomState(12)
    labels = rs.normal(size=(5, 8))
    for _ in range(20):
        embedding = rs.normal(size=8)
        predicted, _ = zero_shot_predict(embedding, labels)
        for c in (1e-3, 0.5, 7.0, 1e4):
            assert zero_shot_predict(c * embedding, labels)[0] == predicted


def test_fidelity_is_symmetric():
    rs = np.random.RandomState(13)
    for _ in range(10):
        a, v = rs.randint(0, 4, size=25), rs.randint(0, 4, size=25)
        assert fidelity(a, v) == fidelity(v, a)
        assert 0.0 <= fidelity(a, v) <= 1.0
        assert 0.0 <= accuracy(a, v) <= 1.0


def test_constant_predictor_fidelity_is_class_frequency():
    victim = np.random.RandomState(14).randint(0, 4, size=40)
    for k in range(4):
        constant = np.full(40, k)
        assert abs(fidelity(constant, victim) - np.mean(victim == k)) < 1e-15


def test_margin_bound_identical_embeddings():
    delta, kappa, holds = lemma1_bound([0.6, 0.8], [0.6, 0.8], EYE, 0.0)
    assert delta <= 0 and kappa == 0.0 and holds


def test_margin_bound_hand_cases():
    delta, kappa, holds = lemma1_bound([0.6, 0.8], [1.0, 0.0], EYE, 0.05)
    assert abs(delta - 0.2) < 1e-12
    assert abs(kappa - math.sqrt(2)) < 1e-12
    assert holds
    _, _, holds = lemma1_bound([0.6, 0.8], [1.0, 0.0], EYE, 0.04)
    assert not holds


def random_unit_rows(rng, n, d):
    x = rng.normal(size=(n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def test_margin_bound_never_fails_with_measured_epsilon():
    rng = np.random.RandomState(0)
    for trial in range(20):
        labels = random_unit_rows(rng, 4, 8)
        b = random_unit_rows(rng, 30, 8)
        a = b + 0.3 * rng.normal(size=b.shape)
        qb = random_unit_rows(rng, 10, 8)
        qa = qb + 0.3 * rng.normal(size=qb.shape)
        diag = lemma1_verify_embeddings(a, b, qa, qb, labels)
        assert len(diag) == 30
        assert len(diag.counterexamples) == 0
        assert diag.frac_bound_holds == 1.0


def test_margin_bound_epsilon_uses_nearest_query():
    b = np.array([[1.0, 0.0]])
    a = np.array([[0.6, 0.8]])
    qb = np.array([[0.0, 1.0], [1.0, 0.0]])
    qa = np.array([[0.0, 1.0], [0.9, 0.1]])
    diag = lemma1_verify_embeddings(a, b, qa, qb, EYE, [5])
    assert diag.coverage_nn.tolist() == [1]
    expected = max(0.0, np.linalg.norm(a[0] - qa[1]),
                   np.linalg.norm(qa[1] - qb[1]))
    assert abs(diag.epsilon[0] - expected) < 1e-12
    assert diag.node_ids.tolist() == [5]
    assert json.loads(json.dumps(diag.dictify()))['bound_holds'] == [True]


def test_margin_bound_needs_queries():
    with pytest.raises(ContractError):
        lemma1_verify_embeddings(EYE, EYE, np.zeros((0, 2)), np.zeros((0, 2)),
                                 EYE)


def test_victim_against_itself(tiny_corpus, tiny_victim, text_encoder,
                               sampler_config):
    report = evaluate_pair(tiny_victim, tiny_victim, tiny_corpus.eval_graphs,
                           text_encoder, sampler_config)
    assert [r['graph_id'] for r in report.rows] == \
        [g.graph_id for g in tiny_corpus.eval_graphs]
    for r in report.rows:
        assert r['fidelity'] == 1.0
        assert r['attacker_acc'] == r['victim_acc']
        assert r['frac_bound_holds'] == 1.0
        assert r['n_test'] == 12
    assert report.lemma_violations == 0
    assert report.attacker_params == report.victim_params == \
        tiny_victim.count_parameters()


def test_coordinate_attackers_are_lifted(tiny_corpus, tiny_victim,
                                         text_encoder, sampler_config):
    attacker = build_encoder(EncoderConfig(output_dim=8))
    evaluator = Evaluator(tiny_victim, text_encoder, sampler_config)
    g = tiny_corpus.eval_graphs[0]
    _, subgraphs, _, _ = evaluator.test_set(g)
    with pytest.raises(DimensionError):
        evaluator.attacker_embeddings(attacker, subgraphs)
    basis = defense_basis(DefenseConfig(truncate_dim=8), 32)
    lifted = evaluator.attacker_embeddings(attacker, subgraphs, basis)
    assert lifted.shape == (len(subgraphs), 32)
    assert np.allclose(np.linalg.norm(lifted, axis=1), 1.0)


def make_report():
    report = ScenarioReport('full_model', kind='full_model')
    report.rows = [dict(graph_id='a', domain='x', attacker_acc=0.5,
                        victim_acc=0.75, fidelity=0.5, n_test=4,
                        frac_bound_holds=1.0, max_delta=0.1),
                   dict(graph_id='b', domain='y', attacker_acc=1.0,
                        victim_acc=1.0, fidelity=1.0, n_test=12,
                        frac_bound_holds=0.5, max_delta=-0.2)]
    report.seed = 0
    report.query_count = 48
    report.attacker_params = 2176
    report.victim_params = 16192
    report.timing['query_seconds'] = 0.25
    return report


def test_report_aggregates():
    report = make_report()
    assert report.mean_fidelity == 0.75
    assert report.mean_attacker_acc == 0.75
    assert report.frac_bound_holds == (4 * 1.0 + 12 * 0.5) / 16
    assert report.row('b')['n_test'] == 12
    with pytest.raises(MissingDataError):
        report.row('c')
    assert math.isnan(ScenarioReport('empty').mean_fidelity)


def test_report_files(tmpdir):
    report = make_report()
    csv_file = path.join(str(tmpdir), 'report.csv')
    json_file = path.join(str(tmpdir), 'report.json')
    report.to_csv(csv_file)
    report.to_json(json_file)
    with open(csv_file) as f:
        lines = f.read().splitlines()
    assert lines[0] == ('graph_id,attacker_acc,victim_acc,fidelity,n_test,'
                        'frac_bound_holds,max_delta')
    assert lines[1] == 'a,0.5,0.75,0.5,4,1.0,0.1'
    with open(json_file) as f:
        first = f.read()
    assert 'query_seconds' not in first

    loaded = ScenarioReport.from_json(json_file)
    assert loaded.run_id == 'full_model-s0-none'
    assert loaded.query_count == 48
    assert loaded.mean_fidelity == report.mean_fidelity
    loaded.to_json(json_file)
    with open(json_file) as f:
        assert f.read() == first
