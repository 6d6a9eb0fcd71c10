import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.feature_extraction.text import TfidfVectorizer

import oracles
from fomcsim.core import StructuredIndicators
from fomcsim.evaluation import (LinearBaseline, MetricsInput, ShapeError, TfidfEmbedder, UndefinedMetricError,
                                UnderdeterminedError, agent_accuracy, average_tokens, compute_metrics, cosine,
                                directional_accuracy, dump_predictions, fit_linear_baseline, headline_prediction,
                                linear_baseline_loo, load_predictions, lr_predict, mae, semantic_similarity,
                                tokenize, total_accuracy, voting_stability)

GRID = [-50, -25, 0, 25, 50]
deltas = st.sampled_from(GRID)


def random_instance(rng: random.Random):
    n = rng.randint(1, 6)
    k = rng.randint(1, 4)
    votes, decisions, tokens = [], [], []
    for _ in range(n):
        r = rng.randint(1, 5)
        votes.append([[rng.choice(GRID) for _ in range(k)] for _ in range(r)])
        decisions.append([rng.choice(GRID) for _ in range(r)])
        tokens.append([rng.randint(0, 100_000) for _ in range(r)])
    actuals = [rng.choice(GRID) for _ in range(n)]
    return votes, decisions, actuals, tokens


def test_metrics_match_oracles_on_random_instances():
    rng = random.Random(1234)
    for _ in range(300):
        votes, decisions, actuals, tokens = random_instance(rng)
        heads = [int(headline_prediction(d)) for d in decisions]
        assert heads == [oracles.headline(d) for d in decisions]
        assert total_accuracy(heads, actuals) == oracles.total_accuracy(heads, actuals)
        assert agent_accuracy(votes, actuals) == oracles.agent_accuracy(votes, actuals)
        assert voting_stability(votes) == oracles.voting_stability(votes)
        assert average_tokens(tokens) == oracles.average_tokens(tokens)
        assert mae(heads, actuals) == oracles.mae(heads, actuals)
        assert directional_accuracy(heads, actuals) == oracles.directional_accuracy(heads, actuals)


def test_hand_computed_values():
    assert total_accuracy([25, 0, 0, -25], [25, 0, 25, -25]) == 0.75
    assert mae([25, 0], [50, 0]) == 0.125
    assert directional_accuracy([25, -25], [50, 0]) == 0.5
    # agent 0 votes 25,25,0 -> agreement 2/3; agent 1 unanimous
    assert voting_stability([[[25, 0], [25, 0], [0, 0]]]) == pytest.approx(5 / 6, abs=0)
    assert average_tokens([[10, 20], [30]]) == 20.0


def test_headline_tie_breaks():
    assert headline_prediction([25, 25, -25, -25]) == -25
    assert headline_prediction([25, 25, 0, 0]) == 0
    assert headline_prediction([50, 50, 25]) == 50


def test_stability_single_run_is_one():
    assert voting_stability([[[25, 0, -25]], [[0, 0, 0]]]) == 1.0


@settings(max_examples=60, deadline=None)
@given(st.lists(deltas, min_size=1, max_size=6).flatmap(
    lambda a: st.tuples(st.just(a), st.lists(deltas, min_size=len(a), max_size=len(a)))))
def test_bounds_and_identity(pair):
    actuals, preds = pair
    for metric in (total_accuracy, directional_accuracy):
        assert 0.0 <= metric(preds, actuals) <= 1.0
    assert mae(preds, actuals) >= 0
    assert total_accuracy(actuals, actuals) == 1.0
    assert mae(actuals, actuals) == 0.0
    assert directional_accuracy(preds, actuals) >= total_accuracy(preds, actuals)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.lists(deltas, min_size=3, max_size=3), min_size=1, max_size=5), min_size=1, max_size=4),
       st.randoms(use_true_random=False))
def test_stability_invariant_under_run_permutation(votes, rnd):
    shuffled = [rnd.sample(block, len(block)) for block in votes]
    assert voting_stability(shuffled) == voting_stability(votes)


def test_empty_and_mismatched_inputs():
    with pytest.raises(UndefinedMetricError):
        total_accuracy([], [])
    with pytest.raises(ShapeError):
        mae([0], [0, 25])
    with pytest.raises(UndefinedMetricError):
        headline_prediction([])
    with pytest.raises(ShapeError):
        agent_accuracy([[[0, 0]], [[0, 0, 0]]], [0, 0])


def test_tokenize():
    assert tokenize("Raise the rate_target by 25 bps!") == ["raise", "the", "rate", "target", "by", "25", "bps"]


def test_tfidf_matches_sklearn():
    docs = ["The Committee decided to raise the target range.",
            "The Committee decided to maintain the target range.",
            "Inflation remains elevated; labor markets tight."]
    ours = TfidfEmbedder().fit(docs)
    ref = TfidfVectorizer(smooth_idf=True, norm=None, token_pattern=r"(?u)[^\W_]+", lowercase=True).fit(docs)
    assert list(ours.get_feature_names_out()) == list(ref.get_feature_names_out())
    np.testing.assert_allclose(ours.transform(docs), ref.transform(docs).toarray(), rtol=0, atol=1e-12)


def test_similarity_hand_value():
    # two docs "a b" and "a c": df(a)=2, df(b)=df(c)=1, n=2
    w = 1 + math.log(1.5)
    expected = 1 / (1 + w * w)
    assert semantic_similarity(["a b"], ["a c"]) == pytest.approx(expected, abs=1e-12)
    assert semantic_similarity(["same words here"], ["same words here"]) == pytest.approx(1.0, abs=1e-12)


def test_similarity_matches_oracle_random():
    rng = random.Random(7)
    vocab = "rate hike cut hold inflation labor growth committee range target".split()
    for _ in range(100):
        m = rng.randint(1, 4)
        make = lambda: " ".join(rng.choice(vocab) for _ in range(rng.randint(0, 8)))
        pred, act = [make() for _ in range(m)], [make() for _ in range(m)]
        assert semantic_similarity(pred, act) == oracles.similarity(pred, act)


def test_cosine_zero_vector():
    assert cosine(np.zeros(3), np.ones(3)) == 0.0


def test_compute_metrics_and_bundle_roundtrip(tmp_path):
    data = MetricsInput(votes=[[[25, 25, 0]], [[0, 0, 0]]], decisions=[[25], [0]], actuals=[25, 25],
                        tokens=[[100], [300]], predicted_statements=["a b", "c"], actual_statements=["a", "c"])
    report = compute_metrics(data)
    assert report.total_accuracy == 0.5
    assert report.avg_tokens == 200.0
    path = tmp_path / "p.json"
    import json
    path.write_text(json.dumps(dump_predictions(data)))
    assert compute_metrics(load_predictions(path)) == report


def test_ols_recovers_planted_coefficients():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 5))
    beta = np.array([0.3, -1.2, 2.0, 0.0, 0.7, -0.05])
    y = beta[0] + X @ beta[1:]
    np.testing.assert_allclose(fit_linear_baseline(X, y), beta, atol=1e-9)
    model = LinearBaseline().fit(X, y)
    assert not model.rank_deficient_
    assert model.get_params() == {"ridge": 1e-8}


def test_ols_rank_deficient_and_underdetermined():
    X = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0], [4.0, 8.0]])
    model = LinearBaseline().fit(X, [1.0, 2.0, 3.0, 4.0])
    assert model.rank_deficient_
    np.testing.assert_allclose(model.predict(X), [1, 2, 3, 4], atol=1e-6)
    with pytest.raises(UnderdeterminedError):
        LinearBaseline().fit(np.ones((2, 3)), [0.0, 1.0])


def test_lr_predict_snaps():
    assert lr_predict([0.1, 1.0], [0.05]) == 25
    assert lr_predict([0.0, 1.0], [-0.4]) == -50
    with pytest.raises(ShapeError):
        lr_predict([0.0, 1.0], [1.0, 2.0])


def _indicators(i: int) -> StructuredIndicators:
    return StructuredIndicators(
        pce_yoy=2 + 0.1 * i, cpi_yoy=3 - 0.05 * i, inflation_expect_1y=3.0, tb3m=5 - 0.01 * i * i,
        tb6m=5.1, m2_supply=20000 + 7 * i, bbk_gdp=2 + (i % 3) * 0.1, unemployment=3.6 + 0.02 * i, vix=15 + i % 4,
        fed_chair="Powell", white_house_party="Democratic", prev_fftr=5.0, prev_change_bps=0)


def test_linear_baseline_loo_runs():
    inds = [_indicators(i) for i in range(16)]
    actuals = [25, 25, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -50, -25, -25]
    preds, acc = linear_baseline_loo(inds, actuals)
    assert len(preds) == 16 and all(p % 25 == 0 for p in preds)
    assert 0.0 <= acc <= 1.0
