import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from fomcsim.backtest import bundled_path
from fomcsim.core import ARCHETYPES, MemberProfile
from fomcsim.personas import (EncodingError, InfeasibleError, KMeans, ProfileEncoder, build_personas, kmeans,
                              load_members, load_personas, save_personas)


def blobs(seed=0, per=20, sep=10.0):
    rng = np.random.default_rng(seed)
    centers = np.array([[0.0, 0.0], [sep, 0.0], [0.0, sep]])
    X = np.vstack([c + rng.normal(scale=1.0 / 3, size=(per, 2)) for c in centers])
    return X, np.repeat(np.arange(3), per)


def test_kmeans_recovers_blobs_and_inertia_monotone():
    X, y = blobs()
    model = KMeans(n_clusters=3, random_state=42).fit(X)
    assert adjusted_rand_score(y, model.labels_) == 1.0
    hist = model.inertia_history_
    assert all(b <= a + 1e-12 for a, b in zip(hist, hist[1:]))
    assert model.get_params()["n_init"] == 10
    np.testing.assert_array_equal(model.predict(X), model.labels_)


def test_kmeans_deterministic_and_permutation_invariant():
    X, _ = blobs(seed=1)
    a = kmeans(X, k=3, seed=5)
    b = kmeans(X, k=3, seed=5)
    assert a.assignments == b.assignments and a.inertia == b.inertia
    perm = np.random.default_rng(0).permutation(len(X))
    c = kmeans(X[perm], k=3, seed=5)
    assert c.inertia == pytest.approx(a.inertia, rel=1e-12)
    assert adjusted_rand_score(np.array(a.assignments)[perm], c.assignments) == 1.0


def test_kmeans_infeasible():
    with pytest.raises(InfeasibleError):
        kmeans(np.zeros((2, 2)), k=3)


def test_kmeans_k_equals_n_zero_inertia():
    X = np.array([[0.0, 1.0], [5.0, 5.0], [9.0, 0.0]])
    assert kmeans(X, k=3).inertia == 0.0


def _member(name, hawk, region, tenure, focus=(1, 0, 0, 0), gender="F", party="Unaffiliated"):
    return MemberProfile(name, hawk, region, gender, party, *focus, tenure)


def test_encoder_standardizes_and_onehots():
    profiles = [_member("a", 1.0, "Board", 2), _member("b", 3.0, "Dallas", 4), _member("c", 5.0, "Board", 12)]
    enc = ProfileEncoder().fit(profiles)
    X = enc.transform(profiles)
    names = list(enc.get_feature_names_out())
    col = names.index("hawkishness")
    assert X[:, col].mean() == pytest.approx(0.0, abs=1e-12)
    assert X[:, col].std() == pytest.approx(1.0)
    assert "regional_affiliation=Board" in names and "regional_affiliation=Dallas" in names
    # single-level categoricals and constant flags carry no information
    assert not any(n.startswith("gender=") for n in names)
    assert "focus_labor" not in names
    with pytest.raises(EncodingError):
        enc.encode(_member("d", 2.0, "Chicago", 3))


def test_bundled_roster_personas():
    personas, result, _ = build_personas(load_members(bundled_path("members.csv")), k=3, seed=0)
    assert [p.archetype for p in personas] == list(ARCHETYPES)
    assert len(set(result.assignments)) == 3
    assert personas[0].prompt_block.startswith("Regional Pragmatist.")
    for p in personas:
        assert "Hawkishness tendency:" in p.prompt_block and "Tenure:" in p.prompt_block


def test_persona_roundtrip(tmp_path):
    personas, result, _ = build_personas(load_members(bundled_path("members.csv")), k=3, seed=0)
    path = tmp_path / "personas.json"
    save_personas(path, personas, result)
    assert load_personas(path) == personas
    assert load_personas(bundled_path("personas.json")) == personas


def test_three_member_cluster_is_exact():
    profiles = [_member("a", 1.0, "Board", 2, (1, 0, 0, 0)), _member("b", 3.0, "Dallas", 6, (0, 1, 0, 0)),
                _member("c", 5.0, "New York", 14, (0, 0, 1, 0))]
    personas, result, _ = build_personas(profiles, k=3, seed=0)
    assert result.inertia == 0.0
    assert sorted(p.archetype for p in personas) == sorted(ARCHETYPES)
