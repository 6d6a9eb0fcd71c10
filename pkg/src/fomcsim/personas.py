"""Member archetypes: profile encoding, k-means clustering, persona prompts.

Both :class:`ProfileEncoder` and :class:`KMeans` follow the scikit-learn
estimator protocol so they drop into pipelines and ``clone``/``get_params``
work as expected.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .core import ARCHETYPES, FomcSimError, InvalidInputError, MemberProfile, Persona

logger = logging.getLogger(__name__)

NUMERIC_FIELDS = ("hawkishness", "tenure_years")
CATEGORICAL_FIELDS = ("regional_affiliation", "gender", "political_party")
BINARY_FIELDS = MemberProfile.FOCUS
BOARD_LEVEL = "Board"

DISPLAY_NAMES = {
    "RegionalPragmatist": "Regional Pragmatist",
    "AcademicBalancer": "Academic Balancer",
    "CentralPolicymaker": "Central Policymaker",
}
_ARCHETYPE_BLURBS = {
    "RegionalPragmatist": "You speak for a regional Reserve Bank and weigh district business "
                          "and labor conditions heavily when judging the stance of policy.",
    "AcademicBalancer": "You reason from models and the full body of evidence and look for a "
                        "balanced path between the Committee's two mandates.",
    "CentralPolicymaker": "You sit at the center of the Committee and prioritize credibility, "
                          "consistency with past communication, and consensus.",
}
_FOCUS_SENTENCES = {
    "focus_labor": "You pay particular attention to labor-market conditions.",
    "focus_inflation": "You pay particular attention to inflation and inflation expectations.",
    "focus_banking": "You pay particular attention to banking-system stability.",
    "focus_global": "You pay particular attention to global economic developments.",
}
_HAWKISH_SENTENCES = {
    "low": "You tend to favor accommodation and move cautiously on tightening.",
    "medium": "You tend to follow the data without a strong prior toward easing or tightening.",
    "high": "You tend to favor firm action against inflation, even at some cost to growth.",
}


class EncodingError(FomcSimError, ValueError):
    pass


class InfeasibleError(FomcSimError, ValueError):
    pass


def load_members(path: str | Path) -> list[MemberProfile]:
    """Read ``members.csv``; extra columns (e.g. notes) are ignored."""
    path = Path(path)
    profiles = []
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.DictReader(fh), start=2):
            try:
                profiles.append(MemberProfile(
                    name=row["name"],
                    hawkishness=float(row["hawkishness"]),
                    regional_affiliation=row["regional_affiliation"].strip(),
                    gender=row["gender"].strip(),
                    political_party=row["political_party"].strip(),
                    focus_labor=int(row["focus_labor"]),
                    focus_inflation=int(row["focus_inflation"]),
                    focus_banking=int(row["focus_banking"]),
                    focus_global=int(row["focus_global"]),
                    tenure_years=float(row["tenure_years"]),
                ))
            except (KeyError, ValueError) as exc:
                raise InvalidInputError(f"{path}:{lineno}: {exc}") from None
    return profiles


class ProfileEncoder(TransformerMixin, BaseEstimator):
    """Turn member profiles into clustering features.

    Numeric fields are z-scored with population statistics, categoricals are
    one-hot encoded over the levels seen in ``fit``, and focus flags pass
    through as 0/1. Columns that are constant over the fitted data are
    dropped.

    Attributes
    ----------
    means_, stds_ : dict
        Statistics for the retained numeric fields.
    levels_ : dict
        Sorted levels per categorical field.
    feature_names_ : list of str
        Names of the output columns, e.g. ``"gender=F"``.
    hawkishness_terciles_ : tuple of float
        Cut points of the z-scored hawkishness distribution.
    """

    def fit(self, X: Sequence[MemberProfile], y=None):
        profiles = list(X)
        if not profiles:
            raise InvalidInputError("cannot fit an encoder on zero profiles")
        self.means_, self.stds_ = {}, {}
        self.all_means_, self.all_stds_ = {}, {}
        for name in NUMERIC_FIELDS:
            col = np.array([float(getattr(p, name)) for p in profiles])
            mean, std = float(col.mean()), float(col.std())
            self.all_means_[name], self.all_stds_[name] = mean, std
            if std > 0:
                self.means_[name], self.stds_[name] = mean, std
        self.levels_ = {
            name: sorted({getattr(p, name) for p in profiles}) for name in CATEGORICAL_FIELDS
        }
        self.binary_ = [
            name for name in BINARY_FIELDS if len({getattr(p, name) for p in profiles}) > 1
        ]
        names = list(self.means_)
        for cat, levels in self.levels_.items():
            if len(levels) > 1:
                names.extend(f"{cat}={level}" for level in levels)
        names.extend(self.binary_)
        self.feature_names_ = names
        if "hawkishness" in self.means_:
            z = np.array([(p.hawkishness - self.means_["hawkishness"]) / self.stds_["hawkishness"]
                          for p in profiles])
            self.hawkishness_terciles_ = (float(np.quantile(z, 1 / 3)), float(np.quantile(z, 2 / 3)))
        else:
            self.hawkishness_terciles_ = (0.0, 0.0)
        return self

    def encode(self, profile: MemberProfile) -> np.ndarray:
        check_is_fitted(self, "feature_names_")
        out = [(float(getattr(profile, name)) - self.means_[name]) / self.stds_[name]
               for name in self.means_]
        for cat, levels in self.levels_.items():
            value = getattr(profile, cat)
            if value not in levels:
                raise EncodingError(f"unknown {cat} level {value!r} for {profile.name}")
            if len(levels) > 1:
                out.extend(1.0 if value == level else 0.0 for level in levels)
        out.extend(float(getattr(profile, name)) for name in self.binary_)
        return np.array(out, dtype=float)

    def transform(self, X: Sequence[MemberProfile]) -> np.ndarray:
        rows = [self.encode(p) for p in X]
        return np.vstack(rows) if rows else np.empty((0, len(self.feature_names_)))

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "feature_names_")
        return np.array(self.feature_names_, dtype=object)

    def value(self, vector: Sequence[float], name: str, default: float = 0.0) -> float:
        try:
            return float(vector[self.feature_names_.index(name)])
        except ValueError:
            return default

    def decode_categoricals(self, vector: Sequence[float]) -> dict[str, str]:
        """Recover the categorical levels from the one-hot blocks (argmax per block)."""
        check_is_fitted(self, "feature_names_")
        out = {}
        for cat, levels in self.levels_.items():
            if len(levels) == 1:
                out[cat] = levels[0]
                continue
            block = [self.value(vector, f"{cat}={level}") for level in levels]
            out[cat] = levels[int(np.argmax(block))]
        return out

    def tenure_years(self, vector: Sequence[float]) -> float:
        if "tenure_years" in self.means_:
            return self.means_["tenure_years"] + self.value(vector, "tenure_years") * self.stds_["tenure_years"]
        return self.all_means_["tenure_years"]


def encode_profile(profile: MemberProfile, stats: ProfileEncoder) -> np.ndarray:
    return stats.encode(profile)


def _kmeanspp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    closest = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = int(rng.choice(n, p=closest / total))
        else:
            # fewer distinct points than clusters
            remaining = [i for i in range(n) if i not in chosen]
            idx = int(remaining[rng.integers(len(remaining))])
        chosen.append(idx)
        closest = np.minimum(closest, ((X - X[idx]) ** 2).sum(axis=1))
    return X[chosen].copy()


def _assign(X: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    return labels, d2[np.arange(X.shape[0]), labels]


def _lloyd(X: np.ndarray, centers: np.ndarray, max_iter: int):
    labels, _ = _assign(X, centers)
    history = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        for c in range(centers.shape[0]):
            members = X[labels == c]
            # an emptied cluster keeps its previous center
            if len(members):
                centers[c] = members.mean(axis=0)
        history.append(float(((X - centers[labels]) ** 2).sum()))
        new_labels, _ = _assign(X, centers)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return labels, centers, history, n_iter


class KMeans(ClusterMixin, BaseEstimator):
    """Lloyd's k-means with k-means++ seeding and best-of-``n_init`` restarts.

    Points are put into a canonical (lexicographic) order before seeding, so
    the result does not depend on the input order. Restarts use sub-seeds
    ``(random_state, restart)``; the lowest inertia wins and ties go to the
    earliest restart. Cluster ids are numbered by first appearance in the
    canonical order.

    Parameters
    ----------
    n_clusters : int, default=3
    n_init : int, default=10
    max_iter : int, default=300
        Upper bound on Lloyd iterations per restart; iteration stops earlier
        at an assignment fixpoint.
    random_state : int, default=0
    """

    def __init__(self, n_clusters: int = 3, n_init: int = 10, max_iter: int = 300, random_state: int = 0):
        self.n_clusters = n_clusters
        self.n_init = n_init
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        k = self.n_clusters
        if k < 1:
            raise InvalidInputError("n_clusters must be >= 1")
        if X.shape[0] < k:
            raise InfeasibleError(f"{X.shape[0]} points cannot form {k} clusters")
        order = np.lexsort(X.T[::-1])
        Xc = X[order]
        best = None
        for restart in range(self.n_init):
            rng = np.random.default_rng([self.random_state, restart])
            labels, centers, history, n_iter = _lloyd(Xc, _kmeanspp(Xc, k, rng), self.max_iter)
            inertia = history[-1]
            if best is None or inertia < best[3]:
                best = (labels, centers, history, inertia, n_iter)
        labels, centers, history, inertia, n_iter = best
        remap = {}
        for lab in labels:
            remap.setdefault(int(lab), len(remap))
        for c in range(k):
            remap.setdefault(c, len(remap))
        canon_labels = np.array([remap[int(lab)] for lab in labels])
        canon_centers = np.empty_like(centers)
        for old, new in remap.items():
            canon_centers[new] = centers[old]
        self.labels_ = np.empty(X.shape[0], dtype=int)
        self.labels_[order] = canon_labels
        self.cluster_centers_ = canon_centers
        self.inertia_ = inertia
        self.inertia_history_ = history
        self.n_iter_ = n_iter
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        X = check_array(X, dtype=float)
        return _assign(X, self.cluster_centers_)[0]


@dataclass(frozen=True)
class ClusteringResult:
    assignments: tuple[int, ...]
    centroids: np.ndarray
    inertia: float
    inertia_history: tuple[float, ...] = field(default=())
    names: tuple[str, ...] = field(default=())

    def assignment_map(self) -> dict[str, int]:
        names = self.names or tuple(str(i) for i in range(len(self.assignments)))
        return dict(zip(names, self.assignments))


def kmeans(vectors, k: int = 3, seed: int = 0, n_init: int = 10, max_iter: int = 300,
           names: Sequence[str] = ()) -> ClusteringResult:
    X = np.asarray(vectors, dtype=float)
    if X.ndim != 2:
        raise InvalidInputError("expected a 2-d collection of feature vectors")
    if X.shape[0] < k:
        raise InfeasibleError(f"{X.shape[0]} vectors cannot form {k} clusters")
    model = KMeans(n_clusters=k, n_init=n_init, max_iter=max_iter, random_state=seed).fit(X)
    return ClusteringResult(
        assignments=tuple(int(v) for v in model.labels_),
        centroids=model.cluster_centers_,
        inertia=model.inertia_,
        inertia_history=tuple(model.inertia_history_),
        names=tuple(names),
    )


def name_archetypes(centroids: np.ndarray, encoder: ProfileEncoder) -> dict[int, str]:
    """Map cluster index to archetype name from centroid signatures.

    Largest regional-bank one-hot mass is the Regional Pragmatist; of the
    rest, the one with the highest tenure net of focus imbalance is the
    Academic Balancer; the remaining cluster is the Central Policymaker.
    """
    if len(centroids) != 3:
        raise InvalidInputError("archetype naming needs exactly three clusters")
    regional_cols = [i for i, name in enumerate(encoder.feature_names_)
                     if name.startswith("regional_affiliation=") and name != f"regional_affiliation={BOARD_LEVEL}"]

    def regional_mass(c):
        return float(sum(centroids[c][i] for i in regional_cols))

    def balance_score(c):
        focus = [encoder.value(centroids[c], f, default=np.nan) for f in BINARY_FIELDS]
        focus = [v for v in focus if not np.isnan(v)]
        spread = (max(focus) - min(focus)) if focus else 0.0
        return encoder.value(centroids[c], "tenure_years") - spread

    remaining = list(range(3))
    regional = max(remaining, key=lambda c: (regional_mass(c), -c))
    remaining.remove(regional)
    academic = max(remaining, key=lambda c: (balance_score(c), -c))
    remaining.remove(academic)
    return {regional: "RegionalPragmatist", academic: "AcademicBalancer", remaining[0]: "CentralPolicymaker"}


def _tenure_band(years: float) -> str:
    if years < 4:
        return "short"
    if years <= 10:
        return "moderate"
    return "long"


def materialize_persona(centroid: Sequence[float], label: str, decoding: ProfileEncoder) -> Persona:
    """Render the deterministic persona prompt block for one archetype."""
    if label not in ARCHETYPES:
        raise InvalidInputError(f"unknown archetype {label!r}")
    centroid = [float(v) for v in centroid]
    hawk = decoding.value(centroid, "hawkishness")
    low_cut, high_cut = decoding.hawkishness_terciles_
    if "hawkishness" not in decoding.means_:
        level = "medium"
    elif hawk < low_cut:
        level = "low"
    elif hawk > high_cut:
        level = "high"
    else:
        level = "medium"
    lines = [
        f"{DISPLAY_NAMES[label]}. {_ARCHETYPE_BLURBS[label]}",
        f"Hawkishness tendency: {level}. {_HAWKISH_SENTENCES[level]}",
    ]
    for flag in BINARY_FIELDS:
        if decoding.value(centroid, flag) > 0.5:
            lines.append(_FOCUS_SENTENCES[flag])
    years = decoding.tenure_years(centroid)
    lines.append(f"Tenure: {_tenure_band(years)} ({years:.1f} years on the Committee).")
    return Persona(archetype=label, centroid=tuple(centroid), prompt_block="\n".join(lines),
                   feature_names=tuple(decoding.feature_names_))


def build_personas(profiles: Sequence[MemberProfile], k: int = 3, seed: int = 0):
    """Encode, cluster and name; returns ``(personas, result, encoder)``.

    Personas come back in archetype order (Regional Pragmatist first).
    """
    encoder = ProfileEncoder().fit(profiles)
    X = encoder.transform(profiles)
    result = kmeans(X, k=k, seed=seed, names=[p.name for p in profiles])
    labels = name_archetypes(result.centroids, encoder)
    by_name = {name: idx for idx, name in labels.items()}
    personas = [materialize_persona(result.centroids[by_name[a]], a, encoder) for a in ARCHETYPES]
    return personas, result, encoder


def save_personas(path: str | Path, personas: Sequence[Persona], result: ClusteringResult | None = None) -> None:
    payload = {"personas": [p.as_dict() for p in personas]}
    if result is not None:
        payload["inertia"] = result.inertia
        payload["assignments"] = result.assignment_map()
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_personas(path: str | Path) -> list[Persona]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    items = payload["personas"] if isinstance(payload, dict) else payload
    personas = [Persona.from_dict(item) for item in items]
    if sorted(p.archetype for p in personas) != sorted(ARCHETYPES):
        raise InvalidInputError(f"{path}: expected one persona per archetype")
    order = {a: i for i, a in enumerate(ARCHETYPES)}
    return sorted(personas, key=lambda p: order[p.archetype])
