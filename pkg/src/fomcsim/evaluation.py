"""Scoring: the six committee metrics, directional accuracy, a TF-IDF
embedder for statement similarity and a least-squares baseline.

Vote tensors are indexed ``[meeting, run, agent]``; they may be ragged in the
run dimension when failed runs were dropped. Decisions are integer basis
points; MAE is reported in percentage points.
"""
from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .core import FomcSimError, InvalidInputError, RateDecision, StructuredIndicators, snap_to_grid

RIDGE_LAMBDA = 1e-8


class ShapeError(FomcSimError, ValueError):
    pass


class UndefinedMetricError(FomcSimError, ValueError):
    pass


class UnderdeterminedError(FomcSimError, ValueError):
    pass


def _pair(preds, actuals) -> tuple[list[int], list[int]]:
    preds, actuals = [int(p) for p in preds], [int(a) for a in actuals]
    if len(preds) != len(actuals):
        raise ShapeError(f"{len(preds)} predictions vs {len(actuals)} actuals")
    if not preds:
        raise UndefinedMetricError("metric undefined for zero meetings")
    return preds, actuals


def _vote_blocks(votes) -> list[np.ndarray]:
    """Normalize a vote tensor into one ``(runs, agents)`` int array per meeting."""
    blocks = []
    for i, meeting in enumerate(votes):
        block = np.asarray(meeting, dtype=np.int64)
        if block.ndim != 2 or block.shape[0] < 1 or block.shape[1] < 1:
            raise ShapeError(f"meeting {i}: expected a non-empty runs x agents block, got shape {block.shape}")
        blocks.append(block)
    if not blocks:
        raise UndefinedMetricError("metric undefined for zero meetings")
    if len({b.shape[1] for b in blocks}) != 1:
        raise ShapeError("agent count differs across meetings")
    return blocks


def total_accuracy(headline_preds: Sequence[int], actuals: Sequence[int]) -> float:
    preds, actuals = _pair(headline_preds, actuals)
    return sum(p == a for p, a in zip(preds, actuals)) / len(preds)


def agent_accuracy(votes, actuals: Sequence[int]) -> float:
    """Share of individual votes, over meetings, runs and agents, equal to the outcome."""
    blocks = _vote_blocks(votes)
    actuals = [int(a) for a in actuals]
    if len(blocks) != len(actuals):
        raise ShapeError(f"{len(blocks)} vote blocks vs {len(actuals)} actuals")
    hits = sum(int((b == a).sum()) for b, a in zip(blocks, actuals))
    return hits / sum(b.size for b in blocks)


def _modal(values: Sequence[int]) -> int:
    counts = Counter(int(v) for v in values)
    top = max(counts.values())
    return min(v for v, c in counts.items() if c == top)


def voting_stability(votes) -> float:
    """Mean agreement of each vote with that agent's modal vote for the meeting.

    Mode ties resolve to the smallest delta.
    """
    blocks = _vote_blocks(votes)
    hits = 0
    for b in blocks:
        for k in range(b.shape[1]):
            hits += int((b[:, k] == _modal(b[:, k])).sum())
    return hits / sum(b.size for b in blocks)


def headline_prediction(decisions: Sequence[int]) -> RateDecision:
    """Modal decision across runs; ties go to the move closest to zero, then the cut."""
    if not len(decisions):
        raise UndefinedMetricError("no successful runs to aggregate")
    counts = Counter(int(d) for d in decisions)
    top = max(counts.values())
    return RateDecision(min((v for v, c in counts.items() if c == top), key=lambda v: (abs(v), v)))


def average_tokens(tokens) -> float:
    flat = [int(t) for row in tokens for t in (row if isinstance(row, (list, tuple, np.ndarray)) else [row])]
    if not flat:
        raise UndefinedMetricError("no token counts")
    return sum(flat) / len(flat)


def mae(headline_preds: Sequence[int], actuals: Sequence[int]) -> float:
    """Mean absolute error in percentage points (25 bps = 0.25)."""
    preds, actuals = _pair(headline_preds, actuals)
    return sum(abs(a - p) for p, a in zip(preds, actuals)) / (100.0 * len(preds))


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


def directional_accuracy(preds: Sequence[int], actuals: Sequence[int]) -> float:
    preds, actuals = _pair(preds, actuals)
    return sum(_sign(p) == _sign(a) for p, a in zip(preds, actuals)) / len(preds)


_TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on anything that is not a letter or digit."""
    return _TOKEN_RE.findall(text.lower())


class TfidfEmbedder(TransformerMixin, BaseEstimator):
    """TF-IDF with raw counts and smoothed idf ``ln((1 + n) / (1 + df)) + 1``.

    Vectors are not normalized; cosine similarity does that.
    """

    def fit(self, X: Sequence[str], y=None):
        docs = [tokenize(t) for t in X]
        if not docs:
            raise UndefinedMetricError("cannot fit TF-IDF on an empty corpus")
        df = Counter(term for doc in docs for term in set(doc))
        self.vocabulary_ = {term: i for i, term in enumerate(sorted(df))}
        n = len(docs)
        self.idf_ = np.array([math.log((1 + n) / (1 + df[t])) + 1.0 for t in sorted(df)])
        return self

    def transform(self, X: Sequence[str]) -> np.ndarray:
        check_is_fitted(self, "vocabulary_")
        out = np.zeros((len(X), len(self.vocabulary_)))
        for row, text in enumerate(X):
            for term, count in Counter(tokenize(text)).items():
                col = self.vocabulary_.get(term)
                if col is not None:
                    out[row, col] = count
        return out * self.idf_

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "vocabulary_")
        return np.array(sorted(self.vocabulary_, key=self.vocabulary_.get), dtype=object)


def tfidf_embed(texts: Sequence[str]) -> tuple[np.ndarray, list[str]]:
    model = TfidfEmbedder().fit(texts)
    return model.transform(texts), list(model.get_feature_names_out())


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    # correctly rounded sums, so the value does not depend on term order
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    nu, nv = math.sqrt(math.fsum(u * u)), math.sqrt(math.fsum(v * v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return math.fsum(u * v) / (nu * nv)


def semantic_similarity(pred_statements: Sequence[str], actual_statements: Sequence[str]) -> float:
    """Mean cosine between each generated statement and the realized one,
    with idf fit on the union of both sets."""
    if len(pred_statements) != len(actual_statements):
        raise ShapeError("statement lists differ in length")
    if not pred_statements:
        raise UndefinedMetricError("no statements to compare")
    n = len(pred_statements)
    vectors = TfidfEmbedder().fit_transform(list(pred_statements) + list(actual_statements))
    return math.fsum(cosine(vectors[i], vectors[n + i]) for i in range(n)) / n


@dataclass(frozen=True)
class MetricsInput:
    """Everything :func:`compute_metrics` needs.

    ``votes[i]`` is a runs x agents block, ``decisions[i]`` the per-run
    decisions. ``headline`` defaults to the modal decision per meeting.
    """

    votes: Sequence
    decisions: Sequence[Sequence[int]]
    actuals: Sequence[int]
    headline: Sequence[int] | None = None
    predicted_statements: Sequence[str] | None = None
    actual_statements: Sequence[str] | None = None
    tokens: Sequence[Sequence[int]] | None = None

    def __post_init__(self):
        n = len(self.actuals)
        if n < 1:
            raise ShapeError("need at least one meeting")
        for name in ("votes", "decisions"):
            if len(getattr(self, name)) != n:
                raise ShapeError(f"{name} has {len(getattr(self, name))} meetings, expected {n}")
        for i, (block, decs) in enumerate(zip(self.votes, self.decisions)):
            if len(block) != len(decs):
                raise ShapeError(f"meeting {i}: {len(block)} vote runs vs {len(decs)} decisions")
        for seq in (self.actuals, *self.decisions):
            for d in seq:
                RateDecision(int(d))
        if self.headline is not None and len(self.headline) != n:
            raise ShapeError("headline length mismatch")
        if self.tokens is not None and len(self.tokens) != n:
            raise ShapeError("tokens length mismatch")
        if (self.predicted_statements is None) != (self.actual_statements is None):
            raise ShapeError("give both predicted and actual statements, or neither")

    def headline_predictions(self) -> list[int]:
        if self.headline is not None:
            return [int(h) for h in self.headline]
        return [int(headline_prediction(d)) for d in self.decisions]


@dataclass(frozen=True)
class MetricsReport:
    total_accuracy: float
    agent_accuracy: float
    voting_stability: float
    similarity: float | None
    avg_tokens: float | None
    mae: float
    directional_accuracy: float
    n_meetings: int

    def __post_init__(self):
        for name in ("total_accuracy", "agent_accuracy", "voting_stability", "directional_accuracy"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidInputError(f"{name} outside [0, 1]")
        if self.similarity is not None and not -1e-12 <= self.similarity <= 1.0 + 1e-12:
            raise InvalidInputError("similarity outside [0, 1]")
        if self.mae < 0 or (self.avg_tokens is not None and self.avg_tokens < 0):
            raise InvalidInputError("mae and avg_tokens must be non-negative")

    def as_dict(self) -> dict:
        return asdict(self)


def compute_metrics(data: MetricsInput) -> MetricsReport:
    headline = data.headline_predictions()
    similarity = None
    if data.predicted_statements is not None:
        similarity = semantic_similarity(data.predicted_statements, data.actual_statements)
    return MetricsReport(
        total_accuracy=total_accuracy(headline, data.actuals),
        agent_accuracy=agent_accuracy(data.votes, data.actuals),
        voting_stability=voting_stability(data.votes),
        similarity=similarity,
        avg_tokens=average_tokens(data.tokens) if data.tokens is not None else None,
        mae=mae(headline, data.actuals),
        directional_accuracy=directional_accuracy(headline, data.actuals),
        n_meetings=len(data.actuals),
    )


def load_predictions(path: str | Path) -> MetricsInput:
    """Read a ``predictions.json`` bundle.

    Keys: ``votes`` (meetings x runs x agents), ``decisions`` (meetings x
    runs), ``actuals``; optional ``headline``, ``tokens`` and
    ``statements`` = ``{"predicted": [...], "actual": [...]}``.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        statements = data.get("statements") or {}
        return MetricsInput(
            votes=data["votes"],
            decisions=data["decisions"],
            actuals=data["actuals"],
            headline=data.get("headline"),
            predicted_statements=statements.get("predicted"),
            actual_statements=statements.get("actual"),
            tokens=data.get("tokens"),
        )
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"{path}: malformed predictions bundle ({exc})") from None


def dump_predictions(data: MetricsInput) -> dict:
    out = {
        "votes": [[[int(v) for v in run] for run in block] for block in data.votes],
        "decisions": [[int(d) for d in runs] for runs in data.decisions],
        "actuals": [int(a) for a in data.actuals],
    }
    if data.headline is not None:
        out["headline"] = [int(h) for h in data.headline]
    if data.tokens is not None:
        out["tokens"] = [[int(t) for t in row] for row in data.tokens]
    if data.predicted_statements is not None:
        out["statements"] = {"predicted": list(data.predicted_statements),
                             "actual": list(data.actual_statements)}
    return out


class IndicatorDesign(TransformerMixin, BaseEstimator):
    """Design rows from structured indicators: every numeric field plus
    drop-first one-hot dummies for the categorical fields."""

    def fit(self, X: Sequence[StructuredIndicators], y=None):
        self.levels_ = {name: sorted({getattr(ind, name) for ind in X})
                        for name in StructuredIndicators.CATEGORICAL}
        names = list(StructuredIndicators.NUMERIC)
        for name, levels in self.levels_.items():
            names.extend(f"{name}={level}" for level in levels[1:])
        self.feature_names_ = names
        return self

    def transform(self, X: Sequence[StructuredIndicators]) -> np.ndarray:
        check_is_fitted(self, "levels_")
        rows = []
        for ind in X:
            row = [float(getattr(ind, name)) for name in StructuredIndicators.NUMERIC]
            for name, levels in self.levels_.items():
                row.extend(1.0 if getattr(ind, name) == level else 0.0 for level in levels[1:])
            rows.append(row)
        return np.array(rows, dtype=float).reshape(len(rows), len(self.feature_names_))


class LinearBaseline(RegressorMixin, BaseEstimator):
    """Ordinary least squares through the normal equations.

    An intercept column is prepended. When the design is rank deficient the
    normal matrix gets a ``ridge`` multiple of the identity added.

    Parameters
    ----------
    ridge : float, default=1e-8
        Fallback regularization used only on rank deficiency.
    """

    def __init__(self, ridge: float = RIDGE_LAMBDA):
        self.ridge = ridge

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float, y_numeric=True)
        A = np.hstack([np.ones((X.shape[0], 1)), X])
        m, p = A.shape
        if m <= p:
            raise UnderdeterminedError(f"{m} observations for {p} coefficients (incl. intercept)")
        gram = A.T @ A
        self.rank_deficient_ = bool(np.linalg.matrix_rank(A) < p)
        if self.rank_deficient_:
            gram = gram + self.ridge * np.eye(p)
        self.coefficients_ = np.linalg.solve(gram, A.T @ y)
        self.intercept_ = float(self.coefficients_[0])
        self.coef_ = self.coefficients_[1:]
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "coefficients_")
        X = check_array(X, dtype=float)
        return self.intercept_ + X @ self.coef_

    def predict_decisions(self, X) -> list[RateDecision]:
        return [snap_to_grid(v) for v in self.predict(X)]


def fit_linear_baseline(X, y) -> np.ndarray:
    """Coefficients with the intercept first."""
    return LinearBaseline().fit(X, y).coefficients_


def lr_predict(coefficients: Sequence[float], x: Sequence[float]) -> RateDecision:
    coefficients = np.asarray(coefficients, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.shape != (len(coefficients) - 1,):
        raise ShapeError(f"expected {len(coefficients) - 1} features, got shape {x.shape}")
    return snap_to_grid(float(coefficients[0] + x @ coefficients[1:]))


def linear_baseline_loo(indicators: Sequence[StructuredIndicators],
                        actuals: Sequence[int]) -> tuple[list[RateDecision], float]:
    """Leave-one-meeting-out LR predictions and their directional accuracy.

    Columns that are constant in a training fold are dropped for that fold.
    """
    design = IndicatorDesign().fit(indicators)
    X = design.transform(indicators)
    y = np.array([int(a) / 100.0 for a in actuals])
    preds = []
    for i in range(len(y)):
        train = np.arange(len(y)) != i
        keep = X[train].std(axis=0) > 0
        model = LinearBaseline().fit(X[train][:, keep], y[train])
        preds.append(model.predict_decisions(X[i:i + 1, keep])[0])
    return preds, directional_accuracy(preds, actuals)


def metrics_from_mapping(data: Mapping) -> MetricsReport:
    return MetricsReport(**data)
