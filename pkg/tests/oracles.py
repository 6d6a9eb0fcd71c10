"""Brute-force reference implementations, written independently of the
package code. Rational arithmetic where the package promises exact floats."""
from __future__ import annotations

import math
import re
from fractions import Fraction


def total_accuracy(preds, actuals):
    hits = 0
    for i in range(len(preds)):
        if preds[i] == actuals[i]:
            hits += 1
    return float(Fraction(hits, len(preds)))


def agent_accuracy(votes, actuals):
    hits = total = 0
    for i, block in enumerate(votes):
        for run in block:
            for v in run:
                total += 1
                if v == actuals[i]:
                    hits += 1
    return float(Fraction(hits, total))


def voting_stability(votes):
    # agreement with the mode is the mode's frequency, whichever tied value is picked
    agree = total = 0
    for block in votes:
        n_agents = len(block[0])
        for k in range(n_agents):
            column = [run[k] for run in block]
            best = 0
            for value in column:
                c = 0
                for other in column:
                    if other == value:
                        c += 1
                if c > best:
                    best = c
            agree += best
            total += len(column)
    return float(Fraction(agree, total))


def headline(decisions):
    best_value, best_count = None, -1
    for value in sorted(set(decisions), key=lambda v: (abs(v), v)):
        c = sum(1 for d in decisions if d == value)
        if c > best_count:
            best_value, best_count = value, c
    return best_value


def average_tokens(tokens):
    s = n = 0
    for row in tokens:
        for t in row:
            s += t
            n += 1
    return float(Fraction(s, n))


def mae(preds, actuals):
    # basis points to percentage points: |diff| / 100
    s = Fraction(0)
    for p, a in zip(preds, actuals):
        s += Fraction(abs(p - a), 100)
    return float(s / len(preds))


def directional_accuracy(preds, actuals):
    def sign(x):
        if x > 0:
            return 1
        if x < 0:
            return -1
        return 0
    hits = 0
    for p, a in zip(preds, actuals):
        if sign(p) == sign(a):
            hits += 1
    return float(Fraction(hits, len(preds)))


def _words(text):
    out, cur = [], ""
    for ch in text.lower():
        if ch.isalnum():
            cur += ch
        else:
            if cur:
                out.append(cur)
            cur = ""
    if cur:
        out.append(cur)
    return out


def similarity(pred, actual):
    docs = [_words(t) for t in list(pred) + list(actual)]
    n = len(docs)
    vocab = sorted({w for d in docs for w in d})
    idf = {}
    for w in vocab:
        df = 0
        for d in docs:
            if w in d:
                df += 1
        idf[w] = math.log((1 + n) / (1 + df)) + 1
    vecs = []
    for d in docs:
        vec = {}
        for w in d:
            vec[w] = vec.get(w, 0) + 1
        vecs.append({w: c * idf[w] for w, c in vec.items()})
    # fsum is correctly rounded, so the result is independent of summation order
    cosines = []
    m = len(pred)
    for i in range(m):
        a, b = vecs[i], vecs[m + i]
        dot = math.fsum(a[w] * b[w] for w in a if w in b)
        na = math.sqrt(math.fsum(x * x for x in a.values()))
        nb = math.sqrt(math.fsum(x * x for x in b.values()))
        cosines.append(0.0 if na == 0 or nb == 0 else dot / (na * nb))
    return math.fsum(cosines) / m


def tally(votes, options, outlook):
    """Rule oracle: votes are option labels, options label -> delta, outlook delta -> prob."""
    for label in ("dovish", "neutral", "hawkish"):
        if sum(1 for v in votes if v == label) >= 2:
            return options[label]
    # three distinct options: the one the market rates most likely, neutral on ties
    probs = {label: outlook.get(options[label], 0.0) for label in votes}
    best = max(probs.values())
    leaders = [label for label in probs if probs[label] == best]
    if len(leaders) == 1:
        return options[leaders[0]]
    return options["neutral"]


_WORD = re.compile(r"\S+")


def word_count(text):
    return len(_WORD.findall(text))
