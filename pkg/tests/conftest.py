import itertools
from fractions import Fraction

import pytest
from scipy import stats

from cardguess.deck import DeckState


def chi2_two_sample_pvalue(x, y) -> float:
    """Two-sample chi-square homogeneity test on integer samples (sparse cells pooled)."""
    values = sorted(set(x) | set(y))
    cx = {v: 0 for v in values}
    cy = {v: 0 for v in values}
    for v in x:
        cx[v] += 1
    for v in y:
        cy[v] += 1
    rows_x, rows_y, acc_x, acc_y = [], [], 0, 0
    for v in values:
        acc_x += cx[v]
        acc_y += cy[v]
        if acc_x + acc_y >= 20:
            rows_x.append(acc_x)
            rows_y.append(acc_y)
            acc_x = acc_y = 0
    if acc_x + acc_y:
        if rows_x:
            rows_x[-1] += acc_x
            rows_y[-1] += acc_y
        else:
            rows_x.append(acc_x)
            rows_y.append(acc_y)
    if len(rows_x) < 2:
        return 1.0
    return float(stats.chi2_contingency([rows_x, rows_y])[1])


def chi2_gof_pvalue(counts: dict, probs: dict) -> float:
    keys = sorted(probs)
    total = sum(counts.values())
    observed = [counts.get(k, 0) for k in keys]
    expected = [float(probs[k]) * total for k in keys]
    if len(keys) < 2:
        return 1.0
    return float(stats.chisquare(observed, expected).pvalue)


@pytest.fixture
def small_decks():
    """Every deck with width <= 3 and counts <= 2, excluding the empty deck."""
    out = []
    for n in range(1, 4):
        for counts in itertools.product(range(3), repeat=n):
            if any(counts):
                out.append(DeckState(counts))
    return out
