"""Letter law, the q<->p dictionary, enumeration and sampling."""

import math
import random
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from cfkmaps.model import ModelParams, letter_weight, p_from_q, q_from_p, word_probability
from cfkmaps.sampler import (
    InfiniteWordSource,
    RetryCapExceeded,
    enumerate_Wn,
    sample_Wn,
    sample_Wn_batch,
)
from cfkmaps.words import Word, dual_word, parse_word, reduce_word


def count_empty_reduction_words(two_n: int) -> int:
    """Independent recursive counter of fully reducible letter strings:
    dynamic programming over the burger-stack content."""
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def count(remaining: int, stack: str) -> int:
        if len(stack) > remaining:
            return 0
        if remaining == 0:
            return 1 if not stack else 0
        total = count(remaining - 1, stack + "a") + count(remaining - 1, stack + "b")
        ia = stack.rfind("a")
        if ia >= 0:  # plain hamburger order
            total += count(remaining - 1, stack[:ia] + stack[ia + 1 :])
        ib = stack.rfind("b")
        if ib >= 0:  # plain cheeseburger order
            total += count(remaining - 1, stack[:ib] + stack[ib + 1 :])
        if stack:  # flexible order takes the top
            total += count(remaining - 1, stack[:-1])
        return total

    return count(two_n, "")


def test_letter_weights():
    p13 = ModelParams.from_p(Fraction(1, 3))
    assert letter_weight(p13, "F") == Fraction(1, 6)
    assert letter_weight(ModelParams.from_p(0), "F") == 0
    for p in (0.0, 0.2, 0.9):
        assert letter_weight(ModelParams.from_p(p), "a") == 0.25
    total = sum(letter_weight(p13, c) for c in "abABF")
    assert total == 1


def test_q_p_dictionary():
    assert p_from_q(0) == 0
    assert p_from_q(1) == Fraction(1, 3)
    assert p_from_q(4) == Fraction(1, 2)
    assert p_from_q(math.inf) == 1
    assert q_from_p(Fraction(1, 3)) == 1
    assert q_from_p(1) == math.inf
    # monotone on a grid
    grid = [0.0, 0.1, 0.5, 1.0, 2.0, 4.0, 10.0, 100.0]
    values = [p_from_q(q) for q in grid]
    assert all(a < b for a, b in zip(values, values[1:]))
    with pytest.raises(ValueError):
        p_from_q(-1)
    with pytest.raises(ValueError):
        ModelParams.from_p(1.5)


def test_word_probability():
    p13 = ModelParams.from_p(Fraction(1, 3))
    assert word_probability(p13, parse_word("aA")) == Fraction(1, 24)
    assert word_probability(p13, Word(0, "")) == 1
    assert word_probability(ModelParams.from_p(1), parse_word("A")) == 0


def test_enumerate_W1():
    words = enumerate_Wn(1)
    assert len(words) == 8
    bases = {w.letters for w in words}
    assert bases == {"aA", "aF", "bB", "bF"}
    assert {w.offset for w in words} == {0, -1}
    with pytest.raises(ValueError):
        enumerate_Wn(0)


def test_enumeration_matches_recursive_counter():
    for n in (1, 2):
        words = enumerate_Wn(n)
        assert len(words) == 2 * n * count_empty_reduction_words(2 * n)


def test_exact_law_sums_to_one_and_is_self_dual():
    for n in (1, 2):
        words = enumerate_Wn(n)
        for q in (0, 1, 4):
            params = ModelParams.from_q(Fraction(q))
            probs = {
                (w.offset, w.letters): word_probability(params, w) for w in words
            }
            total = sum(probs.values())
            if total == 0:
                continue
            for w in words:
                dw = dual_word(w)
                assert probs[(w.offset, w.letters)] == probs[(dw.offset, dw.letters)]
            law = {k: v / total for k, v in probs.items()}
            assert sum(law.values()) == 1


def test_sample_Wn_reference():
    params = ModelParams.from_p(0.0)
    rng = random.Random(1)
    for _ in range(50):
        w = sample_Wn(params, 2, rng)
        assert "F" not in w.letters
        assert reduce_word(w).is_empty
    params1 = ModelParams.from_p(1.0)
    for _ in range(50):
        w = sample_Wn(params1, 2, rng)
        assert set(w.letters) <= set("abF")
    with pytest.raises(RetryCapExceeded):
        # degenerate cap: cannot accept within one attempt reliably
        sample_Wn(ModelParams.from_p(0.5), 6, random.Random(0), retry_cap=1)


def _chi2_of_sampler(words, n, params):
    exact = {}
    for w in enumerate_Wn(n):
        exact[(w.offset, w.letters)] = word_probability(params, w)
    total = sum(exact.values())
    exact = {k: float(v / total) for k, v in exact.items()}
    counts = Counter((w.offset, w.letters) for w in words)
    cells = sorted(exact)
    obs = np.array([counts.get(c, 0) for c in cells], dtype=float)
    probs = np.array([exact[c] for c in cells])
    expected = probs * len(words)
    stat = float(((obs - expected) ** 2 / expected).sum())
    from scipy.stats import chi2

    return chi2.sf(stat, len(cells) - 1)


def test_sampler_matches_exact_law_n1():
    params = ModelParams.from_p(Fraction(1, 3))
    rng = random.Random(42)
    words = [sample_Wn(params, 1, rng) for _ in range(20000)]
    assert _chi2_of_sampler(words, 1, params) > 0.001


def test_batch_sampler_matches_exact_law_n2():
    params = ModelParams.from_p(Fraction(1, 3))
    words = sample_Wn_batch(params, 2, 20000, seed=7)
    assert _chi2_of_sampler(words, 2, params) > 0.001


def test_batch_sampler_deterministic():
    params = ModelParams.from_p(0.4)
    a = sample_Wn_batch(params, 5, 50, seed=3)
    b = sample_Wn_batch(params, 5, 50, seed=3)
    assert a == b


def test_window_extension_contract():
    params = ModelParams.from_p(1 / 3)
    src = InfiniteWordSource(params, 11)
    w1 = src.extend_window(20)
    w2 = src.extend_window(100)
    assert w2.restrict(-20, 20) == w1
    src_b = InfiniteWordSource(params, 11)
    assert src_b.extend_window(100) == w2
    assert src_b.letter(-1) == w2[-1]


def test_window_histogram_within_3_sigma():
    p = 1 / 3
    params = ModelParams.from_p(p)
    src = InfiniteWordSource(params, 5)
    w = src.extend_window(500_000)
    counts = Counter(w.letters)
    n = len(w)
    expected = {"a": 0.25, "b": 0.25, "A": (1 - p) / 4, "B": (1 - p) / 4, "F": p / 2}
    for letter, prob in expected.items():
        se = math.sqrt(prob * (1 - prob) / n)
        assert abs(counts[letter] / n - prob) < 3 * se, letter
