"""Model parameters: the cluster weight q, the flexible-order fraction p,
and the letter law they induce.

The dictionary is ``p = sqrt(q) / (2 + sqrt(q))``, with the endpoints
``q=0 <-> p=0`` and ``q=inf <-> p=1`` handled exactly.  Letter weights:
burgers always have weight 1/4 each, plain orders ``(1-p)/4`` each and
the flexible order ``p/2``.

Exact arithmetic: when ``q`` (or ``p``) is given as ``Fraction`` or
``int`` with an exact square root, the derived quantities stay rational;
this is what the measure-transport checks rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from .words import Word


def _exact_sqrt(value):
    """Square root, kept exact for rationals that are perfect squares."""
    if isinstance(value, Rational):
        frac = Fraction(value)
        rn = math.isqrt(frac.numerator)
        rd = math.isqrt(frac.denominator)
        if rn * rn == frac.numerator and rd * rd == frac.denominator:
            return Fraction(rn, rd)
    return math.sqrt(value)


def p_from_q(q):
    """Flexible-order fraction for cluster weight ``q`` in [0, inf]."""
    if q == math.inf:
        return 1
    if q < 0:
        raise ValueError(f"q must be in [0, inf], got {q}")
    if q == 0:
        return Fraction(0) if isinstance(q, Rational) else 0.0
    root = _exact_sqrt(q)
    return root / (2 + root)


def q_from_p(p):
    """Inverse dictionary: ``q = (2p / (1-p))**2``, with ``p=1 -> inf``."""
    if not 0 <= p <= 1:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if p == 1:
        return math.inf
    return (2 * p / (1 - p)) ** 2


@dataclass(frozen=True)
class ModelParams:
    """Cluster weight and letter-law parameter, tied by the dictionary."""

    q: object
    p: object
    given: str = "q"  # which of the two was supplied

    @classmethod
    def from_q(cls, q) -> "ModelParams":
        return cls(q=q, p=p_from_q(q), given="q")

    @classmethod
    def from_p(cls, p) -> "ModelParams":
        if not 0 <= p <= 1:
            raise ValueError(f"p must be in [0, 1], got {p}")
        return cls(q=q_from_p(p), p=p, given="p")

    @property
    def p_float(self) -> float:
        return float(self.p)

    def __str__(self) -> str:
        return f"ModelParams(q={self.q}, p={self.p})"


def letter_weight(params: ModelParams, letter: str):
    """Probability of a single letter under the model's letter law."""
    p = params.p
    if letter in "ab":
        return Fraction(1, 4) if isinstance(p, Rational) else 0.25
    if letter in "AB":
        return (1 - p) / 4
    if letter == "F":
        return p / 2
    raise ValueError(f"unknown letter {letter!r}")


def word_probability(params: ModelParams, w: Word):
    """Product of letter weights over the word's domain."""
    prob = Fraction(1) if isinstance(params.p, Rational) else 1.0
    for c in w.letters:
        prob *= letter_weight(params, c)
    return prob
