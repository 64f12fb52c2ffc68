"""Exact samplers and enumeration for the conditioned word law.

The size-n law is the i.i.d. letter law conditioned on the reduction
being empty, over a uniformly shifted index window.  Rejection sampling
is the reference implementation; a compiled batch path with identical
acceptance logic handles the sizes where billions of attempts are
needed.

Bi-infinite words are materialized lazily through a counter-addressed
generator, so extending a window never changes letters already seen and
two sources with the same seed agree letter for letter.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .model import ModelParams
from .words import Word, reduce_word

LETTER_CODES = "abABF"


def letters_to_codes(letters: str) -> np.ndarray:
    return np.frombuffer(
        letters.encode().translate(bytes.maketrans(b"abABF", bytes(range(5)))),
        dtype=np.int8,
    ).copy()


def codes_to_letters(codes) -> str:
    return "".join(LETTER_CODES[c] for c in codes)


class RetryCapExceeded(RuntimeError):
    """Rejection sampler ran out of attempts; carries the acceptance data."""

    def __init__(self, attempts: int, accepted: int):
        self.attempts = attempts
        self.accepted = accepted
        rate = accepted / attempts if attempts else 0.0
        super().__init__(
            f"retry cap exceeded after {attempts} attempts "
            f"({accepted} accepted, rate~{rate:.3g})"
        )


def _cumulative_thresholds(p: float) -> tuple[float, float, float, float]:
    return (0.25, 0.5, 0.5 + (1.0 - p) * 0.25, 0.5 + (1.0 - p) * 0.5)


def draw_letter(p: float, u: float) -> str:
    ta, tb, tA, tB = _cumulative_thresholds(p)
    if u < ta:
        return "a"
    if u < tb:
        return "b"
    if u < tA:
        return "A"
    if u < tB:
        return "B"
    return "F"


def enumerate_Wn(n: int) -> list[Word]:
    """All fully reducible words of n matched pairs, at every window shift.

    Exhaustive over the 5**(2n) letter sequences, so n is capped at 4.
    """
    if not 1 <= n <= 4:
        raise ValueError(f"enumerate_Wn supports 1 <= n <= 4, got {n}")
    two_n = 2 * n
    bases: list[str] = []
    seq = ["a"] * two_n
    alphabet = LETTER_CODES

    def rec(pos: int) -> None:
        if pos == two_n:
            word = "".join(seq)
            if reduce_word(Word(0, word)).is_empty:
                bases.append(word)
            return
        for c in alphabet:
            seq[pos] = c
            rec(pos + 1)

    rec(0)
    bases.sort()
    return [Word(-k, base) for base in bases for k in range(two_n)]


def sample_Wn(
    params: ModelParams,
    n: int,
    rng: random.Random,
    retry_cap: int = 50_000_000,
) -> Word:
    """Reference rejection sampler for the conditioned word law.

    Draws 2n i.i.d. letters, accepts when the reduction is empty, then
    shifts the window by a uniform K.  Raises :class:`RetryCapExceeded`
    (with the observed acceptance rate) if the cap runs out.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    p = params.p_float
    two_n = 2 * n
    attempts = 0
    while attempts < retry_cap:
        attempts += 1
        letters = "".join(draw_letter(p, rng.random()) for _ in range(two_n))
        if reduce_word(Word(0, letters)).is_empty:
            k = rng.randrange(two_n)
            return Word(-k, letters)
    raise RetryCapExceeded(attempts, 0)


def sample_Wn_batch(
    params: ModelParams,
    n: int,
    count: int,
    seed: int,
    retry_cap_per_sample: int = 2_000_000_000,
) -> list[Word]:
    """Compiled batch version of :func:`sample_Wn` (same acceptance rule).

    Sample i uses the counter stream derived from (seed, i); the uniform
    shift is drawn from the same stream after acceptance.
    """
    p = params.p_float
    two_n = 2 * n
    letters, attempts = _kernels.rejection_sample_batch(
        np.uint64(seed), two_n, p, count, retry_cap_per_sample
    )
    words = []
    for i in range(count):
        att = int(attempts[i])
        if att < 0:
            raise RetryCapExceeded(retry_cap_per_sample, len(words))
        sub = np.uint64(_kernels.mix64(np.uint64(seed), np.uint64(i)))
        shift_seed = np.uint64(_kernels.mix64(sub, np.uint64(0xD1CE)))
        k = int(_kernels.uniform01(shift_seed, np.uint64(att)) * two_n)
        words.append(Word(-k, codes_to_letters(letters[i])))
    return words


@dataclass
class InfiniteWordSource:
    """Lazily materialized bi-infinite i.i.d. word.

    Letters are a pure function of (seed, index), so the window can grow
    in either direction without disturbing what was already produced.
    Not thread-safe: use one source per worker, or clone by seed.
    """

    params: ModelParams
    seed: int
    halfwidth: int = 0
    _letters: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int8))

    def extend_window(self, m: int) -> Word:
        """Return the window on [-m, m), growing the materialization."""
        if m > self.halfwidth:
            self._letters = _kernels.letters_window(
                np.uint64(self.seed & 0xFFFFFFFFFFFFFFFF),
                -m,
                m,
                self.params.p_float,
            )
            self.halfwidth = m
        lo = self.halfwidth - m
        return Word(-m, codes_to_letters(self._letters[lo : lo + 2 * m]))

    def window_codes(self, m: int) -> np.ndarray:
        """Letter-code view of the window on [-m, m)."""
        self.extend_window(max(m, self.halfwidth))
        lo = self.halfwidth - m
        return self._letters[lo : lo + 2 * m]

    def letter(self, index: int) -> str:
        m = max(abs(index) + 1, 16)
        self.extend_window(max(m, self.halfwidth))
        return LETTER_CODES[self._letters[index + self.halfwidth]]
