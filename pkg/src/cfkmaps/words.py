"""Words over the five-letter burger alphabet and their stack reduction.

The alphabet is ``{a, b, A, B, F}``: lowercase letters are burgers
(hamburger ``a``, cheeseburger ``b``), uppercase letters are orders.
An ``A`` consumes the most recent unconsumed ``a``, a ``B`` the most
recent ``b``, and a flexible order ``F`` the most recent burger of
either kind.  Reducing a word runs this last-in-first-out dynamics left
to right and records which letters got paired.

Words carry an explicit integer offset so that restriction and the
local distance can compare words whose domains differ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

ALPHABET = "abABF"
BURGERS = "ab"
ORDERS = "ABF"

#: orders that can consume a given burger
_CONSUMERS = {"a": "AF", "b": "BF"}
#: burgers that can fulfil a given order
_SUPPLIERS = {"A": "a", "B": "b", "F": "ab"}

UNMATCHED_BURGER = math.inf
UNMATCHED_ORDER = -math.inf


def is_burger(letter: str) -> bool:
    return letter in BURGERS


def is_order(letter: str) -> bool:
    return letter in ORDERS


def compatible(burger: str, order: str) -> bool:
    """True iff ``order`` may be fulfilled by ``burger``."""
    return burger in _SUPPLIERS[order]


@dataclass(frozen=True)
class Word:
    """A finite word with domain ``{offset, ..., offset + len - 1}``."""

    offset: int
    letters: str

    def __post_init__(self) -> None:
        bad = next((i for i, c in enumerate(self.letters) if c not in ALPHABET), None)
        if bad is not None:
            raise ValueError(
                f"invalid letter {self.letters[bad]!r} at position {bad}"
            )

    def __len__(self) -> int:
        return len(self.letters)

    def __getitem__(self, index: int) -> str:
        if not self.offset <= index < self.offset + len(self.letters):
            raise IndexError(f"index {index} outside domain {self.domain()}")
        return self.letters[index - self.offset]

    def domain(self) -> range:
        return range(self.offset, self.offset + len(self.letters))

    def indices(self) -> Iterator[int]:
        return iter(self.domain())

    def restrict(self, lo: int, hi: int) -> "Word":
        """Restriction to the half-open interval ``[lo, hi)``."""
        a = max(lo, self.offset)
        b = min(hi, self.offset + len(self.letters))
        if a >= b:
            return Word(a, "")
        return Word(a, self.letters[a - self.offset : b - self.offset])

    def concat(self, other: "Word") -> "Word":
        """This word followed by ``other``, re-indexed to be contiguous."""
        return Word(self.offset, self.letters + other.letters)

    def __str__(self) -> str:
        return f"{self.letters!r}@{self.offset}"


@dataclass(frozen=True)
class Matching:
    """Pairing of burger indices with the order indices that consumed them.

    ``phi`` maps every domain index either to its partner index, or to
    ``+inf`` (leftover burger) / ``-inf`` (unfulfilled order).
    """

    phi: dict[int, float] = field(default_factory=dict)

    @property
    def pairs(self) -> frozenset[tuple[int, int]]:
        return frozenset(
            (j, int(k))
            for j, k in self.phi.items()
            if k not in (UNMATCHED_BURGER, UNMATCHED_ORDER) and j < k
        )

    def partner(self, index: int) -> float:
        return self.phi[index]

    def is_matched(self, index: int) -> bool:
        return self.phi[index] not in (UNMATCHED_BURGER, UNMATCHED_ORDER)

    def unmatched_burgers(self) -> frozenset[int]:
        return frozenset(k for k, v in self.phi.items() if v == UNMATCHED_BURGER)

    def unfulfilled_orders(self) -> frozenset[int]:
        return frozenset(k for k, v in self.phi.items() if v == UNMATCHED_ORDER)


@dataclass(frozen=True)
class Reduction:
    """Result of reducing a word: residues plus the full matching.

    ``uppercase_residue`` is the list of unfulfilled orders in arrival
    order, ``lowercase_residue`` the leftover burger stack bottom-up.
    The reduced word is their concatenation.
    """

    uppercase_residue: Word
    lowercase_residue: Word
    matching: Matching

    @property
    def reduced(self) -> Word:
        return self.uppercase_residue.concat(self.lowercase_residue)

    @property
    def is_empty(self) -> bool:
        return not self.uppercase_residue.letters and not self.lowercase_residue.letters


def parse_word(text: str, offset: int = 0) -> Word:
    """Build a word from its letter string; rejects foreign characters."""
    for i, c in enumerate(text):
        if c not in ALPHABET:
            raise ValueError(f"invalid letter {c!r} at position {i}")
    return Word(offset, text)


def format_word(w: Word) -> str:
    return w.letters


def word_to_text(w: Word) -> str:
    """Two-line text format: ``offset=<int>`` then the letter line."""
    return f"offset={w.offset}\n{w.letters}\n"


def word_from_text(text: str) -> Word:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("offset="):
        raise ValueError("word text must start with an 'offset=<int>' line")
    offset = int(lines[0][len("offset=") :])
    letters = lines[1] if len(lines) > 1 else ""
    return parse_word(letters, offset)


def reduce_word(w: Word) -> Reduction:
    """Run the last-in-first-out order-fulfilment sweep over ``w``.

    Burgers are stacked; an order consumes the most recent compatible
    burger still on the stack, else joins the unfulfilled list.  The
    per-type stacks make the "most recent compatible" lookup O(1), so
    the sweep is linear in the word length.
    """
    stack_a: list[int] = []  # indices of unconsumed a's, increasing
    stack_b: list[int] = []
    orders: list[int] = []  # unfulfilled order indices, in arrival order
    phi: dict[int, float] = {}
    letters = w.letters
    offset = w.offset
    for pos, letter in enumerate(letters):
        idx = offset + pos
        if letter == "a":
            stack_a.append(idx)
        elif letter == "b":
            stack_b.append(idx)
        else:
            if letter == "A":
                source = stack_a if stack_a else None
            elif letter == "B":
                source = stack_b if stack_b else None
            else:  # F takes the top of the merged stack: the larger top index
                if stack_a and stack_b:
                    source = stack_a if stack_a[-1] > stack_b[-1] else stack_b
                elif stack_a or stack_b:
                    source = stack_a if stack_a else stack_b
                else:
                    source = None
            if source is None:
                orders.append(idx)
                phi[idx] = UNMATCHED_ORDER
            else:
                j = source.pop()
                phi[j] = idx
                phi[idx] = j
    for j in stack_a:
        phi[j] = UNMATCHED_BURGER
    for j in stack_b:
        phi[j] = UNMATCHED_BURGER
    leftover = sorted(stack_a + stack_b)
    upper = Word(0, "".join(letters[i - offset] for i in orders))
    lower = Word(len(orders), "".join(letters[i - offset] for i in leftover))
    return Reduction(upper, lower, Matching(phi))


def match_locally(w: Word, j: int, k: int) -> bool:
    """Decide whether indices ``j < k`` are matched, looking only between them.

    The pair is matched exactly when the reduction of the strictly
    enclosed subword contains no letter that could pair with either
    endpoint.  This is the independent oracle for :func:`reduce_word`.
    """
    if not j < k:
        raise ValueError(f"need j < k, got {j}, {k}")
    wj, wk = w[j], w[k]
    if not is_burger(wj):
        raise ValueError(f"w[{j}]={wj!r} is not a burger")
    if not is_order(wk):
        raise ValueError(f"w[{k}]={wk!r} is not an order")
    if not compatible(wj, wk):
        raise ValueError(f"letters {wj!r} and {wk!r} are incompatible")
    inner = reduce_word(w.restrict(j + 1, k)).reduced.letters
    blockers = set(_CONSUMERS[wj]) | set(_SUPPLIERS[wk])
    return not any(c in blockers for c in inner)


def word_distance(w: Word, w2: Word) -> float:
    """Local distance ``2**-R*`` where ``R*`` is the largest radius of
    agreement of the restrictions to ``[-R, R)`` (domains included).

    Restrictions to the empty interval always agree, so the distance is
    at most 1; identical words are at distance 0.
    """
    if w.offset == w2.offset and w.letters == w2.letters:
        return 0.0
    bound = max(
        (abs(x) for x in (w.offset, w.offset + len(w), w2.offset, w2.offset + len(w2))),
        default=0,
    )
    r_star = 0
    for r in range(1, bound + 2):
        if w.restrict(-r, r) != w2.restrict(-r, r):
            break
        r_star = r
    return 2.0 ** (-r_star)


_DUAL = str.maketrans("abABF", "baBAF")


def dual_word(w: Word) -> Word:
    """Swap hamburgers with cheeseburgers (``a``/``b`` and ``A``/``B``)."""
    return Word(w.offset, w.letters.translate(_DUAL))
