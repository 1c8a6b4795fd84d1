"""Character n-gram extraction.

Text is lowercased and split into maximal runs of letters; anything else
(digits, punctuation, whitespace) ends a word. A window of width ``n``
slides across each word, so a word of length ``L >= n`` yields
``L - n + 1`` grams and shorter words yield nothing.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

_ASCII_WORD = re.compile(r"[a-z]+")
_UNICODE_WORD = re.compile(r"[^\W\d_]+")


@dataclass
class TokenBag:
    """Un-normalized n-gram histogram of one document or query."""

    n: int
    grams: Counter = field(default_factory=Counter)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"gram length must be >= 1, got {self.n}")
        if not isinstance(self.grams, Counter):
            self.grams = Counter(self.grams)

    @classmethod
    def from_counts(cls, counts: Mapping[str, int], n: int) -> TokenBag:
        for gram, c in counts.items():
            if len(gram) != n:
                raise ValueError(f"gram {gram!r} does not have length {n}")
            if c < 1:
                raise ValueError(f"gram {gram!r} has non-positive count {c}")
        return cls(n, Counter(counts))

    def __len__(self) -> int:
        return len(self.grams)

    def __bool__(self) -> bool:
        return bool(self.grams)

    def total(self) -> int:
        return sum(self.grams.values())


def words(text: str, unicode_letters: bool = False) -> list[str]:
    pattern = _UNICODE_WORD if unicode_letters else _ASCII_WORD
    return pattern.findall(text.lower())


def tokenize(text: str, n: int = 3, *, unicode_letters: bool = False) -> TokenBag:
    if n < 1:
        raise ValueError(f"gram length must be >= 1, got {n}")
    counts: Counter = Counter()
    for word in words(text, unicode_letters):
        for i in range(len(word) - n + 1):
            counts[word[i : i + n]] += 1
    return TokenBag(n, counts)


def merge(bags: Iterable[TokenBag], n: int | None = None) -> TokenBag:
    """Sum gram counts over ``bags``.

    ``n`` is only needed to type an empty merge; it defaults to 3 then.
    """
    bags = list(bags)
    if not bags:
        return TokenBag(n if n is not None else 3)
    size = bags[0].n if n is None else n
    total: Counter = Counter()
    for bag in bags:
        if bag.n != size:
            raise ValueError(f"cannot merge bags with gram lengths {size} and {bag.n}")
        total.update(bag.grams)
    return TokenBag(size, total)


def read_token_file(path, n: int = 3, *, unicode_letters: bool = False) -> TokenBag:
    """Tokenize a pre-extracted OCR output file (one token per line)."""
    return tokenize(Path(path).read_text(encoding="utf-8"), n, unicode_letters=unicode_letters)
