"""Free-group words.

A word is a tuple of letters; letter ``2k`` is generator ``k`` and ``2k + 1``
is its inverse.
"""

from __future__ import annotations

import string
from collections.abc import Iterable, Sequence

Word = tuple[int, ...]


def gen(k: int, power: int = 1) -> Word:
    letter = 2 * k if power > 0 else 2 * k + 1
    return (letter,) * abs(power)


def inv_letter(x: int) -> int:
    return x ^ 1


def inverse(w: Sequence[int]) -> Word:
    return tuple(x ^ 1 for x in reversed(w))


def free_reduce(w: Iterable[int]) -> Word:
    out: list[int] = []
    for x in w:
        if out and out[-1] == x ^ 1:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def concat(*ws: Sequence[int]) -> Word:
    return free_reduce(x for w in ws for x in w)


def cyclic_reduce(w: Sequence[int]) -> Word:
    w = free_reduce(w)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == w[j - 1] ^ 1:
        i += 1
        j -= 1
    return w[i:j]


def is_cyclically_reduced(w: Sequence[int]) -> bool:
    return len(w) <= 1 or w[0] != w[-1] ^ 1


def _min_rotation(w: Word) -> Word:
    n = len(w)
    if n == 0:
        return w
    return min(w[i:] + w[:i] for i in range(n))


def canonical_cyclic(w: Sequence[int]) -> Word:
    """Representative of the conjugacy class of ``w`` up to inversion."""
    c = cyclic_reduce(w)
    return min(_min_rotation(c), _min_rotation(inverse(c)))


def primitive_root(w: Sequence[int]) -> tuple[Word, int]:
    """Write a cyclically reduced word as ``root ** k`` with maximal k."""
    w = tuple(w)
    n = len(w)
    for p in range(1, n + 1):
        if n % p == 0 and w == w[:p] * (n // p):
            return w[:p], n // p
    return w, 1


def substitute(w: Sequence[int], images: dict[int, Word]) -> Word:
    """Apply a substitution given on generator indices (others fixed)."""
    out: list[int] = []
    for x in w:
        k = x >> 1
        if k in images:
            out.extend(images[k] if x % 2 == 0 else inverse(images[k]))
        else:
            out.append(x)
    return free_reduce(out)


def exponent_vector(w: Sequence[int], rank: int) -> list[int]:
    v = [0] * rank
    for x in w:
        v[x >> 1] += -1 if x & 1 else 1
    return v


def letter_name(k: int, rank: int) -> str:
    if rank <= 26:
        return string.ascii_lowercase[k]
    return f"x{k}"


def format_word(w: Sequence[int], rank: int) -> str:
    """``a B c`` style: lowercase generator, uppercase inverse."""
    parts = []
    for x in w:
        name = letter_name(x >> 1, rank)
        parts.append(name.upper() if x & 1 else name)
    return " ".join(parts) if rank > 26 else "".join(parts)


def parse_word(text: str, rank: int) -> Word:
    tokens = text.split() if rank > 26 else list(text.replace(" ", ""))
    out = []
    for tok in tokens:
        k = int(tok[1:]) if rank > 26 else string.ascii_lowercase.index(tok.lower())
        if not 0 <= k < rank:
            raise ValueError(f"unknown generator symbol {tok!r}")
        out.append(2 * k + (1 if tok[0].isupper() else 0))
    return tuple(out)
