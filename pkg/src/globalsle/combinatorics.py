"""Planar link patterns.

A link pattern on ``2N`` boundary points is a non-crossing perfect matching of
``{1, ..., 2N}``.  Indices are 1-based throughout; callers convert to 0-based
only when indexing arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Iterable, Sequence

from .errors import BoundsError, NonPlanarError

MAX_ENUMERATE_N = 12


def catalan(n: int) -> int:
    return comb(2 * n, n) // (n + 1)


def double_factorial_odd(n: int) -> int:
    """Return ``(2n - 1)!!`` as an exact integer (``1`` for ``n <= 0``)."""
    out = 1
    for k in range(1, 2 * n, 2):
        out *= k
    return out


def _crossing(l1, l2) -> bool:
    (a, b), (c, d) = l1, l2
    return a < c < b < d or c < a < d < b


@dataclass(frozen=True, order=True)
class LinkPattern:
    """Canonical planar pair partition.

    ``links`` holds ``(a_j, b_j)`` with ``a_j < b_j`` and the pairs sorted by
    ``a_j``.  Construct through :func:`pattern_of_matching` or
    :meth:`parse` unless the input is already canonical.
    """

    links: tuple[tuple[int, int], ...]

    def __post_init__(self):
        n = len(self.links)
        if n < 1:
            raise BoundsError("a link pattern needs at least one link")
        seen = sorted(i for link in self.links for i in link)
        if seen != list(range(1, 2 * n + 1)):
            raise ValueError(f"links {self.links} do not cover 1..{2 * n} exactly once")
        for a, b in self.links:
            if not a < b:
                raise ValueError(f"link {(a, b)} is not in canonical orientation")
        if list(self.links) != sorted(self.links):
            raise ValueError("links are not sorted by left endpoint")
        for i in range(n):
            for j in range(i + 1, n):
                if _crossing(self.links[i], self.links[j]):
                    raise NonPlanarError(
                        f"links {self.links[i]} and {self.links[j]} cross")

    @property
    def n_links(self) -> int:
        return len(self.links)

    def partner(self, i: int) -> int:
        for a, b in self.links:
            if a == i:
                return b
            if b == i:
                return a
        raise KeyError(i)

    def __contains__(self, link) -> bool:
        a, b = sorted(link)
        return (a, b) in self.links

    def encode(self) -> str:
        body = ",".join(f"{a}-{b}" for a, b in self.links)
        return f"{self.n_links};{body}"

    @classmethod
    def parse(cls, text: str) -> "LinkPattern":
        """Inverse of :meth:`encode`, e.g. ``"2;1-4,2-3"``."""
        head, _, body = text.strip().partition(";")
        n = int(head)
        pairs = [tuple(int(v) for v in item.split("-")) for item in body.split(",") if item]
        pattern = pattern_of_matching(pairs)
        if pattern.n_links != n:
            raise ValueError(f"declared N={n} but found {pattern.n_links} links")
        return pattern

    def __str__(self) -> str:
        return "{" + ", ".join(f"{{{a},{b}}}" for a, b in self.links) + "}"


def pattern_of_matching(pairs: Iterable[Sequence[int]]) -> LinkPattern:
    """Canonicalize a perfect matching of ``{1..2N}`` into a LinkPattern.

    Raises ``ValueError`` if ``pairs`` is not a perfect matching and
    :class:`NonPlanarError` if two links cross.
    """
    links = []
    for pair in pairs:
        if len(pair) != 2:
            raise ValueError(f"{pair!r} is not a pair")
        a, b = int(pair[0]), int(pair[1])
        if a == b:
            raise ValueError(f"link {(a, b)} pairs an index with itself")
        links.append((min(a, b), max(a, b)))
    n = len(links)
    flat = sorted(i for link in links for i in link)
    if n == 0 or flat != list(range(1, 2 * n + 1)):
        raise ValueError(f"{links} is not a perfect matching of 1..{2 * n}")
    links.sort()
    for i in range(n):
        for j in range(i + 1, n):
            if _crossing(links[i], links[j]):
                raise NonPlanarError(f"links {links[i]} and {links[j]} cross")
    return LinkPattern(tuple(links))


@lru_cache(maxsize=None)
def _dyck_matchings(lo: int, n: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    # all non-crossing matchings of lo, lo+1, ..., lo+2n-1
    if n == 0:
        return ((),)
    out = []
    for m in range(1, n + 1):
        close = lo + 2 * m - 1
        for inner in _dyck_matchings(lo + 1, m - 1):
            for outer in _dyck_matchings(close + 1, n - m):
                out.append(((lo, close),) + inner + outer)
    return tuple(out)


def enumerate_patterns(n: int) -> list[LinkPattern]:
    """All of ``LP_N`` in lexicographic order of their sorted link lists."""
    if not 1 <= n <= MAX_ENUMERATE_N:
        raise BoundsError(f"N must lie in [1, {MAX_ENUMERATE_N}], got {n}")
    raw = sorted(tuple(sorted(m)) for m in _dyck_matchings(1, n))
    # matchings produced by the recursion are planar by construction
    return [_trusted(links) for links in raw]


def _trusted(links) -> LinkPattern:
    obj = object.__new__(LinkPattern)
    object.__setattr__(obj, "links", links)
    return obj


def remove_link(alpha: LinkPattern, link: Sequence[int]) -> LinkPattern:
    """Drop ``link`` from ``alpha`` and relabel the rest to ``1..2N-2``."""
    a, b = sorted(int(v) for v in link)
    if (a, b) not in alpha.links:
        raise ValueError(f"link {(a, b)} is not in {alpha}")
    if alpha.n_links == 1:
        raise BoundsError("cannot remove the only link of a pattern")

    def relabel(i):
        return i - (i > a) - (i > b)

    rest = [(relabel(x), relabel(y)) for x, y in alpha.links if (x, y) != (a, b)]
    return pattern_of_matching(rest)


def insert_link(alpha: LinkPattern, k: int) -> LinkPattern:
    """Insert the nearest-neighbour link ``{k, k+1}``, shifting labels ``>= k`` by two."""
    if not 1 <= k <= 2 * alpha.n_links + 1:
        raise BoundsError(f"insertion position {k} out of range")
    shifted = [(x + 2 * (x >= k), y + 2 * (y >= k)) for x, y in alpha.links]
    return pattern_of_matching(shifted + [(k, k + 1)])


def all_matchings(n: int):
    """Every perfect matching of ``{1..2n}`` (planar or not), by brute force."""
    def rec(rest):
        if not rest:
            yield []
            return
        first = rest[0]
        for i in range(1, len(rest)):
            remaining = rest[1:i] + rest[i + 1:]
            for tail in rec(remaining):
                yield [(first, rest[i])] + tail
    yield from rec(list(range(1, 2 * n + 1)))


def is_planar(pairs) -> bool:
    pairs = [tuple(sorted(p)) for p in pairs]
    return not any(_crossing(p, q) for i, p in enumerate(pairs) for q in pairs[i + 1:])


def mirror_pattern(alpha: LinkPattern, shift: int = 1) -> LinkPattern:
    """Pattern seen after the cyclic relabelling ``i -> i + shift (mod 2N)``."""
    n2 = 2 * alpha.n_links
    return pattern_of_matching([((a - 1 + shift) % n2 + 1, (b - 1 + shift) % n2 + 1) for a, b in alpha.links])
