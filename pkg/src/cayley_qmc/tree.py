"""Coordinate algebra of the semi-infinite Cayley tree.

Vertices are addressed by digit strings over {1, ..., k}; the root is the
empty string.  Concatenation makes the vertex set a semigroup with the root
as two-sided unit, and translations act by left concatenation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import DomainError


@dataclass(frozen=True)
class TreeCoord:
    """A vertex: its digit path from the root (empty path = root)."""

    digits: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        digits = tuple(int(d) for d in self.digits)
        if any(d < 1 for d in digits):
            raise DomainError(f"tree digits must be >= 1, got {digits}")
        object.__setattr__(self, "digits", digits)

    @property
    def level(self) -> int:
        return len(self.digits)

    def is_root(self) -> bool:
        return not self.digits

    def parent(self) -> "TreeCoord":
        if self.is_root():
            raise DomainError("the root has no parent")
        return TreeCoord(self.digits[:-1])

    def __repr__(self) -> str:
        return f"TreeCoord({list(self.digits)})"


ROOT = TreeCoord()


def canonical_key(x: TreeCoord) -> tuple[int, tuple[int, ...]]:
    """Sort key giving the volume order: by level, lexicographic within."""
    return (x.level, x.digits)


def level_vertices(n: int, k: int) -> list[TreeCoord]:
    """All k^n vertices of level n, in lexicographic digit order."""
    if n < 0:
        raise DomainError(f"level must be >= 0, got {n}")
    if k < 1:
        raise DomainError(f"tree order must be >= 1, got {k}")
    return [TreeCoord(digits) for digits in itertools.product(range(1, k + 1), repeat=n)]


def ball_vertices(n: int, k: int) -> list[TreeCoord]:
    """The ball of radius n around the root, level by level, lexicographic."""
    out: list[TreeCoord] = []
    for m in range(n + 1):
        out.extend(level_vertices(m, k))
    return out


def successors(x: TreeCoord, k: int) -> list[TreeCoord]:
    """The k direct successors ((x,1), ..., (x,k)) in order."""
    if k < 1:
        raise DomainError(f"tree order must be >= 1, got {k}")
    return [TreeCoord(x.digits + (i,)) for i in range(1, k + 1)]


def concat(x: TreeCoord, y: TreeCoord) -> TreeCoord:
    """Semigroup operation: digits of x followed by digits of y."""
    return TreeCoord(x.digits + y.digits)


def translate(g: TreeCoord, x: TreeCoord) -> TreeCoord:
    """Translation by g, acting as left concatenation."""
    return concat(g, x)
