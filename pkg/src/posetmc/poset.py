"""Naturally labeled posets as packed-bit relation matrices.

A poset on elements 0..n-1 is stored as ``up`` rows: Python ints used as
bitsets, ``up[x] >> y & 1`` meaning x precedes y. Natural labeling makes
every row upper-triangular (bits only above the diagonal), and the matrix
is kept transitively closed at all times. The mirrored ``down`` rows
(predecessor masks) are maintained alongside so cone queries and subset
tests in both directions are single int operations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

STANDARD_KINDS = ("chain", "antichain", "bipartite", "random_kr")


def iter_bits(mask: int) -> Iterator[int]:
    """Indices of set bits, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def transitive_closure(n: int, rows: list[int]) -> list[int]:
    """Smallest transitive superset of an irreflexive upper-triangular relation.

    One reverse-label pass suffices: labels are a topological order, so by
    the time row x is processed every successor row is already closed.
    """
    for x in range(n):
        r = rows[x]
        if r & ((1 << (x + 1)) - 1):
            raise ValueError(f"row {x} has bits at or below the diagonal")
    closed = list(rows)
    for x in range(n - 1, -1, -1):
        acc = closed[x]
        for y in iter_bits(rows[x]):
            acc |= closed[y]
        closed[x] = acc
    return closed


class Violation(NamedTuple):
    kind: str  # "reflexive" | "label_order" | "transitivity"
    x: int
    y: int


def validate_matrix(n: int, rows: list[int]) -> list[Violation]:
    """All invariant violations of a candidate relation matrix (empty = valid)."""
    out = []
    for x in range(n):
        row = rows[x]
        if (row >> x) & 1:
            out.append(Violation("reflexive", x, x))
        for y in iter_bits(row & ((1 << x) - 1)):
            out.append(Violation("label_order", x, y))
    for x in range(n):
        for y in iter_bits(rows[x] & ~((1 << (x + 1)) - 1)):
            missing = rows[y] & ~rows[x] & ~((1 << (y + 1)) - 1)
            for z in iter_bits(missing):
                out.append(Violation("transitivity", x, z))
    # deduplicate transitivity reports reached via different middle elements
    seen: set[Violation] = set()
    uniq = []
    for v in out:
        if v not in seen:
            seen.add(v)
            uniq.append(v)
    return uniq


@dataclass(frozen=True)
class PairClass:
    """Classification of an ordered pair x < y."""

    related: bool
    link: bool
    critical: bool
    suitable: bool


class Poset:
    """A naturally labeled, transitively closed poset; the chain's state."""

    __slots__ = ("n", "up", "down")

    def __init__(self, n: int, up: list[int], down: list[int]):
        # Trusted constructor: rows must already be closed and natural.
        self.n = n
        self.up = up
        self.down = down

    # -- construction ------------------------------------------------------

    @classmethod
    def from_up_rows(cls, n: int, rows: list[int]) -> "Poset":
        bad = validate_matrix(n, rows)
        if bad:
            raise ValueError(f"invalid relation matrix: {bad[:3]}{'...' if len(bad) > 3 else ''}")
        down = [0] * n
        for x in range(n):
            for y in iter_bits(rows[x]):
                down[y] |= 1 << x
        return cls(n, list(rows), down)

    @classmethod
    def from_relations(cls, n: int, pairs, close: bool = False) -> "Poset":
        rows = [0] * n
        for x, y in pairs:
            if not (0 <= x < y < n):
                raise ValueError(f"relation ({x},{y}) violates 0 <= x < y < n")
            rows[x] |= 1 << y
        if close:
            rows = transitive_closure(n, rows)
        return cls.from_up_rows(n, rows)

    def copy(self) -> "Poset":
        return Poset(self.n, list(self.up), list(self.down))

    # -- basic queries -----------------------------------------------------

    def related(self, x: int, y: int) -> bool:
        return bool((self.up[x] >> y) & 1)

    def relation_count(self) -> int:
        return sum(r.bit_count() for r in self.up)

    def relations(self) -> list[tuple[int, int]]:
        return [(x, y) for x in range(self.n) for y in iter_bits(self.up[x])]

    def key(self) -> tuple:
        return (self.n, *self.up)

    def __eq__(self, other) -> bool:
        return isinstance(other, Poset) and self.n == other.n and self.up == other.up

    def __hash__(self) -> int:
        return hash(self.key())

    def violations(self) -> list[Violation]:
        ups_ok = validate_matrix(self.n, self.up)
        return ups_ok

    # -- cones and pair classification --------------------------------------

    def cone(self, x: int, direction: str = "past", inclusive: bool = False) -> set[int]:
        """past(x) or fut(x), optionally including x itself."""
        if not (0 <= x < self.n):
            raise ValueError(f"element {x} out of range for n={self.n}")
        if direction == "past":
            mask = self.down[x]
        elif direction == "future":
            mask = self.up[x]
        else:
            raise ValueError(f"direction must be 'past' or 'future', got {direction!r}")
        if inclusive:
            mask |= 1 << x
        return set(iter_bits(mask))

    def is_link(self, x: int, y: int) -> bool:
        """True iff x covers y from below: x < y related with nothing between."""
        return self.related(x, y) and (self.up[x] & self.down[y]) == 0

    def _link_row(self, x: int) -> int:
        """Bitmask of elements linked above x."""
        acc = 0
        for w in iter_bits(self.up[x]):
            acc |= self.up[w]
        return self.up[x] & ~acc

    def has_link_between(self, amask: int, bmask: int) -> bool:
        """Is any element of amask linked (covered-by) to an element of bmask?"""
        for z in iter_bits(amask):
            cand = self.up[z] & bmask
            while cand:
                low = cand & -cand
                w = low.bit_length() - 1
                if (self.up[z] & self.down[w]) == 0:
                    return True
                cand ^= low
        return False

    def classify_pair(self, x: int, y: int) -> PairClass:
        if not (0 <= x < y < self.n):
            raise ValueError(f"need 0 <= x < y < n, got ({x},{y}) with n={self.n}")
        related = self.related(x, y)
        link = related and (self.up[x] & self.down[y]) == 0
        if related:
            critical = False
            suitable = False
        else:
            critical = (self.down[x] & ~self.down[y]) == 0 and (self.up[y] & ~self.up[x]) == 0
            incpast_x = self.down[x] | (1 << x)
            incfut_y = self.up[y] | (1 << y)
            suitable = not self.has_link_between(incpast_x, incfut_y)
        return PairClass(related=related, link=link, critical=critical, suitable=suitable)

    def link_rows(self) -> list[int]:
        """Transitive reduction: bit (x,y) set iff x-y is a link (Hasse edge)."""
        return [self._link_row(x) for x in range(self.n)]

    def link_count(self) -> int:
        return sum(r.bit_count() for r in self.link_rows())

    # -- global transforms ---------------------------------------------------

    def time_reversed(self) -> "Poset":
        """Dual poset with every relation reversed, relabeled x -> n-1-x."""
        n = self.n
        up = [0] * n
        down = [0] * n
        for x in range(n):
            for y in iter_bits(self.up[x]):
                up[n - 1 - y] |= 1 << (n - 1 - x)
                down[n - 1 - x] |= 1 << (n - 1 - y)
        return Poset(n, up, down)

    # -- text format ---------------------------------------------------------

    def to_text(self) -> str:
        """First line n, then one 'x y' line per closed relation, sorted."""
        lines = [str(self.n)]
        lines.extend(f"{x} {y}" for x, y in self.relations())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Poset":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty poset text")
        n = int(lines[0])
        pairs = []
        for ln in lines[1:]:
            x_s, y_s = ln.split()
            pairs.append((int(x_s), int(y_s)))
        return cls.from_relations(n, pairs)

    def __repr__(self) -> str:  # pragma: no cover
        return f"Poset(n={self.n}, R={self.relation_count()})"


def transitive_reduction(p: Poset) -> list[int]:
    """Link matrix of p as bit rows; closing it recovers p.up exactly."""
    return p.link_rows()


def standard_poset(kind: str, n: int, rng=None) -> Poset:
    """One of the four starting posets: chain, antichain, bipartite, random_kr.

    random_kr builds a three-layer order: middle layer of exactly floor(n/2)
    elements, bottom-layer size Poisson(floor(n/4)) clamped to the available
    range, rest on top. Labels are assigned bottom-up so the labeling is
    natural. Adjacent-layer pairs are related independently with probability
    1/2; every bottom-top pair is related.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if kind == "chain":
        full = (1 << n) - 1
        rows = [full & ~((1 << (x + 1)) - 1) for x in range(n)]
    elif kind == "antichain":
        rows = [0] * n
    elif kind == "bipartite":
        k = n // 2
        top = ((1 << n) - 1) & ~((1 << k) - 1)
        rows = [top if x < k else 0 for x in range(n)]
    elif kind == "random_kr":
        if rng is None:
            raise ValueError("random_kr requires an rng")
        n2 = n // 2
        n1 = min(max(rng.poisson(n // 4), 0), n - n2)
        bottom = range(0, n1)
        middle = range(n1, n1 + n2)
        top = range(n1 + n2, n)
        rows = [0] * n
        for x in bottom:
            for y in middle:
                if rng.uniform_index(2):
                    rows[x] |= 1 << y
        for x in middle:
            for y in top:
                if rng.uniform_index(2):
                    rows[x] |= 1 << y
        for x in bottom:
            for y in top:
                rows[x] |= 1 << y
        rows = transitive_closure(n, rows)
    else:
        raise ValueError(f"unknown kind {kind!r}; expected one of {STANDARD_KINDS}")
    return Poset.from_up_rows(n, rows)
