"""The two Monte Carlo moves, the mixed-move step, and the exact kernel.

Both moves pick an ordered pair x < y uniformly at random and act only when
the pair is eligible, with acceptance probability 1 (ineligible pairs leave
the state unchanged and count as rejected):

* relation move: remove the relation if the pair is a link, add it if the
  pair is critical.
* link move: toggle the Hasse edge. Removing a link deletes exactly that
  edge from the transitive reduction; adding an edge to a suitable pair adds
  exactly that edge. Both branches preserve closure.

Eligibility is symmetric between a move and its inverse (a removed link
leaves a critical/suitable pair behind and vice versa), so each move
satisfies detailed balance with respect to the uniform distribution and the
exact single-step kernel is a symmetric matrix.

This module is the plain-Python reference path; ``kernel`` holds the
compiled production loop, which must stay draw-for-draw identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .poset import Poset, iter_bits, transitive_closure
from .rng import RandomStream

RELATION = "relation"
LINK = "link"


@dataclass(frozen=True)
class MoveOutcome:
    move_kind: str  # "relation" | "link"
    pair: tuple[int, int]
    action: str  # "added" | "removed" | "noop"

    @property
    def changed(self) -> bool:
        return self.action != "noop"


@dataclass
class SweepStats:
    attempted: int = 0
    accepted: int = 0
    relation_attempted: int = 0
    relation_accepted: int = 0
    link_attempted: int = 0
    link_accepted: int = 0

    def add(self, outcome: MoveOutcome) -> None:
        self.attempted += 1
        self.accepted += outcome.changed
        if outcome.move_kind == RELATION:
            self.relation_attempted += 1
            self.relation_accepted += outcome.changed
        else:
            self.link_attempted += 1
            self.link_accepted += outcome.changed

    def merge(self, other: "SweepStats") -> None:
        self.attempted += other.attempted
        self.accepted += other.accepted
        self.relation_attempted += other.relation_attempted
        self.relation_accepted += other.relation_accepted
        self.link_attempted += other.link_attempted
        self.link_accepted += other.link_accepted

    @property
    def acceptance_fraction(self) -> float:
        return self.accepted / self.attempted if self.attempted else math.nan


def _check_pair(p: Poset, x: int, y: int) -> None:
    if not (0 <= x < y < p.n):
        raise ValueError(f"need 0 <= x < y < n, got ({x},{y}) with n={p.n}")


def relation_move(p: Poset, x: int, y: int) -> MoveOutcome:
    """Remove the single relation x-y if linked, add it if critical."""
    _check_pair(p, x, y)
    if p.related(x, y):
        if (p.up[x] & p.down[y]) == 0:  # link
            p.up[x] &= ~(1 << y)
            p.down[y] &= ~(1 << x)
            return MoveOutcome(RELATION, (x, y), "removed")
        return MoveOutcome(RELATION, (x, y), "noop")
    critical = (p.down[x] & ~p.down[y]) == 0 and (p.up[y] & ~p.up[x]) == 0
    if critical:
        p.up[x] |= 1 << y
        p.down[y] |= 1 << x
        return MoveOutcome(RELATION, (x, y), "added")
    return MoveOutcome(RELATION, (x, y), "noop")


def _rebuild_down(p: Poset) -> None:
    down = [0] * p.n
    for x in range(p.n):
        for y in iter_bits(p.up[x]):
            down[y] |= 1 << x
    p.down = down


def link_move(
    p: Poset,
    x: int,
    y: int,
    step_list: bool = False,
    skip_suitable_check: bool = False,
) -> MoveOutcome:
    """Toggle Hasse edge x-y: delete it if linked, add it if suitable.

    ``step_list`` switches the removal branch to the literal two-step form
    (strip every relation between the inclusive cones, then restore the ones
    still implied by transitivity); it is equivalent to the edge-toggle form
    and kept for the equivalence test. ``skip_suitable_check`` is a test
    hook that deliberately breaks detailed balance (negative control).
    """
    _check_pair(p, x, y)
    incpast_x = p.down[x] | (1 << x)
    incfut_y = p.up[y] | (1 << y)
    if p.related(x, y):
        if (p.up[x] & p.down[y]) != 0:
            return MoveOutcome(LINK, (x, y), "noop")
        if step_list:
            # Strip all cone-to-cone relations, then re-close what survives.
            rows = list(p.up)
            for z in iter_bits(incpast_x):
                rows[z] &= ~incfut_y
            p.up = transitive_closure(p.n, rows)
        else:
            # Edge toggle: closure of the reduction minus this one edge.
            links = p.link_rows()
            links[x] &= ~(1 << y)
            p.up = transitive_closure(p.n, links)
        _rebuild_down(p)
        return MoveOutcome(LINK, (x, y), "removed")
    if not skip_suitable_check and p.has_link_between(incpast_x, incfut_y):
        return MoveOutcome(LINK, (x, y), "noop")
    for z in iter_bits(incpast_x):
        p.up[z] |= incfut_y
    for w in iter_bits(incfut_y):
        p.down[w] |= incpast_x
    return MoveOutcome(LINK, (x, y), "added")


def decode_pair(i: int) -> tuple[int, int]:
    """Inverse triangular numbering: i -> (x, y) with pairs ordered
    (0,1),(0,2),(1,2),(0,3),... so that index(x,y) = y(y-1)/2 + x."""
    y = int((1.0 + math.sqrt(1.0 + 8.0 * i)) / 2.0)
    while y * (y - 1) // 2 > i:
        y -= 1
    while (y + 1) * y // 2 <= i:
        y += 1
    x = i - y * (y - 1) // 2
    return x, y


def mcmc_step(p: Poset, rng: RandomStream) -> MoveOutcome:
    """One attempted move: fair coin for the move kind, uniform pair."""
    if p.n < 2:
        raise ValueError("mcmc_step requires n >= 2")
    kind = rng.uniform_index(2)
    i = rng.uniform_index(p.n * (p.n - 1) // 2)
    x, y = decode_pair(i)
    if kind == 0:
        return relation_move(p, x, y)
    return link_move(p, x, y)


def default_moves_per_sweep(n: int) -> int:
    return 2 * n**3


def sweep(p: Poset, rng: RandomStream, moves: int | None = None) -> SweepStats:
    """Apply a block of attempted moves (default 2n^3) and tally acceptance."""
    if moves is None:
        moves = default_moves_per_sweep(p.n)
    if moves < 1:
        raise ValueError("moves must be >= 1")
    stats = SweepStats()
    for _ in range(moves):
        stats.add(mcmc_step(p, rng))
    return stats


def exact_kernel(n: int, state_bound: int = 10_000) -> tuple[list[Poset], np.ndarray]:
    """Single-step transition matrix over the full state space.

    Built by exhaustively applying every (move kind, pair) choice to every
    naturally labeled n-poset, each choice carrying probability
    1 / (2 C(n,2)). Returns (states, K) with K[i, j] = Pr(state i -> j).
    """
    from .enumeration import enumerate_posets

    if n < 2:
        raise ValueError("exact_kernel requires n >= 2")
    states: list[Poset] = []
    enumerate_posets(n, visitor=states.append)
    if len(states) > state_bound:
        raise ValueError(f"state space too large: {len(states)} > {state_bound}")
    index = {p.key(): i for i, p in enumerate(states)}
    npairs = n * (n - 1) // 2
    weight = 1.0 / (2 * npairs)
    kernel = np.zeros((len(states), len(states)))
    for i, p in enumerate(states):
        for pair_index in range(npairs):
            x, y = decode_pair(pair_index)
            for kind in (RELATION, LINK):
                q = p.copy()
                if kind == RELATION:
                    relation_move(q, x, y)
                else:
                    link_move(q, x, y)
                kernel[i, index[q.key()]] += weight
    return states, kernel
