"""Explicit two-player games with an ``GF A -> GF B`` winning condition.

Positions belong to the system (player 0) or the environment (player 1).
A player without moves loses.  Safety games are the special case with
``A = B = all positions``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable

SYS, ENV = 0, 1


@dataclass
class Arena:
    owner: dict = field(default_factory=dict)
    succ: dict = field(default_factory=dict)
    pred: dict = field(default_factory=dict)

    @classmethod
    def explore(cls, initial: Iterable[Hashable], owner: Callable, moves: Callable) -> "Arena":
        a = cls()
        queue = deque()
        for p in initial:
            if p not in a.owner:
                a.owner[p] = owner(p)
                queue.append(p)
        while queue:
            p = queue.popleft()
            out = list(dict.fromkeys(moves(p)))
            a.succ[p] = out
            for d in out:
                a.pred.setdefault(d, []).append(p)
                if d not in a.owner:
                    a.owner[d] = owner(d)
                    queue.append(d)
        return a

    def cpre(self, target: set) -> set:
        """Positions from which the system forces the next position into `target`."""
        out = set()
        candidates = set()
        for t in target:
            candidates.update(self.pred.get(t, ()))
        for p, o in self.owner.items():
            if o == ENV and not self.succ[p]:
                candidates.add(p)
        for p in candidates:
            nxt = self.succ[p]
            if self.owner[p] == SYS:
                if any(d in target for d in nxt):
                    out.add(p)
            elif all(d in target for d in nxt):
                out.add(p)
        return out


@dataclass
class Solution:
    winning: set
    strategy: dict  # system position -> chosen successor

    def wins(self, p) -> bool:
        return p in self.winning


def solve_streett(arena: Arena, assume: set, guarantee: set) -> Solution:
    """Solve ``GF assume -> GF guarantee`` by the nested fixpoint

    nu Z. mu Y. nu X. (guarantee & cpre Z) | cpre Y | (!assume & cpre X),

    and extract a memoryless strategy from the Y-layers.
    """
    positions = set(arena.owner)
    not_assume = positions - assume
    z = set(positions)
    while True:
        layers = []
        y: set = set()
        while True:
            good = guarantee & arena.cpre(z)
            down = arena.cpre(y)
            x = set(positions)
            while True:
                nx = good | down | (not_assume & arena.cpre(x))
                if nx == x:
                    break
                x = nx
            if x == y:
                break
            layers.append(x)
            y = x
        if y == z:
            break
        z = y
    rank = {}
    for r, layer in enumerate(layers):
        for p in layer:
            rank.setdefault(p, r)
    strategy = {}
    for p in z:
        if arena.owner[p] != SYS:
            continue
        r = rank[p]
        nxt = arena.succ[p]
        far = len(layers)
        choice = None
        if p in guarantee:
            choice = next((d for d in nxt if d in z), None)
        if choice is None:
            # descend a layer, or stay in this one while the assumption is off
            choice = next((d for d in nxt if rank.get(d, far) < r), None)
        if choice is None:
            choice = next((d for d in nxt if rank.get(d, far) <= r), None)
        strategy[p] = choice
    return Solution(z, strategy)


def solve_safety(arena: Arena, safe: set) -> Solution:
    """Greatest fixpoint of ``safe & cpre``."""
    w = set(safe) & set(arena.owner)
    while True:
        nw = w & arena.cpre(w)
        if nw == w:
            break
        w = nw
    strategy = {p: next((d for d in arena.succ[p] if d in w), None)
                for p in w if arena.owner[p] == SYS}
    return Solution(w, strategy)
