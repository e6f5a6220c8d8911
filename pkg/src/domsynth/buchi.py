"""Nondeterministic Buchi word automata with cube guards.

Guards are conjunctions of literals (cubes).  Disjunctive guards are expressed
with parallel edges, which keeps conjunction, projection and satisfiability
exact and cheap.
"""
from __future__ import annotations

import functools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Iterator, Sequence

from .ltl import Formula, is_nnf, to_nnf
from .words import Lasso


@dataclass(frozen=True)
class Cube:
    pos: frozenset[str] = frozenset()
    neg: frozenset[str] = frozenset()

    @classmethod
    def of_letter(cls, a: Iterable[str], variables: Iterable[str]) -> "Cube":
        a = frozenset(a)
        return cls(a, frozenset(variables) - a)

    def key(self) -> tuple:
        return (tuple(sorted(self.pos)), tuple(sorted(self.neg)))

    def holds(self, a: frozenset[str]) -> bool:
        return self.pos <= a and not (self.neg & a)

    def conj(self, other: "Cube") -> "Cube | None":
        pos = self.pos | other.pos
        neg = self.neg | other.neg
        if pos & neg:
            return None
        return Cube(pos, neg)

    def project(self, keep: frozenset[str]) -> "Cube":
        return Cube(self.pos & keep, self.neg & keep)

    def variables(self) -> frozenset[str]:
        return self.pos | self.neg

    def is_true(self) -> bool:
        return not self.pos and not self.neg

    def __str__(self) -> str:
        if self.is_true():
            return "*"
        lits = sorted([v for v in self.pos] + ["!" + v for v in self.neg],
                      key=lambda s: s.lstrip("!"))
        return "{" + ",".join(lits) + "}"


TRUE_CUBE = Cube()


def parse_cube(text: str) -> Cube:
    text = text.strip()
    if text in ("*", "true", "{}"):
        return TRUE_CUBE
    if not (text.startswith("{") and text.endswith("}")):
        raise ValueError(f"bad guard {text!r}")
    pos, neg = set(), set()
    for lit in text[1:-1].split(","):
        lit = lit.strip()
        if not lit:
            continue
        if lit.startswith("!"):
            neg.add(lit[1:].strip())
        else:
            pos.add(lit)
    if pos & neg:
        raise ValueError(f"contradictory guard {text!r}")
    return Cube(frozenset(pos), frozenset(neg))


@dataclass(frozen=True)
class BuchiAutomaton:
    """States are ``0..n-1``.

    `labels` is only kept for dumps; `keys` holds the original state objects
    when the automaton came from :func:`build`.
    """

    n_states: int
    initial: frozenset[int]
    alphabet: frozenset[str]
    transitions: tuple[tuple[int, Cube, int], ...]
    accepting: frozenset[int]
    labels: tuple[str, ...] = ()
    keys: tuple = field(default=(), compare=False, repr=False)

    @functools.cached_property
    def adjacency(self) -> tuple[tuple[tuple[Cube, int], ...], ...]:
        adj: list[list] = [[] for _ in range(self.n_states)]
        for s, g, d in self.transitions:
            adj[s].append((g, d))
        return tuple(tuple(x) for x in adj)

    def dump(self) -> str:
        """One transition per line, ``src -- guard --> dst``; accepting states get ``*``."""
        def name(q):
            base = self.labels[q] if self.labels else str(q)
            return base + ("*" if q in self.accepting else "")
        lines = ["initial: " + " ".join(name(q) for q in sorted(self.initial))]
        for s, g, d in self.transitions:
            lines.append(f"{name(s)} -- {g} --> {name(d)}")
        return "\n".join(lines)


def build(initial: Iterable[Hashable], successors: Callable, accepting: Callable,
          alphabet: Iterable[str]) -> BuchiAutomaton:
    """Explore reachable states of an implicitly given automaton and renumber them."""
    index: dict = {}
    order: list = []
    queue: deque = deque()

    def intern(s):
        if s not in index:
            index[s] = len(order)
            order.append(s)
            queue.append(s)
        return index[s]

    init = frozenset(intern(s) for s in initial)
    trans = []
    seen_edges = set()
    while queue:
        s = queue.popleft()
        i = index[s]
        for g, d in successors(s):
            e = (i, g, intern(d))
            if e not in seen_edges:
                seen_edges.add(e)
                trans.append(e)
    acc = frozenset(index[s] for s in order if accepting(s))
    return BuchiAutomaton(len(order), init, frozenset(alphabet), tuple(trans), acc,
                          tuple(str(s) for s in order), tuple(order))


def accept_all(alphabet: Iterable[str] = ()) -> BuchiAutomaton:
    return BuchiAutomaton(1, frozenset([0]), frozenset(alphabet), ((0, TRUE_CUBE, 0),),
                          frozenset([0]), ("all",))


def empty_automaton(alphabet: Iterable[str] = ()) -> BuchiAutomaton:
    return BuchiAutomaton(1, frozenset([0]), frozenset(alphabet), ((0, TRUE_CUBE, 0),),
                          frozenset(), ("none",))


def from_lasso(w: Lasso, alphabet: Iterable[str]) -> BuchiAutomaton:
    """Automaton accepting exactly the word `w` (restricted to `alphabet`)."""
    alphabet = frozenset(alphabet)
    n = len(w)
    trans = []
    for i in range(n):
        nxt = i + 1 if i + 1 < n else len(w.stem)
        trans.append((i, Cube.of_letter(w[i] & alphabet, alphabet), nxt))
    return BuchiAutomaton(n, frozenset([0]), alphabet, tuple(trans),
                          frozenset(range(len(w.stem), n)), tuple(f"w{i}" for i in range(n)))


# ---------------------------------------------------------------------------
# LTL translation

def _expand(todo: Sequence[Formula], pos=frozenset(), neg=frozenset(), nxt=frozenset(),
            post=frozenset()) -> Iterator[tuple]:
    if not todo:
        yield pos, neg, nxt, post
        return
    f, rest = todo[0], todo[1:]
    op = f.op
    if op == "true":
        yield from _expand(rest, pos, neg, nxt, post)
    elif op == "false":
        return
    elif op == "atom":
        if f.name not in neg:
            yield from _expand(rest, pos | {f.name}, neg, nxt, post)
    elif op == "not":
        name = f.args[0].name
        if name not in pos:
            yield from _expand(rest, pos, neg | {name}, nxt, post)
    elif op == "and":
        yield from _expand(f.args + rest, pos, neg, nxt, post)
    elif op == "or":
        yield from _expand((f.args[0],) + rest, pos, neg, nxt, post)
        yield from _expand((f.args[1],) + rest, pos, neg, nxt, post)
    elif op == "next":
        yield from _expand(rest, pos, neg, nxt | {f.args[0]}, post)
    elif op == "until":
        yield from _expand((f.args[1],) + rest, pos, neg, nxt, post)
        yield from _expand((f.args[0],) + rest, pos, neg, nxt | {f}, post | {f})
    elif op == "eventually":
        yield from _expand((f.args[0],) + rest, pos, neg, nxt, post)
        yield from _expand(rest, pos, neg, nxt | {f}, post | {f})
    elif op == "release":
        yield from _expand(f.args + rest, pos, neg, nxt, post)
        yield from _expand((f.args[1],) + rest, pos, neg, nxt | {f}, post)
    elif op == "globally":
        yield from _expand((f.args[0],) + rest, pos, neg, nxt | {f}, post)
    else:
        raise ValueError(f"formula not in negation normal form: {f}")


def _eventualities(f: Formula) -> set[Formula]:
    out = {f} if f.op in ("until", "eventually") else set()
    for a in f.args:
        out |= _eventualities(a)
    return out


@functools.lru_cache(maxsize=4096)
def ltl_to_buchi(f: Formula) -> BuchiAutomaton:
    """Tableau translation: generalized Buchi over obligation sets, then a counter."""
    if not is_nnf(f):
        f = to_nnf(f)
    evs = sorted(_eventualities(f))
    m = len(evs)

    @functools.lru_cache(maxsize=None)
    def alternatives(obligations: frozenset) -> tuple:
        alts = set()
        for pos, neg, nxt, post in _expand(tuple(sorted(obligations))):
            ok = frozenset(i for i, u in enumerate(evs) if u not in post)
            alts.add((Cube(pos, neg), frozenset(nxt), ok))
        return tuple(sorted(alts, key=lambda t: (t[0].key(), sorted(map(str, t[1])), sorted(t[2]))))

    def successors(state):
        obligations, j, _ = state
        for cube, nxt, ok in alternatives(obligations):
            if m == 0:
                yield cube, (nxt, 0, True)
                continue
            jj, wrapped = j, False
            while jj in ok:
                jj += 1
                if jj == m:
                    jj, wrapped = 0, True
                    break
            yield cube, (nxt, jj, wrapped)

    init = (frozenset([f]), 0, m == 0)
    return build([init], successors, lambda s: s[2], f.atoms())


# ---------------------------------------------------------------------------
# boolean operations

def product(a: BuchiAutomaton, b: BuchiAutomaton) -> BuchiAutomaton:
    """Intersection via the two-phase construction."""
    adj_a, adj_b = a.adjacency, b.adjacency

    def successors(state):
        p, q, phase = state
        if phase == 0 and p in a.accepting:
            nphase = 1
        elif phase == 1 and q in b.accepting:
            nphase = 0
        else:
            nphase = phase
        for ga, pa in adj_a[p]:
            for gb, qb in adj_b[q]:
                g = ga.conj(gb)
                if g is not None:
                    yield g, (pa, qb, nphase)

    init = [(p, q, 0) for p in sorted(a.initial) for q in sorted(b.initial)]
    return build(init, successors,
                 lambda s: s[2] == 1 and s[1] in b.accepting, a.alphabet | b.alphabet)


def union(a: BuchiAutomaton, b: BuchiAutomaton) -> BuchiAutomaton:
    adj = (a.adjacency, b.adjacency)
    accs = (a.accepting, b.accepting)

    def successors(state):
        side, q = state
        for g, d in adj[side][q]:
            yield g, (side, d)

    init = [(0, q) for q in sorted(a.initial)] + [(1, q) for q in sorted(b.initial)]
    return build(init, successors, lambda s: s[1] in accs[s[0]], a.alphabet | b.alphabet)


def project(a: BuchiAutomaton, keep: Iterable[str]) -> BuchiAutomaton:
    """Existentially quantify every variable outside `keep` (edge by edge)."""
    keep = frozenset(keep)
    trans = tuple(dict.fromkeys((s, g.project(keep), d) for s, g, d in a.transitions))
    return BuchiAutomaton(a.n_states, a.initial, a.alphabet & keep, trans, a.accepting, a.labels)


# ---------------------------------------------------------------------------
# emptiness

@dataclass(frozen=True)
class LassoWitness:
    lasso: Lasso
    stem_states: tuple
    loop_states: tuple


def find_lasso(initial: Iterable[Hashable], successors: Callable, accepting: Callable):
    """Search an implicit graph for a reachable accepting cycle.

    `successors(node)` yields ``(label, node)`` pairs.  Returns
    ``(stem, loop)`` as lists of ``(node, label)`` steps (each node paired
    with the label of the edge leaving it), or ``None``.
    """
    parent: dict = {}
    order = []
    queue = deque()
    for s in initial:
        if s not in parent:
            parent[s] = None
            order.append(s)
            queue.append(s)
    succ_cache: dict = {}
    while queue:
        s = queue.popleft()
        succ_cache[s] = list(successors(s))
        for lab, d in succ_cache[s]:
            if d not in parent:
                parent[d] = (s, lab)
                order.append(d)
                queue.append(d)
    comp = _sccs(order, succ_cache)
    for s in order:
        if not accepting(s):
            continue
        c = comp[s]
        # shortest cycle s -> ... -> s inside the component
        back: dict = {}
        q = deque()
        found = None
        for lab, d in succ_cache[s]:
            if comp.get(d) != c:
                continue
            if d == s:
                found = [(s, lab)]
                break
            if d not in back:
                back[d] = (s, lab)
                q.append(d)
        while found is None and q:
            u = q.popleft()
            for lab, d in succ_cache[u]:
                if comp.get(d) != c:
                    continue
                if d == s:
                    path = [(u, lab)]
                    while u != s:
                        pu, plab = back[u]
                        path.append((pu, plab))
                        u = pu
                    found = path[::-1]
                    break
                if d not in back:
                    back[d] = (u, lab)
                    q.append(d)
        if found is None:
            continue
        stem = []
        u = s
        while parent[u] is not None:
            pu, lab = parent[u]
            stem.append((pu, lab))
            u = pu
        return stem[::-1], found
    return None


def _sccs(nodes: list, succ: dict) -> dict:
    """Tarjan, iterative; maps node -> component id."""
    index: dict = {}
    low: dict = {}
    onstack: set = set()
    stack: list = []
    comp: dict = {}
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        onstack.add(root)
        while work:
            v, i = work[-1]
            edges = succ.get(v, ())
            if i < len(edges):
                work[-1] = (v, i + 1)
                w = edges[i][1]
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    onstack.add(w)
                    work.append((w, 0))
                elif w in onstack:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    u = work[-1][0]
                    low[u] = min(low[u], low[v])
                if low[v] == index[v]:
                    while True:
                        w = stack.pop()
                        onstack.discard(w)
                        comp[w] = v
                        if w == v:
                            break
    return comp


def is_empty(a: BuchiAutomaton) -> LassoWitness | None:
    """``None`` if the language is empty, else an accepted lasso with its run."""
    adj = a.adjacency
    res = find_lasso(sorted(a.initial), lambda q: adj[q], lambda q: q in a.accepting)
    if res is None:
        return None
    stem, loop = res
    word = Lasso(tuple(g.pos for _, g in stem), tuple(g.pos for _, g in loop))
    return LassoWitness(word, tuple(q for q, _ in stem), tuple(q for q, _ in loop))


def accepts(a: BuchiAutomaton, w: Lasso) -> bool:
    adj = a.adjacency
    n, s = len(w), len(w.stem)

    def successors(node):
        q, i = node
        letter = w[i]
        nxt = i + 1 if i + 1 < n else s
        for g, d in adj[q]:
            if g.holds(letter):
                yield None, (d, nxt)

    return find_lasso([(q, 0) for q in sorted(a.initial)], successors,
                      lambda node: node[0] in a.accepting) is not None
