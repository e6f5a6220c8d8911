"""Independent reference implementations used by the tests.

Nothing here reuses the package's algorithms: LTL is evaluated straight from
the semantics on the unrolled lasso, and composition follows the fill-in
equations over finite histories.
"""
from __future__ import annotations

import random
from functools import lru_cache

from domsynth.ltl import Formula
from domsynth.words import Lasso


def holds(f: Formula, w: Lasso, i: int = 0) -> bool:
    """LTL semantics on a lasso by bounded look-ahead.

    Positions beyond ``i + len(w)`` repeat earlier suffixes, so every
    existential search over the future can stop there.
    """
    horizon = len(w)

    @lru_cache(maxsize=None)
    def ev(g: Formula, j: int) -> bool:
        j = _canon(w, j)
        op = g.op
        if op == "true":
            return True
        if op == "false":
            return False
        if op == "atom":
            return g.name in w[j]
        if op == "not":
            return not ev(g.args[0], j)
        if op == "and":
            return ev(g.args[0], j) and ev(g.args[1], j)
        if op == "or":
            return ev(g.args[0], j) or ev(g.args[1], j)
        if op == "implies":
            return (not ev(g.args[0], j)) or ev(g.args[1], j)
        if op == "iff":
            return ev(g.args[0], j) == ev(g.args[1], j)
        if op == "next":
            return ev(g.args[0], j + 1)
        if op == "eventually":
            return any(ev(g.args[0], k) for k in range(j, j + horizon + 1))
        if op == "globally":
            return all(ev(g.args[0], k) for k in range(j, j + horizon + 1))
        if op == "until":
            a, b = g.args
            for k in range(j, j + horizon + 1):
                if ev(b, k):
                    return True
                if not ev(a, k):
                    return False
            return False
        if op == "release":
            a, b = g.args
            for k in range(j, j + horizon + 1):
                if not ev(b, k):
                    return False
                if ev(a, k):
                    return True
            return True
        raise ValueError(op)

    return ev(f, i)


def _canon(w: Lasso, j: int) -> int:
    s, n = len(w.stem), len(w.loop)
    return j if j < s else s + (j - s) % n


def fill_in_compose(sp, sq, gamma_prefix):
    """Joint outputs via the alpha_p / alpha_q fill-in equations.

    ``s(h)`` is the output a transducer produces after reading the history
    ``h``; each side receives the external letter joined with the other
    side's output on its own filled-in history.
    """
    def s_of(t):
        @lru_cache(maxsize=None)
        def out(h):
            q = t.initial
            for a in h:
                q = t.step(q, a)
            return t.output(q)
        return out

    s_p, s_q = s_of(sp), s_of(sq)

    @lru_cache(maxsize=None)
    def alpha_p(h):
        return tuple((h[i] | s_q(alpha_q(h[:i]))) & sp.inputs for i in range(len(h)))

    @lru_cache(maxsize=None)
    def alpha_q(h):
        return tuple((h[i] | s_p(alpha_p(h[:i]))) & sq.inputs for i in range(len(h)))

    letters = []
    for k in range(len(gamma_prefix)):
        h = tuple(gamma_prefix[:k])
        letters.append(gamma_prefix[k] | s_p(alpha_p(h)) | s_q(alpha_q(h)))
    return letters


def random_formula(rng: random.Random, atoms, depth: int) -> Formula:
    from domsynth import ltl
    if depth == 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.08:
            return ltl.TRUE
        if r < 0.12:
            return ltl.FALSE
        return ltl.Atom(rng.choice(atoms))
    unary = [ltl.Not, ltl.Next, ltl.Eventually, ltl.Globally]
    binary = [ltl.And, ltl.Or, ltl.Implies, ltl.Iff, ltl.Until, ltl.Release]
    if rng.random() < 0.45:
        return rng.choice(unary)(random_formula(rng, atoms, depth - 1))
    return rng.choice(binary)(random_formula(rng, atoms, depth - 1), random_formula(rng, atoms, depth - 1))


def random_transducer(rng: random.Random, inputs, outputs, max_states: int, name=""):
    from domsynth.strategies import Transducer, valid_letters
    inputs, outputs = sorted(inputs), sorted(outputs)
    n = rng.randint(1, max_states)
    in_letters = valid_letters(inputs)
    out_letters = valid_letters(outputs)
    delta = {(q, a): rng.randrange(n) for q in range(n) for a in in_letters}
    out = {q: rng.choice(out_letters) for q in range(n)}
    return Transducer.from_table(inputs, outputs, n, delta, out, name)


def random_lasso(rng: random.Random, letters, max_stem: int, max_loop: int) -> Lasso:
    stem = tuple(rng.choice(letters) for _ in range(rng.randint(0, max_stem)))
    loop = tuple(rng.choice(letters) for _ in range(rng.randint(1, max_loop)))
    return Lasso(stem, loop)


def accepted_lassos(aut, lassos):
    """Acceptance of many lassos at once, grouped by loop.

    For a loop v the states from which v^w has an accepting run are those
    reaching an accepting (state, offset) node that lies on a cycle; stems
    are then handled by backward image.
    """
    succ = {}

    def step(q, a):
        key = (q, a)
        if key not in succ:
            succ[key] = {d for g, d in aut.adjacency[q] if g.holds(a)}
        return succ[key]

    states = range(aut.n_states)
    good_by_loop = {}
    for w in lassos:
        v = w.loop
        if v in good_by_loop:
            continue
        m = len(v)
        edges = {(q, i): [(d, (i + 1) % m) for d in step(q, v[i])] for q in states for i in range(m)}

        def reach(src):
            seen, todo = set(), [src]
            while todo:
                x = todo.pop()
                for y in edges[x]:
                    if y not in seen:
                        seen.add(y)
                        todo.append(y)
            return seen

        hubs = {x for x in edges if x[0] in aut.accepting and x in reach(x)}
        good_by_loop[v] = {q for q in states if (q, 0) in hubs or reach((q, 0)) & hubs}
    out = {}
    for w in lassos:
        cur = good_by_loop[w.loop]
        for a in reversed(w.stem):
            cur = {q for q in states if step(q, a) & cur}
        out[w] = bool(cur & set(aut.initial))
    return out
