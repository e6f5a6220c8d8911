"""Winning and dominance checks, the brute-force oracle, bounded synthesis.

Dominance is decided without complementing automata.  For a fixed
environment word the alternative strategies can realise any output word, so
`s` is dominated on gamma exactly when some output word reaches a priority
above the one `s` reaches.  With Ach_k the environment words on which some
output word satisfies the k-th partial conjunction, `s` is dominant iff every
set ``Ach_k & {gamma : comp(s, gamma) violates phi^k}`` is empty.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import kernels
from .buchi import (BuchiAutomaton, Cube, from_lasso, is_empty, ltl_to_buchi,
                    product, project)
from .ltl import Formula, PrioritizedSpec, achieved_on, evaluate_on_lasso, negate_nnf
from .strategies import (InterfaceError, Transducer, compose, comp, transducer_automaton,
                         valid_letters)
from .words import Lasso, enumerate_lassos, merge


@dataclass(frozen=True)
class Context:
    """Interface of the system whose strategy is under study.

    `controlled` are the strategy's outputs; a plant, when present, is part of
    the system and owns its predicate variables.  Everything else is
    environment.
    """

    controlled: frozenset[str]
    env_vars: frozenset[str]
    onehot: tuple[frozenset[str], ...] = ()
    plant: Transducer | None = None

    @classmethod
    def make(cls, controlled: Iterable[str], env_vars: Iterable[str], onehot=(), plant=None):
        controlled, env_vars = frozenset(controlled), frozenset(env_vars)
        if controlled & env_vars:
            raise InterfaceError("controlled and environment variables overlap")
        if plant is not None and plant.outputs & (controlled | env_vars):
            raise InterfaceError("plant predicates must not be strategy or environment variables")
        return cls(controlled, env_vars, tuple(onehot), plant)

    @functools.cached_property
    def env_letters(self) -> tuple[frozenset[str], ...]:
        return tuple(valid_letters(self.env_vars, self.onehot))

    @functools.cached_property
    def out_letters(self) -> tuple[frozenset[str], ...]:
        return tuple(valid_letters(self.controlled, self.onehot))

    @property
    def system_outputs(self) -> frozenset[str]:
        return self.controlled | (self.plant.outputs if self.plant else frozenset())

    def system(self, s: Transducer) -> Transducer:
        if s.outputs != self.controlled:
            raise InterfaceError(f"strategy outputs {sorted(s.outputs)} differ from "
                                 f"controlled variables {sorted(self.controlled)}")
        return compose(s, self.plant) if self.plant is not None else s

    @functools.cached_property
    def world(self) -> BuchiAutomaton:
        """All joint words the system can produce for some output word."""
        if self.plant is None:
            trans = tuple((0, Cube.of_letter(a, self.controlled), 0) for a in self.out_letters)
            return BuchiAutomaton(1, frozenset([0]), self.controlled, trans, frozenset([0]), ("w",))
        free = self.controlled | self.env_vars
        letters = valid_letters(free, self.onehot)
        return transducer_automaton(self.plant, letters, free)

    @functools.lru_cache(maxsize=None)
    def _ach(self, f: Formula) -> BuchiAutomaton:
        return project(product(self.world, ltl_to_buchi(f)), self.env_vars)

    @functools.lru_cache(maxsize=None)
    def _neg(self, f: Formula) -> BuchiAutomaton:
        return ltl_to_buchi(negate_nnf(f))

    def __hash__(self):
        return id(self)

    def __eq__(self, other):
        return self is other


@dataclass(frozen=True)
class Counterexample:
    gamma: Lasso
    better: Lasso
    k: int
    m: int
    path: tuple | None = None  # input nodes along gamma, for annotated generators

    def to_json(self) -> dict:
        d = {"gamma": lasso_json(self.gamma), "better": lasso_json(self.better),
             "k": self.k, "m": self.m}
        if self.path is not None:
            d["path"] = {"stem": list(self.path[0]), "loop": list(self.path[1])}
        return d


@dataclass(frozen=True)
class DominanceVerdict:
    dominant: bool
    counterexample: Counterexample | None = None

    def to_json(self) -> dict:
        return {"format": 1, "dominant": self.dominant,
                "counterexample": self.counterexample.to_json() if self.counterexample else None}


@dataclass(frozen=True)
class WinningVerdict:
    winning: bool
    gamma: Lasso | None = None

    def to_json(self) -> dict:
        return {"format": 1, "winning": self.winning,
                "gamma": lasso_json(self.gamma) if self.gamma else None}


@dataclass(frozen=True)
class SynthesisResult:
    strategy: Transducer | None
    bound: int
    examined: int = 0

    @property
    def found(self) -> bool:
        return self.strategy is not None


def lasso_json(w: Lasso) -> dict:
    return {"stem": [sorted(a) for a in w.stem], "loop": [sorted(a) for a in w.loop]}


def lasso_from_json(d: dict) -> Lasso:
    return Lasso(tuple(frozenset(a) for a in d["stem"]), tuple(frozenset(a) for a in d["loop"]))


# ---------------------------------------------------------------------------
# automata-based checks

def achievability_automaton(spec: PrioritizedSpec, k: int, ctx: Context) -> BuchiAutomaton:
    """Environment words on which some output word satisfies phi^k."""
    if not 1 <= k <= len(spec):
        raise ValueError(f"priority {k} outside 1..{len(spec)}")
    return ctx._ach(spec.partial(k))


def system_automaton(s: Transducer, ctx: Context) -> BuchiAutomaton:
    return transducer_automaton(ctx.system(s), ctx.env_letters, ctx.env_vars)


def check_winning(f: Formula, s: Transducer, ctx: Context) -> WinningVerdict:
    wit = is_empty(product(system_automaton(s, ctx), ctx._neg(f)))
    if wit is None:
        return WinningVerdict(True)
    return WinningVerdict(False, wit.lasso.restrict(ctx.env_vars).normalized())


def best_response(spec: PrioritizedSpec, gamma: Lasso, ctx: Context, floor: int = 0):
    """Highest priority reachable on `gamma` by some output word, with that word.

    Returns ``(m, word)`` where `word` covers the system outputs (strategy
    outputs plus plant predicates); ``(floor, None)`` if nothing beats `floor`.
    """
    fixed = from_lasso(gamma, ctx.env_vars)
    base = product(fixed, ctx.world)
    for m in range(len(spec), floor, -1):
        wit = is_empty(product(base, ltl_to_buchi(spec.partial(m))))
        if wit is not None:
            return m, wit.lasso.restrict(ctx.system_outputs).normalized()
    return floor, None


def check_dominant(spec: PrioritizedSpec, s: Transducer, ctx: Context) -> DominanceVerdict:
    sys_aut = system_automaton(s, ctx)
    system = ctx.system(s)
    for k in range(1, len(spec) + 1):
        bad = product(product(sys_aut, ctx._neg(spec.partial(k))), achievability_automaton(spec, k, ctx))
        wit = is_empty(bad)
        if wit is None:
            continue
        gamma = wit.lasso.restrict(ctx.env_vars).normalized()
        got = achieved_on(spec, comp(system, gamma))
        m, better = best_response(spec, gamma, ctx, floor=got)
        if better is None:  # pragma: no cover - would mean the automata disagree
            raise AssertionError("achievability witness could not be realised")
        return DominanceVerdict(False, Counterexample(gamma, better, got, m))
    return DominanceVerdict(True)


def validate_counterexample(spec: PrioritizedSpec, s: Transducer, ctx: Context,
                            cex: Counterexample) -> bool:
    """Semantic re-check of a counterexample with the reference evaluator."""
    system = ctx.system(s)
    if achieved_on(spec, comp(system, cex.gamma)) != cex.k or cex.m <= cex.k:
        return False
    joint = merge(cex.gamma, cex.better)
    if ctx.plant is not None:
        actions = merge(cex.gamma, cex.better.restrict(ctx.controlled))
        replay = comp(ctx.plant, actions)
        if not replay.same_word(joint):
            return False
    return evaluate_on_lasso(spec.partial(cex.m), joint)


# ---------------------------------------------------------------------------
# brute force

MAX_BRUTE_PAIRS = 50_000_000


def _aligned(words: Sequence[Lasso], stem: int, loop: int) -> list[Lasso]:
    return [w.aligned(stem, loop) for w in words]


def brute_force_dominance(spec: PrioritizedSpec, s: Transducer, ctx: Context,
                          stem_bound: int, loop_bound: int,
                          backend: str | None = None) -> DominanceVerdict:
    """Search all bounded environment and output lassos for remorse.

    ``dominant=True`` only means that no counterexample exists within the
    bounds.
    """
    gammas = list(enumerate_lassos(ctx.env_letters, stem_bound, loop_bound))
    outs = list(enumerate_lassos(ctx.out_letters, stem_bound, loop_bound))
    if len(gammas) * len(outs) > MAX_BRUTE_PAIRS:
        raise ValueError(f"brute-force bound exceeded: {len(gammas)} x {len(outs)} word pairs")
    system = ctx.system(s)
    got = [achieved_on(spec, comp(system, g)) for g in gammas]
    if ctx.plant is None:
        best, arg = _best_vectorised(spec, ctx, gammas, outs, stem_bound, loop_bound, backend)
    else:
        best, arg = _best_with_plant(spec, ctx, gammas, outs)
    for i, g in enumerate(gammas):
        if best[i] > got[i]:
            o = outs[arg[i]]
            joint = merge(g, o)
            if ctx.plant is not None:
                joint = comp(ctx.plant, joint)
            better = joint.restrict(ctx.system_outputs).normalized()
            return DominanceVerdict(False, Counterexample(g.normalized(), better, got[i], int(best[i])))
    return DominanceVerdict(True)


def _best_vectorised(spec, ctx, gammas, outs, stem_bound, loop_bound, backend):
    var_index = {v: i for i, v in enumerate(sorted(ctx.env_vars | ctx.controlled))}
    stem, loop = stem_bound, math.lcm(*range(1, loop_bound + 1))
    g_arr = kernels.encode(_aligned(gammas, stem, loop), var_index, stem, loop)
    o_arr = kernels.encode(_aligned(outs, stem, loop), var_index, stem, loop)
    progs = [kernels.compile_formula(spec.partial(k), var_index) for k in range(1, len(spec) + 1)]
    # different lassos often denote the same word once aligned
    g_arr, g_inv = np.unique(g_arr, axis=0, return_inverse=True)
    o_arr, o_first = np.unique(o_arr, axis=0, return_index=True)
    best = np.zeros(len(g_arr), dtype=np.int64)
    arg = np.zeros(len(g_arr), dtype=np.int64)
    chunk = max(1, 200_000 // max(1, len(o_arr)))
    for lo in range(0, len(g_arr), chunk):
        g = g_arr[lo:lo + chunk]
        joint = (g[:, None, :] | o_arr[None, :, :]).reshape(-1, g.shape[1])
        score = np.zeros(joint.shape[0], dtype=np.int64)
        for prog in progs:
            score += kernels.evaluate_batch(prog, joint, stem, backend)
        score = score.reshape(len(g), len(o_arr))
        best[lo:lo + len(g)] = score.max(axis=1)
        arg[lo:lo + len(g)] = score.argmax(axis=1)
    g_inv = np.asarray(g_inv).reshape(-1)
    return best[g_inv], o_first[arg[g_inv]]


def _best_with_plant(spec, ctx, gammas, outs):
    best = np.zeros(len(gammas), dtype=np.int64)
    arg = np.zeros(len(gammas), dtype=np.int64)
    for i, g in enumerate(gammas):
        for j, o in enumerate(outs):
            v = achieved_on(spec, comp(ctx.plant, merge(g, o)))
            if v > best[i]:
                best[i], arg[i] = v, j
    return best, arg


# ---------------------------------------------------------------------------
# bounded synthesis

def canonical_tables(n_states: int, n_letters: int) -> Iterator[tuple[int, ...]]:
    """Transition tables of accessible automata, one per isomorphism class.

    Row-major ``table[q * n_letters + a]``; states are numbered in order of
    first appearance, which makes the numbering canonical.
    """
    size = n_states * n_letters
    table = [0] * size

    def go(pos: int, max_seen: int):
        if pos == size:
            if max_seen == n_states - 1:
                yield tuple(table)
            return
        q = pos // n_letters
        if q > max_seen:  # state never reached
            return
        # states still to introduce must fit in the remaining slots
        for t in range(min(max_seen + 2, n_states)):
            table[pos] = t
            yield from go(pos + 1, max(max_seen, t))

    yield from go(0, 0)


def enumerate_transducers(ctx: Context, observe: Iterable[str], bound: int) -> Iterator[Transducer]:
    observe = frozenset(observe)
    letters = valid_letters(observe, ctx.onehot)
    outs = ctx.out_letters
    for n in range(1, bound + 1):
        for table in canonical_tables(n, len(letters)):
            for emit in itertools.product(range(len(outs)), repeat=n):
                delta = {(q, letters[a]): table[q * len(letters) + a]
                         for q in range(n) for a in range(len(letters))}
                yield Transducer.from_table(observe, ctx.controlled, n, delta,
                                            {q: outs[emit[q]] for q in range(n)})


def default_observed(spec: PrioritizedSpec, ctx: Context) -> frozenset[str]:
    """Environment variables the objectives or the plant depend on."""
    seen = spec.atoms() & ctx.env_vars
    if ctx.plant is not None:
        seen |= ctx.plant.inputs & ctx.env_vars
    return frozenset(seen)


def synthesize_winning_bounded(f: Formula, ctx: Context, bound: int,
                               observe: Iterable[str] | None = None) -> SynthesisResult:
    """First canonical transducer (up to `bound` states) winning for `f`."""
    if bound < 1:
        raise ValueError("state bound must be at least 1")
    observe = frozenset(observe) if observe is not None else default_observed(PrioritizedSpec((f,)), ctx)
    witnesses: list[Lasso] = []
    count = 0
    for s in enumerate_transducers(ctx, observe, bound):
        count += 1
        system = ctx.system(s)
        if any(not evaluate_on_lasso(f, comp(system, g)) for g in witnesses):
            continue
        v = check_winning(f, s, ctx)
        if v.winning:
            return SynthesisResult(s, bound, count)
        witnesses.append(v.gamma)
    return SynthesisResult(None, bound, count)


def synthesize_dominant_bounded(spec: PrioritizedSpec, ctx: Context, bound: int,
                                observe: Iterable[str] | None = None) -> SynthesisResult:
    """First canonical transducer (up to `bound` states) passing check_dominant.

    A negative result only covers the bound; it does not prove that no
    dominant strategy exists.
    """
    if bound < 1:
        raise ValueError("state bound must be at least 1")
    observe = frozenset(observe) if observe is not None else default_observed(spec, ctx)
    # remembered counterexamples: (gamma, best achievable priority on gamma)
    seen: list[tuple[Lasso, int]] = []
    count = 0
    for s in enumerate_transducers(ctx, observe, bound):
        count += 1
        system = ctx.system(s)
        if any(achieved_on(spec, comp(system, g)) < m for g, m in seen):
            continue
        v = check_dominant(spec, s, ctx)
        if v.dominant:
            return SynthesisResult(s, bound, count)
        seen.append((v.counterexample.gamma, v.counterexample.m))
    return SynthesisResult(None, bound, count)
