"""Assumption generators: finite, regular representations of assumption trees.

A generator alternates between branch nodes and input nodes.  A branch node
offers an ordered list of promises (numbered from 1); each promise leads to an
input node, which restricts the next environment letter through guarded edges
back into branch nodes.  Unfolding a generator from its root yields the tree.

Input nodes may be marked *pending*.  A path through the unfolding belongs to
the tree only if it visits non-pending input nodes infinitely often, which is
how promises such as "eventually not keep" are kept finite-state.

Annotations assign an output letter to every input node, i.e. to every tree
node reached by a promise.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .buchi import TRUE_CUBE, BuchiAutomaton, Cube, build, is_empty, product
from .dominance import Context, Counterexample, DominanceVerdict, best_response, default_observed
from .games import ENV, SYS, Arena, solve_streett
from .ltl import PrioritizedSpec, achieved_on
from .strategies import InterfaceError, Transducer, comp, valid_letters
from .words import Lasso, format_letter, merge


# ---------------------------------------------------------------------------
# unary codec for promise sequences

def encode_unary(seq: Sequence[int]) -> str:
    """``[a, b, c]`` becomes ``0^a 1 0^b 1 0^c 1``."""
    out = []
    for n in seq:
        if n < 0:
            raise ValueError(f"cannot encode negative number {n}")
        out.append("0" * n + "1")
    return "".join(out)


def decode_unary(bits: str) -> tuple[list[int], str]:
    """Decode complete numbers; an unterminated run of zeros is returned as remainder."""
    seq = []
    run = 0
    for i, c in enumerate(bits):
        if c == "0":
            run += 1
        elif c == "1":
            seq.append(run)
            run = 0
        else:
            raise ValueError(f"invalid character {c!r} at position {i} in unary code")
    return seq, "0" * run


# ---------------------------------------------------------------------------
# generators

@dataclass(frozen=True)
class InputNode:
    name: str
    edges: tuple[tuple[Cube, int], ...]  # guard -> branch node, first match wins
    pending: bool = False

    def target(self, letter: frozenset[str]) -> int | None:
        for g, b in self.edges:
            if g.holds(letter):
                return b
        return None


@dataclass(frozen=True)
class AssumptionGenerator:
    env_vars: frozenset[str]
    branches: tuple[tuple[str, ...], ...]
    nodes: tuple[InputNode, ...]
    root: int = 0
    onehot: tuple[frozenset[str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "env_vars", frozenset(self.env_vars))
        names = [n.name for n in self.nodes]
        if len(set(names)) != len(names):
            raise ValueError("duplicate input node names")
        if not 0 <= self.root < len(self.branches):
            raise ValueError("root is not a branch node")
        for b, promises in enumerate(self.branches):
            if not promises:
                raise ValueError(f"branch node {b} has no promise")
            for p in promises:
                if p not in names:
                    raise ValueError(f"branch node {b} promises unknown input node {p!r}")
        letters = self.letters()
        for n in self.nodes:
            for g, b in n.edges:
                if not 0 <= b < len(self.branches):
                    raise ValueError(f"input node {n.name!r} leads to unknown branch node {b}")
                if not g.variables() <= self.env_vars:
                    raise ValueError(f"guard {g} of {n.name!r} uses non-environment variables")
            if not any(n.target(a) is not None for a in letters):
                raise ValueError(f"input node {n.name!r} allows no letter")

    @property
    def node(self) -> dict[str, InputNode]:
        return {n.name: n for n in self.nodes}

    def letters(self) -> list[frozenset[str]]:
        return valid_letters(self.env_vars, self.onehot)

    def size(self) -> int:
        return len(self.nodes)

    def promise_free(self) -> bool:
        return all(len(p) == 1 for p in self.branches)

    def reachable_branches(self) -> list[int]:
        seen, queue = [self.root], deque([self.root])
        node = self.node
        while queue:
            b = queue.popleft()
            for p in self.branches[b]:
                for _, d in node[p].edges:
                    if d not in seen:
                        seen.append(d)
                        queue.append(d)
        return seen

    def addresses(self) -> dict[str, tuple[list[int], list[frozenset[str]]]]:
        """Shortest promise/letter address of every reachable input node."""
        node = self.node
        out: dict = {}
        queue = deque([(self.root, [], [])])
        seen_b = {self.root}
        letters = self.letters()
        while queue:
            b, proms, lets = queue.popleft()
            for i, p in enumerate(self.branches[b], start=1):
                if p in out:
                    continue
                out[p] = (proms + [i], lets)
                for a in letters:
                    d = node[p].target(a)
                    if d is not None and d not in seen_b:
                        seen_b.add(d)
                        queue.append((d, proms + [i], lets + [a]))
        return out

    def describe(self) -> str:
        lines = [f"root b{self.root}"]
        for b, ps in enumerate(self.branches):
            lines.append(f"b{b} -> " + " ".join(ps))
        for n in self.nodes:
            tag = " pending" if n.pending else ""
            for g, d in n.edges:
                lines.append(f"{n.name}{tag} | {g} -> b{d}")
        return "\n".join(lines)


@dataclass(frozen=True)
class AnnotatedGenerator:
    generator: AssumptionGenerator
    outputs: frozenset[str]
    annotation: Mapping[str, frozenset[str]] = field(hash=False)

    def __post_init__(self):
        object.__setattr__(self, "outputs", frozenset(self.outputs))
        if self.outputs & self.generator.env_vars:
            raise InterfaceError("annotation outputs overlap the generator's environment")
        for n in self.generator.nodes:
            if n.name not in self.annotation:
                raise InterfaceError(f"input node {n.name!r} is not annotated")
            if not frozenset(self.annotation[n.name]) <= self.outputs:
                raise InterfaceError(f"annotation of {n.name!r} uses undeclared outputs")

    def __hash__(self):
        return hash((self.generator, self.outputs,
                     tuple(sorted((k, tuple(sorted(v))) for k, v in self.annotation.items()))))

    def describe(self) -> str:
        lines = [self.generator.describe()]
        for n in self.generator.nodes:
            lines.append(f"{n.name} : {format_letter(self.annotation[n.name])}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# builders

def universal_generator(env_vars: Iterable[str], onehot=()) -> AssumptionGenerator:
    return AssumptionGenerator(frozenset(env_vars), (("u",),), (InputNode("u", ((TRUE_CUBE, 0),)),),
                               0, tuple(onehot))


def window_generator(env_vars: Iterable[str], observe: Iterable[str], depth: int,
                     onehot=()) -> AssumptionGenerator:
    """Promise-free universal generator remembering the last `depth` observed letters."""
    observe = sorted(observe)
    letters = valid_letters(observe, onehot)
    hist = [()]
    for d in range(1, depth + 1):
        hist += [h for h in itertools.product(range(len(letters)), repeat=d)]
    index = {h: i for i, h in enumerate(hist)}
    nodes = []
    for h in hist:
        edges = []
        for a, let in enumerate(letters):
            nxt = (h + (a,))[-depth:] if depth else ()
            edges.append((Cube.of_letter(let, observe), index[nxt]))
        nodes.append(InputNode(_hist_name(h), tuple(edges)))
    branches = tuple((_hist_name(h),) for h in hist)
    return AssumptionGenerator(frozenset(env_vars), branches, tuple(nodes), 0, tuple(onehot))


def _hist_name(h: tuple) -> str:
    return "w" + "".join(str(x) for x in h)


@dataclass(frozen=True)
class Pattern:
    """Linear promise pattern: guards for the first steps, then a tail.

    Tails: ``free`` (anything), ``always`` (guard forever), ``eventually``
    (guard at some later step, then anything).
    """

    prefix: tuple[Cube, ...]
    tail: str = "free"
    guard: Cube = TRUE_CUBE

    def __str__(self) -> str:
        pre = ".".join(str(c) for c in self.prefix)
        t = {"free": "*", "always": f"G{self.guard}", "eventually": f"F{self.guard}"}[self.tail]
        return (pre + "." + t) if pre else t

    def size(self) -> int:
        return len(self.prefix) + {"free": 1, "always": 1, "eventually": 3}[self.tail]


def pattern_generator(env_vars: Iterable[str], patterns: Sequence[Pattern], onehot=()) -> AssumptionGenerator:
    """One root promise per pattern (the union of the patterns' languages)."""
    branches: list[tuple[str, ...]] = [()]
    nodes: list[InputNode] = []

    def new_branch(promises) -> int:
        promises = tuple(promises)
        if promises in branches[1:]:
            return branches.index(promises, 1)
        branches.append(promises)
        return len(branches) - 1

    root_promises = []
    for j, pat in enumerate(patterns, start=1):
        tag = f"p{j}" if len(patterns) > 1 else "p"
        free = f"{tag}f"
        if pat.tail == "free":
            entry = [free]
            nodes.append(InputNode(free, ((TRUE_CUBE, new_branch([free])),)))
        elif pat.tail == "always":
            a = f"{tag}g"
            entry = [a]
            nodes.append(InputNode(a, ((pat.guard, new_branch([a])),)))
        elif pat.tail == "eventually":
            now, later = f"{tag}e", f"{tag}w"
            bf = new_branch([free])
            nodes.append(InputNode(free, ((TRUE_CUBE, bf),)))
            nodes.append(InputNode(now, ((pat.guard, bf),)))
            bw = new_branch([now, later])
            nodes.append(InputNode(later, ((TRUE_CUBE, bw),), pending=True))
            entry = [now, later]
        else:
            raise ValueError(f"unknown pattern tail {pat.tail!r}")
        for i in range(len(pat.prefix) - 1, -1, -1):
            name = f"{tag}s{i}"
            nodes.append(InputNode(name, ((pat.prefix[i], new_branch(entry)),)))
            entry = [name]
        root_promises += entry
    branches[0] = tuple(root_promises)
    nodes.sort(key=lambda n: n.name)
    return AssumptionGenerator(frozenset(env_vars), tuple(branches), tuple(nodes), 0, tuple(onehot))


def union_generators(gens: Sequence[AssumptionGenerator]) -> AssumptionGenerator:
    """Fresh root offering the root promises of every generator."""
    if len(gens) == 1:
        return gens[0]
    env = frozenset().union(*(g.env_vars for g in gens))
    branches: list = [()]
    nodes = []
    root = []
    for j, g in enumerate(gens, start=1):
        off = len(branches)
        ren = {n.name: f"u{j}.{n.name}" for n in g.nodes}
        branches += [tuple(ren[p] for p in ps) for ps in g.branches]
        nodes += [InputNode(ren[n.name], tuple((c, d + off) for c, d in n.edges), n.pending)
                  for n in g.nodes]
        root += [ren[p] for p in g.branches[g.root]]
    branches[0] = tuple(root)
    onehot = tuple(dict.fromkeys(h for g in gens for h in g.onehot))
    return AssumptionGenerator(env, tuple(branches), tuple(nodes), 0, onehot)


def union_annotated(ags: Sequence[AnnotatedGenerator]) -> AnnotatedGenerator:
    if len(ags) == 1:
        return ags[0]
    gen = union_generators([a.generator for a in ags])
    ann = {}
    for j, a in enumerate(ags, start=1):
        for k, v in a.annotation.items():
            ann[f"u{j}.{k}"] = frozenset(v)
    return AnnotatedGenerator(gen, ags[0].outputs, ann)


# ---------------------------------------------------------------------------
# paths and languages

def contains_path(g: AssumptionGenerator, path: Sequence) -> bool:
    """Is the node addressed by an alternating promise/letter sequence in the tree?

    Promises are positive integers, letters are sets of variable names.
    Membership only looks at the finite address; pending nodes do not matter.
    """
    b = g.root
    node = g.node
    cur: InputNode | None = None
    for i, step in enumerate(path):
        if i % 2 == 0:
            if isinstance(step, bool) or not isinstance(step, int):
                raise ValueError(f"position {i} of the path must be a promise number, got {step!r}")
            if not 1 <= step <= len(g.branches[b]):
                return False
            cur = node[g.branches[b][step - 1]]
        else:
            if isinstance(step, (int, str)):
                raise ValueError(f"position {i} of the path must be a letter, got {step!r}")
            a = frozenset(step)
            if a - g.env_vars or a not in g.letters():
                return False
            d = cur.target(a)
            if d is None:
                return False
            b = d
    return True


def letter_automaton(g: AssumptionGenerator, over: Iterable[str] | None = None) -> BuchiAutomaton:
    """Promises collapsed: words of environment letters along tree paths.

    States are input nodes (plus the initial choice); accepting states are
    the non-pending input nodes.
    """
    over = frozenset(over) if over is not None else g.env_vars
    node = g.node
    letters = valid_letters(over, g.onehot)

    def successors(name):
        n = node[name]
        for a in letters:
            d = n.target(a & g.env_vars)
            if d is None:
                continue
            for p in g.branches[d]:
                yield Cube.of_letter(a, over), p

    return build(list(g.branches[g.root]), successors, lambda s: not node[s].pending, over)


def _sim_arena(small: AssumptionGenerator, big: AssumptionGenerator):
    """Fair simulation game: can `big` match every path of `small`?"""
    env = small.env_vars | big.env_vars
    onehot = tuple(dict.fromkeys(small.onehot + big.onehot))
    letters = valid_letters(env, onehot)
    ns, nb = small.node, big.node

    def moves(p):
        if p[0] == "S":  # spoiler: letter and successor in `small`
            _, a, b = p
            for let in letters:
                d = ns[a].target(let & small.env_vars)
                if d is None:
                    continue
                for a2 in small.branches[d]:
                    yield ("D", a2, b, let)
        elif p[0] == "D":
            _, a2, b, let = p
            d = nb[b].target(let & big.env_vars)
            if d is None:
                return
            for b2 in big.branches[d]:
                yield ("S", a2, b2)
        else:  # initial duplicator choice
            _, a = p
            for b in big.branches[big.root]:
                yield ("S", a, b)

    init = [("I", a) for a in small.branches[small.root]]
    arena = Arena.explore(init, lambda p: ENV if p[0] == "S" else SYS, moves)
    assume = {p for p in arena.owner if p[0] == "S" and not ns[p[1]].pending}
    guarantee = {p for p in arena.owner if p[0] == "S" and not nb[p[2]].pending}
    return arena, init, assume, guarantee


def simulates(big: AssumptionGenerator, small: AssumptionGenerator) -> bool:
    """Fair simulation of `small` by `big`; implies path-language inclusion."""
    arena, init, assume, guarantee = _sim_arena(small, big)
    sol = solve_streett(arena, assume, guarantee)
    return all(p in sol.winning for p in init)


def at_most_as_permissive(g1: AssumptionGenerator, g2: AssumptionGenerator) -> bool:
    """Permissiveness preorder ``g1 <= g2``, decided by fair simulation."""
    return simulates(g2, g1)


def is_universal(g: AssumptionGenerator, env_vars: Iterable[str] | None = None) -> bool:
    """Does the generator, promises collapsed, admit every environment word?

    Ramsey-based check on the letter automaton: every lasso shape is covered
    by a pair of run graphs ``(u, v)`` with ``u v = u`` and ``v v = v``, and
    the generator is universal iff each such pair has an accepting run.
    """
    env = frozenset(env_vars) if env_vars is not None else g.env_vars
    aut = letter_automaton(g, env | g.env_vars)
    acc = aut.accepting

    def letter_graph(a):
        best: dict = {}
        for q, cube, d in aut.transitions:
            if cube.holds(a):
                best[(q, d)] = max(best.get((q, d), 0), int(q in acc))
        return frozenset((q, d, b) for (q, d), b in best.items())

    def mul(x, y):
        by_src: dict = {}
        for q, d, b in y:
            by_src.setdefault(q, []).append((d, b))
        best: dict = {}
        for q, m, b1 in x:
            for d, b2 in by_src.get(m, ()):
                best[(q, d)] = max(best.get((q, d), 0), b1 | b2)
        return frozenset((q, d, b) for (q, d), b in best.items())

    gens = {letter_graph(a) for a in valid_letters(env | g.env_vars, g.onehot)}
    semigroup = set(gens)
    todo = list(gens)
    while todo:
        x = todo.pop()
        for y in gens:
            z = mul(x, y)
            if z not in semigroup:
                semigroup.add(z)
                todo.append(z)
    idem = [h for h in semigroup if mul(h, h) == h]
    for h in idem:
        looping = {q for q, d, b in h if (d, d, 1) in h}
        for u in semigroup:
            if mul(u, h) != u:
                continue
            if not any(q in aut.initial and d in looping for q, d, _ in u):
                return False
    return True


# ---------------------------------------------------------------------------
# dominance of annotations

def _relevant_env(spec: PrioritizedSpec, ctx: Context, g: AssumptionGenerator) -> frozenset[str]:
    used = g.env_vars | spec.atoms()
    if ctx.plant is not None:
        used |= ctx.plant.inputs
    return frozenset(used & ctx.env_vars)


def annotated_automaton(ag: AnnotatedGenerator, ctx: Context, env: Iterable[str]) -> BuchiAutomaton:
    """Computations of the annotation (with the plant) along every tree path.

    States are ``(input node, plant state)``; accepting states sit on
    non-pending input nodes.
    """
    g = ag.generator
    if ag.outputs != ctx.controlled:
        raise InterfaceError(f"annotation outputs {sorted(ag.outputs)} differ from "
                             f"controlled variables {sorted(ctx.controlled)}")
    env = frozenset(env)
    plant = ctx.plant
    alphabet = env | ctx.system_outputs
    letters = valid_letters(env, ctx.onehot)
    node = g.node

    def successors(state):
        name, q = state
        emit = frozenset(ag.annotation[name])
        if plant is not None:
            emit |= plant.output(q)
        for a in letters:
            d = node[name].target(a & g.env_vars)
            if d is None:
                continue
            q2 = plant.step(q, emit | a) if plant is not None else q
            cube = Cube.of_letter(emit | a, alphabet)
            for p in g.branches[d]:
                yield cube, (p, q2)

    q0 = plant.initial if plant is not None else None
    return build([(p, q0) for p in g.branches[g.root]], successors,
                 lambda s: not node[s[0]].pending, alphabet)


def annotated_computation(ag: AnnotatedGenerator, ctx: Context, gamma: Lasso, path) -> Lasso:
    """Joint word of the annotation along `path` (input nodes aligned with gamma)."""
    stem, loop = path
    outs = Lasso(tuple(frozenset(ag.annotation[n]) for n in stem),
                 tuple(frozenset(ag.annotation[n]) for n in loop))
    word = merge(gamma, outs)
    if ctx.plant is not None:
        word = comp(ctx.plant, word)
    return word


def path_in_generator(g: AssumptionGenerator, gamma: Lasso, path) -> bool:
    """Is the aligned (node, letter) lasso a path of the tree?"""
    stem, loop = path
    if len(stem) != len(gamma.stem) or len(loop) != len(gamma.loop) or not loop:
        return False
    node = g.node
    names = list(stem) + list(loop)
    if any(n not in node for n in names):
        return False
    if names[0] not in g.branches[g.root]:
        return False
    for i, n in enumerate(names):
        nxt = names[i + 1] if i + 1 < len(names) else loop[0]
        d = node[n].target(gamma[i] & g.env_vars)
        if d is None or nxt not in g.branches[d]:
            return False
    return any(not node[n].pending for n in loop)


def check_annotation_dominant(spec: PrioritizedSpec, ag: AnnotatedGenerator,
                              ctx: Context) -> DominanceVerdict:
    """Dominance of an annotation, restricted to the paths of its tree.

    Alternatives are arbitrary output words along a single path, so the check
    mirrors check_dominant with the generator in place of the strategy.
    """
    env = _relevant_env(spec, ctx, ag.generator)
    base = annotated_automaton(ag, ctx, env)
    for k in range(1, len(spec) + 1):
        mid = product(base, ctx._neg(spec.partial(k)))
        bad = product(mid, ctx._ach(spec.partial(k)))
        wit = is_empty(bad)
        if wit is None:
            continue

        def node_of(s):
            return base.keys[mid.keys[bad.keys[s][0]][0]][0]

        path = (tuple(node_of(s) for s in wit.stem_states), tuple(node_of(s) for s in wit.loop_states))
        gamma = wit.lasso.restrict(ctx.env_vars)
        got = achieved_on(spec, annotated_computation(ag, ctx, gamma, path))
        m, better = best_response(spec, gamma, ctx, floor=got)
        if better is None:  # pragma: no cover - the automata would disagree
            raise AssertionError("achievability witness could not be realised")
        return DominanceVerdict(False, Counterexample(gamma, better, got, m, path))
    return DominanceVerdict(True)


def validate_annotation_counterexample(spec: PrioritizedSpec, ag: AnnotatedGenerator,
                                       ctx: Context, cex: Counterexample) -> bool:
    if cex.path is None or not path_in_generator(ag.generator, cex.gamma, cex.path):
        return False
    got = achieved_on(spec, annotated_computation(ag, ctx, cex.gamma, cex.path))
    if got != cex.k or cex.m <= cex.k:
        return False
    joint = merge(cex.gamma, cex.better)
    if ctx.plant is not None:
        replay = comp(ctx.plant, merge(cex.gamma, cex.better.restrict(ctx.controlled)))
        if not replay.same_word(joint):
            return False
    return achieved_on(spec, joint) >= cex.m


# ---------------------------------------------------------------------------
# bounded search

def _achieved_along(spec, ctx, annotation, gamma, path) -> int:
    stem, loop = path
    outs = Lasso(tuple(annotation[n] for n in stem), tuple(annotation[n] for n in loop))
    word = merge(gamma, outs)
    if ctx.plant is not None:
        word = comp(ctx.plant, word)
    return achieved_on(spec, word)


def annotate(spec: PrioritizedSpec, ctx: Context, g: AssumptionGenerator,
             stats: dict | None = None) -> AnnotatedGenerator | None:
    """First dominant annotation of `g`, trying output letters in canonical order.

    Counterexample paths of rejected annotations are replayed on later
    candidates before running the full check.
    """
    names = [n.name for n in g.nodes]
    outs = ctx.out_letters
    refuted: list = []
    for choice in itertools.product(range(len(outs)), repeat=len(names)):
        ann = {n: outs[c] for n, c in zip(names, choice)}
        if stats is not None:
            stats["candidates"] = stats.get("candidates", 0) + 1
        if any(_achieved_along(spec, ctx, ann, gm, path) < m for gm, path, m in refuted):
            continue
        ag = AnnotatedGenerator(g, ctx.controlled, ann)
        v = check_annotation_dominant(spec, ag, ctx)
        if stats is not None:
            stats["checks"] = stats.get("checks", 0) + 1
        if v.dominant:
            return ag
        cex = v.counterexample
        refuted.append((cex.gamma, cex.path, cex.m))
    return None


def guard_classes(observe: Iterable[str], onehot=()) -> list[Cube]:
    """Literal guards over `observe`, one per distinct set of admitted letters."""
    observe = sorted(observe)
    letters = valid_letters(observe, onehot)
    seen: dict = {}
    cands = [TRUE_CUBE]
    for v in observe:
        cands += [Cube(frozenset([v])), Cube(frozenset(), frozenset([v]))]
    for c in cands:
        sig = frozenset(a for a in letters if c.holds(a))
        if sig and sig not in seen:
            seen[sig] = c
    return list(seen.values())


def enumerate_patterns(classes: Sequence[Cube], size_bound: int, depth: int) -> list[Pattern]:
    tails = [("free", TRUE_CUBE)]
    for c in classes:
        if not c.is_true():
            tails += [("always", c), ("eventually", c)]
    out = []
    for n in range(depth + 1):
        for pre in itertools.product(classes, repeat=n):
            for tail, guard in tails:
                if tail == "free" and pre and pre[-1].is_true():
                    continue  # same language as the shorter prefix
                pat = Pattern(tuple(pre), tail, guard)
                if pat.size() <= size_bound:
                    out.append(pat)
    return out


def default_depth(n_classes: int, size_bound: int, budget: int = 400) -> int:
    tails = 1 + 2 * (n_classes - 1)
    depth = 0
    while depth + 1 <= size_bound - 1:
        total = sum(n_classes ** i for i in range(depth + 2)) * tails
        if total > budget:
            break
        depth += 1
    return depth


@dataclass
class SearchResult:
    generators: list[AnnotatedGenerator]
    examined: int = 0
    checks: int = 0

    @property
    def found(self) -> bool:
        return bool(self.generators)


def search_assumption_bounded(spec: PrioritizedSpec, ctx: Context, size_bound: int,
                              depth: int | None = None,
                              observe: Iterable[str] | None = None) -> SearchResult:
    """Dominant annotated generators with at most `size_bound` input nodes.

    Promise-free window generators (universal languages) are tried first; a
    dominant one is the most permissive answer.  Otherwise linear promise
    patterns are explored, patterns subsumed by an already dominant one are
    skipped, and the result lists the union of the maximal dominant patterns
    followed by the patterns themselves.
    """
    if size_bound < 1:
        raise ValueError("size bound must be at least 1")
    observe = frozenset(observe) if observe is not None else default_observed(spec, ctx)
    observe = observe & ctx.env_vars
    stats: dict = {}
    n_letters = len(valid_letters(observe, ctx.onehot))
    d = 0
    while True:
        size = sum(n_letters ** i for i in range(d + 1))
        if size > size_bound or (d > 0 and n_letters <= 1):
            break
        g = window_generator(ctx.env_vars, observe, d, ctx.onehot)
        ag = annotate(spec, ctx, g, stats)
        if ag is not None:
            return SearchResult([ag], stats.get("candidates", 0), stats.get("checks", 0))
        d += 1
    classes = guard_classes(observe, ctx.onehot)
    if depth is None:
        depth = default_depth(len(classes), size_bound)
    patterns = enumerate_patterns(classes, size_bound, depth)
    found: list[AnnotatedGenerator] = []
    for pat in patterns:
        g = pattern_generator(ctx.env_vars, [pat], ctx.onehot)
        if any(simulates(f.generator, g) for f in found):
            continue
        ag = annotate(spec, ctx, g, stats)
        if ag is not None:
            found = [f for f in found if not simulates(g, f.generator)] + [ag]
    examined, checks = stats.get("candidates", 0), stats.get("checks", 0)
    if not found:
        return SearchResult([], examined, checks)
    out = [union_annotated(found)] if len(found) > 1 else []
    return SearchResult(out + found, examined, checks)


# ---------------------------------------------------------------------------
# compatibility between priority levels

@dataclass
class Compatibility:
    compatible: bool
    trace: list | None = None  # joint letters leading out of a tree
    arena: Arena | None = field(default=None, repr=False)
    strategy: dict | None = field(default=None, repr=False)
    initial: tuple | None = None
    parts: tuple = ()
    rest_vars: frozenset = frozenset()
    step: object = field(default=None, repr=False)
    emit: object = field(default=None, repr=False)


def _as_annotated(x) -> AnnotatedGenerator:
    if isinstance(x, AnnotatedGenerator):
        return x
    if isinstance(x, AssumptionGenerator):
        return AnnotatedGenerator(x, frozenset(), {n.name: frozenset() for n in x.nodes})
    raise TypeError(f"expected a generator, got {type(x).__name__}")


def check_compatible(lower, higher, onehot=()) -> Compatibility:
    """Can the lower process stay inside every higher tree?

    Game: the environment picks the lower generator's promises and the free
    letters within the lower tree; the system picks the promises of the
    higher generators.  Annotated outputs feed everyone's environment.  The
    system wins if every higher tree is left never and, when the lower path
    is a tree path, every higher path is one as well.
    """
    low = _as_annotated(lower)
    highs = [_as_annotated(h) for h in (higher if isinstance(higher, (list, tuple)) else [higher])]
    parts = tuple(highs) + (low,)
    produced = frozenset().union(*(p.outputs for p in parts))
    for i, p in enumerate(parts):
        for q in parts[i + 1:]:
            if p.outputs & q.outputs:
                raise InterfaceError(f"processes share outputs {sorted(p.outputs & q.outputs)}")
    universe = frozenset().union(*(p.generator.env_vars | p.outputs for p in parts))
    oh = tuple(dict.fromkeys(tuple(onehot) + tuple(h for p in parts for h in p.generator.onehot)))
    rest = valid_letters(universe - produced, oh)
    h = len(highs)
    nodes = [p.generator.node for p in parts]

    def emit(iotas):
        out = frozenset()
        for p, n in zip(parts, iotas):
            out |= frozenset(p.annotation[n])
        return out

    def moves(pos):
        kind = pos[0]
        if kind == "B":
            _, betas, bl, c = pos
            for il in low.generator.branches[bl]:
                yield ("S", betas, il, c)
        elif kind == "S":
            _, betas, il, c = pos
            for choice in itertools.product(*(highs[i].generator.branches[b] for i, b in enumerate(betas))):
                yield ("E", choice, il, c)
        elif kind == "E":
            for _, d in letter_moves(pos):
                yield d

    def letter_moves(pos):
        _, iotas, il, c = pos
        out = emit(iotas + (il,))
        nc = (c + 1) % h if h and not nodes[c][iotas[c]].pending else c
        allowed = 0
        for r in rest:
            full = out | r
            bl = nodes[-1][il].target(full & low.generator.env_vars)
            if bl is None:
                continue
            allowed += 1
            betas = []
            for i in range(h):
                b = nodes[i][iotas[i]].target(full & highs[i].generator.env_vars)
                if b is None:
                    break
                betas.append(b)
            if len(betas) < h:
                yield full, ("LOSE",)
            else:
                yield full, ("B", tuple(betas), bl, nc)
        if not allowed:  # the produced outputs already leave the lower tree
            yield out, ("LOSE",)

    init = ("B", tuple(x.generator.root for x in highs), low.generator.root, 0)
    owner = {"B": ENV, "S": SYS, "E": ENV, "LOSE": SYS}
    arena = Arena.explore([init], lambda p: owner[p[0]], moves)
    assume = {p for p in arena.owner if p[0] == "E" and not nodes[-1][p[2]].pending}
    guarantee = {p for p in arena.owner if p[0] == "E" and
                 (h == 0 or (p[3] == h - 1 and not nodes[h - 1][p[1][h - 1]].pending))}
    sol = solve_streett(arena, assume, guarantee)
    if init in sol.winning:
        return Compatibility(True, None, arena, sol.strategy, init, parts,
                             universe - produced, letter_moves, emit)
    return Compatibility(False, _losing_trace(arena, init, sol.winning, letter_moves), arena,
                         None, init, parts, universe - produced, letter_moves, emit)


def _losing_trace(arena: Arena, init, winning: set, letter_moves) -> list:
    """Shortest joint-letter sequence from the start to a higher tree violation, if any."""
    parent = {init: None}
    queue = deque([init])
    while queue:
        p = queue.popleft()
        if p[0] == "LOSE":
            trace = []
            while parent[p] is not None:
                p, let = parent[p]
                if let is not None:
                    trace.append(let)
            return trace[::-1]
        steps = letter_moves(p) if p[0] == "E" else ((None, d) for d in arena.succ[p])
        for let, d in steps:
            if d in winning or d in parent:
                continue
            parent[d] = (p, let)
            queue.append(d)
    return []


# ---------------------------------------------------------------------------
# propagation along a priority order

class PropagationError(RuntimeError):
    def __init__(self, message: str, process: str | None = None):
        super().__init__(message)
        self.process = process


def extract_joint(c: Compatibility, names: Sequence[str]) -> tuple[Transducer, dict[str, Transducer]]:
    """Read the winning compatibility game as one transducer over the free inputs.

    States are the system's resolved positions; the lowest generator must be
    promise-free so that the environment never has to announce anything.
    """
    if not c.compatible:
        raise PropagationError("cannot extract strategies from an incompatible game")
    low = c.parts[-1].generator

    def resolve(b_pos):
        _, betas, bl, cnt = b_pos
        if len(low.branches[bl]) != 1:
            raise PropagationError("the residual generator still asks for promises")
        s_pos = ("S", betas, low.branches[bl][0], cnt)
        e_pos = c.strategy.get(s_pos)
        if e_pos is None:
            raise PropagationError("no winning promise selection")
        return e_pos

    rest = c.rest_vars
    start = resolve(c.initial)
    index = {start: 0}
    order = [start]
    rules = {}
    for e in order:
        rs = []
        for full, d in c.step(e):
            if d[0] == "LOSE":
                raise PropagationError("extracted selection leaves a tree")
            nxt = resolve(d)
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            rs.append((Cube.of_letter(full & rest, rest), index[nxt]))
        rules[index[e]] = tuple(rs)
    outputs = frozenset().union(*(p.outputs for p in c.parts))
    out = {index[e]: c.emit(e[1] + (e[2],)) for e in order}
    states = tuple(range(len(order)))
    joint = Transducer(rest, outputs, states, 0, rules, out, "joint")
    per = {}
    for name, p in zip(names, c.parts):
        per[name] = Transducer(rest, p.outputs, states, 0, rules,
                               {q: o & p.outputs for q, o in out.items()}, name)
    return joint, per


@dataclass
class Process:
    name: str
    spec: PrioritizedSpec
    ctx: Context


@dataclass
class PropagationResult:
    order: tuple[str, ...]
    generators: dict[str, AnnotatedGenerator]
    strategies: dict[str, Transducer]
    joint: Transducer
    residual_universal: bool
    examined: dict[str, int] = field(default_factory=dict)


def propagate(processes: Sequence[Process], size_bound: int | Mapping[str, int],
              depth: int | None = None, onehot=()) -> PropagationResult:
    """Incremental synthesis along `processes` (highest priority first).

    Each process gets the most permissive dominant annotated generator found
    within its bound that is compatible with the choices above it; choices
    are revisited by backtracking.  The lowest generator must be universal.
    """
    names = [p.name for p in processes]
    if len(set(names)) != len(names):
        raise ValueError("process order repeats a process")
    bounds = size_bound if isinstance(size_bound, Mapping) else {n: size_bound for n in names}
    cache: dict[str, SearchResult] = {}
    stats: dict[str, int] = {}
    blocked: dict[str, str] = {}

    def candidates(i):
        p = processes[i]
        if p.name not in cache:
            cache[p.name] = search_assumption_bounded(p.spec, p.ctx, bounds[p.name], depth)
            stats[p.name] = cache[p.name].examined
        return cache[p.name].generators

    def go(i, chosen):
        if i == len(processes):
            return chosen
        last = i == len(processes) - 1
        cands = candidates(i)
        if not cands:
            blocked.setdefault(processes[i].name, f"no dominant generator within {bounds[processes[i].name]} nodes")
        for ag in cands:
            if last and not (ag.generator.promise_free() and is_universal(ag.generator)):
                blocked.setdefault(processes[i].name, "residual generator is not universal")
                continue
            if chosen and not check_compatible(ag, [c for c in chosen], onehot).compatible:
                blocked.setdefault(processes[i].name, "no generator compatible with the higher trees")
                continue
            res = go(i + 1, chosen + [ag])
            if res is not None:
                return res
        return None

    chosen = go(0, [])
    if chosen is None:
        who = next((n for n in reversed(names) if n in blocked), names[-1])
        detail = "; ".join(f"{n}: {blocked[n]}" for n in names if n in blocked)
        raise PropagationError(f"propagation failed ({detail})", who)
    game = check_compatible(chosen[-1], chosen[:-1], onehot)
    joint, per = extract_joint(game, names)
    return PropagationResult(tuple(names), dict(zip(names, chosen)), per, joint, True, stats)


# ---------------------------------------------------------------------------
# serialisation

def generator_to_json(x) -> dict:
    ag = x if isinstance(x, AnnotatedGenerator) else None
    g = ag.generator if ag else x
    addr = g.addresses()
    d = {
        "format": 1,
        "env": sorted(g.env_vars),
        "onehot": [sorted(h) for h in g.onehot],
        "root": f"b{g.root}",
        "branches": {f"b{i}": list(ps) for i, ps in enumerate(g.branches)},
        "nodes": {},
    }
    for n in g.nodes:
        entry = {"pending": n.pending, "edges": [[str(c), f"b{b}"] for c, b in n.edges]}
        if n.name in addr:
            proms, lets = addr[n.name]
            entry["address"] = encode_unary(proms)
            entry["letters"] = [sorted(a) for a in lets]
        d["nodes"][n.name] = entry
    if ag is not None:
        d["outputs"] = sorted(ag.outputs)
        d["annotation"] = {k: sorted(ag.annotation[k]) for k in sorted(ag.annotation)}
    return d


def generator_from_json(d: dict):
    from .buchi import parse_cube
    if d.get("format") != 1:
        raise ValueError("unsupported generator format")
    bnames = list(d["branches"])
    bidx = {b: i for i, b in enumerate(bnames)}
    nodes = tuple(InputNode(name, tuple((parse_cube(c), bidx[b]) for c, b in e["edges"]),
                            bool(e.get("pending", False)))
                  for name, e in d["nodes"].items())
    g = AssumptionGenerator(frozenset(d["env"]), tuple(tuple(d["branches"][b]) for b in bnames),
                            nodes, bidx[d["root"]], tuple(frozenset(h) for h in d.get("onehot", [])))
    if "annotation" in d:
        return AnnotatedGenerator(g, frozenset(d["outputs"]),
                                  {k: frozenset(v) for k, v in d["annotation"].items()})
    return g
