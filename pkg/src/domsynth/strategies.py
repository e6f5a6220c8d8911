"""Architectures, finite-state strategies, composition and world models."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .buchi import BuchiAutomaton, Cube, TRUE_CUBE
from .ltl import PrioritizedSpec, achieved_on
from .words import Lasso, format_letter


class InterfaceError(ValueError):
    pass


def valid_letters(variables: Iterable[str], onehot: Sequence[frozenset[str]] = ()) -> list[frozenset[str]]:
    """All letters over `variables` respecting one-hot groups.

    A group fully inside `variables` contributes exactly one true member; a
    group that is only partly visible contributes at most one.
    """
    vs = sorted(set(variables))
    grouped: list[list[frozenset[str]]] = []
    covered: set[str] = set()
    for g in onehot:
        part = sorted(g & set(vs))
        if not part:
            continue
        covered.update(part)
        opts = [frozenset([v]) for v in part]
        if len(part) < len(g):
            opts = [frozenset()] + opts
        grouped.append(opts)
    for v in vs:
        if v not in covered:
            grouped.append([frozenset(), frozenset([v])])
    out = [frozenset().union(*combo) for combo in itertools.product(*grouped)]
    return sorted(set(out), key=lambda a: (len(a), sorted(a)))


@dataclass(frozen=True)
class Architecture:
    processes: tuple[str, ...]
    variables: frozenset[str]
    inp: Mapping[str, frozenset[str]]
    outp: Mapping[str, frozenset[str]]
    onehot: tuple[frozenset[str], ...] = ()

    def __post_init__(self):
        owned: dict[str, str] = {}
        for p in self.processes:
            i, o = self.inp.get(p, frozenset()), self.outp.get(p, frozenset())
            if i & o:
                raise InterfaceError(f"process {p}: inputs and outputs overlap on {sorted(i & o)}")
            if not (i | o) <= self.variables:
                raise InterfaceError(f"process {p} uses undeclared variables {sorted((i | o) - self.variables)}")
            for v in o:
                if v in owned:
                    raise InterfaceError(f"variable {v} is an output of both {owned[v]} and {p}")
                owned[v] = p
        for p in self.processes:
            missing = self.external_inputs - self.inp.get(p, frozenset())
            if missing:
                raise InterfaceError(f"external inputs {sorted(missing)} not visible to {p}")

    @property
    def external_inputs(self) -> frozenset[str]:
        owned = frozenset().union(*(self.outp.get(p, frozenset()) for p in self.processes))
        return self.variables - owned

    def letters(self, variables: Iterable[str]) -> list[frozenset[str]]:
        return valid_letters(variables, self.onehot)


def compose_architectures(a1: Architecture, a2: Architecture) -> Architecture:
    if a1.variables != a2.variables:
        raise InterfaceError("architectures must share the same variables")
    clash = set(a1.processes) & set(a2.processes)
    if clash:
        raise InterfaceError(f"shared process names {sorted(clash)}")
    inp = {**{p: a1.inp[p] for p in a1.processes}, **{p: a2.inp[p] for p in a2.processes}}
    outp = {**{p: a1.outp[p] for p in a1.processes}, **{p: a2.outp[p] for p in a2.processes}}
    onehot = tuple(dict.fromkeys(a1.onehot + a2.onehot))
    return Architecture(a1.processes + a2.processes, a1.variables, inp, outp, onehot)


@dataclass(frozen=True)
class Transducer:
    """Moore machine: output of the current state, then move on the input letter.

    Transitions are ordered guard lists per state; the first guard matching
    the input letter wins.
    """

    inputs: frozenset[str]
    outputs: frozenset[str]
    states: tuple
    initial: object
    rules: Mapping[object, tuple[tuple[Cube, object], ...]]
    out: Mapping[object, frozenset[str]]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "inputs", frozenset(self.inputs))
        object.__setattr__(self, "outputs", frozenset(self.outputs))
        if self.inputs & self.outputs:
            raise InterfaceError(f"transducer inputs and outputs overlap on {sorted(self.inputs & self.outputs)}")
        if self.initial not in self.states:
            raise InterfaceError("initial state not declared")
        for q in self.states:
            if not self.out.get(q, frozenset()) <= self.outputs:
                raise InterfaceError(f"state {q} emits undeclared outputs")
            for g, d in self.rules.get(q, ()):
                if d not in self.states:
                    raise InterfaceError(f"transition to undeclared state {d}")
                if not g.variables() <= self.inputs:
                    raise InterfaceError(f"guard {g} reads non-input variables")

    @classmethod
    def constant(cls, outputs: Iterable[str], emit: Iterable[str], inputs: Iterable[str] = (),
                 name: str = "") -> "Transducer":
        return cls(frozenset(inputs), frozenset(outputs), (0,), 0,
                   {0: ((TRUE_CUBE, 0),)}, {0: frozenset(emit)}, name)

    @classmethod
    def from_table(cls, inputs, outputs, n_states: int, delta: Mapping, out: Mapping,
                   name: str = "") -> "Transducer":
        """`delta` maps ``(state, input letter)`` to a state; states are ``0..n-1``."""
        inputs = frozenset(inputs)
        rules = {q: [] for q in range(n_states)}
        for (q, a), d in delta.items():
            rules[q].append((Cube.of_letter(a, inputs), d))
        return cls(inputs, frozenset(outputs), tuple(range(n_states)), 0,
                   {q: tuple(r) for q, r in rules.items()},
                   {q: frozenset(out[q]) for q in range(n_states)}, name)

    def output(self, q) -> frozenset[str]:
        return self.out.get(q, frozenset())

    def step(self, q, a: frozenset[str]):
        a = a & self.inputs
        for g, d in self.rules.get(q, ()):
            if g.holds(a):
                return d
        raise InterfaceError(f"no transition from state {q!r} on {format_letter(a)}")

    def reachable(self, letters: Sequence[frozenset[str]]) -> list:
        seen = [self.initial]
        idx = {self.initial}
        for q in seen:
            for a in letters:
                d = self.step(q, a)
                if d not in idx:
                    idx.add(d)
                    seen.append(d)
        return seen

    def run_outputs(self, inputs: Sequence[frozenset[str]]) -> list[frozenset[str]]:
        """Outputs for the finite input history (one more output than inputs)."""
        q = self.initial
        outs = [self.output(q)]
        for a in inputs:
            q = self.step(q, a)
            outs.append(self.output(q))
        return outs

    def describe(self) -> str:
        lines = [f"initial {self.initial}"]
        for q in self.states:
            lines.append(f"{q} : {format_letter(self.output(q))}")
            for g, d in self.rules.get(q, ()):
                lines.append(f"{q} | {g} -> {d}")
        return "\n".join(lines)


def comp(s: Transducer, gamma: Lasso, env_vars: Iterable[str] | None = None) -> Lasso:
    """Computation of `s` against the environment word `gamma`.

    Position i carries the output of the state reached after reading the
    inputs at positions < i, joined with gamma's letter at i.
    """
    used = gamma.variables()
    if used & s.outputs:
        raise InterfaceError(f"environment word sets outputs {sorted(used & s.outputs)}")
    if env_vars is not None and frozenset(env_vars) & s.outputs:
        raise InterfaceError("environment variables overlap the strategy outputs")
    n, stem = len(gamma), len(gamma.stem)
    seen: dict = {}
    letters = []
    q, i = s.initial, 0
    while (q, i) not in seen:
        seen[(q, i)] = len(letters)
        g = gamma[i]
        letters.append(s.output(q) | g)
        q = s.step(q, g)
        i = i + 1 if i + 1 < n else stem
    start = seen[(q, i)]
    return Lasso(tuple(letters[:start]), tuple(letters[start:]))


def achieved_priority(spec: PrioritizedSpec, s: Transducer, gamma: Lasso) -> int:
    return achieved_on(spec, comp(s, gamma))


def _specialise(g: Cube, fixed_vars: frozenset[str], fixed: frozenset[str]) -> Cube | None:
    """Resolve the literals of `g` on `fixed_vars` against the letter `fixed`."""
    if (g.pos & fixed_vars) - fixed or (g.neg & fixed):
        return None
    return Cube(g.pos - fixed_vars, g.neg - fixed_vars)


def compose(sp: Transducer, sq: Transducer) -> Transducer:
    """Synchronous product; each side sees the other's current output."""
    clash = sp.outputs & sq.outputs
    if clash:
        raise InterfaceError(f"output clash on {sorted(clash)}")
    outputs = sp.outputs | sq.outputs
    inputs = (sp.inputs | sq.inputs) - outputs
    states = [(a, b) for a in sp.states for b in sq.states]
    rules = {}
    out = {}
    for a, b in states:
        oa, ob = sp.output(a), sq.output(b)
        out[(a, b)] = oa | ob
        rs = []
        for ga, da in sp.rules.get(a, ()):
            ca = _specialise(ga, sq.outputs, ob)
            if ca is None:
                continue
            for gb, db in sq.rules.get(b, ()):
                cb = _specialise(gb, sp.outputs, oa)
                if cb is None:
                    continue
                c = ca.conj(cb)
                if c is not None:
                    rs.append((c, (da, db)))
        rules[(a, b)] = tuple(rs)
    name = "||".join(x for x in (sp.name, sq.name) if x)
    return Transducer(inputs, outputs, tuple(states), (sp.initial, sq.initial), rules, out, name)


def compose_all(strategies: Sequence[Transducer]) -> Transducer:
    out = strategies[0]
    for s in strategies[1:]:
        out = compose(out, s)
    return out


def transducer_automaton(s: Transducer, env_letters: Sequence[frozenset[str]],
                         env_vars: Iterable[str]) -> BuchiAutomaton:
    """Buchi automaton (all states accepting) of the computations of `s`."""
    env_vars = frozenset(env_vars)
    alphabet = env_vars | s.outputs
    order = s.reachable(env_letters)
    index = {q: i for i, q in enumerate(order)}
    trans = []
    for q in order:
        for a in env_letters:
            trans.append((index[q], Cube.of_letter(s.output(q) | a, alphabet), index[s.step(q, a)]))
    return BuchiAutomaton(len(order), frozenset([0]), alphabet, tuple(trans),
                          frozenset(range(len(order))), tuple(str(q) for q in order))


# ---------------------------------------------------------------------------
# world models

@dataclass(frozen=True)
class WorldModel:
    """Input-deterministic plant over system states.

    `edges` maps ``(state, (out letter, in letter))`` to the next state, where
    the two letters range over `out_vars` and `in_vars` respectively.
    """

    states: tuple[str, ...]
    initial: str
    out_vars: frozenset[str]
    in_vars: frozenset[str]
    edges: Mapping[tuple[str, tuple[frozenset[str], frozenset[str]]], str]
    predicates: Mapping[str, frozenset[str]] = field(default_factory=dict)

    @classmethod
    def from_edges(cls, states, initial, out_vars, in_vars, edge_list, predicates=None) -> "WorldModel":
        table: dict = {}
        for s, o, i, d in edge_list:
            key = (s, (frozenset(o), frozenset(i)))
            if key in table and table[key] != d:
                raise InterfaceError(
                    f"world model not input-deterministic: state {s} on "
                    f"({format_letter(o)},{format_letter(i)}) leads to {table[key]} and {d}")
            table[key] = d
        return cls(tuple(states), initial, frozenset(out_vars), frozenset(in_vars), table,
                   dict(predicates or {}))

    def successor(self, s: str, o: frozenset[str], i: frozenset[str]) -> str:
        key = (s, (frozenset(o) & self.out_vars, frozenset(i) & self.in_vars))
        if key not in self.edges:
            raise InterfaceError(f"world model has no transition from {s} on "
                                 f"({format_letter(key[1][0])},{format_letter(key[1][1])})")
        return self.edges[key]


def world_model_to_transducer(w: WorldModel, state_predicates: Iterable[str],
                              joint_letters: Sequence[frozenset[str]]) -> Transducer:
    """Plant transducer: emits the current state's predicates, moves on the joint action.

    `joint_letters` lists the admissible letters over all action variables; a
    missing transition for any of them is an error.
    """
    preds = frozenset(state_predicates)
    actions = w.out_vars | w.in_vars
    if preds & actions:
        raise InterfaceError("state predicates overlap action variables")
    rules = {}
    for s in w.states:
        rs = []
        for a in joint_letters:
            d = w.successor(s, a & w.out_vars, a & w.in_vars)
            rs.append((Cube.of_letter(a & actions, actions), d))
        rules[s] = tuple(rs)
    out = {s: frozenset(w.predicates.get(s, frozenset())) & preds for s in w.states}
    return Transducer(actions, preds, w.states, w.initial, rules, out, "world")
