"""Sectioned text format for architectures, objectives, strategies and generators.

::

    [architecture]
    process ego: accel_e keep_e decel_e
    process other: accel_o keep_o decel_o
    external: bend
    onehot: accel_e keep_e decel_e

    [world]                      # optional plant, owned by one process
    owner: ego
    predicates: sbs
    state sbs: {sbs}
    state nsbs: {}
    sbs | {accel_e,accel_o} -> sbs
    sbs | * -> nsbs

    [objectives ego]             # one LTL formula per line, highest priority first
    F !sbs

    [strategy KEEP]
    process: ego
    state q: {keep_e}
    q | * -> q

    [assumption always_keep]
    process: ego
    b0 -> n
    n | {keep_o} -> b0
    n: {accel_e}                 # optional annotation

    [order]
    ego > other

Guards are cubes such as ``{a,!b}`` or ``*``; the first matching line wins.
The reserved process name ``system`` stands for all processes together.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

from .assumptions import AnnotatedGenerator, AssumptionGenerator, InputNode
from .buchi import Cube, parse_cube
from .dominance import Context
from .ltl import LTLSyntaxError, PrioritizedSpec, UnknownAtomError, parse_ltl
from .strategies import Architecture, InterfaceError, Transducer
from .words import format_letter, parse_letters

SYSTEM = "system"
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*$")


class SpecError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 kind: str = "syntax"):
        loc = ""
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(loc + message)
        self.line, self.column, self.kind = line, column, kind


@dataclass
class StrategyEntry:
    process: str
    transducer: Transducer


@dataclass
class AssumptionEntry:
    process: str
    generator: AssumptionGenerator | AnnotatedGenerator


@dataclass
class SpecFile:
    architecture: Architecture
    objectives: dict[str, PrioritizedSpec]
    world: Transducer | None = None
    world_owner: str | None = None
    strategies: dict[str, StrategyEntry] = field(default_factory=dict)
    assumptions: dict[str, AssumptionEntry] = field(default_factory=dict)
    order: tuple[str, ...] | None = None
    digest: str = ""

    @property
    def processes(self) -> tuple[str, ...]:
        return self.architecture.processes

    @property
    def predicates(self) -> frozenset[str]:
        return self.world.outputs if self.world is not None else frozenset()

    def outputs_of(self, process: str) -> frozenset[str]:
        if process == SYSTEM:
            return frozenset().union(*(self.architecture.outp[p] for p in self.processes))
        if process not in self.processes:
            raise SpecError(f"unknown process {process!r}", kind="semantic")
        return self.architecture.outp[process]

    def owns_world(self, process: str) -> bool:
        return self.world is not None and (process == SYSTEM or process == self.world_owner)

    def context(self, process: str) -> Context:
        controlled = self.outputs_of(process)
        plant = self.world if self.owns_world(process) else None
        env = self.architecture.variables - controlled - self.predicates
        return Context.make(controlled, env, self.architecture.onehot, plant)

    def spec_for(self, process: str) -> PrioritizedSpec:
        if process not in self.objectives:
            raise SpecError(f"no objectives for process {process!r}", kind="semantic")
        return self.objectives[process]

    def summary(self) -> dict:
        return {
            "processes": list(self.processes),
            "variables": sorted(self.architecture.variables),
            "externals": sorted(self.architecture.external_inputs),
            "predicates": sorted(self.predicates),
            "objectives": {p: list(s.texts) for p, s in self.objectives.items()},
            "strategies": sorted(self.strategies),
            "assumptions": sorted(self.assumptions),
            "order": list(self.order) if self.order else None,
        }


# ---------------------------------------------------------------------------
# parsing

@dataclass
class _Section:
    kind: str
    arg: str
    line: int
    body: list[tuple[int, str]] = field(default_factory=list)


def _split_sections(text: str) -> list[_Section]:
    sections: list[_Section] = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        s = line.strip()
        if s.startswith("["):
            if not s.endswith("]"):
                raise SpecError("unterminated section header", no, len(raw) - len(raw.lstrip()) + 1)
            parts = s[1:-1].split(None, 1)
            if not parts:
                raise SpecError("empty section header", no, 1)
            sections.append(_Section(parts[0], parts[1].strip() if len(parts) > 1 else "", no))
        else:
            if not sections:
                raise SpecError("content before the first section", no, 1)
            sections[-1].body.append((no, s))
    if not sections:
        raise SpecError("empty spec file: no sections", 1, 1)
    return sections


def _names(text: str, no: int) -> list[str]:
    out = text.split()
    for n in out:
        if not _NAME.match(n):
            raise SpecError(f"invalid name {n!r}", no)
    return out


def _key_value(s: str, no: int) -> tuple[str, str]:
    if ":" not in s:
        raise SpecError(f"expected 'key: value', got {s!r}", no, 1)
    k, v = s.split(":", 1)
    return k.strip(), v.strip()


def _letter(text: str, no: int) -> frozenset[str]:
    try:
        letters = parse_letters(text)
    except ValueError as e:
        raise SpecError(str(e), no) from None
    if len(letters) != 1:
        raise SpecError(f"expected one letter like {{a,b}}, got {text!r}", no)
    return letters[0]


def _guard(text: str, no: int) -> Cube:
    try:
        return parse_cube(text)
    except ValueError as e:
        raise SpecError(str(e), no) from None


_RULE = re.compile(r"^(\S+)(\s+pending)?\s*\|\s*(.+?)\s*->\s*(\S+)$")


def _machine(sec: _Section, declared: frozenset[str], default_inputs=None):
    """Common body of strategy and world sections."""
    states: dict[str, frozenset[str]] = {}
    rules: dict[str, list] = {}
    meta: dict[str, tuple[int, str]] = {}
    initial = None
    for no, s in sec.body:
        m = _RULE.match(s)
        if m:
            if m.group(2):
                raise SpecError("'pending' is only allowed in assumption sections", no)
            rules.setdefault(m.group(1), []).append((_guard(m.group(3), no), m.group(4), no))
            continue
        k, v = _key_value(s, no)
        if k.startswith("state "):
            name = k[6:].strip()
            states[name] = _letter(v, no) if v else frozenset()
        elif k == "initial":
            initial = v
        elif k in ("process", "owner", "inputs", "predicates"):
            meta[k] = (no, v)
        else:
            raise SpecError(f"unknown key {k!r} in [{sec.kind}]", no, 1)
    if not states:
        raise SpecError(f"[{sec.kind} {sec.arg}] declares no state", sec.line)
    if initial is None:
        initial = next(iter(states))
    if initial not in states:
        raise SpecError(f"initial state {initial!r} is not declared", sec.line, kind="semantic")
    for q, rs in rules.items():
        if q not in states:
            raise SpecError(f"transition from undeclared state {q!r}", rs[0][2], kind="semantic")
        for g, d, no in rs:
            if d not in states:
                raise SpecError(f"transition to undeclared state {d!r}", no, kind="semantic")
            bad = g.variables() - declared
            if bad:
                raise SpecError(f"undeclared variable {sorted(bad)[0]!r} in guard", no, kind="semantic")
    used = frozenset().union(*(g.variables() for rs in rules.values() for g, _, _ in rs))
    if "inputs" in meta:
        no, v = meta["inputs"]
        inputs = frozenset(_names(v, no))
        bad = inputs - declared
        if bad:
            raise SpecError(f"undeclared variable {sorted(bad)[0]!r}", no, kind="semantic")
        if not used <= inputs:
            raise SpecError(f"guards read variables outside the inputs: {sorted(used - inputs)}",
                            meta["inputs"][0], kind="semantic")
    else:
        inputs = used if default_inputs is None else used | default_inputs
    return states, initial, {q: tuple((g, d) for g, d, _ in rs) for q, rs in rules.items()}, inputs, meta


def parse_spec(text: str) -> SpecFile:
    sections = _split_sections(text)
    arch_secs = [s for s in sections if s.kind == "architecture"]
    if len(arch_secs) != 1:
        raise SpecError("exactly one [architecture] section is required",
                        arch_secs[1].line if len(arch_secs) > 1 else sections[0].line)
    known = {"architecture", "world", "objectives", "strategy", "assumption", "order"}
    for s in sections:
        if s.kind not in known:
            raise SpecError(f"unknown section [{s.kind}]", s.line, 1)

    # architecture
    sec = arch_secs[0]
    outp: dict[str, frozenset[str]] = {}
    inp_override: dict[str, frozenset[str]] = {}
    externals: set[str] = set()
    onehot: list[frozenset[str]] = []
    for no, s in sec.body:
        k, v = _key_value(s, no)
        if k.startswith("process "):
            p = k[8:].strip()
            if not _NAME.match(p) or p == SYSTEM:
                raise SpecError(f"invalid process name {p!r}", no)
            if p in outp:
                raise SpecError(f"process {p!r} declared twice", no, kind="semantic")
            outp[p] = frozenset(_names(v, no))
        elif k.startswith("input "):
            inp_override[k[6:].strip()] = frozenset(_names(v, no))
        elif k == "external":
            externals.update(_names(v, no))
        elif k == "onehot":
            onehot.append(frozenset(_names(v, no)))
        else:
            raise SpecError(f"unknown key {k!r} in [architecture]", no, 1)
    if not outp:
        raise SpecError("architecture declares no process", sec.line, kind="semantic")
    variables = frozenset(externals).union(*outp.values())
    for p in inp_override:
        if p not in outp:
            raise SpecError(f"input declared for unknown process {p!r}", sec.line, kind="semantic")
    for g in onehot:
        if not g <= variables:
            raise SpecError(f"one-hot group uses undeclared variables {sorted(g - variables)}",
                            sec.line, kind="semantic")
    inp = {p: inp_override.get(p, variables - o) for p, o in outp.items()}
    try:
        arch = Architecture(tuple(outp), variables, inp, outp, tuple(onehot))
    except InterfaceError as e:
        raise SpecError(str(e), sec.line, kind="semantic") from None

    # world
    world = owner = None
    worlds = [s for s in sections if s.kind == "world"]
    if len(worlds) > 1:
        raise SpecError("at most one [world] section", worlds[1].line)
    if worlds:
        ws = worlds[0]
        preds = set()
        for no, s in ws.body:
            if s.startswith("predicates"):
                preds.update(_names(_key_value(s, no)[1], no))
        clash = preds & variables
        if clash:
            raise SpecError(f"predicate {sorted(clash)[0]!r} is also a process variable",
                            ws.line, kind="semantic")
        states, initial, rules, inputs, meta = _machine(ws, variables)
        if "owner" not in meta:
            raise SpecError("[world] needs 'owner: PROCESS'", ws.line)
        owner = meta["owner"][1]
        if owner not in outp:
            raise SpecError(f"unknown world owner {owner!r}", meta["owner"][0], kind="semantic")
        for q, a in states.items():
            if not a <= preds:
                raise SpecError(f"state {q!r} sets undeclared predicates {sorted(a - preds)}",
                                ws.line, kind="semantic")
        try:
            world = Transducer(inputs, frozenset(preds), tuple(states), initial, rules, states, "world")
        except InterfaceError as e:
            raise SpecError(str(e), ws.line, kind="semantic") from None
    predicates = world.outputs if world is not None else frozenset()

    # objectives
    objectives: dict[str, PrioritizedSpec] = {}
    for sec in (s for s in sections if s.kind == "objectives"):
        p = sec.arg
        if p != SYSTEM and p not in outp:
            raise SpecError(f"objectives for unknown process {p!r}", sec.line, kind="semantic")
        if p in objectives:
            raise SpecError(f"objectives for {p!r} given twice", sec.line, kind="semantic")
        universe = variables | (predicates if (p == SYSTEM or p == owner) else frozenset())
        formulas, texts = [], []
        for no, s in sec.body:
            try:
                formulas.append(parse_ltl(s, universe))
            except UnknownAtomError as e:
                raise SpecError(f"undeclared atom {e.atom!r} in objective", no, e.column,
                                kind="semantic") from None
            except LTLSyntaxError as e:
                raise SpecError(e.message, no, e.column) from None
            texts.append(s)
        if not formulas:
            raise SpecError(f"[objectives {p}] is empty", sec.line)
        objectives[p] = PrioritizedSpec(tuple(formulas), tuple(texts))

    # strategies
    strategies: dict[str, StrategyEntry] = {}
    for sec in (s for s in sections if s.kind == "strategy"):
        name = sec.arg
        if not name or name in strategies:
            raise SpecError(f"strategy name {name!r} missing or repeated", sec.line, kind="semantic")
        states, initial, rules, inputs, meta = _machine(sec, variables | predicates)
        if "process" not in meta:
            raise SpecError(f"[strategy {name}] needs 'process: NAME'", sec.line)
        p = meta["process"][1]
        if p != SYSTEM and p not in outp:
            raise SpecError(f"unknown process {p!r}", meta["process"][0], kind="semantic")
        outs = frozenset().union(*outp.values()) if p == SYSTEM else outp[p]
        visible = (variables - outs) if p == SYSTEM else inp[p]
        if p == owner or p == SYSTEM:
            visible = visible | predicates
        if not inputs <= visible:
            raise SpecError(f"strategy {name} reads {sorted(inputs - visible)} which {p} cannot see",
                            sec.line, kind="semantic")
        for q, a in states.items():
            if not a <= outs:
                raise SpecError(f"state {q!r} of {name} emits non-outputs {sorted(a - outs)}",
                                sec.line, kind="semantic")
        strategies[name] = StrategyEntry(p, Transducer(inputs, outs, tuple(states), initial,
                                                       rules, states, name))

    # assumptions
    assumptions: dict[str, AssumptionEntry] = {}
    for sec in (s for s in sections if s.kind == "assumption"):
        assumptions[sec.arg] = AssumptionEntry(*_assumption(sec, variables, outp, arch.onehot))

    # order
    order = None
    orders = [s for s in sections if s.kind == "order"]
    if orders:
        sec = orders[0]
        chain = " ".join(s for _, s in sec.body)
        names = [x.strip() for x in chain.split(">")]
        if any(n not in outp for n in names) or len(set(names)) != len(names):
            raise SpecError(f"order must list distinct declared processes, got {chain!r}",
                            sec.line, kind="semantic")
        order = tuple(names)

    digest = hashlib.sha256(text.encode()).hexdigest()[:16]
    return SpecFile(arch, objectives, world, owner, strategies, assumptions, order, digest)


def _assumption(sec: _Section, variables, outp, onehot):
    name = sec.arg
    if not name:
        raise SpecError("assumption needs a name", sec.line)
    branches: dict[str, list[str]] = {}
    edges: dict[str, list] = {}
    pending: set[str] = set()
    ann: dict[str, frozenset[str]] = {}
    process = root = env = None
    for no, s in sec.body:
        m = _RULE.match(s)
        if m:
            node = m.group(1)
            if m.group(2):
                pending.add(node)
            edges.setdefault(node, []).append((_guard(m.group(3), no), m.group(4), no))
            continue
        if "->" in s and ":" not in s:
            b, rest = s.split("->", 1)
            branches[b.strip()] = _names(rest, no)
            continue
        k, v = _key_value(s, no)
        if k == "process":
            process = v
        elif k == "root":
            root = v
        elif k == "env":
            env = frozenset(_names(v, no))
        else:
            ann[k] = _letter(v, no)
    if process not in outp:
        raise SpecError(f"[assumption {name}] needs a declared 'process'", sec.line, kind="semantic")
    if not branches:
        raise SpecError(f"[assumption {name}] has no branch node", sec.line)
    bnames = list(branches)
    root = root or bnames[0]
    if root not in branches:
        raise SpecError(f"unknown root {root!r}", sec.line, kind="semantic")
    own = outp[process]
    used = set()
    nodes = []
    for node, es in edges.items():
        conv = []
        for g, b, no in es:
            if b not in branches:
                raise SpecError(f"edge to unknown branch node {b!r}", no, kind="semantic")
            bad = g.variables() - variables
            if bad:
                raise SpecError(f"undeclared variable {sorted(bad)[0]!r} in guard", no, kind="semantic")
            if g.variables() & own:
                raise SpecError(f"guard reads {process}'s own outputs", no, kind="semantic")
            used |= g.variables()
            conv.append((g, bnames.index(b)))
        nodes.append(InputNode(node, tuple(conv), node in pending))
    env = env if env is not None else frozenset(used)
    oh = tuple(h for h in onehot if h & env)
    try:
        gen = AssumptionGenerator(env, tuple(tuple(branches[b]) for b in bnames), tuple(nodes),
                                  bnames.index(root), oh)
    except ValueError as e:
        raise SpecError(str(e), sec.line, kind="semantic") from None
    if ann:
        try:
            return process, AnnotatedGenerator(gen, own, ann)
        except InterfaceError as e:
            raise SpecError(str(e), sec.line, kind="semantic") from None
    return process, gen


def load_spec(path) -> SpecFile:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read())


# ---------------------------------------------------------------------------
# writing

def strategy_to_text(name: str, process: str, s: Transducer) -> str:
    names = {q: f"q{i}" for i, q in enumerate(s.states)}
    lines = [f"[strategy {name}]", f"process: {process}"]
    if s.inputs:
        lines.append("inputs: " + " ".join(sorted(s.inputs)))
    lines.append(f"initial: {names[s.initial]}")
    for q in s.states:
        lines.append(f"state {names[q]}: {format_letter(s.output(q))}")
    for q in s.states:
        for g, d in s.rules.get(q, ()):
            lines.append(f"{names[q]} | {g} -> {names[d]}")
    return "\n".join(lines) + "\n"


def generator_to_text(name: str, process: str, x) -> str:
    ag = x if isinstance(x, AnnotatedGenerator) else None
    g = ag.generator if ag else x
    lines = [f"[assumption {name}]", f"process: {process}", "env: " + " ".join(sorted(g.env_vars)),
             f"root: b{g.root}"]
    for i, ps in enumerate(g.branches):
        lines.append(f"b{i} -> " + " ".join(ps))
    for n in g.nodes:
        tag = " pending" if n.pending else ""
        for c, b in n.edges:
            lines.append(f"{n.name}{tag} | {c} -> b{b}")
    if ag is not None:
        for n in g.nodes:
            lines.append(f"{n.name}: {format_letter(ag.annotation[n.name])}")
    return "\n".join(lines) + "\n"
