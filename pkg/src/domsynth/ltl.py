"""LTL syntax trees, the ASCII concrete syntax, normal forms and lasso semantics."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .words import Lasso

UNARY = ("not", "next", "eventually", "globally")
BINARY = ("and", "or", "implies", "iff", "until", "release")

_UNARY_SYM = {"not": "!", "next": "X", "eventually": "F", "globally": "G"}
_BINARY_SYM = {"and": "&", "or": "|", "implies": "->", "iff": "<->",
               "until": "U", "release": "R"}
# binding strength; larger binds tighter
_PREC = {"iff": 1, "implies": 2, "or": 3, "and": 4, "until": 5, "release": 5}
_RIGHT_ASSOC = {"implies", "until", "release"}


@dataclass(frozen=True, order=True)
class Formula:
    op: str
    args: tuple["Formula", ...] = ()
    name: str | None = None

    def __str__(self) -> str:
        return to_string(self)

    def __repr__(self) -> str:
        return f"Formula({to_string(self)!r})"

    # operator sugar keeps test code readable
    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)

    def atoms(self) -> frozenset[str]:
        if self.op == "atom":
            return frozenset([self.name])
        out: frozenset[str] = frozenset()
        for a in self.args:
            out |= a.atoms()
        return out

    def depth(self) -> int:
        return 1 + max((a.depth() for a in self.args), default=0) if self.args else 0

    def size(self) -> int:
        return 1 + sum(a.size() for a in self.args)


TRUE = Formula("true")
FALSE = Formula("false")


def Atom(name: str) -> Formula:
    return Formula("atom", (), name)


def Not(f: Formula) -> Formula:
    return Formula("not", (f,))


def And(*fs: Formula) -> Formula:
    if not fs:
        return TRUE
    out = fs[0]
    for f in fs[1:]:
        out = Formula("and", (out, f))
    return out


def Or(*fs: Formula) -> Formula:
    if not fs:
        return FALSE
    out = fs[0]
    for f in fs[1:]:
        out = Formula("or", (out, f))
    return out


def Implies(a: Formula, b: Formula) -> Formula:
    return Formula("implies", (a, b))


def Iff(a: Formula, b: Formula) -> Formula:
    return Formula("iff", (a, b))


def Next(f: Formula) -> Formula:
    return Formula("next", (f,))


def Eventually(f: Formula) -> Formula:
    return Formula("eventually", (f,))


def Globally(f: Formula) -> Formula:
    return Formula("globally", (f,))


def Until(a: Formula, b: Formula) -> Formula:
    return Formula("until", (a, b))


def Release(a: Formula, b: Formula) -> Formula:
    return Formula("release", (a, b))


# ---------------------------------------------------------------------------
# concrete syntax

class LTLSyntaxError(ValueError):
    """Raised for malformed formulas; carries a 1-based line and column."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


class UnknownAtomError(LTLSyntaxError):
    def __init__(self, atom: str, line: int = 1, column: int = 1):
        super().__init__(f"unknown atom {atom!r}", line, column)
        self.atom = atom


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<op><->|->|[!&|()])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
""", re.VERBOSE)

_KEYWORDS = {"X": "next", "F": "eventually", "G": "globally",
             "U": "until", "R": "release", "true": "true", "false": "false"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise LTLSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        s = m.group()
        if m.lastgroup == "op":
            toks.append(_Tok("op", s, line, col))
        elif m.lastgroup == "ident":
            toks.append(_Tok("kw" if s in _KEYWORDS else "ident", s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
        pos = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    _binops = {"<->": "iff", "->": "implies", "|": "or", "&": "and",
               "U": "until", "R": "release"}

    def __init__(self, text: str, universe: Iterable[str] | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.universe = None if universe is None else frozenset(universe)

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def binop(self) -> str | None:
        t = self.peek()
        if t.kind in ("op", "kw") and t.text in self._binops:
            return self._binops[t.text]
        return None

    def parse(self) -> Formula:
        if self.peek().kind == "eof":
            t = self.peek()
            raise LTLSyntaxError("empty formula", t.line, t.col)
        f = self.expr(1)
        t = self.peek()
        if t.kind != "eof":
            raise LTLSyntaxError(f"unexpected token {t.text!r}", t.line, t.col)
        return f

    def expr(self, min_prec: int) -> Formula:
        lhs = self.unary()
        while True:
            op = self.binop()
            if op is None or _PREC[op] < min_prec:
                return lhs
            self.take()
            nxt = _PREC[op] if op in _RIGHT_ASSOC else _PREC[op] + 1
            rhs = self.expr(nxt)
            lhs = Formula(op, (lhs, rhs))

    def unary(self) -> Formula:
        t = self.take()
        if t.kind == "op" and t.text == "!":
            return Not(self.unary())
        if t.kind == "kw" and t.text in ("X", "F", "G"):
            return Formula(_KEYWORDS[t.text], (self.unary(),))
        if t.kind == "kw" and t.text in ("true", "false"):
            return TRUE if t.text == "true" else FALSE
        if t.kind == "ident":
            if self.universe is not None and t.text not in self.universe:
                raise UnknownAtomError(t.text, t.line, t.col)
            return Atom(t.text)
        if t.kind == "op" and t.text == "(":
            f = self.expr(1)
            close = self.take()
            if close.text != ")":
                raise LTLSyntaxError("expected ')'", close.line, close.col)
            return f
        what = "end of input" if t.kind == "eof" else repr(t.text)
        raise LTLSyntaxError(f"unexpected {what}", t.line, t.col)


def parse_ltl(text: str, universe: Iterable[str] | None = None) -> Formula:
    """Parse ASCII LTL.

    Precedence from tightest: unary ``! X F G``, then ``U R``, ``&``, ``|``,
    ``->``, ``<->``. If `universe` is given, atoms outside it are rejected.
    """
    return _Parser(text, universe).parse()


def to_string(f: Formula) -> str:
    """Print with the minimal parentheses that re-parse to the same tree."""
    return _fmt(f)


def _fmt(f: Formula) -> str:
    op = f.op
    if op == "atom":
        return f.name
    if op in ("true", "false"):
        return op
    if op in _UNARY_SYM:
        child = f.args[0]
        s = _fmt(child)
        if child.op in _PREC:
            s = f"({s})"
        sym = _UNARY_SYM[op]
        return f"{sym}{s}" if sym == "!" else f"{sym} {s}"
    p = _PREC[op]
    left, right = f.args
    ls, rs = _fmt(left), _fmt(right)
    if op in _RIGHT_ASSOC:
        if left.op in _PREC and _PREC[left.op] <= p:
            ls = f"({ls})"
        if right.op in _PREC and _PREC[right.op] < p:
            rs = f"({rs})"
    else:
        if left.op in _PREC and _PREC[left.op] < p:
            ls = f"({ls})"
        if right.op in _PREC and _PREC[right.op] <= p:
            rs = f"({rs})"
    return f"{ls} {_BINARY_SYM[op]} {rs}"


# ---------------------------------------------------------------------------
# normal forms

def to_nnf(f: Formula) -> Formula:
    """Equivalent formula with negation only on atoms and no -> / <->."""
    op = f.op
    if op in ("atom", "true", "false"):
        return f
    if op == "not":
        return negate_nnf(f.args[0])
    if op == "implies":
        return Formula("or", (negate_nnf(f.args[0]), to_nnf(f.args[1])))
    if op == "iff":
        a, b = f.args
        return Formula("or", (Formula("and", (to_nnf(a), to_nnf(b))),
                              Formula("and", (negate_nnf(a), negate_nnf(b)))))
    return Formula(op, tuple(to_nnf(a) for a in f.args))


_DUAL = {"and": "or", "or": "and", "until": "release", "release": "until",
         "eventually": "globally", "globally": "eventually", "next": "next"}


def negate_nnf(f: Formula) -> Formula:
    """NNF of ``!f``."""
    op = f.op
    if op == "true":
        return FALSE
    if op == "false":
        return TRUE
    if op == "atom":
        return Not(f)
    if op == "not":
        return to_nnf(f.args[0])
    if op == "implies":
        return Formula("and", (to_nnf(f.args[0]), negate_nnf(f.args[1])))
    if op == "iff":
        a, b = f.args
        return Formula("or", (Formula("and", (to_nnf(a), negate_nnf(b))),
                              Formula("and", (negate_nnf(a), to_nnf(b)))))
    return Formula(_DUAL[op], tuple(negate_nnf(a) for a in f.args))


def is_nnf(f: Formula) -> bool:
    if f.op in ("implies", "iff"):
        return False
    if f.op == "not":
        return f.args[0].op == "atom"
    return all(is_nnf(a) for a in f.args)


# ---------------------------------------------------------------------------
# prioritized specifications

@dataclass(frozen=True)
class PrioritizedSpec:
    """Objectives ordered from most (index 0) to least important."""

    objectives: tuple[Formula, ...]
    texts: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.objectives:
            raise ValueError("a prioritized specification needs at least one objective")
        object.__setattr__(self, "objectives", tuple(self.objectives))

    @classmethod
    def parse(cls, lines: Sequence[str], universe=None) -> "PrioritizedSpec":
        return cls(tuple(parse_ltl(s, universe) for s in lines), tuple(lines))

    def __len__(self) -> int:
        return len(self.objectives)

    def atoms(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for f in self.objectives:
            out |= f.atoms()
        return out

    def partial(self, k: int) -> Formula:
        return partial_conjunction(self, k)


def partial_conjunction(spec: PrioritizedSpec, k: int) -> Formula:
    """Conjunction of the `k` most important objectives; ``true`` for k = 0."""
    if k < 0 or k > len(spec.objectives):
        raise ValueError(f"priority {k} outside 0..{len(spec.objectives)}")
    if k == 0:
        return TRUE
    return And(*spec.objectives[:k])


def achieved_on(spec: PrioritizedSpec, w: Lasso) -> int:
    """Largest k whose partial conjunction holds on `w`."""
    k = 0
    for f in spec.objectives:
        if not evaluate_on_lasso(f, w):
            break
        k += 1
    return k


# ---------------------------------------------------------------------------
# semantics on ultimately periodic words

def evaluate_on_lasso(f: Formula, w: Lasso) -> bool:
    return _values(f, w, {})[0]


def _values(f: Formula, w: Lasso, memo: dict) -> list[bool]:
    hit = memo.get(f)
    if hit is not None:
        return hit
    n = len(w.stem) + len(w.loop)
    s = len(w.stem)
    succ = [i + 1 for i in range(n - 1)] + [s]
    letters = list(w.stem) + list(w.loop)
    op = f.op
    if op == "true":
        out = [True] * n
    elif op == "false":
        out = [False] * n
    elif op == "atom":
        out = [f.name in letters[i] for i in range(n)]
    elif op == "not":
        out = [not v for v in _values(f.args[0], w, memo)]
    elif op in ("and", "or", "implies", "iff"):
        a = _values(f.args[0], w, memo)
        b = _values(f.args[1], w, memo)
        if op == "and":
            out = [x and y for x, y in zip(a, b)]
        elif op == "or":
            out = [x or y for x, y in zip(a, b)]
        elif op == "implies":
            out = [(not x) or y for x, y in zip(a, b)]
        else:
            out = [x == y for x, y in zip(a, b)]
    elif op == "next":
        a = _values(f.args[0], w, memo)
        out = [a[succ[i]] for i in range(n)]
    else:
        if op == "eventually":
            hold, goal, least = [True] * n, _values(f.args[0], w, memo), True
        elif op == "globally":
            hold, goal, least = _values(f.args[0], w, memo), [False] * n, False
        elif op == "until":
            hold, goal, least = _values(f.args[0], w, memo), _values(f.args[1], w, memo), True
        else:  # release: b holds until and including a, or forever
            a, b = _values(f.args[0], w, memo), _values(f.args[1], w, memo)
            hold, goal, least = b, [x and y for x, y in zip(a, b)], False
        out = _fixpoint(hold, goal, least, s, n, succ)
    memo[f] = out
    return out


def _fixpoint(hold, goal, least, s, n, succ):
    # v[i] = goal[i] or (hold[i] and v[succ i]); least or greatest solution
    v = [not least] * n
    for _ in range(2):
        for i in range(n - 1, s - 1, -1):
            v[i] = goal[i] or (hold[i] and v[succ[i]])
    for i in range(s - 1, -1, -1):
        v[i] = goal[i] or (hold[i] and v[succ[i]])
    return v
