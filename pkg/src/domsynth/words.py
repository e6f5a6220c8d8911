"""Letters (valuations) and ultimately periodic words."""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

Letter = frozenset  # set of variables assigned true


def letter(*names: str) -> frozenset[str]:
    return frozenset(names)


def format_letter(a: Iterable[str]) -> str:
    return "{" + ",".join(sorted(a)) + "}"


_LETTER_RE = re.compile(r"\{([^{}]*)\}")


def parse_letters(text: str) -> list[frozenset[str]]:
    text = text.strip()
    if not text:
        return []
    out = []
    pos = 0
    for m in _LETTER_RE.finditer(text):
        if text[pos:m.start()].strip():
            raise ValueError(f"bad letter syntax near {text[pos:m.start()]!r}")
        names = [s.strip() for s in m.group(1).split(",") if s.strip()]
        out.append(frozenset(names))
        pos = m.end()
    if text[pos:].strip():
        raise ValueError(f"bad letter syntax near {text[pos:]!r}")
    return out


@dataclass(frozen=True)
class Lasso:
    """The infinite word ``stem . loop^omega``."""

    stem: tuple[frozenset[str], ...]
    loop: tuple[frozenset[str], ...]

    def __post_init__(self):
        object.__setattr__(self, "stem", tuple(frozenset(a) for a in self.stem))
        object.__setattr__(self, "loop", tuple(frozenset(a) for a in self.loop))
        if not self.loop:
            raise ValueError("lasso loop must be nonempty")

    @classmethod
    def parse(cls, text: str) -> "Lasso":
        """``stem;loop`` with letters written ``{a,b}``."""
        if ";" not in text:
            raise ValueError("lasso syntax is 'stem;loop'")
        stem, loop = text.split(";", 1)
        return cls(tuple(parse_letters(stem)), tuple(parse_letters(loop)))

    def __str__(self) -> str:
        return ("".join(format_letter(a) for a in self.stem) + ";"
                + "".join(format_letter(a) for a in self.loop))

    def __len__(self) -> int:
        return len(self.stem) + len(self.loop)

    def __getitem__(self, i: int) -> frozenset[str]:
        if i < len(self.stem):
            return self.stem[i]
        return self.loop[(i - len(self.stem)) % len(self.loop)]

    def prefix(self, n: int) -> list[frozenset[str]]:
        return [self[i] for i in range(n)]

    def variables(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for a in self.stem + self.loop:
            out |= a
        return out

    def aligned(self, stem_len: int, loop_len: int) -> "Lasso":
        """Same word written with a longer stem and/or a multiple of the loop."""
        if stem_len < len(self.stem) or loop_len % len(self.loop):
            raise ValueError("can only lengthen the stem and multiply the loop")
        return Lasso(tuple(self[i] for i in range(stem_len)),
                     tuple(self[stem_len + i] for i in range(loop_len)))

    def restrict(self, variables: Iterable[str]) -> "Lasso":
        keep = frozenset(variables)
        return Lasso(tuple(a & keep for a in self.stem), tuple(a & keep for a in self.loop))

    def normalized(self) -> "Lasso":
        """Shortest representation: primitive loop, then shortest stem."""
        loop = self.loop
        n = len(loop)
        for p in range(1, n + 1):
            if n % p == 0 and all(loop[i] == loop[i % p] for i in range(n)):
                loop = loop[:p]
                break
        stem = self.stem
        while stem and stem[-1] == loop[-1]:
            stem = stem[:-1]
            loop = (loop[-1],) + loop[:-1]
        return Lasso(stem, loop)

    def same_word(self, other: "Lasso") -> bool:
        return self.normalized() == other.normalized()


def merge(*words: Lasso) -> Lasso:
    """Pointwise union of letters (the join of valuations over disjoint variables)."""
    s = max(len(w.stem) for w in words)
    lp = math.lcm(*(len(w.loop) for w in words))
    stem = tuple(frozenset().union(*(w[i] for w in words)) for i in range(s))
    loop = tuple(frozenset().union(*(w[s + i] for w in words)) for i in range(lp))
    return Lasso(stem, loop)


def enumerate_lassos(alphabet: Sequence[frozenset[str]], max_stem: int,
                     max_loop: int) -> Iterator[Lasso]:
    """Every lasso with stem length <= max_stem and loop length 1..max_loop."""
    for s in range(max_stem + 1):
        for lp in range(1, max_loop + 1):
            for stem in itertools.product(alphabet, repeat=s):
                for loop in itertools.product(alphabet, repeat=lp):
                    yield Lasso(stem, loop)


def all_letters(variables: Iterable[str]) -> list[frozenset[str]]:
    vs = sorted(variables)
    return [frozenset(c) for r in range(len(vs) + 1) for c in itertools.combinations(vs, r)]
