"""Batched LTL evaluation over same-shape lassos.

Formulas are compiled to a flat postfix program; words are int64 bitmask
arrays of shape (batch, stem+loop).  Two interchangeable backends exist: a
numba kernel and a vectorised numpy path.  ``DOMSYNTH_BACKEND=numpy`` forces
the fallback; otherwise numba is used when importable.
"""
from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from .ltl import Formula

try:  # pragma: no cover - exercised through the backend switch
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn
        return deco if not (args and callable(args[0])) else args[0]

OPCODES = {"true": 0, "false": 1, "atom": 2, "not": 3, "and": 4, "or": 5,
           "implies": 6, "iff": 7, "next": 8, "eventually": 9, "globally": 10,
           "until": 11, "release": 12}


def backend() -> str:
    want = os.environ.get("DOMSYNTH_BACKEND", "").strip().lower()
    if want == "numpy" or not HAVE_NUMBA:
        return "numpy"
    return "numba"


def compile_formula(f: Formula, var_index: dict[str, int]) -> np.ndarray:
    """Postfix program rows ``(opcode, arg0, arg1, bit)``; shared subterms reuse rows."""
    rows: list[tuple[int, int, int, int]] = []
    seen: dict[Formula, int] = {}

    def emit(g: Formula) -> int:
        if g in seen:
            return seen[g]
        kids = [emit(a) for a in g.args]
        a0 = kids[0] if kids else -1
        a1 = kids[1] if len(kids) > 1 else -1
        bit = var_index[g.name] if g.op == "atom" else -1
        rows.append((OPCODES[g.op], a0, a1, bit))
        seen[g] = len(rows) - 1
        return seen[g]

    emit(f)
    return np.asarray(rows, dtype=np.int64).reshape(-1, 4)


def encode(words: Sequence, var_index: dict[str, int], stem_len: int, loop_len: int) -> np.ndarray:
    """Bitmask matrix for lassos already aligned to the given shape."""
    n = stem_len + loop_len
    out = np.zeros((len(words), n), dtype=np.int64)
    for r, w in enumerate(words):
        for i in range(n):
            m = 0
            for v in w[i]:
                j = var_index.get(v)
                if j is not None:
                    m |= 1 << j
            out[r, i] = m
    return out


CHUNK = 1024


@njit(cache=True)
def _eval_numba(prog, letters, stem_len):  # pragma: no cover - compiled
    n_rows = prog.shape[0]
    batch, n = letters.shape
    out = np.zeros(batch, dtype=np.bool_)
    # scratch per chunk, batch index innermost so the loops vectorise
    vals = np.zeros((n_rows, n, CHUNK), dtype=np.bool_)
    for lo in range(0, batch, CHUNK):
        m = min(CHUNK, batch - lo)
        for r in range(n_rows):
            op = prog[r, 0]
            a = prog[r, 1]
            b = prog[r, 2]
            for i in range(n):
                j = i + 1 if i + 1 < n else stem_len
                if op == 0:
                    for k in range(m):
                        vals[r, i, k] = True
                elif op == 1:
                    for k in range(m):
                        vals[r, i, k] = False
                elif op == 2:
                    bit = np.int64(1) << prog[r, 3]
                    for k in range(m):
                        vals[r, i, k] = (letters[lo + k, i] & bit) != 0
                elif op == 3:
                    for k in range(m):
                        vals[r, i, k] = not vals[a, i, k]
                elif op == 4:
                    for k in range(m):
                        vals[r, i, k] = vals[a, i, k] & vals[b, i, k]
                elif op == 5:
                    for k in range(m):
                        vals[r, i, k] = vals[a, i, k] | vals[b, i, k]
                elif op == 6:
                    for k in range(m):
                        vals[r, i, k] = (not vals[a, i, k]) | vals[b, i, k]
                elif op == 7:
                    for k in range(m):
                        vals[r, i, k] = vals[a, i, k] == vals[b, i, k]
                elif op == 8:
                    for k in range(m):
                        vals[r, i, k] = vals[a, j, k]
            if op < 9:
                continue
            init = not (op == 9 or op == 11)
            for i in range(n):
                for k in range(m):
                    vals[r, i, k] = init
            # two sweeps settle the loop, one more the stem
            for rep in range(3):
                first = stem_len if rep < 2 else 0
                i = n - 1 if rep < 2 else stem_len - 1
                while i >= first:
                    j = i + 1 if i + 1 < n else stem_len
                    if op == 9:
                        for k in range(m):
                            vals[r, i, k] = vals[a, i, k] | vals[r, j, k]
                    elif op == 10:
                        for k in range(m):
                            vals[r, i, k] = vals[a, i, k] & vals[r, j, k]
                    elif op == 11:
                        for k in range(m):
                            vals[r, i, k] = vals[b, i, k] | (vals[a, i, k] & vals[r, j, k])
                    else:
                        for k in range(m):
                            vals[r, i, k] = vals[b, i, k] & (vals[a, i, k] | vals[r, j, k])
                    i -= 1
        for k in range(m):
            out[lo + k] = vals[n_rows - 1, 0, k]
    return out


def _eval_numpy(prog: np.ndarray, letters: np.ndarray, stem_len: int) -> np.ndarray:
    batch, n = letters.shape
    succ = np.append(np.arange(1, n), stem_len)
    vals: list[np.ndarray] = []
    for op, a, b, bit in prog:
        if op == 0:
            v = np.ones((batch, n), dtype=bool)
        elif op == 1:
            v = np.zeros((batch, n), dtype=bool)
        elif op == 2:
            v = (letters >> bit) & 1 == 1
        elif op == 3:
            v = ~vals[a]
        elif op == 4:
            v = vals[a] & vals[b]
        elif op == 5:
            v = vals[a] | vals[b]
        elif op == 6:
            v = ~vals[a] | vals[b]
        elif op == 7:
            v = vals[a] == vals[b]
        elif op == 8:
            v = vals[a][:, succ]
        else:
            if op == 9:
                hold, goal = np.ones((batch, n), dtype=bool), vals[a]
            elif op == 10:
                hold, goal = vals[a], np.zeros((batch, n), dtype=bool)
            elif op == 11:
                hold, goal = vals[a], vals[b]
            else:
                hold, goal = vals[b], vals[a] & vals[b]
            v = np.full((batch, n), op in (10, 12), dtype=bool)
            order = list(range(n - 1, stem_len - 1, -1)) * 2 + list(range(stem_len - 1, -1, -1))
            for i in order:
                v[:, i] = goal[:, i] | (hold[:, i] & v[:, succ[i]])
        vals.append(v)
    return vals[-1][:, 0].copy()


def evaluate_batch(prog: np.ndarray, letters: np.ndarray, stem_len: int,
                   which: str | None = None) -> np.ndarray:
    """Truth value at position 0 for each row of `letters`."""
    which = which or backend()
    letters = np.ascontiguousarray(letters, dtype=np.int64)
    if letters.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    if which == "numba" and HAVE_NUMBA:
        return _eval_numba(prog, letters, int(stem_len))
    return _eval_numpy(prog, letters, int(stem_len))
