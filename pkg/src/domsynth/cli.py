"""Command-line front end.

Exit status: 0 when the verdict is positive, 1 when it is negative, 2 on
errors.  ``--json`` switches from text to a machine-readable report.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .assumptions import (AnnotatedGenerator, Process, PropagationError, check_annotation_dominant,
                          generator_to_json, is_universal, propagate,
                          search_assumption_bounded)
from .dominance import (check_dominant, check_winning, lasso_json, synthesize_dominant_bounded,
                        synthesize_winning_bounded)
from .ltl import achieved_on
from .specfile import SpecError, SpecFile, generator_to_text, load_spec, strategy_to_text
from .strategies import InterfaceError, comp, compose_all
from .words import Lasso, format_letter


@dataclass
class RunReport:
    command: str
    digest: str
    verdict: bool | None
    result: dict = field(default_factory=dict)
    text: list[str] = field(default_factory=list)
    wall_time: float = 0.0

    def to_json(self) -> dict:
        return {"format": 1, "command": self.command, "input_digest": self.digest,
                "verdict": self.verdict, "result": self.result,
                "wall_time": round(self.wall_time, 3)}

    @property
    def exit_code(self) -> int:
        return 1 if self.verdict is False else 0


def _lasso_text(w: Lasso) -> str:
    return "".join(format_letter(a) for a in w.stem) + ";" + "".join(format_letter(a) for a in w.loop)


# ---------------------------------------------------------------------------
# commands

def cmd_parse(args) -> RunReport:
    spec = load_spec(args.path)
    summary = spec.summary()
    n_obj = sum(len(s) for s in spec.objectives.values())
    text = [f"ok: {len(spec.processes)} processes, {n_obj} objectives",
            "processes: " + ", ".join(spec.processes)]
    for p, s in spec.objectives.items():
        text += [f"objectives {p}:"] + [f"  {i}. {t}" for i, t in enumerate(s.texts, start=1)]
    return RunReport("parse", spec.digest, True, summary, text)


def _strategy(spec: SpecFile, name: str):
    if name not in spec.strategies:
        raise SpecError(f"unknown strategy {name!r}", kind="semantic")
    return spec.strategies[name]


def cmd_check(args) -> RunReport:
    spec = load_spec(args.path)
    if args.assumption:
        if args.assumption not in spec.assumptions:
            raise SpecError(f"unknown assumption {args.assumption!r}", kind="semantic")
        entry = spec.assumptions[args.assumption]
        if not isinstance(entry.generator, AnnotatedGenerator):
            raise SpecError(f"assumption {args.assumption!r} has no annotation", kind="semantic")
        v = check_annotation_dominant(spec.spec_for(entry.process), entry.generator,
                                      spec.context(entry.process))
        return _dominance_report(spec, "check", args.assumption, v)
    if not args.strategy:
        raise SpecError("check needs --strategy or --assumption", kind="semantic")
    entry = _strategy(spec, args.strategy)
    ctx = spec.context(entry.process)
    objectives = spec.spec_for(entry.process)
    if args.mode == "winning":
        v = check_winning(objectives.partial(len(objectives)), entry.transducer, ctx)
        text = [f"{args.strategy} is {'winning' if v.winning else 'not winning'}"]
        if v.gamma is not None:
            text.append(f"losing environment word: {_lasso_text(v.gamma)}")
        return RunReport("check", spec.digest, v.winning, v.to_json(), text)
    v = check_dominant(objectives, entry.transducer, ctx)
    return _dominance_report(spec, "check", args.strategy, v)


def _dominance_report(spec, command, name, v) -> RunReport:
    text = [f"{name} is {'dominant' if v.dominant else 'not dominant'}"]
    c = v.counterexample
    if c is not None:
        text += [f"environment word: {_lasso_text(c.gamma)}",
                 f"achieved priority {c.k}, an alternative reaches {c.m}",
                 f"alternative outputs: {_lasso_text(c.better)}"]
        if c.path is not None:
            text.append("tree path: " + " ".join(c.path[0]) + " ; " + " ".join(c.path[1]))
    return RunReport(command, spec.digest, v.dominant, v.to_json(), text)


def cmd_synthesize(args) -> RunReport:
    spec = load_spec(args.path)
    p = args.process
    ctx = spec.context(p)
    objectives = spec.spec_for(p)
    if args.bound < 1:
        raise SpecError("bound must be at least 1", kind="semantic")
    if args.mode == "winning":
        r = synthesize_winning_bounded(objectives.partial(len(objectives)), ctx, args.bound)
    else:
        r = synthesize_dominant_bounded(objectives, ctx, args.bound)
    result = {"process": p, "mode": args.mode, "bound": args.bound, "examined": r.examined,
              "found": r.found}
    if not r.found:
        text = [f"no {args.mode} strategy with at most {args.bound} states "
                f"({r.examined} candidates); larger bounds were not explored"]
        result["caveat"] = "none within bound"
        return RunReport("synthesize", spec.digest, False, result, text)
    name = f"{p}_{args.mode}"
    body = strategy_to_text(name, p, r.strategy)
    result["strategy"] = body
    if args.out:
        Path(args.out).write_text(body)
    text = [f"found {args.mode} strategy after {r.examined} candidates", body.rstrip()]
    return RunReport("synthesize", spec.digest, True, result, text)


def cmd_assume(args) -> RunReport:
    spec = load_spec(args.path)
    p = args.process
    ctx = spec.context(p)
    objectives = spec.spec_for(p)
    r = search_assumption_bounded(objectives, ctx, args.bound, args.depth)
    gens = []
    text = []
    for i, ag in enumerate(r.generators, start=1):
        gens.append({"json": generator_to_json(ag), "universal": is_universal(ag.generator),
                     "size": ag.generator.size(), "text": generator_to_text(f"{p}_{i}", p, ag)})
        size = ag.generator.size()
        text += [f"generator {i} ({size} input node{'' if size == 1 else 's'}"
                 f"{', universal' if gens[-1]['universal'] else ''}):", ag.describe(), ""]
    if args.out and r.generators:
        Path(args.out).write_text("\n".join(g["text"] for g in gens))
    result = {"process": p, "bound": args.bound, "examined": r.examined, "generators": gens}
    if not r.found:
        text = [f"no dominant generator with at most {args.bound} input nodes"]
        result["caveat"] = "none within bound"
    return RunReport("assume", spec.digest, r.found, result, text)


def cmd_propagate(args) -> RunReport:
    spec = load_spec(args.path)
    order = tuple(args.order.split(",")) if args.order else spec.order
    if not order:
        raise SpecError("no priority order given (use --order or an [order] section)", kind="semantic")
    if set(order) != set(spec.processes) or len(set(order)) != len(order):
        raise SpecError(f"order {','.join(order)} is not a total order of the processes",
                        kind="semantic")
    procs = [Process(p, spec.spec_for(p), spec.context(p)) for p in order]
    try:
        res = propagate(procs, args.bound, args.depth, spec.architecture.onehot)
    except PropagationError as e:
        result = {"order": list(order), "error": str(e), "blocked": e.process}
        return RunReport("propagate", spec.digest, False, result, [f"propagation failed: {e}"])
    result = {"order": list(order), "residual_universal": res.residual_universal,
              "generators": {p: generator_to_json(g) for p, g in res.generators.items()},
              "strategies": {p: strategy_to_text(f"{p}_prop", p, s) for p, s in res.strategies.items()}}
    text = [f"propagation succeeded for {' > '.join(order)}; residual assumption is universal"]
    for p in order:
        text += [f"{p}:", res.generators[p].describe(), ""]
    if args.out:
        Path(args.out).write_text("\n".join(result["strategies"][p] for p in order))
    return RunReport("propagate", spec.digest, True, result, text)


def cmd_simulate(args) -> RunReport:
    spec = load_spec(args.path)
    names = [n for n in args.strategies.split(",") if n]
    if not names:
        raise SpecError("no strategies given", kind="semantic")
    parts = [_strategy(spec, n).transducer for n in names]
    if spec.world is not None:
        parts.append(spec.world)
    system = compose_all(parts)
    try:
        gamma = Lasso.parse(args.gamma)
    except ValueError as e:
        raise SpecError(f"bad lasso: {e}", kind="syntax") from None
    undeclared = gamma.variables() - spec.architecture.variables
    if undeclared:
        raise InterfaceError(f"environment word uses undeclared variables {sorted(undeclared)}")
    w = comp(system, gamma).normalized()
    prios = {p: achieved_on(s, w) for p, s in spec.objectives.items()}
    text = [f"computation: {_lasso_text(w)}"] + [f"{p}: priority {k} of {len(spec.objectives[p])}"
                                                  for p, k in prios.items()]
    return RunReport("simulate", spec.digest, None, {"computation": lasso_json(w), "priorities": prios},
                     text)


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="domsynth", description="Dominant strategies and assumption trees")
    ap.add_argument("--version", action="version", version=f"domsynth {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("path")
        p.add_argument("--json", action="store_true", help="machine-readable report")
        p.set_defaults(fn=fn)
        return p

    add("parse", cmd_parse, "validate a spec file")
    p = add("check", cmd_check, "check a strategy or an annotated assumption")
    p.add_argument("--strategy")
    p.add_argument("--assumption")
    p.add_argument("--mode", choices=["dominant", "winning"], default="dominant")
    p = add("synthesize", cmd_synthesize, "bounded strategy synthesis")
    p.add_argument("--process", required=True)
    p.add_argument("--bound", type=int, default=2)
    p.add_argument("--mode", choices=["dominant", "winning"], default="dominant")
    p.add_argument("--out")
    p = add("assume", cmd_assume, "search dominant annotated assumption generators")
    p.add_argument("--process", required=True)
    p.add_argument("--bound", type=int, default=6)
    p.add_argument("--depth", type=int)
    p.add_argument("--out")
    p = add("propagate", cmd_propagate, "incremental synthesis along a priority order")
    p.add_argument("--order")
    p.add_argument("--bound", type=int, default=8)
    p.add_argument("--depth", type=int)
    p.add_argument("--out")
    p = add("simulate", cmd_simulate, "run strategies against an environment lasso")
    p.add_argument("--strategies", required=True)
    p.add_argument("--gamma", required=True)
    return ap


def run(argv=None) -> tuple[int, str]:
    ap = build_parser()
    args = ap.parse_args(argv)
    t0 = time.perf_counter()
    try:
        report = args.fn(args)
    except (SpecError, InterfaceError, OSError, ValueError) as e:
        if args.json:
            out = json.dumps({"format": 1, "command": args.command, "error": str(e),
                              "kind": getattr(e, "kind", type(e).__name__)}, sort_keys=True)
        else:
            out = f"error: {e}"
        return 2, out
    report.wall_time = time.perf_counter() - t0
    if args.json:
        out = json.dumps(report.to_json(), sort_keys=True, indent=2)
    else:
        out = "\n".join(report.text)
    return report.exit_code, out


def main(argv=None) -> int:
    code, out = run(argv)
    print(out, file=sys.stderr if code == 2 and not out.startswith("{") else sys.stdout)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
