"""Acceptance criteria 1-8.  Each test prints one PASS/FAIL line."""
import itertools
import json
import os
import random
import time

from domsynth import corpus_path, ltl
from domsynth.assumptions import (Process, annotate, check_annotation_dominant, decode_unary,
                                  encode_unary, propagate)
from domsynth.buchi import accepts, is_empty, ltl_to_buchi
from domsynth.cli import run
from domsynth.dominance import (Context, brute_force_dominance, check_dominant, lasso_from_json,
                                synthesize_dominant_bounded, synthesize_winning_bounded,
                                validate_counterexample)
from domsynth.ltl import PrioritizedSpec, achieved_on, evaluate_on_lasso
from domsynth.strategies import achieved_priority, comp, compose, compose_all, valid_letters
from domsynth.words import Lasso, enumerate_lassos, merge

from oracles import accepted_lassos, fill_in_compose, random_formula, random_transducer


def _report(capsys, n, ok, detail, started):
    with capsys.disabled():
        print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} ({detail}; {time.perf_counter() - started:.1f}s)")
    assert ok, detail


def test_criterion_1_side_by_side_counterexamples(capsys, sbs):
    t0 = time.perf_counter()
    objectives, ctx = sbs.spec_for("ego"), sbs.context("ego")
    details, ok = [], True
    for name in ("KEEP", "ACC"):
        code, out = run(["check", str(corpus_path("sbs.spec")), "--strategy", name, "--json"])
        rep = json.loads(out)
        c = rep["result"]["counterexample"]
        gamma, better = lasso_from_json(c["gamma"]), lasso_from_json(c["better"])
        system = ctx.system(sbs.strategies[name].transducer)
        k_ok = achieved_priority(objectives, system, gamma) == c["k"]
        m_ok = achieved_on(objectives, comp(ctx.plant, merge(gamma, better.restrict(ctx.controlled)))) == c["m"]
        ok &= code == 1 and rep["verdict"] is False and k_ok and m_ok and c["m"] > c["k"]
        if name == "KEEP":
            ok &= gamma.restrict({"keep_o"}).same_word(Lasso.parse(";{keep_o}"))
            ok &= all(a == frozenset({"keep_o"}) for a in gamma.loop)
        details.append(f"{name}: gamma={gamma} k={c['k']} m={c['m']}")
    _report(capsys, 1, ok, "; ".join(details), t0)


def test_criterion_2_annotation_verdicts(capsys, sbs):
    t0 = time.perf_counter()
    objectives, ctx = sbs.spec_for("ego"), sbs.context("ego")
    verdicts = {name: check_annotation_dominant(objectives, sbs.assumptions[name].generator, ctx).dominant
                for name in ("eventually_change", "always_keep", "within_three")}
    _report(capsys, 2, all(verdicts.values()), ", ".join(f"{k}={v}" for k, v in verdicts.items()), t0)


def test_criterion_3_next_a(capsys, xab):
    t0 = time.perf_counter()
    p_spec, p_ctx = xab.spec_for("p"), xab.context("p")
    dom = synthesize_dominant_bounded(p_spec, p_ctx, 3)
    win = synthesize_winning_bounded(xab.spec_for("system").partial(1), xab.context("system"), 1)
    const_false = (win.found and len(win.strategy.states) == 1
                   and win.strategy.output(win.strategy.initial) == frozenset())
    annotated = {}
    for name in ("next_a", "next_not_a"):
        bare = xab.assumptions[name].generator.generator
        ag = annotate(p_spec, p_ctx, bare)
        annotated[name] = ag is not None and check_annotation_dominant(p_spec, ag, p_ctx).dominant
    ok = not dom.found and const_false and all(annotated.values())
    _report(capsys, 3, ok, f"dominant p within 3 states: none ({dom.examined} candidates); "
            f"winning constant-false at bound 1: {const_false}; annotations: {annotated}", t0)


def test_criterion_4_three_cars(capsys, threecars):
    t0 = time.perf_counter()
    order = ("ego", "other", "ahead")
    procs = [Process(p, threecars.spec_for(p), threecars.context(p)) for p in order]
    res = propagate(procs, 8, onehot=threecars.architecture.onehot)
    sizes = {p: g.generator.size() for p, g in res.generators.items()}
    system = compose_all([res.strategies[p] for p in order] + [threecars.context("ego").plant])
    samples = failures = violations = 0
    for gamma in enumerate_lassos(valid_letters({"bend"}), 4, 3):
        samples += 1
        w = comp(system, gamma)
        failures += sum(not evaluate_on_lasso(threecars.spec_for(p).objectives[0], w) for p in order)
        violations += sum("bend" in w[i] and "accel_a" in w[i + 2]
                          for i in range(len(w.stem) + len(w.loop)))
    ok = (res.residual_universal and max(sizes.values()) <= 8 and samples >= 200
          and failures == 0 and violations == 0)
    _report(capsys, 4, ok, f"generator sizes {sizes}; {samples} residual lassos, "
            f"{failures} objective failures, {violations} accel-after-bend violations", t0)


def test_criterion_5_oracle_equivalence(capsys):
    t0 = time.perf_counter()
    rng = random.Random(20240501)
    ctx = Context.make({"b"}, {"a"})
    n = disagreements = invalid = beyond = with_cex = 0
    while n < 500:
        spec = PrioritizedSpec(tuple(random_formula(rng, ["a", "b"], 3) for _ in range(rng.randint(1, 3))))
        s = random_transducer(rng, {"a"}, {"b"}, 2)
        exact = check_dominant(spec, s, ctx)
        brute = brute_force_dominance(spec, s, ctx, 4, 3)
        n += 1
        if not brute.dominant:
            invalid += not validate_counterexample(spec, s, ctx, brute.counterexample)
            disagreements += exact.dominant
        if not exact.dominant:
            with_cex += 1
            c = exact.counterexample
            invalid += not validate_counterexample(spec, s, ctx, c)
            fits = all(len(w.stem) <= 4 and len(w.loop) <= 3 for w in (c.gamma, c.better))
            beyond += not fits
            disagreements += fits and brute.dominant
    ok = disagreements == 0 and invalid == 0
    _report(capsys, 5, ok, f"{n} instances, {with_cex} with counterexamples ({beyond} longer than the "
            f"bounds), {disagreements} disagreements, {invalid} invalid counterexamples", t0)


ATOMS = [ltl.Atom("a"), ltl.Atom("b")]
UNARY = [ltl.Not, ltl.Next, ltl.Eventually, ltl.Globally]
BINARY = [ltl.And, ltl.Or, ltl.Implies, ltl.Iff, ltl.Until, ltl.Release]


def _grow(base):
    out = list(dict.fromkeys(ATOMS + [ltl.TRUE, ltl.FALSE] + base))
    out += [u(x) for u in UNARY for x in base]
    out += [b(x, y) for b in BINARY for x in base for y in base]
    return list(dict.fromkeys(out))


def test_criterion_6_automata_engine(capsys):
    t0 = time.perf_counter()
    lassos = list(enumerate_lassos(valid_letters({"a", "b"}), 3, 2))
    depth0 = ATOMS + [ltl.TRUE, ltl.FALSE]
    formulas = _grow(depth0)  # every formula of depth <= 1
    if os.environ.get("DOMSYNTH_EXHAUSTIVE"):
        atoms_only = ATOMS + [u(x) for u in UNARY for x in ATOMS] + [b(x, y) for b in BINARY
                                                                     for x in ATOMS for y in ATOMS]
        formulas += [u(x) for u in UNARY for x in atoms_only]
        formulas += [b(x, y) for b in BINARY for x in atoms_only for y in atoms_only]
    rng = random.Random(6)
    formulas += [random_formula(rng, ["a", "b"], 3) for _ in range(900)]
    formulas = list(dict.fromkeys(formulas))
    mismatches = bad_witness = 0
    for f in formulas:
        aut = ltl_to_buchi(f)
        acc = accepted_lassos(aut, lassos)
        truth = {w: evaluate_on_lasso(f, w) for w in lassos}
        mismatches += sum(acc[w] != truth[w] for w in lassos)
        wit = is_empty(aut)
        if wit is None:
            bad_witness += any(truth.values())
        else:
            bad_witness += not (accepts(aut, wit.lasso) and evaluate_on_lasso(f, wit.lasso))
    ok = mismatches == 0 and bad_witness == 0
    _report(capsys, 6, ok, f"{len(formulas)} formulas x {len(lassos)} lassos, {mismatches} mismatches, "
            f"{bad_witness} bad emptiness witnesses", t0)


def test_criterion_7_unary_codec(capsys):
    t0 = time.perf_counter()
    failures = checked = 0
    for length in range(6):
        for seq in itertools.product(range(5), repeat=length):
            checked += 1
            bits = encode_unary(list(seq))
            failures += decode_unary(bits) != (list(seq), "")
    for length in range(13):
        for t in itertools.product("01", repeat=length):
            bits = "".join(t)
            seq, rest = decode_unary(bits)
            failures += encode_unary(seq) + rest != bits
    _report(capsys, 7, failures == 0, f"{checked} sequences and all bit strings up to length 12, "
            f"{failures} failures", t0)


def test_criterion_8_composition(capsys):
    t0 = time.perf_counter()
    rng = random.Random(8)
    letters = valid_letters({"x"})
    pairs = mismatches = 0
    while pairs < 200:
        sp = random_transducer(rng, {"x", "b"}, {"a"}, 3, "p")
        sq = random_transducer(rng, {"x", "a"}, {"b"}, 3, "q")
        joint = compose(sp, sq)
        total = rng.randint(1, 12)
        stem = rng.randint(0, total - 1)
        gamma = Lasso(tuple(rng.choice(letters) for _ in range(stem)),
                      tuple(rng.choice(letters) for _ in range(total - stem)))
        w = comp(joint, gamma)
        horizon = len(w.stem) + 2 * len(w.loop)
        pairs += 1
        mismatches += w.prefix(horizon) != fill_in_compose(sp, sq, gamma.prefix(horizon))
    _report(capsys, 8, mismatches == 0, f"{pairs} transducer pairs, {mismatches} mismatches", t0)
