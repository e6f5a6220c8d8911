import pytest

from domsynth.dominance import (Context, best_response, brute_force_dominance, canonical_tables,
                                check_dominant, check_winning, default_observed, lasso_from_json,
                                lasso_json, synthesize_dominant_bounded, synthesize_winning_bounded,
                                validate_counterexample)
from domsynth.ltl import PrioritizedSpec, achieved_on, evaluate_on_lasso, parse_ltl
from domsynth.strategies import InterfaceError, Transducer, comp
from domsynth.words import Lasso


def _strategy(spec, name):
    return spec.strategies[name].transducer


def test_keep_is_dominated_when_other_keeps(sbs):
    ctx, objectives = sbs.context("ego"), sbs.spec_for("ego")
    v = check_dominant(objectives, _strategy(sbs, "KEEP"), ctx)
    assert not v.dominant
    c = v.counterexample
    assert c.gamma.restrict({"keep_o"}).same_word(Lasso.parse(";{keep_o}"))
    assert (c.k, c.m) == (0, 1)
    assert validate_counterexample(objectives, _strategy(sbs, "KEEP"), ctx, c)


def test_acc_counterexample_validates(sbs):
    ctx, objectives = sbs.context("ego"), sbs.spec_for("ego")
    acc = _strategy(sbs, "ACC")
    c = check_dominant(objectives, acc, ctx).counterexample
    assert c is not None and c.m > c.k
    assert validate_counterexample(objectives, acc, ctx, c)
    assert achieved_on(objectives, comp(ctx.system(acc), c.gamma)) == c.k
    # tampering with the claim is detected
    bogus = type(c)(c.gamma, c.better, c.k + 1, c.m)
    assert not validate_counterexample(objectives, acc, ctx, bogus)


def test_brute_force_agrees_on_sbs(sbs):
    ctx, objectives = sbs.context("ego"), sbs.spec_for("ego")
    for name in ("KEEP", "ACC"):
        s = _strategy(sbs, name)
        bf = brute_force_dominance(objectives, s, ctx, 2, 1)
        assert not bf.dominant
        assert validate_counterexample(objectives, s, ctx, bf.counterexample)


def test_best_response():
    ctx = Context.make({"b"}, {"a"})
    spec = PrioritizedSpec.parse(["(X a) <-> b", "G !b"])
    m, w = best_response(spec, Lasso.parse("{};{a}"), ctx)
    assert m == 1 and w[0] == frozenset({"b"})
    m, w = best_response(spec, Lasso.parse(";{}"), ctx)
    assert m == 2
    assert best_response(spec, Lasso.parse(";{}"), ctx, floor=2) == (2, None)


def test_winning_check():
    ctx = Context.make({"b"}, {"a"})
    follow = Transducer.from_table({"a"}, {"b"}, 2,
                                   {(0, frozenset()): 0, (0, frozenset("a")): 1,
                                    (1, frozenset()): 0, (1, frozenset("a")): 1},
                                   {0: frozenset(), 1: frozenset({"b"})})
    assert check_winning(parse_ltl("G (a -> X b)"), follow, ctx).winning
    v = check_winning(parse_ltl("G (b -> X a)"), follow, ctx)
    assert not v.winning
    assert not evaluate_on_lasso(parse_ltl("G (b -> X a)"), comp(follow, v.gamma))


def test_context_validation():
    with pytest.raises(InterfaceError):
        Context.make({"a"}, {"a"})
    ctx = Context.make({"b"}, {"a"})
    with pytest.raises(InterfaceError):
        ctx.system(Transducer.constant({"c"}, ()))


def test_canonical_tables_counts():
    # accessible, canonically numbered tables
    assert len(list(canonical_tables(1, 2))) == 1
    assert len(list(canonical_tables(2, 1))) == 2
    assert len(list(canonical_tables(2, 2))) == 12


def test_synthesis(xab, trivial):
    ctx, objectives = xab.context("p"), xab.spec_for("p")
    r = synthesize_dominant_bounded(objectives, ctx, 2)
    assert not r.found and r.examined > 0
    sys_ctx = xab.context("system")
    w = synthesize_winning_bounded(xab.spec_for("system").partial(1), sys_ctx, 1)
    assert w.found and w.strategy.output(w.strategy.initial) == frozenset()
    t = synthesize_dominant_bounded(trivial.spec_for("p"), trivial.context("p"), 1)
    assert t.found and t.examined == 1
    with pytest.raises(ValueError):
        synthesize_dominant_bounded(objectives, ctx, 0)


def test_default_observed(sbs):
    assert default_observed(sbs.spec_for("ego"), sbs.context("ego")) == {"accel_o", "keep_o", "decel_o"}


def test_lasso_json_round_trip():
    w = Lasso.parse("{a}{};{a,b}")
    assert lasso_from_json(lasso_json(w)) == w
