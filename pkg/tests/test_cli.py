import json

import pytest

from domsynth import corpus_path
from domsynth.cli import main, run
from domsynth.specfile import SpecError, generator_to_text, parse_spec


def _run_json(*argv):
    code, out = run(list(argv) + ["--json"])
    return code, json.loads(out)


SBS, XAB = str(corpus_path("sbs.spec")), str(corpus_path("xab.spec"))
THREE, TRIVIAL = str(corpus_path("threecars.spec")), str(corpus_path("trivial.spec"))


# spec files

def test_parse_corpus():
    code, out = run(["parse", SBS])
    assert code == 0 and out.startswith("ok: 2 processes, 3 objectives")
    for path in (XAB, THREE, TRIVIAL):
        assert run(["parse", path])[0] == 0


def test_empty_file_is_syntax_error(tmp_path):
    p = tmp_path / "empty.spec"
    p.write_text("")
    code, rep = _run_json("parse", str(p))
    assert code == 2 and rep["kind"] == "syntax"


def test_undeclared_atom_is_named(tmp_path):
    p = tmp_path / "bad.spec"
    p.write_text("[architecture]\nprocess p: x\n\n[objectives p]\nG (x | ghost)\n")
    code, rep = _run_json("parse", str(p))
    assert code == 2 and rep["kind"] == "semantic" and "ghost" in rep["error"]
    with pytest.raises(SpecError) as e:
        parse_spec(p.read_text())
    assert e.value.line == 5 and e.value.column == 8


@pytest.mark.parametrize("text", [
    "[architecture]\nprocess p: x\n[objectives p]\nG (x\n",
    "[architecture\nprocess p: x\n",
    "stray\n[architecture]\nprocess p: x\n",
    "[architecture]\nprocess p: x\n[world]\npredicates: s\n",
    "[architecture]\nprocess p: x\nprocess p: y\n",
    "[architecture]\nprocess p: x\n[strategy s]\nprocess: p\nstate a: {y}\n",
])
def test_malformed_specs_rejected(text):
    with pytest.raises(SpecError):
        parse_spec(text)


# commands

def test_check_keep_and_acc():
    code, rep = _run_json("check", SBS, "--strategy", "KEEP")
    assert code == 1 and rep["verdict"] is False
    c = rep["result"]["counterexample"]
    assert (c["k"], c["m"]) == (0, 1)
    code, rep = _run_json("check", SBS, "--strategy", "ACC")
    assert code == 1 and rep["result"]["counterexample"]["m"] > rep["result"]["counterexample"]["k"]


def test_check_winning_and_trivial():
    assert run(["check", XAB, "--strategy", "all_false", "--mode", "winning"])[0] == 0
    assert run(["check", TRIVIAL, "--strategy", "anything"])[0] == 0
    code, out = run(["check", SBS, "--strategy", "NOPE"])
    assert code == 2 and "NOPE" in out


def test_check_assumptions():
    for name in ("always_keep", "eventually_change", "within_three"):
        assert run(["check", SBS, "--assumption", name])[0] == 0
    assert run(["check", XAB, "--assumption", "next_a"])[0] == 0


def test_synthesize(tmp_path):
    code, out = run(["synthesize", XAB, "--process", "p", "--bound", "3"])
    assert code == 1 and "no dominant strategy with at most 3 states" in out
    out_file = tmp_path / "s.spec"
    code, rep = _run_json("synthesize", XAB, "--process", "system", "--bound", "1", "--mode", "winning",
                          "--out", str(out_file))
    assert code == 0 and "state q0: {}" in rep["result"]["strategy"]
    # the emitted strategy re-validates
    merged = tmp_path / "merged.spec"
    merged.write_text(open(XAB).read() + "\n" + out_file.read_text())
    assert run(["check", str(merged), "--strategy", "system_winning", "--mode", "winning"])[0] == 0
    assert run(["synthesize", TRIVIAL, "--process", "p", "--bound", "1"])[0] == 0
    assert run(["synthesize", XAB, "--process", "zz"])[0] == 2
    assert run(["synthesize", XAB, "--process", "p", "--bound", "0"])[0] == 2


def test_assume_outputs_revalidate(tmp_path):
    out_file = tmp_path / "g.spec"
    code, rep = _run_json("assume", SBS, "--process", "ego", "--out", str(out_file))
    assert code == 0 and rep["result"]["generators"]
    merged = tmp_path / "merged.spec"
    merged.write_text(open(SBS).read() + "\n" + out_file.read_text())
    for i in range(1, len(rep["result"]["generators"]) + 1):
        assert run(["check", str(merged), "--assumption", f"ego_{i}"])[0] == 0
    code, rep = _run_json("assume", TRIVIAL, "--process", "p", "--bound", "1")
    assert code == 0 and rep["result"]["generators"][0]["universal"]


def test_propagate():
    code, rep = _run_json("propagate", THREE)
    assert code == 0 and rep["result"]["residual_universal"]
    assert rep["result"]["order"] == ["ego", "other", "ahead"]
    assert run(["propagate", XAB, "--order", "p,q"])[0] == 0
    assert run(["propagate", XAB, "--order", "p"])[0] == 2
    assert run(["propagate", TRIVIAL, "--order", "p"])[0] == 0


def test_simulate():
    code, out = run(["simulate", SBS, "--strategies", "KEEP", "--gamma", ";{keep_o}"])
    assert code == 0 and "ego: priority 0 of 3" in out
    code, out = run(["simulate", SBS, "--strategies", "KEEP", "--gamma", "{accel_o};{keep_o}"])
    assert "ego: priority 2 of 3" in out
    code, out = run(["simulate", TRIVIAL, "--strategies", "anything", "--gamma", ";{y}"])
    assert "p: priority 1 of 1" in out
    assert run(["simulate", SBS, "--strategies", "KEEP", "--gamma", ";{nope}"])[0] == 2
    assert run(["simulate", SBS, "--strategies", "KEEP", "--gamma", "{keep_o"])[0] == 2


def test_json_reports_are_deterministic():
    for argv in (["check", SBS, "--strategy", "ACC"], ["assume", XAB, "--process", "p"]):
        a, b = _run_json(*argv)[1], _run_json(*argv)[1]
        a.pop("wall_time"), b.pop("wall_time")
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
        assert a["format"] == 1 and len(a["input_digest"]) == 16


def test_main_prints(capsys):
    assert main(["parse", TRIVIAL]) == 0
    assert "ok: 1 processes" in capsys.readouterr().out
    assert main(["parse", "/nonexistent.spec"]) == 2
    assert "error" in capsys.readouterr().err


def test_generator_text_round_trip(sbs):
    ag = sbs.assumptions["within_three"].generator
    text = open(SBS).read() + "\n" + generator_to_text("copy", "ego", ag)
    assert parse_spec(text).assumptions["copy"].generator.generator.size() == ag.generator.size()
