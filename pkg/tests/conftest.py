import os

import pytest

import clarith.formula as fm
from clarith.game import TruncationContext, int_to_numer, numer_value, split_move
from clarith.hpm import ScriptStrategy, parse_hpm

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

TWO_DISJUNCT_TEXT = ("(ada y [|x|] ade z [|x|] p(z,y))"
                     " v (ada u [|x|] ade w [|x|] q(u,w))")

COUNTER_TEXT = "ada x [val 1000] ade v [|x| + 1] (v = x)"


def read_fixture(name):
    with open(os.path.join(FIXTURES, name), "r", encoding="utf-8") as fh:
        return fh.read()


@pytest.fixture
def two_disjunct_formula():
    return fm.parse_formula(TWO_DISJUNCT_TEXT)


@pytest.fixture
def two_disjunct_ctx(two_disjunct_formula):
    return TruncationContext(two_disjunct_formula, {"x": 9})


@pytest.fixture
def bigmove_machine():
    return parse_hpm(read_fixture("bigmove.hpm"))


@pytest.fixture
def legal_machine():
    return parse_hpm(read_fixture("legal.hpm"))


def make_scripted_env(entries):
    """Environment callable playing each move once at least the given
    number of machine moves are visible."""
    pending = list(entries)

    def env(run):
        tops = sum(1 for label, _ in run if label == "T")
        if pending and pending[0][0] <= tops:
            return pending.pop(0)[1]
        return None

    return env


def counter_n_script():
    def fn(run, waited):
        if any(label == "T" for label, _ in run):
            return None
        return "#"

    return ScriptStrategy(fn, name="counter-base")


def counter_k_script(delay=0):
    def fn(run, waited):
        if any(label == "T" and m.startswith("1.") for label, m in run):
            return None
        ante = [m for label, m in run if label == "B" and m.startswith("0.")]
        if not ante or waited < delay:
            return None
        _, numer = split_move(ante[0])
        return "1.#" + int_to_numer(numer_value(numer or "") + 1)

    return ScriptStrategy(fn, name="counter-step")


def drive_solver(runner, env_moves, max_cycles=500000, settle=50):
    """Poll an induction runner, injecting (cycle, move) env entries,
    until a locking iteration appears or the cycle budget runs out."""
    run = ()
    pending = sorted(env_moves)
    for cycle in range(max_cycles):
        while pending and pending[0][0] <= cycle:
            run = run + (("B", pending.pop(0)[1]),)
        for m in runner.poll(run):
            run = run + (("T", m),)
        if any(rec["classification"].startswith("locking")
               for rec in runner.trace):
            for _ in range(settle):
                for m in runner.poll(run):
                    run = run + (("T", m),)
            return run
    return run
