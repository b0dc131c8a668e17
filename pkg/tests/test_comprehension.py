import pytest
from hypothesis import given
from hypothesis import strategies as st

import clarith.formula as fm
from clarith.bounds import Nat, parse_bound
from clarith.comprehension import (
    FALLBACK_FUEL,
    ComprehensionRunner,
    SimulationFault,
    _one_verdict,
    build_comprehension_solver,
    comprehension_conclusion,
    default_fuel,
)
from clarith.game import int_to_numer, is_canonical_numer, numer_value, wins
from clarith.hpm import ScriptStrategy


def bit_premise(mask, n_constants=1):
    """Decides Bit(y, mask): yes lands in the left disjunct."""

    def fn(run, waited):
        bots = [m for label, m in run if label == "B"]
        if len(bots) < n_constants or any(label == "T" for label, _ in run):
            return None
        j = numer_value(bots[-1][1:])
        return "0.#" if (mask >> j) & 1 else "1.#"

    return ScriptStrategy(fn, name=f"bits-of-{mask}")


def silent_premise():
    return ScriptStrategy(lambda run, waited: None, name="mute")


def babbling_premise():
    return ScriptStrategy(lambda run, waited: "#11", name="babble")


class TestConclusionShape:
    def test_structure(self):
        p = fm.parse_formula("Bit(y, 101)")
        g = comprehension_conclusion(p, "y", Nat(3))
        assert isinstance(g, fm.ChoiceEx) and g.kind == "size"
        assert isinstance(g.body, fm.BlindAll)
        assert g.var == "d" and g.body.var == "y"

    def test_single_machine_move(self):
        p = fm.parse_formula("Bit(y, 101)")
        g = comprehension_conclusion(p, "y", Nat(3))
        census = fm.choice_census(g)
        assert (census["e_top"], census["e_bot"]) == (1, 0)

    def test_result_variable_can_be_renamed(self):
        p = fm.parse_formula("Bit(y, 101)")
        g = comprehension_conclusion(p, "y", Nat(3), result_var="out")
        assert g.var == "out"


class TestVerdicts:
    def test_left_disjunct_means_true(self):
        assert _one_verdict(bit_premise(0b101), ["#"], fuel=50) is True

    def test_right_disjunct_means_false(self):
        assert _one_verdict(bit_premise(0b101), ["#1"], fuel=50) is False

    def test_silence_faults(self):
        with pytest.raises(SimulationFault):
            _one_verdict(silent_premise(), ["#"], fuel=20)

    def test_unaddressed_move_faults(self):
        with pytest.raises(SimulationFault):
            _one_verdict(babbling_premise(), ["#"], fuel=20)


class TestRunner:
    def assemble(self, mask, c, **kw):
        p = fm.Atom("Bit", (fm.TVar("y"), fm.TConst(format(mask, "b") if mask else "")))
        runner = ComprehensionRunner(bit_premise(mask), p, "y", Nat(c), **kw)
        return runner, runner.poll(())

    def test_worked_example(self):
        runner, moves = self.assemble(0b101, 3)
        assert moves == ["#101"]
        assert runner.faults == []

    def test_zero_bound_yields_zero(self):
        _, moves = self.assemble(0b101, 0)
        assert moves == ["#"]

    def test_always_false_yields_zero(self):
        _, moves = self.assemble(0, 2)
        assert moves == ["#"]

    def test_leading_falses_are_skipped(self):
        _, moves = self.assemble(0b001, 3)
        assert moves == ["#1"]

    def test_bits_above_the_bound_are_ignored(self):
        _, moves = self.assemble(0b1101, 2)
        assert moves == ["#1"]

    def test_answers_exactly_once(self):
        runner, moves = self.assemble(0b11, 2)
        assert moves == ["#11"]
        assert runner.poll(()) == []

    def test_fault_recorded_and_silent(self):
        p = fm.parse_formula("Bit(y, 101)")
        runner = ComprehensionRunner(silent_premise(), p, "y", Nat(2), fuel=20)
        assert runner.poll(()) == []
        assert len(runner.faults) == 1

    def test_waits_for_constants(self):
        p = fm.parse_formula("Bit(y, x)")
        runner = ComprehensionRunner(bit_premise(5, n_constants=2), p, "y",
                                     parse_bound("|x|"))
        assert runner.var_order == ["x"]
        assert runner.poll(()) == []
        moves = runner.poll((("B", "#101"),))
        assert moves == ["#101"]

    def test_builder_passes_options(self):
        p = fm.parse_formula("Bit(y, 11)")
        runner = build_comprehension_solver(bit_premise(3), p, "y", Nat(2),
                                            fuel=17)
        assert runner.fuel == 17


class TestAgainstDirectComputation:
    @given(st.integers(min_value=0, max_value=255),
           st.integers(min_value=0, max_value=8))
    def test_assembled_constant_matches_the_mask(self, mask, c):
        truncated = mask & ((1 << c) - 1)
        p = fm.Atom("Bit", (fm.TVar("y"),
                            fm.TConst(format(mask, "b") if mask else "")))
        runner = ComprehensionRunner(bit_premise(mask), p, "y", Nat(c))
        (move,) = runner.poll(())
        assert is_canonical_numer(move[1:])
        assert numer_value(move[1:]) == truncated

    @given(st.integers(min_value=0, max_value=255),
           st.integers(min_value=1, max_value=8))
    def test_single_move_wins_the_conclusion_game(self, mask, c):
        # with a zero bound no constant fits the size condition, so the
        # conclusion game is unwinnable and excluded here
        p = fm.Atom("Bit", (fm.TVar("y"),
                            fm.TConst(format(mask, "b") if mask else "")))
        g = comprehension_conclusion(p, "y", Nat(c))
        runner = ComprehensionRunner(bit_premise(mask), p, "y", Nat(c))
        (move,) = runner.poll(())
        assert wins(g, {}, (("T", move),)) == "T"


class TestFuelDefault:
    def test_fallback(self, monkeypatch):
        monkeypatch.delenv("CLARITH_FUEL_DEFAULT", raising=False)
        assert default_fuel() == FALLBACK_FUEL

    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("CLARITH_FUEL_DEFAULT", "123")
        assert default_fuel() == 123
