import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

import clarith.formula as fm
from clarith.game import (
    GamePosition,
    IllegalMove,
    Semiposition,
    TruncationContext,
    analyze_semiposition,
    first_illegal_index,
    format_run,
    int_to_numer,
    is_canonical_numer,
    is_p_delay,
    is_quasilegal,
    is_quasilegal_move_prefix,
    legal_status,
    magnitude,
    numer_value,
    parse_run,
    project,
    prudentize,
    split_move,
    truncate,
    windup,
    windup_oracle,
    wins,
)

from conftest import TWO_DISJUNCT_TEXT


class TestMoveAnatomy:
    def test_split_clean_move(self):
        assert split_move("0.1.#101") == ("0.1.", "101")

    def test_split_empty_numer(self):
        assert split_move("1.#") == ("1.", "")

    def test_split_junk_tail(self):
        assert split_move("0.xyz") == ("0.", None)

    def test_numer_round_trip(self):
        for n in range(50):
            assert numer_value(int_to_numer(n)) == n

    def test_canonical_numers(self):
        assert is_canonical_numer("")
        assert is_canonical_numer("0")
        assert is_canonical_numer("101")
        assert not is_canonical_numer("01")

    def test_magnitude(self):
        assert magnitude("0.1.#1111111") == 7
        assert magnitude("0.junk") == 0

    @given(st.integers(min_value=1, max_value=10**6))
    def test_positive_numers_have_no_leading_zero(self, n):
        assert int_to_numer(n).startswith("1")


class TestProjections:
    RUN = (("T", "1.#1"), ("B", "0.#0"), ("T", "0.1.#"))

    def test_top_and_bot(self):
        assert project(self.RUN, "top") == (("T", "1.#1"), ("T", "0.1.#"))
        assert project(self.RUN, "bot") == (("B", "0.#0"),)

    def test_negate_swaps_labels(self):
        assert project(project(self.RUN, "negate"), "negate") == self.RUN

    def test_subgame_projections_strip_prefix(self):
        assert project(self.RUN, "sub0") == (("B", "#0"), ("T", "1.#"))
        assert project(self.RUN, "sub1") == (("T", "#1"),)


class TestLegality:
    def test_legal_run(self, two_disjunct_formula):
        run = (("B", "0.#101"), ("T", "0.1.#11"))
        assert first_illegal_index(two_disjunct_formula, {"x": 9}, run) is None

    def test_wrong_mover(self, two_disjunct_formula):
        run = (("T", "0.#101"),)
        assert first_illegal_index(two_disjunct_formula, {"x": 9}, run) == 0

    def test_repeat_resolution(self, two_disjunct_formula):
        run = (("B", "0.#1"), ("B", "0.#1"))
        assert first_illegal_index(two_disjunct_formula, {"x": 9}, run) == 1

    def test_address_into_atom(self, two_disjunct_formula):
        run = (("B", "0.#1"), ("B", "0.1.1.#1"))
        assert first_illegal_index(two_disjunct_formula, {"x": 9}, run) == 1

    def test_noncanonical_numer_is_illegal(self, two_disjunct_formula):
        run = (("B", "0.#01"),)
        assert first_illegal_index(two_disjunct_formula, {"x": 9}, run) == 0

    def test_missing_constant_rejected(self, two_disjunct_formula):
        with pytest.raises(KeyError):
            GamePosition.start(two_disjunct_formula, {})

    def test_quasilegal_one_sided(self, two_disjunct_formula):
        run = (("T", "0.1.#1"), ("B", "junk"))
        assert is_quasilegal(two_disjunct_formula, run, "T")
        assert not is_quasilegal(two_disjunct_formula, run, "B")

    def test_status_classification(self, two_disjunct_formula):
        ok = (("B", "0.#1"),)
        assert legal_status(two_disjunct_formula, {"x": 9}, ok) == "legal"
        bad = (("B", "nope"), ("T", "0.1.#1"))
        assert legal_status(two_disjunct_formula, {"x": 9}, bad) == "T-quasilegal"
        worst = (("B", "nope"), ("T", "nope"))
        st = legal_status(two_disjunct_formula, {"x": 9}, worst)
        assert st == "illegal-at-index" and st.index == 0


class TestWinning:
    def atoms(self, name, args):
        if name == "p":
            return args[0] == args[1]
        if name == "q":
            return args[0] < args[1]
        raise KeyError(name)

    def test_unresolved_universal_favors_its_owner(self, two_disjunct_formula):
        assert wins(two_disjunct_formula, {"x": 9}, (), atoms=self.atoms) == "T"

    def test_machine_answers_correctly(self, two_disjunct_formula):
        run = (("B", "0.#101"), ("T", "0.1.#101"))
        assert wins(two_disjunct_formula, {"x": 9}, run, atoms=self.atoms) == "T"

    def test_machine_answers_incorrectly(self):
        f = fm.parse_formula("ada y [|x|] ade z [|x|] p(z, y)")
        run = (("B", "#101"), ("T", "1.#100"))
        assert wins(f, {"x": 9}, run, atoms=self.atoms) == "B"

    def test_oversize_resolution_loses(self):
        f = fm.parse_formula("ada y [|x|] ade z [|x|] p(z, y)")
        run = (("B", "#1"), ("T", "1.#11111"))
        assert wins(f, {"x": 9}, run, atoms=self.atoms) == "B"

    def test_blind_quantifier_semantics(self):
        f = fm.parse_formula("cla y < |x| : Bit(y, x)")
        assert wins(f, {"x": 7}, ()) == "T"
        assert wins(f, {"x": 5}, ()) == "B"


class TestTruncation:
    def test_threshold_from_environment(self, two_disjunct_ctx):
        assert two_disjunct_ctx.threshold == 4

    def test_addresses(self, two_disjunct_ctx):
        assert two_disjunct_ctx.addresses == ("0.", "0.1.", "1.", "1.1.")
        assert two_disjunct_ctx.addresses_for("T") == ("0.1.", "1.1.")

    def test_prudentize_trims_numer(self):
        assert prudentize("0.1.#1111111", 4) == "0.1.#1111"
        assert prudentize("0.1.#11", 4) == "0.1.#11"
        assert prudentize("no-numer-here", 4) == "no-numer-here"

    def test_truncate_worked_value(self, two_disjunct_ctx):
        assert truncate("0.1.#1111111", two_disjunct_ctx) == "0.1.#1111"

    def test_truncate_cuts_at_longest_good_prefix(self, two_disjunct_ctx):
        assert truncate("0.1.#10x11", two_disjunct_ctx) == "0.1.#10"
        assert truncate("garbage", two_disjunct_ctx) == ""

    def test_quasilegal_prefixes(self, two_disjunct_ctx):
        addrs = two_disjunct_ctx.addresses
        assert is_quasilegal_move_prefix("0.", addrs)
        assert is_quasilegal_move_prefix("0.1.#1", addrs)
        assert not is_quasilegal_move_prefix("0.1.#01", addrs)
        assert not is_quasilegal_move_prefix("0.0.", addrs)

    @given(st.text(alphabet="01#.x", max_size=12))
    def test_truncate_output_is_always_a_good_prefix(self, s):
        ctx = TruncationContext(fm.parse_formula(TWO_DISJUNCT_TEXT), {"x": 9})
        out = truncate(s, ctx)
        assert out == "" or is_quasilegal_move_prefix(out, ctx.addresses)


class TestSemipositions:
    def test_complete_semiposition(self, two_disjunct_formula):
        s = Semiposition((("B", "0.#1"),))
        rep = analyze_semiposition(s, two_disjunct_formula, {"x": 9})
        assert rep["complete"] and rep["legitimate"] and rep["quasilegitimate"]

    def test_open_buffer_legitimacy(self, two_disjunct_formula):
        s = Semiposition((("T", "0.1"),), open_last=True)
        rep = analyze_semiposition(s, two_disjunct_formula, {"x": 9})
        assert not rep["complete"]
        assert rep["quasilegitimate"]

    def test_hopeless_buffer(self, two_disjunct_formula):
        s = Semiposition((("T", "0.0."),), open_last=True)
        rep = analyze_semiposition(s, two_disjunct_formula, {"x": 9})
        assert not rep["quasilegitimate"]

    def test_compression_masks_numers(self, two_disjunct_formula):
        s = Semiposition((("B", "0.#101"), ("T", "0.1.#1")), open_last=True)
        rep = analyze_semiposition(s, two_disjunct_formula, {"x": 9})
        assert rep["compression"] == (("B", "0.#*"), ("T", "0.1.#*..."))


class TestWindup:
    def test_empty_buffer(self, two_disjunct_formula):
        v = Semiposition((("T", ""),), open_last=True)
        assert windup(v, two_disjunct_formula, {"x": 9}) == "0.1.#"

    def test_partial_address(self, two_disjunct_formula):
        v = Semiposition((("T", "1."),), open_last=True)
        assert windup(v, two_disjunct_formula, {"x": 9}) == "1.#"

    def test_open_numer_closes_for_free(self, two_disjunct_formula):
        v = Semiposition((("T", "0.1.#10"),), open_last=True)
        assert windup(v, two_disjunct_formula, {"x": 9}) == ""

    def test_rejects_dead_buffer(self, two_disjunct_formula):
        v = Semiposition((("T", "0.0."),), open_last=True)
        with pytest.raises(ValueError):
            windup(v, two_disjunct_formula, {"x": 9})

    def test_agrees_with_oracle_on_random_buffers(self, two_disjunct_formula):
        rng = random.Random(7)
        checked = 0
        for _ in range(300):
            buf = "".join(rng.choice("01#.") for _ in range(rng.randrange(0, 6)))
            prior = ()
            if rng.random() < 0.5:
                prior = (("T", "1.1.#1"),)
            v = Semiposition(prior + (("T", buf),), open_last=True)
            rep = analyze_semiposition(v, two_disjunct_formula, {"x": 9})
            if not rep["quasilegitimate"]:
                continue
            got = windup(v, two_disjunct_formula, {"x": 9})
            want = windup_oracle(v, two_disjunct_formula, {"x": 9})
            assert got == want, (buf, got, want)
            checked += 1
        assert checked > 50


class TestDelays:
    OMEGA = (("B", "a"), ("T", "b"), ("B", "c"), ("T", "d"))

    def test_identity_is_a_delay(self):
        assert is_p_delay(self.OMEGA, self.OMEGA)

    def test_postponing_machine_moves(self):
        delta = (("B", "a"), ("B", "c"), ("T", "b"), ("T", "d"))
        assert is_p_delay(delta, self.OMEGA)

    def test_hastening_machine_moves_is_not(self):
        delta = (("T", "b"), ("B", "a"), ("B", "c"), ("T", "d"))
        assert not is_p_delay(delta, self.OMEGA)

    def test_reordering_one_side_is_not(self):
        delta = (("B", "c"), ("T", "b"), ("B", "a"), ("T", "d"))
        assert not is_p_delay(delta, self.OMEGA)


class TestRunText:
    def test_round_trip(self):
        run = (("T", "0.1.#11"), ("B", "1.#"))
        assert parse_run(format_run(run)) == run

    def test_comments_and_blanks_skipped(self):
        text = "#! a remark\n\nT 0.#1\n"
        assert parse_run(text) == (("T", "0.#1"),)

    def test_bad_label_rejected(self):
        with pytest.raises(ValueError):
            parse_run("X 0.#1\n")
