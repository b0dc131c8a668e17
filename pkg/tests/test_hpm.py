import pytest

from clarith.game import project
from clarith.hpm import (
    BLANK,
    Configuration,
    HPMStrategy,
    Meter,
    ScriptStrategy,
    StrategyRunner,
    history_prefix,
    initial_configuration,
    initial_sketch,
    meter_report,
    parse_hpm,
    play,
    run_symbol,
    run_tape_length,
    sketch_advance,
    sketch_of_configuration,
    spacecost,
    step,
)

from conftest import make_scripted_env, read_fixture


class TestParsing:
    def test_fields(self, bigmove_machine):
        assert bigmove_machine.start == "a0"
        assert bigmove_machine.move_states == {"m1", "m2"}
        assert bigmove_machine.worktapes == 0

    def test_census_counts_blank(self, bigmove_machine):
        assert bigmove_machine.census() == {"r": 8, "g": 0, "q": 5}

    def test_append_string(self, bigmove_machine):
        row = bigmove_machine.delta[("a1", "B", ())]
        assert row[0] == "go1" and row[4] == "0.1.#1111111"

    def test_missing_declaration(self):
        with pytest.raises(ValueError):
            parse_hpm("states: a\nstart: a\nworktapes: 0\n")

    def test_bad_direction(self):
        text = read_fixture("legal.hpm") + "delta: halt, _, _ -> halt, _, U, S\n"
        with pytest.raises(ValueError):
            parse_hpm(text)

    def test_arity_mismatch(self):
        text = read_fixture("legal.hpm") + "delta: halt, _, _ -> halt, S\n"
        with pytest.raises(ValueError):
            parse_hpm(text)

    def test_undeclared_start(self):
        with pytest.raises(ValueError):
            parse_hpm("states: a\nstart: b\nworktapes: 0\nalphabet: 0\n")


class TestRunTape:
    RUN = (("B", "#1001"), ("T", "0.#"))

    def test_length(self):
        assert run_tape_length(self.RUN) == 6 + 4

    def test_symbols(self):
        cells = [run_symbol(self.RUN, i) for i in range(11)]
        assert "".join(cells) == "B#1001T0.#" + BLANK

    def test_blank_past_the_end(self):
        assert run_symbol((), 0) == BLANK


class TestStepping:
    def test_idle_without_matching_row(self, bigmove_machine):
        cfg = initial_configuration(bigmove_machine)
        cfg2 = step(bigmove_machine, cfg)
        assert cfg2.state == "a0" and cfg2.cycle == 1
        assert cfg2.last_append == "" and cfg2.last_move is None

    def test_incoming_moves_absorbed_before_reading(self, bigmove_machine):
        cfg = initial_configuration(bigmove_machine)
        cfg2 = step(bigmove_machine, cfg, incoming=(("B", "#1"),))
        assert cfg2.run == (("B", "#1"),)
        assert cfg2.state == "a1" and cfg2.runhead == 1

    def test_buffer_flush_on_move_state(self, bigmove_machine):
        env = make_scripted_env([(0, "#1001"), (0, "0.#10")])
        out = play(StrategyRunner(HPMStrategy(bigmove_machine)), env, fuel=40)
        tops = project(out["run"], "top")
        assert tops == (("T", "0.1.#1111111"),)

    def test_full_exchange(self, bigmove_machine):
        env = make_scripted_env([(0, "#1001"), (0, "0.#10"), (1, "1.#1")])
        out = play(StrategyRunner(HPMStrategy(bigmove_machine)), env, fuel=60)
        tops = project(out["run"], "top")
        assert tops == (("T", "0.1.#1111111"), ("T", "1.1.#0"))

    def test_runhead_clamped_at_frontier(self, bigmove_machine):
        cfg = initial_configuration(bigmove_machine)
        cfg = step(bigmove_machine, cfg, incoming=(("B", ""),))
        # a1 reads blank at cell 1 and stays put forever
        for _ in range(5):
            cfg = step(bigmove_machine, cfg)
        assert cfg.runhead == 1 and cfg.state == "a1"

    def test_worktape_write_and_clamp(self, legal_machine):
        cfg = initial_configuration(legal_machine)
        cfg = step(legal_machine, cfg, incoming=(("B", "#1"),))
        assert cfg.tapes == ("X",) and cfg.heads == (1,)
        cfg2 = step(legal_machine, cfg)
        assert cfg2.tapes == ("XX",) and cfg2.heads == (2,)

    def test_spacecost_counts_written_cells(self, legal_machine):
        env = make_scripted_env([(0, "#1001")])
        runner = StrategyRunner(HPMStrategy(legal_machine))
        play(runner, env, fuel=10)
        assert runner.spacecost() == 2

    def test_spacecost_empty(self, bigmove_machine):
        assert spacecost(initial_configuration(bigmove_machine)) == 0

    def test_replace_preserves_equality(self, bigmove_machine):
        cfg = initial_configuration(bigmove_machine)
        assert cfg.replace() == cfg
        assert cfg.replace(cycle=3) != cfg


class TestScriptStrategy:
    def test_waited_counter_resets_on_move(self):
        calls = []

        def fn(run, waited):
            calls.append(waited)
            return "#1" if waited == 2 else None

        runner = StrategyRunner(ScriptStrategy(fn))
        run = ()
        for _ in range(6):
            for m in runner.poll(run):
                run = run + (("T", m),)
        assert calls == [0, 1, 2, 0, 1, 2]
        assert len(run) == 2

    def test_feed_shows_environment_moves(self):
        seen = []

        def fn(run, waited):
            seen.append(run)
            return None

        runner = StrategyRunner(ScriptStrategy(fn))
        runner.poll((("B", "#1"),))
        assert seen[-1] == (("B", "#1"),)


class TestMeter:
    def test_amplitude_tracks_own_magnitude_per_background(self):
        m = Meter()
        m.record_cycle(0, (("B", "#101"),), 0, [], True)
        m.record_cycle(5, (("B", "#101"), ("T", "#11")), 2, ["#11"], False)
        rep = meter_report(m)
        assert rep["amplitude"] == {3: 2}
        assert rep["max_spacecost"] == 2
        assert rep["max_timecost"] == 5
        assert rep["backgrounds"] == [3, 3]

    def test_background_floor_is_one(self):
        m = Meter()
        m.record_cycle(0, (), 0, [], False)
        assert meter_report(m)["backgrounds"] == [1]

    def test_timecost_measured_from_last_event(self):
        m = Meter()
        m.record_cycle(0, (), 0, [], True)
        m.record_cycle(3, (), 0, ["#"], False)
        m.record_cycle(4, (), 0, ["#1"], False)
        assert [t for _, t in m.timecosts] == [3, 1]


class TestHistoryPrefix:
    HIST = [("B", 2), ("T", 3), ("B", 1), ("T", 4)]

    def test_before_first_own_move(self):
        assert history_prefix(self.HIST, 0) == [("B", 2)]

    def test_between_own_moves(self):
        assert history_prefix(self.HIST, 1) == [("B", 2), ("T", 3), ("B", 1)]

    def test_past_the_end(self):
        assert history_prefix(self.HIST, 9) == self.HIST


class TestSketch:
    def _coherence(self, spec, ctx, schedule, cycles):
        cfg = initial_configuration(spec)
        sk = initial_sketch(spec)
        pending = sorted(schedule)
        flushes = []
        for cycle in range(cycles):
            incoming = []
            while pending and pending[0][0] <= cycle:
                incoming.append(("B", pending.pop(0)[1]))
            now = cfg.run + tuple(incoming)
            hist = [(l, len(m)) for l, m in now]

            def src(idx, label, ordinal, offset, rn=now):
                return rn[idx][1][offset - 1]

            sk = sketch_advance(spec, sk, hist, src, ctx)
            cfg = step(spec, cfg, incoming)
            assert sk == sketch_of_configuration(cfg, ctx)
            if sk.flushed:
                flushes.append((sk.flushed_trunc, sk.flushed_len))
        return flushes

    def test_initial_agrees_with_initial_configuration(self, bigmove_machine,
                                                       two_disjunct_ctx):
        cfg = initial_configuration(bigmove_machine)
        assert initial_sketch(bigmove_machine) == sketch_of_configuration(
            cfg, two_disjunct_ctx)

    def test_cycle_by_cycle_coherence(self, bigmove_machine, two_disjunct_ctx):
        flushes = self._coherence(
            bigmove_machine, two_disjunct_ctx,
            [(0, "#1001"), (12, "0.#10"), (25, "1.#1")], 60)
        assert flushes == [("0.1.#1111", 12), ("1.1.#0", 6)]

    def test_coherence_with_worktape_machine(self, legal_machine,
                                             two_disjunct_ctx):
        flushes = self._coherence(
            legal_machine, two_disjunct_ctx,
            [(0, "#1001"), (9, "0.#10"), (20, "1.#1")], 50)
        assert flushes == [("0.1.#11", 7), ("1.1.#0", 6)]

    def test_truncation_tracker_abandons_bad_buffers(self, bigmove_machine,
                                                     two_disjunct_ctx):
        cfg = initial_configuration(bigmove_machine).replace(buffer="0.x1")
        sk = sketch_of_configuration(cfg, two_disjunct_ctx)
        assert sk.trunc == "0." and sk.buffer_len == 4
