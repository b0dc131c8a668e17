"""The interactive machine VM: specs, configurations, stepping, meters,
sketches, and the stepper contract scripted strategies also satisfy.

Run tape layout: each labmove occupies 1 + len(move) cells, the first
cell holding the label character 'T' or 'B'.  The blank is '_'.  The
run-tape head is clamped so it can never pass the leftmost blank.
"""

from __future__ import annotations

from .game import (
    TruncationContext,
    is_quasilegal_move_prefix,
    magnitude,
)

BLANK = "_"
DIRS = ("L", "R", "S")


class HPMSpec:
    def __init__(self, states, start, move_states, worktapes, alphabet, delta):
        self.states = frozenset(states)
        self.start = start
        self.move_states = frozenset(move_states)
        self.worktapes = int(worktapes)
        self.alphabet = frozenset(alphabet) | {BLANK}
        self.delta = dict(delta)
        if start not in self.states:
            raise ValueError(f"start state {start!r} not declared")
        if not self.move_states <= self.states:
            raise ValueError("move states must be declared states")

    def census(self):
        """(r, g, q) = state count, work tapes, tape symbol count."""
        return {"r": len(self.states), "g": self.worktapes, "q": len(self.alphabet)}


def parse_hpm(text: str) -> HPMSpec:
    fields = {}
    delta = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(":")
        key = key.strip()
        rest = rest.strip()
        if key == "states":
            fields["states"] = rest.split()
        elif key == "start":
            fields["start"] = rest
        elif key == "movestates":
            fields["move_states"] = rest.split()
        elif key == "worktapes":
            fields["worktapes"] = int(rest)
        elif key == "alphabet":
            fields["alphabet"] = rest.split()
        elif key == "delta":
            delta.update(_parse_delta_line(rest, lineno))
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    for need in ("states", "start", "worktapes", "alphabet"):
        if need not in fields:
            raise ValueError(f"missing {need!r} declaration")
    fields.setdefault("move_states", [])
    return HPMSpec(delta=delta, **fields)


def _parse_delta_line(rest, lineno):
    lhs, arrow, rhs = rest.partition("->")
    if not arrow:
        raise ValueError(f"line {lineno}: delta needs '->'")
    left = [p.strip() for p in lhs.split(",")]
    right = [p.strip() for p in rhs.split(",")]
    if len(left) < 2:
        raise ValueError(f"line {lineno}: delta lhs needs state and run symbol")
    state, runsym, worksyms = left[0], left[1], tuple(left[2:])
    n = len(worksyms)
    append = ""
    if right and right[-1].startswith("append"):
        quoted = right.pop().split(None, 1)[1].strip()
        if not (quoted.startswith('"') and quoted.endswith('"')):
            raise ValueError(f"line {lineno}: append wants a quoted string")
        append = quoted[1:-1]
    if len(right) != 2 + 2 * n:
        raise ValueError(f"line {lineno}: delta rhs arity mismatch")
    q2 = right[0]
    writes = tuple(right[1:1 + n])
    d_run = right[1 + n]
    dirs = tuple(right[2 + n:2 + 2 * n])
    for d in (d_run,) + dirs:
        if d not in DIRS:
            raise ValueError(f"line {lineno}: bad direction {d!r}")
    return {(state, runsym, worksyms): (q2, writes, d_run, dirs, append)}


# ---------------------------------------------------------------------------
# configurations and stepping

class Configuration:
    __slots__ = ("state", "tapes", "heads", "run", "runhead", "buffer",
                 "cycle", "moves_made", "last_append", "last_move")

    def __init__(self, state, tapes, heads, run, runhead, buffer, cycle,
                 moves_made, last_append="", last_move=None):
        self.state = state
        self.tapes = tuple(tapes)
        self.heads = tuple(heads)
        self.run = tuple(run)
        self.runhead = runhead
        self.buffer = buffer
        self.cycle = cycle
        self.moves_made = moves_made
        self.last_append = last_append
        self.last_move = last_move

    def replace(self, **kw):
        vals = {name: getattr(self, name) for name in self.__slots__}
        vals.update(kw)
        return Configuration(**vals)

    def __eq__(self, other):
        return isinstance(other, Configuration) and all(
            getattr(self, n) == getattr(other, n) for n in self.__slots__)

    def __repr__(self):
        return (f"Configuration(state={self.state}, cycle={self.cycle}, "
                f"run={len(self.run)} moves, buffer={self.buffer!r})")


def initial_configuration(spec: HPMSpec) -> Configuration:
    return Configuration(
        state=spec.start,
        tapes=("",) * spec.worktapes,
        heads=(0,) * spec.worktapes,
        run=(),
        runhead=0,
        buffer="",
        cycle=0,
        moves_made=0,
    )


def run_tape_length(run) -> int:
    return sum(1 + len(m) for _, m in run)


def run_symbol(run, pos: int) -> str:
    for label, move in run:
        if pos == 0:
            return label
        pos -= 1
        if pos < len(move):
            return move[pos]
        pos -= len(move)
    return BLANK


def _leftmost_blank(content: str) -> int:
    i = content.find(BLANK)
    return i if i >= 0 else len(content)


def _write_cell(content: str, pos: int, sym: str) -> str:
    if pos >= len(content):
        if sym == BLANK:
            return content
        content = content + BLANK * (pos - len(content)) + sym
    else:
        content = content[:pos] + sym + content[pos + 1:]
    return content.rstrip(BLANK)


def _move_head(h: int, d: str, limit: int) -> int:
    if d == "L":
        return max(0, h - 1)
    if d == "R":
        return min(h + 1, limit)
    return h


def step(spec: HPMSpec, cfg: Configuration, incoming=()) -> Configuration:
    """One machine cycle: absorb incoming ⊥-moves, apply one transition."""
    run = cfg.run + tuple(incoming)
    run_len = run_tape_length(run)
    runhead = min(cfg.runhead, run_len)
    runsym = run_symbol(run, runhead)
    worksyms = tuple(
        t[h] if h < len(t) else BLANK for t, h in zip(cfg.tapes, cfg.heads))
    key = (cfg.state, runsym, worksyms)
    row = spec.delta.get(key)
    if row is None:
        return cfg.replace(run=run, runhead=runhead, cycle=cfg.cycle + 1,
                           last_append="", last_move=None)
    q2, writes, d_run, dirs, append = row
    tapes = []
    heads = []
    for t, h, w, d in zip(cfg.tapes, cfg.heads, writes, dirs):
        t2 = _write_cell(t, h, w)
        heads.append(_move_head(h, d, _leftmost_blank(t2)))
        tapes.append(t2)
    runhead2 = _move_head(runhead, d_run, run_len)
    buffer = cfg.buffer + append
    moves_made = cfg.moves_made
    last_move = None
    if q2 in spec.move_states:
        last_move = buffer
        run = run + (("T", buffer),)
        buffer = ""
        moves_made += 1
    return Configuration(
        state=q2, tapes=tuple(tapes), heads=tuple(heads), run=run,
        runhead=runhead2, buffer=buffer, cycle=cfg.cycle + 1,
        moves_made=moves_made, last_append=append, last_move=last_move)


def spacecost(cfg: Configuration) -> int:
    """Max count of non-blank cells on any one work tape."""
    return max((sum(1 for c in t if c != BLANK) for t in cfg.tapes), default=0)


# ---------------------------------------------------------------------------
# the stepper contract

class Strategy:
    """Functional stepper: immutable states, feed (the ⊕), step, space."""

    def initial(self):
        raise NotImplementedError

    def feed(self, st, labmoves):
        raise NotImplementedError

    def step(self, st):
        """-> (next state, move string or None)."""
        raise NotImplementedError

    def space(self, st) -> int:
        return 0

    def run_view(self, st):
        raise NotImplementedError


class HPMStrategy(Strategy):
    def __init__(self, spec: HPMSpec):
        self.spec = spec

    def initial(self):
        return initial_configuration(self.spec)

    def feed(self, cfg, labmoves):
        return cfg.replace(run=cfg.run + tuple(labmoves))

    def step(self, cfg):
        nxt = step(self.spec, cfg)
        return nxt, nxt.last_move

    def space(self, cfg):
        return spacecost(cfg)

    def run_view(self, cfg):
        return cfg.run


class ScriptStrategy(Strategy):
    """A pure function of (visible run, cycles since last own move)."""

    def __init__(self, fn, name="script"):
        self.fn = fn
        self.name = name

    def initial(self):
        return ((), 0)

    def feed(self, st, labmoves):
        run, waited = st
        return (run + tuple(labmoves), waited)

    def step(self, st):
        run, waited = st
        mv = self.fn(run, waited)
        if mv is None:
            return (run, waited + 1), None
        return (run + (("T", mv),), 0), mv

    def run_view(self, st):
        return st[0]


class StrategyRunner:
    """Stateful per-cycle driver around a Strategy, for the play harness."""

    def __init__(self, strategy: Strategy):
        self.strategy = strategy
        self.st = strategy.initial()

    def poll(self, visible_run):
        seen = self.strategy.run_view(self.st)
        delta = visible_run[len(seen):]
        if delta:
            self.st = self.strategy.feed(self.st, delta)
        self.st, mv = self.strategy.step(self.st)
        return [mv] if mv is not None else []

    def spacecost(self):
        return self.strategy.space(self.st)


# ---------------------------------------------------------------------------
# metering

class Meter:
    """Per-branch resource records per the amplitude/space/time reading."""

    def __init__(self):
        self.amplitude_events = []   # (cycle, magnitude, background)
        self.spacecosts = []         # (cycle, cells, background)
        self.timecosts = []          # (cycle, elapsed) per own move
        self.backgrounds = []
        self._last_event_cycle = 0

    def record_cycle(self, cycle, run, cells, made, env_moved):
        bg = max([1] + [magnitude(m) for l, m in run if l == "B"])
        self.backgrounds.append(bg)
        self.spacecosts.append((cycle, cells, bg))
        if env_moved:
            self._last_event_cycle = cycle
        for m in made:
            self.amplitude_events.append((cycle, magnitude(m), bg))
            self.timecosts.append((cycle, cycle - self._last_event_cycle))
            self._last_event_cycle = cycle


def meter_report(meter: Meter):
    by_bg_amp = {}
    for _, mag, bg in meter.amplitude_events:
        by_bg_amp[bg] = max(by_bg_amp.get(bg, 0), mag)
    by_bg_space = {}
    for _, cells, bg in meter.spacecosts:
        by_bg_space[bg] = max(by_bg_space.get(bg, 0), cells)
    return {
        "amplitude": by_bg_amp,
        "max_spacecost": max((c for _, c, _ in meter.spacecosts), default=0),
        "spacecost_by_background": by_bg_space,
        "max_timecost": max((t for _, t in meter.timecosts), default=0),
        "backgrounds": list(meter.backgrounds),
    }


def play(runner, env, fuel: int):
    """Interleave env moves (first) and machine cycles for fuel cycles.

    runner: object with poll(visible_run) -> list of moves and spacecost().
    env: callable(visible_run) -> move string or None.
    """
    run = ()
    meter = Meter()
    for cycle in range(fuel):
        mv = env(run)
        env_moved = mv is not None
        if env_moved:
            run = run + (("B", mv),)
        made = runner.poll(run)
        for m in made:
            run = run + (("T", m),)
        meter.record_cycle(cycle, run, runner.spacecost(), made, env_moved)
    return {"run": run, "meter": meter, "truncated_by_fuel": True}


# ---------------------------------------------------------------------------
# sketches

def _track_append(trunc, live, numer_first, numer_len, s, ctx):
    """Advance the buffer-truncation tracker by appended string s."""
    for c in s:
        if not live:
            continue
        if numer_len is None:
            cand = trunc + c
            if is_quasilegal_move_prefix(cand, ctx.addresses):
                trunc = cand
                if c == "#":
                    numer_len = 0
            else:
                live = False
        else:
            if c not in "01" or (numer_len >= 1 and numer_first == "0"):
                live = False
                continue
            if numer_len == 0:
                numer_first = c
            numer_len += 1
            if numer_len <= ctx.threshold:
                trunc = trunc + c
    return trunc, live, numer_first, numer_len


class Sketch:
    """The 8-component compressed machine state.

    Components: (1) state, (2) work-tape contents, (3) work-tape heads,
    (4) run-tape head, (5) moves made, (6) buffer length, (7) string
    appended on the last transition, (8) truncation of the buffer move.
    The tracker fields (prefixed _) carry just enough to keep component
    8 incrementally correct; they are excluded from equality.
    """

    __slots__ = ("state", "tapes", "heads", "runhead", "moves_made",
                 "buffer_len", "last_append", "trunc",
                 "_live", "_numer_first", "_numer_len",
                 "flushed", "flushed_trunc", "flushed_len")

    def __init__(self, state, tapes, heads, runhead, moves_made, buffer_len,
                 last_append, trunc, _live=True, _numer_first=None,
                 _numer_len=None, flushed=False, flushed_trunc=None,
                 flushed_len=0):
        self.state = state
        self.tapes = tuple(tapes)
        self.heads = tuple(heads)
        self.runhead = runhead
        self.moves_made = moves_made
        self.buffer_len = buffer_len
        self.last_append = last_append
        self.trunc = trunc
        self._live = _live
        self._numer_first = _numer_first
        self._numer_len = _numer_len
        self.flushed = flushed
        self.flushed_trunc = flushed_trunc
        self.flushed_len = flushed_len

    def components(self):
        return (self.state, self.tapes, self.heads, self.runhead,
                self.moves_made, self.buffer_len, self.last_append, self.trunc)

    def __eq__(self, other):
        return isinstance(other, Sketch) and self.components() == other.components()

    def __repr__(self):
        return f"Sketch{self.components()!r}"


def initial_sketch(spec: HPMSpec) -> Sketch:
    return Sketch(
        state=spec.start, tapes=("",) * spec.worktapes,
        heads=(0,) * spec.worktapes, runhead=0, moves_made=0,
        buffer_len=0, last_append="", trunc="")


def sketch_of_configuration(cfg: Configuration, ctx: TruncationContext) -> Sketch:
    trunc, live, nf, nl = _track_append("", True, None, None, cfg.buffer, ctx)
    return Sketch(
        state=cfg.state, tapes=cfg.tapes, heads=cfg.heads,
        runhead=cfg.runhead, moves_made=cfg.moves_made,
        buffer_len=len(cfg.buffer), last_append=cfg.last_append,
        trunc=trunc, _live=live, _numer_first=nf, _numer_len=nl)


def history_prefix(history, m: int):
    """history entries before the (m+1)-th 'T' entry."""
    tops = 0
    out = []
    for label, size in history:
        if label == "T":
            if tops == m:
                break
            tops += 1
        out.append((label, size))
    return out


def sketch_advance(spec: HPMSpec, s: Sketch, history, symbol_source,
                   ctx: TruncationContext) -> Sketch:
    """One simulated cycle driven by move sizes instead of move contents.

    history: sequence of (label, size) entries; symbol_source(entry_index,
    label, ordinal, offset) resolves the offset-th symbol (1-based) of the
    ordinal-th same-label move.
    """
    visible = history_prefix(history, s.moves_made)
    p = sum(1 + size for _, size in visible)
    q = s.runhead
    if q >= p:
        runsym = BLANK
    else:
        cum = 0
        runsym = None
        ordinals = {"T": 0, "B": 0}
        for idx, (label, size) in enumerate(visible):
            if q < cum + 1 + size:
                offset = q - cum
                if offset == 0:
                    runsym = label
                else:
                    runsym = symbol_source(idx, label, ordinals[label], offset)
                break
            ordinals[label] += 1
            cum += 1 + size
        assert runsym is not None
    worksyms = tuple(
        t[h] if h < len(t) else BLANK for t, h in zip(s.tapes, s.heads))
    row = spec.delta.get((s.state, runsym, worksyms))
    if row is None:
        return Sketch(
            state=s.state, tapes=s.tapes, heads=s.heads,
            runhead=min(q, p), moves_made=s.moves_made,
            buffer_len=s.buffer_len, last_append="", trunc=s.trunc,
            _live=s._live, _numer_first=s._numer_first,
            _numer_len=s._numer_len)
    q2, writes, d_run, dirs, append = row
    tapes = []
    heads = []
    for t, h, w, d in zip(s.tapes, s.heads, writes, dirs):
        t2 = _write_cell(t, h, w)
        heads.append(_move_head(h, d, _leftmost_blank(t2)))
        tapes.append(t2)
    runhead2 = _move_head(min(q, p), d_run, p)
    buffer_len = s.buffer_len + len(append)
    trunc, live, nf, nl = _track_append(
        s.trunc, s._live, s._numer_first, s._numer_len, append, ctx)
    moves_made = s.moves_made
    flushed = False
    flushed_trunc = None
    flushed_len = 0
    if q2 in spec.move_states:
        flushed = True
        flushed_trunc = trunc
        flushed_len = buffer_len
        moves_made += 1
        buffer_len = 0
        trunc, live, nf, nl = "", True, None, None
    return Sketch(
        state=q2, tapes=tuple(tapes), heads=tuple(heads), runhead=runhead2,
        moves_made=moves_made, buffer_len=buffer_len, last_append=append,
        trunc=trunc, _live=live, _numer_first=nf, _numer_len=nl,
        flushed=flushed, flushed_trunc=flushed_trunc, flushed_len=flushed_len)
