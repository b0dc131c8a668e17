"""Space-frugal resimulation wrappers.

The reason wrapper turns a machine into a provident and prudent one: it
keeps only a global history of (label, size) records and replays the
wrapped machine sketch-by-sketch, re-deriving its own past moves through
recursive resimulation instead of storing them.

The unconditional wrapper mimics a machine move for move while the seen
run stays legal, and retires (optionally after one windup move) as soon
as it turns illegitimate.
"""

from __future__ import annotations

from . import formula as fm
from .game import (
    Semiposition,
    TruncationContext,
    first_illegal_index,
    numer_value,
    split_move,
    windup,
)
from .hpm import (
    HPMSpec,
    Sketch,
    history_prefix,
    initial_configuration,
    initial_sketch,
    sketch_advance,
    spacecost,
    step,
)


class FetchError(Exception):
    pass


def h_index(history, m: int) -> int:
    """Number of history entries before the (m+1)-th 'T' entry."""
    return len(history_prefix(history, m))


def update_sketch(spec: HPMSpec, history, s: Sketch, own_bot_moves,
                  ctx: TruncationContext, instrument=None,
                  fetch_cap=200000) -> Sketch:
    """One resimulated cycle; ⊥ symbols come from own_bot_moves, ⊤ symbols
    from recursive fetch_symbol calls."""
    caller_index = h_index(history, s.moves_made)
    if instrument is not None:
        instrument.append(("update", caller_index))

    def source(entry_index, label, ordinal, offset):
        if label == "B":
            return own_bot_moves[ordinal][offset - 1]
        if instrument is not None:
            instrument.append(
                ("update->fetch", caller_index, h_index(history, ordinal)))
        return fetch_symbol(spec, history, ordinal, offset, own_bot_moves,
                            ctx, instrument, fetch_cap)

    return sketch_advance(spec, s, history, source, ctx)


def fetch_symbol(spec: HPMSpec, history, k: int, n: int, own_bot_moves,
                 ctx: TruncationContext, instrument=None,
                 fetch_cap=200000) -> str:
    """The n-th symbol (1-based) of the (k+1)-th 'T' move, by replay."""
    top_sizes = [size for label, size in history if label == "T"]
    if k >= len(top_sizes):
        raise FetchError(f"only {len(top_sizes)} T-moves recorded, asked for {k}")
    if not (1 <= n <= top_sizes[k]):
        raise FetchError(f"offset {n} outside move of size {top_sizes[k]}")
    my_index = h_index(history, k)
    s = initial_sketch(spec)
    for _ in range(fetch_cap):
        if instrument is not None:
            instrument.append(
                ("fetch->update", my_index, h_index(history, s.moves_made)))
        nxt = update_sketch(spec, history, s, own_bot_moves, ctx,
                            instrument, fetch_cap)
        sigma = nxt.last_append
        a, b = s.moves_made, s.buffer_len
        if a == k and b < n <= b + len(sigma):
            return sigma[n - b - 1]
        s = nxt
    raise FetchError("replay did not reproduce the requested symbol")


class ReasonRunner:
    """The history-keeping wrapper machine, as a play-harness runner.

    Waits for the constants that instantiate the formula's free
    variables, then repeatedly resimulates the wrapped machine from its
    initial sketch, restarting whenever a globally new move (its own or
    the environment's) enters the history, and emitting the truncation
    of each globally new move of the wrapped machine.
    """

    def __init__(self, spec: HPMSpec, f, instrument=None):
        self.spec = spec
        self.formula = f
        self.arity = len(fm.free_vars(f))
        self.history = []
        self.own_bots = []
        self.ctx = None
        self.sketch = None
        self.restarts = 0
        self.instrument = instrument
        self.faults = []

    def _recorded_bots(self):
        return sum(1 for label, _ in self.history if label == "B")

    def poll(self, visible_run):
        bots = [m for label, m in visible_run if label == "B"]
        self.own_bots = bots
        if len(bots) < self.arity:
            return []
        if self.ctx is None:
            c_env = {}
            for var, move in zip(fm.free_vars(self.formula), bots):
                _, numer = split_move(move)
                c_env[var] = numer_value(numer or "")
            self.ctx = TruncationContext(self.formula, c_env)
            self.history = [("B", len(m)) for m in bots]
            self.sketch = initial_sketch(self.spec)
            self.restarts += 1
        elif len(bots) > self._recorded_bots():
            for m in bots[self._recorded_bots():]:
                self.history.append(("B", len(m)))
            self.sketch = initial_sketch(self.spec)
            self.restarts += 1
        try:
            nxt = update_sketch(self.spec, self.history, self.sketch,
                                self.own_bots, self.ctx, self.instrument)
        except FetchError as exc:
            self.faults.append(str(exc))
            return []
        tops_recorded = sum(1 for label, _ in self.history if label == "T")
        if nxt.flushed and nxt.moves_made > tops_recorded:
            alpha_trunc = nxt.flushed_trunc
            self.history.append(("T", nxt.flushed_len))
            self.sketch = initial_sketch(self.spec)
            self.restarts += 1
            return [alpha_trunc]
        self.sketch = nxt
        return []

    def spacecost(self):
        return 0


def build_reason_wrapper(spec: HPMSpec, f, instrument=None) -> ReasonRunner:
    if not fm.units(f):
        raise ValueError("wrapper needs a formula with at least one choice operator")
    return ReasonRunner(spec, f, instrument)


class VasaRunner:
    """The retire-on-illegality wrapper, with constants fixed up front."""

    def __init__(self, spec: HPMSpec, f, c_env):
        self.spec = spec
        self.formula = f
        self.c_env = dict(c_env)
        self.cfg = initial_configuration(spec)
        self.retired = False

    def poll(self, visible_run):
        if self.retired:
            return []
        if first_illegal_index(self.formula, self.c_env, visible_run) is not None:
            self.retired = True
            buf = self.cfg.buffer
            tops = tuple(lm for lm in self.cfg.run if lm[0] == "T")
            if not buf:
                return []
            v = Semiposition(tops + (("T", buf),), open_last=True)
            try:
                omega = windup(v, self.formula, self.c_env)
            except ValueError:
                return []
            return [buf + omega]
        delta = visible_run[len(self.cfg.run):]
        if delta:
            self.cfg = self.cfg.replace(run=self.cfg.run + tuple(delta))
        self.cfg = step(self.spec, self.cfg)
        return [self.cfg.last_move] if self.cfg.last_move is not None else []

    def spacecost(self):
        return spacecost(self.cfg)


def build_unconditional_wrapper(spec: HPMSpec, f, c_env) -> VasaRunner:
    if not fm.units(f):
        raise ValueError("wrapper needs a formula with at least one choice operator")
    return VasaRunner(spec, f, c_env)
