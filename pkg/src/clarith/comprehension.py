"""Bit-assembly transformer.

From a strategy that decides a predicate point by point (solving
"for all chosen y, p(y) or else not-p(y)"), builds a runner that
constructs the whole extension of the predicate below a size bound as
one constant: the machine probes y = c-1 down to 0, skips the leading
false stretch so the result is canonical, and makes a single move #d
with Bit(y, d) true exactly where the premise answered yes.
"""

from __future__ import annotations

import os

from . import formula as fm
from .bounds import BoundExpr
from .game import int_to_numer, numer_value, split_move

FALLBACK_FUEL = 10000


def default_fuel() -> int:
    raw = os.environ.get("CLARITH_FUEL_DEFAULT")
    if raw is None:
        return FALLBACK_FUEL
    return int(raw)


def comprehension_conclusion(p: fm.Formula, y: str, bound: BoundExpr,
                             result_var: str = "d") -> fm.Formula:
    """The game the built runner plays: pick d, sized within the bound,
    whose bits below the bound agree with p everywhere."""
    dv, yv = fm.TVar(result_var), fm.TVar(y)
    bit = fm.Atom("Bit", (yv, dv))
    agree = fm.And(fm.Implies(bit, p), fm.Implies(p, bit))
    body = fm.BlindAll(y, bound, agree)
    return fm.ChoiceEx(result_var, bound, body, kind="size")


class SimulationFault(Exception):
    pass


def _one_verdict(premise, prefix_moves, fuel):
    """Run the premise on a fixed ⊥-prefix until its first move."""
    st = premise.feed(premise.initial(),
                      tuple(("B", m) for m in prefix_moves))
    for _ in range(fuel):
        st, mv = premise.step(st)
        if mv is None:
            continue
        if mv == "0." or mv.startswith("0."):
            return True
        if mv == "1." or mv.startswith("1."):
            return False
        raise SimulationFault(f"verdict move {mv!r} picks no disjunct")
    raise SimulationFault(f"no verdict within {fuel} steps")


class ComprehensionRunner:
    """Play-harness runner for the bit-assembly routine.

    Waits for one constant per expected variable, then performs the
    whole probe loop and answers with the single move #d.  Faults in
    the premise are recorded, not raised; a faulted runner stays silent.
    """

    def __init__(self, premise, p: fm.Formula, y: str, bound: BoundExpr,
                 var_order=None, fuel=None):
        self.premise = premise
        self.p = p
        self.y = y
        self.bound = bound
        if var_order is None:
            var_order = []
            for v in sorted(bound.variables()):
                if v not in var_order:
                    var_order.append(v)
            for v in fm.free_vars(p):
                if v != y and v not in var_order:
                    var_order.append(v)
        self.var_order = list(var_order)
        self.fuel = default_fuel() if fuel is None else fuel
        self.faults = []
        self.done = False

    def _constants(self, visible_run):
        bots = [m for label, m in visible_run if label == "B"]
        if len(bots) < len(self.var_order):
            return None
        env = {}
        for var, move in zip(self.var_order, bots):
            _, numer = split_move(move)
            env[var] = numer_value(numer or "")
        return env

    def _probe(self, env, j):
        others = [v for v in self.var_order if v != self.y]
        prefix = ["#" + int_to_numer(env[v]) for v in others]
        prefix.append("#" + int_to_numer(j))
        return _one_verdict(self.premise, prefix, self.fuel)

    def poll(self, visible_run):
        if self.done:
            return []
        env = self._constants(visible_run)
        if env is None:
            return []
        self.done = True
        c = self.bound.evaluate(env)
        bits = []
        try:
            j = c - 1
            while j >= 0 and not self._probe(env, j):
                j -= 1
            if j >= 0:
                bits.append("1")
                j -= 1
                while j >= 0:
                    bits.append("1" if self._probe(env, j) else "0")
                    j -= 1
        except SimulationFault as exc:
            self.faults.append(str(exc))
            return []
        return ["#" + "".join(bits)]

    def spacecost(self):
        return 0


def build_comprehension_solver(premise, p: fm.Formula, y: str,
                               bound: BoundExpr, **kw) -> ComprehensionRunner:
    return ComprehensionRunner(premise, p, y, bound, **kw)
