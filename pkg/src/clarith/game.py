"""Moves, runs, legality, winning, and run surgery.

A move is a plain string: an address made of "0."/"1." tokens, then
optionally '#' followed by a binary numer.  A labmove is a (label, move)
pair with label 'T' or 'B'.  A run is a tuple of labmoves.
"""

from __future__ import annotations

from . import formula as fm
from .bounds import bitsize


class IllegalMove(Exception):
    def __init__(self, index, message):
        super().__init__(f"move {index}: {message}")
        self.index = index


# ---------------------------------------------------------------------------
# move anatomy

def numer_and_magnitude(m: str):
    """Numer (suffix after the last '#', if binary) and its length."""
    i = m.rfind("#")
    if i >= 0 and all(c in "01" for c in m[i + 1:]):
        numer = m[i + 1:]
        return numer, len(numer)
    return "", 0


def split_move(m: str):
    """(address, numer) for a clean choice move, else (address-prefix, None)."""
    addr_len = 0
    while m.startswith(("0.", "1."), addr_len):
        addr_len += 2
    addr = m[:addr_len]
    rest = m[addr_len:]
    if rest.startswith("#") and all(c in "01" for c in rest[1:]):
        return addr, rest[1:]
    return addr, None


def numer_value(numer: str) -> int:
    return int(numer, 2) if numer else 0


def int_to_numer(n: int) -> str:
    """Canonical numer: empty string for 0, no leading zeros otherwise."""
    return format(n, "b") if n > 0 else ""


def is_canonical_numer(numer: str) -> bool:
    return numer in ("", "0") or (numer.startswith("1") and all(c in "01" for c in numer))


def magnitude(m: str) -> int:
    return numer_and_magnitude(m)[1]


# ---------------------------------------------------------------------------
# projections

def project(run, kind):
    if kind == "top":
        return tuple(lm for lm in run if lm[0] == "T")
    if kind == "bot":
        return tuple(lm for lm in run if lm[0] == "B")
    if kind == "negate":
        return tuple(("B" if l == "T" else "T", m) for l, m in run)
    if kind == "sub0":
        return tuple((l, m[2:]) for l, m in run if m.startswith("0."))
    if kind == "sub1":
        return tuple((l, m[2:]) for l, m in run if m.startswith("1."))
    raise ValueError(f"unknown projection {kind!r}")


# ---------------------------------------------------------------------------
# evolving game positions

class GamePosition:
    """A formula with some choice quantifiers already resolved."""

    def __init__(self, tree, env):
        self.tree = tree
        self.env = dict(env)

    @classmethod
    def start(cls, f, c_env):
        missing = [v for v in fm.free_vars(f) if v not in c_env]
        if missing:
            raise KeyError(f"free variables without constants: {missing}")
        return cls(f, c_env)

    def apply(self, label, move, index=0):
        addr, numer = split_move(move)
        if numer is None or addr + "#" + numer != move:
            raise IllegalMove(index, f"not a choice move: {move!r}")
        if not is_canonical_numer(numer):
            raise IllegalMove(index, f"non-canonical numer in {move!r}")
        tokens = [addr[i:i + 2] for i in range(0, len(addr), 2)]
        new_tree, var, kind, bound = self._resolve(self.tree, tokens, True, label, move, index)
        env = dict(self.env)
        env[var] = numer_value(numer)
        pos = GamePosition(new_tree, env)
        return pos

    def _resolve(self, node, tokens, pos, label, move, index):
        if isinstance(node, (fm.ChoiceAll, fm.ChoiceEx)):
            if tokens:
                raise IllegalMove(index, f"address descends into unresolved quantifier: {move!r}")
            is_ex = isinstance(node, fm.ChoiceEx)
            mover = "T" if (is_ex == pos) else "B"
            if mover != label:
                raise IllegalMove(index, f"{label} may not resolve this quantifier: {move!r}")
            cond = fm.ChosenCond(node.var, node.bound, node.kind)
            wrap = fm.And if is_ex else fm.Implies
            return wrap(cond, node.body), node.var, node.kind, node.bound
        if isinstance(node, fm.Not):
            new, *rest = self._resolve(node.body, tokens, not pos, label, move, index)
            return (fm.Not(new), *rest)
        if isinstance(node, (fm.BlindAll, fm.BlindEx)):
            new, *rest = self._resolve(node.body, tokens, pos, label, move, index)
            return (type(node)(node.var, node.bound, new), *rest)
        if isinstance(node, (fm.And, fm.Or, fm.Implies)):
            if not tokens:
                raise IllegalMove(index, f"address stops at a connective: {move!r}")
            tok, rest_tokens = tokens[0], tokens[1:]
            if tok == "0.":
                sub_pos = not pos if isinstance(node, fm.Implies) else pos
                new, *rest = self._resolve(node.left, rest_tokens, sub_pos, label, move, index)
                return (type(node)(new, node.right), *rest)
            new, *rest = self._resolve(node.right, rest_tokens, pos, label, move, index)
            return (type(node)(node.left, new), *rest)
        raise IllegalMove(index, f"address leads into an atom: {move!r}")


class LegalityResult:
    def __init__(self, kind, index=None):
        self.kind = kind
        self.index = index

    def __repr__(self):
        if self.kind == "illegal-at-index":
            return f"LegalityResult(illegal-at-index, {self.index})"
        return f"LegalityResult({self.kind})"

    def __eq__(self, other):
        if isinstance(other, str):
            return self.kind == other
        return isinstance(other, LegalityResult) and (self.kind, self.index) == (other.kind, other.index)


def first_illegal_index(f, c_env, run):
    """Index of the first illegal move, or None if the run is legal."""
    pos = GamePosition.start(f, c_env)
    for i, (label, move) in enumerate(run):
        try:
            pos = pos.apply(label, move, i)
        except IllegalMove:
            return i
    return None


def is_quasilegal(f, run, player):
    """Whether the player's moves in run embed into some legal run of f."""
    us = fm.units(f)
    by_addr = {u.address: u for u in us}
    own = [m for l, m in run if l == player]
    seen = {}
    for i, m in enumerate(own):
        addr, numer = split_move(m)
        if numer is None or addr + "#" + numer != m or not is_canonical_numer(numer):
            return False
        u = by_addr.get(addr)
        if u is None or u.mover != player or addr in seen:
            return False
        seen[addr] = i
    # an ancestor unit resolved by the same player must come first
    for addr, i in seen.items():
        for other, j in seen.items():
            if other != addr and addr.startswith(other) and j > i:
                return False
    return True


def legal_status(f, c_env, run):
    """Classify run as legal, T-quasilegal, B-quasilegal or illegal-at-index."""
    bad = first_illegal_index(f, c_env, run)
    if bad is None:
        return LegalityResult("legal")
    if is_quasilegal(f, run, "T"):
        return LegalityResult("T-quasilegal")
    if is_quasilegal(f, run, "B"):
        return LegalityResult("B-quasilegal")
    return LegalityResult("illegal-at-index", bad)


# ---------------------------------------------------------------------------
# winning

_BUILTIN_ATOMS = {
    "=": lambda a: a[0] == a[1],
    "<=": lambda a: a[0] <= a[1],
    "<": lambda a: a[0] < a[1],
    "Bit": lambda a: (a[1] >> a[0]) & 1 == 1,
}


def wins(f, c_env, run, atoms=None):
    """Winner 'T' or 'B' of a finished legal run."""
    pos = GamePosition.start(f, c_env)
    for i, (label, move) in enumerate(run):
        pos = pos.apply(label, move, i)
    return "T" if evaluate(pos.tree, pos.env, atoms) else "B"


def evaluate(node, env, atoms=None):
    """Truth of a position's formula; unresolved choices favor their owner."""
    if isinstance(node, fm.Atom):
        args = tuple(fm.eval_term(t, env) for t in node.args)
        if node.name in _BUILTIN_ATOMS:
            return _BUILTIN_ATOMS[node.name](args)
        if atoms is None:
            raise KeyError(f"no evaluator for atom {node.name!r}")
        return bool(atoms(node.name, args))
    if isinstance(node, fm.ChosenCond):
        limit = node.bound.evaluate(env)
        val = env[node.var]
        measured = bitsize(val) if node.kind == "size" else val
        return measured <= limit
    if isinstance(node, fm.Not):
        return not evaluate(node.body, env, atoms)
    if isinstance(node, fm.And):
        return evaluate(node.left, env, atoms) and evaluate(node.right, env, atoms)
    if isinstance(node, fm.Or):
        return evaluate(node.left, env, atoms) or evaluate(node.right, env, atoms)
    if isinstance(node, fm.Implies):
        return (not evaluate(node.left, env, atoms)) or evaluate(node.right, env, atoms)
    if isinstance(node, fm.ChoiceAll):
        return True
    if isinstance(node, fm.ChoiceEx):
        return False
    if isinstance(node, fm.BlindAll):
        limit = node.bound.evaluate(env)
        return all(evaluate(node.body, dict(env, **{node.var: w}), atoms) for w in range(limit))
    if isinstance(node, fm.BlindEx):
        limit = node.bound.evaluate(env)
        return any(evaluate(node.body, dict(env, **{node.var: w}), atoms) for w in range(limit))
    raise TypeError(f"not a formula: {node!r}")


# ---------------------------------------------------------------------------
# prudentization / truncation

class TruncationContext:
    """Quasilegal move shapes and the prudence threshold of a game."""

    def __init__(self, f, c_env):
        self.formula = f
        self.c_env = dict(c_env)
        self.units = fm.units(f)
        self.addresses = tuple(u.address for u in self.units)
        agg = fm.aggregate_bounds(f)
        top = max(self.c_env.values(), default=0)
        self.threshold = agg["G"](bitsize(top))

    def addresses_for(self, player):
        return tuple(u.address for u in self.units if u.mover == player)


def prudentize(m: str, threshold: int) -> str:
    """Trim the numer to at most threshold bits."""
    i = m.rfind("#")
    if i < 0 or not all(c in "01" for c in m[i + 1:]):
        return m
    numer = m[i + 1:]
    if len(numer) <= threshold:
        return m
    return m[: i + 1] + numer[:threshold]


def is_quasilegal_move_prefix(s: str, addresses) -> bool:
    """Whether s is a prefix of some string addr + '#' + canonical numer."""
    for addr in addresses:
        full = addr + "#"
        if full.startswith(s):
            return True
        if s.startswith(full):
            rest = s[len(full):]
            if rest == "" or rest == "0" or (rest.startswith("1") and all(c in "01" for c in rest)):
                return True
    return False


def truncate(m: str, ctx: TruncationContext) -> str:
    """Prudentization of the longest quasilegal-move prefix of m."""
    for cut in range(len(m), -1, -1):
        if is_quasilegal_move_prefix(m[:cut], ctx.addresses):
            return prudentize(m[:cut], ctx.threshold)
    return ""


# ---------------------------------------------------------------------------
# semipositions and windups

class Semiposition:
    """Labeled strings, the last of which may be open (incomplete)."""

    def __init__(self, pairs, open_last=False):
        self.pairs = tuple(pairs)
        self.open_last = bool(open_last) and bool(self.pairs)

    def __repr__(self):
        tail = " open" if self.open_last else ""
        return f"Semiposition({list(self.pairs)}{tail})"


def _completion_candidates(last_string, addresses):
    """Full moves some extension of last_string could spell."""
    out = []
    for addr in addresses:
        full = addr + "#"
        if full.startswith(last_string):
            out.append(full)
    addr, numer = split_move(last_string)
    if numer is not None and addr + "#" + numer == last_string and is_canonical_numer(numer):
        out.append(last_string)
    return out


def analyze_semiposition(s: Semiposition, f, c_env):
    """complete?, legitimate?, quasilegitimate?, compression."""
    ctx = TruncationContext(f, c_env)

    def spells_ok(run, check):
        return check(run)

    def legal_check(run):
        return first_illegal_index(f, c_env, run) is None

    def quasi_check(run):
        return is_quasilegal(f, run, "T") and is_quasilegal(f, run, "B")

    def exists_completion(check):
        if not s.open_last:
            return spells_ok(s.pairs, check)
        head = s.pairs[:-1]
        label, w = s.pairs[-1]
        for m in _completion_candidates(w, ctx.addresses):
            if spells_ok(head + ((label, m),), check):
                return True
        return False

    compression = []
    for i, (label, m) in enumerate(s.pairs):
        open_here = s.open_last and i == len(s.pairs) - 1
        j = m.rfind("#")
        if j >= 0 and all(c in "01" for c in m[j + 1:]):
            m = m[: j + 1] + "*"
        compression.append((label, m + ("..." if open_here else "")))

    return {
        "complete": not s.open_last,
        "legitimate": exists_completion(legal_check),
        "quasilegitimate": exists_completion(quasi_check),
        "compression": tuple(compression),
    }


_WINDUP_ORDER = {"#": 0, "0": 1, "1": 2, ".": 3}


def _lex_key(s):
    return tuple(_WINDUP_ORDER[c] for c in s)


def windup(v: Semiposition, f, c_env) -> str:
    """Smallest string closing v's open buffer into a T-quasilegal position."""
    if not v.open_last:
        raise ValueError("windup needs an incomplete semiposition")
    if any(label != "T" for label, _ in v.pairs):
        raise ValueError("windup is defined for all-T semipositions")
    ctx = TruncationContext(f, c_env)
    head = v.pairs[:-1]
    _, buf = v.pairs[-1]

    candidates = []
    for m in _completion_candidates(buf, ctx.addresses):
        run = head + (("T", m),)
        if is_quasilegal(f, run, "T"):
            candidates.append(m[len(buf):])
    if not candidates:
        raise ValueError("semiposition is not quasilegitimate")
    return min(candidates, key=_lex_key)


def windup_oracle(v: Semiposition, f, c_env, max_len=None) -> str:
    """Brute-force reference: try every string up to max_len in lex order."""
    head = v.pairs[:-1]
    _, buf = v.pairs[-1]
    if max_len is None:
        max_len = fm.choice_census(f)["h"] + 2
    alphabet = sorted(_WINDUP_ORDER, key=_WINDUP_ORDER.get)

    best = None
    stack = [""]
    # depth-first in lex order; the first hit is the smallest because a
    # prefix is tried before any of its extensions
    while stack:
        cur = stack.pop()
        run = head + (("T", buf + cur),)
        if is_quasilegal(f, run, "T"):
            return cur
        if len(cur) < max_len:
            for c in reversed(alphabet):
                stack.append(cur + c)
    raise ValueError("no windup found within the probe length")


# ---------------------------------------------------------------------------
# delays

def is_p_delay(delta, omega) -> bool:
    """Whether delta postpones T's moves of omega without reordering either side."""
    if project(delta, "top") != project(omega, "top"):
        return False
    if project(delta, "bot") != project(omega, "bot"):
        return False

    def positions(run):
        tops, bots = [], []
        for i, (label, _) in enumerate(run):
            (tops if label == "T" else bots).append(i)
        return tops, bots

    tops_o, bots_o = positions(omega)
    tops_d, bots_d = positions(delta)
    for bi, bo in enumerate(bots_o):
        for ti, to in enumerate(tops_o):
            if bo < to and not (bots_d[bi] < tops_d[ti]):
                return False
    return True


# ---------------------------------------------------------------------------
# run text format

def parse_run(text: str):
    run = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#!"):
            continue
        parts = line.split(None, 1)
        label = parts[0]
        if label not in ("T", "B"):
            raise ValueError(f"line {lineno}: label must be T or B")
        move = parts[1] if len(parts) > 1 else ""
        run.append((label, move))
    return tuple(run)


def format_run(run) -> str:
    return "".join(f"{label} {move}\n" for label, move in run)
