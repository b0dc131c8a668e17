"""The synchronizer: organs, bodies, aggregations, Sim, and Main.

Given a solver of F(0) and a solver of F(x) -> F(x'), builds a runner
for the conclusion  x <= b|s| -> F(x).  The bookkeeping follows the
entry/aggregation discipline: simulated premise machines communicate
only through recorded organs, with scales standing for step budgets, so
nothing a simulation learns is ever trusted beyond its replayable part.
"""

from __future__ import annotations

from . import formula as fm
from .bounds import bitsize, statute_limit, unarify
from .game import TruncationContext, int_to_numer, numer_value, prudentize, split_move

DEFAULT_MACHINE_CENSUS = {"r": 1, "g": 1, "q": 2}


# ---------------------------------------------------------------------------
# organs and bodies

def organ(payload, scale):
    if scale < 1:
        raise ValueError("organ scale must be >= 1")
    return (tuple(payload), int(scale))


def body_relate(b1, b2):
    b1, b2 = tuple(b1), tuple(b2)
    ext = len(b1) >= len(b2) and b1[: len(b2)] == b2
    res = len(b1) <= len(b2) and b2[: len(b1)] == b1
    return {"extension": ext, "restriction": res, "consistent": ext or res}


def body_project(b, parity):
    if parity == "odd":
        return tuple(b[i] for i in range(0, len(b), 2))
    if parity == "even":
        return tuple(b[i] for i in range(1, len(b), 2))
    raise ValueError(f"parity must be odd or even, got {parity!r}")


def body_run(b):
    """Flatten payloads into a run, odd positions ⊥, even positions ⊤."""
    out = []
    for i, (payload, _) in enumerate(b):
        label = "B" if i % 2 == 0 else "T"
        out.extend((label, m) for m in payload)
    return tuple(out)


# ---------------------------------------------------------------------------
# Sim

class SimContractError(Exception):
    pass


def check_sim_triple(a, b, n):
    if not b:
        raise SimContractError("right body must be nonempty")
    if n == 0 and a:
        raise SimContractError("left body must be empty when n = 0")


def _sim_stepping(a, b, n, strategy):
    """The replay loop, yielding once per simulated step.

    Returns (final signed organ, max work-tape cells, all signed organs
    in production order, organs fetched from a, organs fetched from b).
    """
    check_sim_triple(a, b, n)
    w = strategy.initial()
    u = 0
    nu, psi = [], []
    ai, bi = 0, 1
    sign, org = "+", b[0]
    svalues = []
    while True:
        payload, p = org
        prefix = "" if n == 0 else ("1." if sign == "+" else "0.")
        w = strategy.feed(w, tuple(("B", prefix + m) for m in payload))
        t = w
        for _ in range(p):
            t, mv = strategy.step(t)
            u = max(u, strategy.space(t))
            if mv is not None:
                if n == 0:
                    nu.append(mv)
                    w = t
                elif mv.startswith("1."):
                    nu.append(mv[2:])
                    w = t
                elif mv.startswith("0."):
                    psi.append(mv[2:])
                    w = t
                else:
                    w = t  # stray unprefixed move: witnessed, recorded nowhere
            yield
        if nu:
            s = ("+", organ(nu, p))
            svalues.append(s)
            if bi == len(b):
                return s, u, svalues, ai, bi
            bi += 1
            sign, org = "+", b[bi - 1]
            nu = []
        else:
            s = ("-", organ(psi, p))
            svalues.append(s)
            if ai == len(a):
                return s, u, svalues, ai, bi
            ai += 1
            sign, org = "-", a[ai - 1]
            psi = []


def _drain(gen):
    while True:
        try:
            next(gen)
        except StopIteration as fin:
            return fin.value


def sim_full(a, b, n, strategy):
    return _drain(_sim_stepping(a, b, n, strategy))


def sim(a, b, n, strategy):
    """Replay strategy against the adversary the two bodies encode."""
    s, u, _, _, _ = sim_full(a, b, n, strategy)
    return s, u


def sim_views(a, b, n, strategy):
    """bullet = final signed organ; left/right = the interleaved bodies."""
    s, u, svalues, fetched_a, fetched_b = sim_full(a, b, n, strategy)
    negatives = [org for sign, org in svalues if sign == "-"]
    positives = [org for sign, org in svalues if sign == "+"]
    left = []
    for i, neg in enumerate(negatives):
        left.append(neg)
        if i < fetched_a:
            left.append(a[i])
    right = []
    for i in range(fetched_b):
        right.append(b[i])
        if i < len(positives):
            right.append(positives[i])
    return {"bullet": s, "left": tuple(left), "right": tuple(right), "u": u,
            "negatives": len(negatives), "positives": len(positives),
            "fetched_a": fetched_a, "fetched_b": fetched_b}


def is_saturated(a, b, n, strategy):
    s, _ = sim(a, b, n, strategy)
    if s[0] == "-":
        for cut in range(1, len(b)):
            s2, _ = sim(a, b[:cut], n, strategy)
            if s2[0] != "+":
                return False
        return True
    for cut in range(0, len(a)):
        s2, _ = sim(a[:cut], b, n, strategy)
        if s2[0] != "-":
            return False
    return True


# ---------------------------------------------------------------------------
# aggregations

def validate_aggregation(entries, k) -> str:
    """'ok' or the first violated condition among i..vi."""
    if not entries:
        return "violated-i"
    last_index, last_body = entries[-1]
    if last_index != k or len(last_body) % 2 == 0:
        return "violated-i"
    indices = [idx for idx, _ in entries]
    if any(x >= y for x, y in zip(indices, indices[1:])):
        return "violated-ii"
    sizes = [len(body) for _, body in entries]
    seen_odd = False
    for sz in sizes:
        if sz % 2 == 1:
            seen_odd = True
        elif seen_odd:
            return "violated-iii"
    evens = [sz for sz in sizes if sz % 2 == 0]
    if any(x <= y for x, y in zip(evens, evens[1:])):
        return "violated-iv"
    common_odds = [sz for sz in sizes[:-1] if sz % 2 == 1]
    if any(x >= y for x, y in zip(common_odds, common_odds[1:])):
        return "violated-v"
    if any(sz == 0 for sz in sizes):
        return "violated-vi"
    return "ok"


def central_triple(entries, k):
    status = validate_aggregation(entries, k)
    if status != "ok":
        raise ValueError(f"invalid aggregation: {status}")
    for pos, (idx, body) in enumerate(entries):
        if len(body) % 2 == 1:
            n = idx
            right = tuple(body)
            left = ()
            if pos > 0 and entries[pos - 1][0] == n - 1:
                left = tuple(entries[pos - 1][1])
            return left, right, n
    raise AssertionError("aggregation has no odd-size entry")


def master_parts(entries):
    idx, body = entries[-1]
    payload, scale = body[-1]
    return {"body": tuple(body), "organ": body[-1], "payload": payload, "scale": scale}


# ---------------------------------------------------------------------------
# Main

class PrefixedStrategy:
    """A strategy whose initial state has some ⊥-moves already fed."""

    def __init__(self, inner, prefix_moves):
        self.inner = inner
        self.prefix = tuple(("B", m) for m in prefix_moves)

    def initial(self):
        return self.inner.feed(self.inner.initial(), self.prefix)

    def feed(self, st, labmoves):
        return self.inner.feed(st, labmoves)

    def step(self, st):
        return self.inner.step(st)

    def space(self, st):
        return self.inner.space(st)

    def run_view(self, st):
        return self.inner.run_view(st)


class InductionRunner:
    """The synchronizing machine, packaged for the play harness.

    The trace records, per completed iteration, the aggregation as it
    stood when the iteration began plus the classification the
    iteration earned; ranks are computed over these start states.
    """

    def __init__(self, n_strategy, k_strategy, conclusion, machine_census=None,
                 poll_every=1, space_bound=None):
        root = conclusion
        while isinstance(root, (fm.BlindAll, fm.BlindEx)):
            root = root.body
        if not isinstance(root, fm.ChoiceAll) or root.kind != "value":
            raise ValueError("conclusion must start with a value-bounded choice-universal")
        self.conclusion = conclusion
        self.root = root
        self.body_formula = root.body
        self.bound = root.bound
        self.var = root.var
        self.free = fm.free_vars(conclusion)
        self.n_strategy = n_strategy
        self.k_strategy = k_strategy
        self.machine_census = dict(DEFAULT_MACHINE_CENSUS, **(machine_census or {}))
        self.poll_every = max(1, poll_every)
        self.space_bound = space_bound
        self.trace = []
        self.faults = []
        self.run = ()
        self._out = []
        self._gen = self._main()
        self._done = False
        self._diag_base = None

    # -- harness protocol --------------------------------------------------

    def poll(self, visible_run):
        self.run = visible_run
        if self._done:
            return []
        self._out = []
        try:
            next(self._gen)
        except StopIteration:
            self._done = True
        return self._out

    def spacecost(self):
        return 0

    # -- plumbing ------------------------------------------------------------

    def _bots(self):
        return [m for label, m in self.run if label == "B"]

    def _env_consequent_moves(self):
        """Environment moves inside the consequent, beyond the constants."""
        out = []
        for m in self._bots()[len(self.free) + 1:]:
            if m.startswith("1."):
                out.append(m[2:])
        return out

    def _strategy_for(self, n, c_moves):
        if n == 0:
            return PrefixedStrategy(self.n_strategy, c_moves)
        pre = list(c_moves) + ["#" + int_to_numer(n - 1)]
        return PrefixedStrategy(self.k_strategy, pre)

    @staticmethod
    def _master_q(entries):
        body = entries[-1][1]
        return sum(len(payload) for payload, _ in body_project(tuple(body), "odd"))

    def _record(self, start_entries, u, classification, k):
        master = master_parts(start_entries)
        self.trace.append({
            "entries": [(idx, tuple(body)) for idx, body in start_entries],
            "U": u,
            "classification": classification,
            "master_scale": master["scale"],
            "master_payload_moves": len(master["payload"]),
            "master_body_size": len(master["body"]),
            "validity": validate_aggregation(start_entries, k),
            "k": k,
        })

    # -- the generator -------------------------------------------------------

    def _main(self):
        while len(self._bots()) < len(self.free) + 1:
            yield
        bots = self._bots()
        c_env = {}
        for var, move in zip(self.free, bots):
            _, numer = split_move(move)
            c_env[var] = numer_value(numer or "")
        _, k_numer = split_move(bots[len(self.free)])
        k = numer_value(k_numer or "")
        limit = self.bound.evaluate(c_env)
        if k > limit:
            return  # the antecedent fails; an empty T-run wins
        c_moves = ["#" + int_to_numer(c_env[v]) for v in self.free]

        game_env = dict(c_env)
        game_env[self.var] = k
        ctx = TruncationContext(self.body_formula, game_env)
        census = fm.choice_census(self.body_formula)
        agg = fm.aggregate_bounds(self.body_formula)
        ell = bitsize(max([k] + list(c_env.values()), default=0))
        statute_params = {
            "r": self.machine_census["r"],
            "g": self.machine_census["g"],
            "q": self.machine_census["q"],
            "e": census["e"],
            "v": len([v for v in fm.free_vars(self.body_formula) if v != self.var]),
            "h": census["h"],
            "G": agg["G"],
        }
        self._diag_base = {
            "ell": ell, "census": census, "agg": agg,
            "statute_params": statute_params, "k": k,
            "f_induction": unarify(self.bound),
        }

        if k == 0:
            yield from self._replay_zero(c_moves)
            return

        entries = [[k, [organ((), 1)]]]
        u_total = 0

        def absorb_new_move():
            theta = self._env_consequent_moves()[self._master_q(entries)]
            theta_p = prudentize(theta, ctx.threshold)
            _, body = entries[-1]
            payload, _ = body[-1]
            body[-1] = organ(payload + (theta_p,), 1)

        def restart():
            del entries[:-1]

        while True:
            start = [(idx, tuple(body)) for idx, body in entries]
            left, right, n = central_triple(start, k)
            strategy = self._strategy_for(n, c_moves)
            gen = _sim_stepping(body_project(left, "even"),
                                body_project(right, "odd"), n, strategy)
            result = None
            interrupted = False
            steps = 0
            while result is None and not interrupted:
                try:
                    next(gen)
                except StopIteration as fin:
                    result = fin.value
                    break
                steps += 1
                if steps % self.poll_every == 0:
                    yield
                    if len(self._env_consequent_moves()) > self._master_q(entries):
                        interrupted = True
            if interrupted:
                absorb_new_move()
                u_total = 0
                restart()
                self._record(start, u_total, "restarting(new-move)", k)
                continue
            s, u, _, _, _ = result
            u_total = max(u, u_total)
            sign, (omega, scale) = s
            if sign == "+":
                if n < k:
                    pos = next(i for i, (idx, _) in enumerate(entries) if idx == n)
                    entries[pos][1].append(organ(omega, scale))
                    size_n = len(entries[pos][1])
                    entries[:] = [e for e in entries
                                  if e[0] >= n or len(e[1]) > size_n]
                    self._record(start, u_total, "repeating(2.1.1)", k)
                else:
                    entries[-1][1].append(organ(omega, scale))
                    entries[-1][1].append(organ((), scale))
                    for m in omega:
                        self._out.append("1." + m)
                    self._record(start, u_total, "locking(2.1.2)", k)
            else:
                if n > 0:
                    pos = next(i for i, (idx, _) in enumerate(entries) if idx == n)
                    if pos > 0 and entries[pos - 1][0] == n - 1:
                        entries[pos - 1][1].append(organ(omega, scale))
                        tsize = len(entries[pos - 1][1])
                    else:
                        entries.insert(pos, [n - 1, [organ(omega, scale)]])
                        tsize = 1
                    entries[:] = [e for i, e in enumerate(entries)
                                  if i == len(entries) - 1 or e[0] < n
                                  or len(e[1]) > tsize]
                    self._record(start, u_total, "repeating(2.2.1)", k)
                else:
                    v = master_parts(start)["scale"]
                    threshold = statute_limit(ell, u_total, statute_params)
                    if v < threshold:
                        _, body = entries[-1]
                        payload, sc = body[-1]
                        body[-1] = organ(payload, sc * 2)
                        u_total = 0
                        restart()
                        self._record(start, u_total, "restarting(2.2.2.1)", k)
                    else:
                        while len(self._env_consequent_moves()) <= self._master_q(entries):
                            yield
                        absorb_new_move()
                        u_total = 0
                        restart()
                        self._record(start, u_total, "restarting(2.2.2.2)", k)

    def _replay_zero(self, c_moves):
        strategy = PrefixedStrategy(self.n_strategy, c_moves)
        st = strategy.initial()
        fed = 0
        while True:
            env_moves = self._env_consequent_moves()
            if len(env_moves) > fed:
                st = strategy.feed(st, tuple(("B", m) for m in env_moves[fed:]))
                fed = len(env_moves)
            st, mv = strategy.step(st)
            if mv is not None:
                self._out.append("1." + mv)
            yield


def build_induction_solver(n_strategy, k_strategy, conclusion, **kw) -> InductionRunner:
    return InductionRunner(n_strategy, k_strategy, conclusion, **kw)


# ---------------------------------------------------------------------------
# diagnostics

def rank_base(ell, census, agg, statute_params, space_bound=None,
              f_induction=None):
    """The digit base for iteration ranks.

    f_induction caps the induction variable, so every index digit
    stays below the base; without it the body's subaggregate is used.
    """
    g_of_ell = agg["G"](ell)
    s_of = space_bound(g_of_ell) if space_bound is not None else 0
    limit = statute_limit(ell, s_of, statute_params)
    d = 2 * census["e_top"] + 1
    f = f_induction if f_induction is not None else agg["f"]
    return max(bitsize(limit), f(ell), d, census["e_bot"]) + 1


def iteration_rank(record, base, census):
    """Weighted digit sum over the aggregation's shape."""
    d = 2 * census["e_top"] + 1
    k = record["k"]
    digits = [0] * (d + 4)
    for idx, body in record["entries"][:-1]:
        j = len(body)
        if j > d:
            continue
        digits[j] = idx + 1 if j % 2 == 0 else k - idx
    digits[d + 1] = bitsize(record["master_scale"])
    digits[d + 2] = record["master_payload_moves"]
    digits[d + 3] = record["master_body_size"]
    return sum(c * base ** j for j, c in enumerate(digits))


def diagnostics(runner: InductionRunner):
    """Per-iteration ranks, classifications, validity, and birthtimes."""
    if not runner.trace:
        return {"iterations": 0, "ranks": [], "classifications": [],
                "validity": [], "max_entry_size": 0, "birthtimes": {},
                "locking": [], "rank_base": None}
    base_info = runner._diag_base
    base = rank_base(base_info["ell"], base_info["census"], base_info["agg"],
                     base_info["statute_params"], runner.space_bound,
                     base_info["f_induction"])
    ranks = [iteration_rank(rec, base, base_info["census"])
             for rec in runner.trace]
    classifications = [rec["classification"] for rec in runner.trace]
    validity = [rec["validity"] for rec in runner.trace]
    max_entry = max(len(body) for rec in runner.trace
                    for _, body in rec["entries"])
    birthtimes = {}
    for i, rec in enumerate(runner.trace):
        for idx, _ in rec["entries"]:
            birthtimes.setdefault(idx, i)
    locking = [i for i, c in enumerate(classifications) if c.startswith("locking")]
    return {
        "iterations": len(runner.trace),
        "ranks": ranks,
        "rank_base": base,
        "classifications": classifications,
        "validity": validity,
        "max_entry_size": max_entry,
        "birthtimes": birthtimes,
        "locking": locking,
    }
