"""Command-line harness: validate artifacts, run matches, apply the
transformers, and run brute-force oracle suites.

Exit codes: 0 success, 1 file or input problem, 2 usage error,
3 oracle property violation (printing the first counterexample).
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from . import comprehension as cp
from . import formula as fm
from . import game, hpm, induction, wrappers, zoo
from .bounds import Nat, parse_bound


class FileProblem(Exception):
    pass


def _read(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise FileProblem(f"{path}: {exc.strerror or exc}") from exc


def _load_formula(path):
    try:
        return fm.parse_formula(_read(path))
    except (ValueError, SyntaxError) as exc:
        raise FileProblem(f"{path}: {exc}") from exc


def _load_machine(path):
    try:
        return hpm.parse_hpm(_read(path))
    except (ValueError, SyntaxError) as exc:
        raise FileProblem(f"{path}: {exc}") from exc


def _default_fuel():
    return int(os.environ.get("CLARITH_FUEL_DEFAULT", "2000"))


def _parse_consts(text):
    env = {}
    if not text:
        return env
    for part in text.split(","):
        name, _, val = part.partition("=")
        if not _ or not name.strip():
            raise FileProblem(f"bad assignment {part!r}, want name=value")
        env[name.strip()] = int(val)
    return env


def _make_env(spec_text):
    """Environment callable from an env spec.

    "repl" prompts on stdin; "x=5,k=3" plays the constants #<numer> in
    order; anything else is a script file whose lines are moves, each
    optionally prefixed "@t " to wait until t ⊤-moves are visible.
    """
    if spec_text is None:
        return lambda run: None
    if spec_text == "repl":
        def env_repl(run):
            try:
                line = input("B> ").strip()
            except EOFError:
                return None
            return line or None
        return env_repl
    if "=" in spec_text and not os.path.exists(spec_text):
        consts = _parse_consts(spec_text)
        moves = ["#" + game.int_to_numer(v) for v in consts.values()]
        return _script_env([(0, m) for m in moves])
    lines = []
    for raw in _read(spec_text).splitlines():
        line = raw.strip()
        if not line or line.startswith("#!"):
            continue
        after = 0
        if line.startswith("@"):
            head, _, line = line.partition(" ")
            after = int(head[1:])
            line = line.strip()
        lines.append((after, line))
    return _script_env(lines)


def _script_env(entries):
    pending = list(entries)

    def env(run):
        tops = sum(1 for label, _ in run if label == "T")
        if pending and pending[0][0] <= tops:
            return pending.pop(0)[1]
        return None

    return env


def _print_run(run):
    for label, move in run:
        print(f"{label} {move}")


def _winner(f, run):
    free = fm.free_vars(f)
    bots = [m for label, m in run if label == "B"]
    if len(bots) < len(free):
        return "T (environment never instantiated the game)"
    c_env = {}
    for var, move in zip(free, bots):
        _, numer = game.split_move(move)
        c_env[var] = game.numer_value(numer or "")
    tail = []
    skipped = 0
    for label, move in run:
        if label == "B" and skipped < len(free):
            skipped += 1
            continue
        tail.append((label, move))
    tail = tuple(tail)
    if game.first_illegal_index(f, c_env, tail) is not None:
        bad = game.first_illegal_index(f, c_env, tail)
        label = tail[bad][0]
        return f"{'B' if label == 'T' else 'T'} (first illegal move by {label})"
    return game.wins(f, c_env, tail)


def _play_and_report(runner, f, env, fuel, trace_path=None, trace_rows=None):
    out = hpm.play(runner, env, fuel)
    _print_run(out["run"])
    try:
        print("winner:", _winner(f, out["run"]))
    except KeyError as exc:
        print(f"winner: undecided (no evaluator for atom {exc})")
    report = hpm.meter_report(out["meter"])
    print("meter:", json.dumps({k: v for k, v in report.items()
                                if k != "backgrounds"}))
    if trace_path and trace_rows is not None:
        with open(trace_path, "w", encoding="utf-8") as fh:
            for row in trace_rows():
                fh.write(json.dumps(row) + "\n")
        print(f"trace written to {trace_path}")
    return out


# ---------------------------------------------------------------------------
# subcommands

def cmd_fmt(args):
    f = _load_formula(args.file)
    census = fm.choice_census(f)
    agg = fm.aggregate_bounds(f)
    print("formula:", fm.to_text(f))
    print("free variables:", " ".join(fm.free_vars(f)) or "(none)")
    for key in ("e_top", "e_bot", "e", "D", "h", "v"):
        print(f"{key}: {census[key]}")
    samples = list(range(0, 9))
    print("subaggregate f:", " ".join(f"{z}->{agg['f'](z)}" for z in samples))
    print("superaggregate G:", " ".join(f"{z}->{agg['G'](z)}" for z in samples))
    identity = all(agg["G"](z) == z for z in samples)
    print("G is identity on 0..8:", "yes" if identity else "no")
    return 0


def cmd_play(args):
    spec = _load_machine(args.machine)
    f = _load_formula(args.formula)
    runner = hpm.StrategyRunner(hpm.HPMStrategy(spec))
    env = _make_env(args.env)
    _play_and_report(runner, f, env, args.fuel or _default_fuel())
    return 0


def cmd_transform(args):
    fuel = args.fuel or _default_fuel()
    if args.kind == "reason":
        spec = _load_machine(args.machine)
        f = _load_formula(args.formula)
        runner = wrappers.build_reason_wrapper(spec, f)
        print(f"reason wrapper built over {args.machine}")
        if args.play:
            _play_and_report(runner, f, _make_env(args.env), fuel)
            if runner.faults:
                print("faults:", *runner.faults, sep="\n  ")
        return 0
    if args.kind == "vasa":
        spec = _load_machine(args.machine)
        f = _load_formula(args.formula)
        c_env = _parse_consts(args.consts)
        runner = wrappers.build_unconditional_wrapper(spec, f, c_env)
        print(f"unconditional wrapper built over {args.machine}")
        if args.play:
            _play_and_report(runner, f, _make_env(args.env), fuel)
        return 0
    if args.kind == "compr":
        premise = hpm.HPMStrategy(_load_machine(args.premise))
        p = _load_formula(args.p)
        bound = parse_bound(args.bound)
        runner = cp.build_comprehension_solver(premise, p, args.y, bound)
        conclusion = cp.comprehension_conclusion(p, args.y, bound)
        print("conclusion:", fm.to_text(conclusion))
        if args.play:
            _play_and_report(runner, conclusion, _make_env(args.env), fuel)
            if runner.faults:
                print("faults:", *runner.faults, sep="\n  ")
        return 0
    if args.kind == "induct":
        n_strat = hpm.HPMStrategy(_load_machine(args.n))
        k_strat = hpm.HPMStrategy(_load_machine(args.k))
        f = _load_formula(args.formula)
        runner = induction.build_induction_solver(n_strat, k_strat, f)
        print("induction synchronizer built")
        if args.play:
            def rows():
                diag = induction.diagnostics(runner)
                for i, rec in enumerate(runner.trace):
                    yield {
                        "iteration": i,
                        "classification": rec["classification"],
                        "entries": [[idx, len(body)]
                                    for idx, body in rec["entries"]],
                        "master_scale": rec["master_scale"],
                        "U": rec["U"],
                        "validity": rec["validity"],
                        "rank": diag["ranks"][i],
                        "rank_base": diag["rank_base"],
                    }
            _play_and_report(runner, f, _make_env(args.env), fuel,
                             args.trace, rows)
        return 0
    raise AssertionError(args.kind)


def cmd_meter(args):
    run = game.parse_run(_read(args.trace))
    meter = hpm.Meter()
    partial = ()
    for cycle, (label, move) in enumerate(run):
        partial = partial + ((label, move),)
        made = [move] if label == "T" else []
        meter.record_cycle(cycle, partial, 0, made, label == "B")
    report = hpm.meter_report(meter)
    for key in ("amplitude", "max_spacecost", "spacecost_by_background",
                "max_timecost"):
        print(f"{key}: {json.dumps(report[key])}")
    return 0


def cmd_diag(args):
    rows = []
    for line in _read(args.trace).splitlines():
        line = line.strip()
        if line:
            rows.append(json.loads(line))
    if not rows:
        print("empty trace")
        return 0
    print(f"{'it':>4} {'rank':>12} {'scale':>7} {'U':>4} classification")
    for row in rows:
        print(f"{row['iteration']:>4} {row['rank']:>12} "
              f"{row['master_scale']:>7} {row['U']:>4} {row['classification']}")
    increasing = all(a["rank"] < b["rank"] for a, b in zip(rows, rows[1:]))
    print("rank strictly increasing:", "yes" if increasing else "NO")
    birth = {}
    for row in rows:
        for idx, _ in row["entries"]:
            birth.setdefault(idx, row["iteration"])
    print("birthtimes:", json.dumps(birth, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# oracle suites

def _suite_fetch(rng, cases):
    f = fm.parse_formula("ada x [|s|] (ade y [|s|] p(x,y))")
    done = 0
    while done < cases:
        spec = zoo.random_machine(rng)
        schedule = zoo.random_schedule(rng, spec)
        scenario = zoo.run_scenario(spec, schedule, 60)
        own = scenario["own_moves"]
        sized = [(k, m) for k, m in enumerate(own) if m]
        if not sized:
            continue
        k, move = sized[rng.randrange(len(sized))]
        n = rng.randint(1, len(move))
        ctx = game.TruncationContext(f, {"s": 5})
        got = wrappers.fetch_symbol(spec, scenario["history"], k, n,
                                    scenario["env_moves"], ctx)
        if got != move[n - 1]:
            return (f"fetch mismatch: k={k} n={n} expected {move[n-1]!r} "
                    f"got {got!r} (moves {own!r}, schedule {schedule!r})")
        done += 1
    return None


def _zoo_formulas():
    texts = [
        "ada x [|s|] (ade y [|s|] p(x,y))",
        "(ade y [|s|] p(y)) v (ada u [|s|] q(u))",
        "ada y [|s|] (p(y) -> ade w [|s|] q(w))",
    ]
    return [fm.parse_formula(t) for t in texts]


def _iter_open_buffers(addresses, max_len):
    """Every string that stays a quasilegal-move prefix, up to max_len."""
    frontier = [""]
    while frontier:
        s = frontier.pop()
        yield s
        if len(s) < max_len:
            for c in "#01.":
                if game.is_quasilegal_move_prefix(s + c, addresses):
                    frontier.append(s + c)


def _suite_windup(rng, cases):
    checked = 0
    for f in _zoo_formulas():
        c_env = {"s": 5}
        ctx = game.TruncationContext(f, c_env)
        heads = [()]
        for addr in ctx.addresses:
            heads.append((("T", addr + "#1"),))
        for head in heads:
            for buf in _iter_open_buffers(ctx.addresses, 6):
                v = game.Semiposition(head + (("T", buf),), open_last=True)
                info = game.analyze_semiposition(v, f, c_env)
                if not info["quasilegitimate"]:
                    continue
                got = game.windup(v, f, c_env)
                want = game.windup_oracle(v, f, c_env)
                if got != want:
                    return (f"windup mismatch on {v!r}: structural {got!r}, "
                            f"search {want!r}")
                checked += 1
    if checked == 0:
        return "windup suite found nothing to check"
    return None


def _suite_sim(rng, cases):
    for _ in range(cases):
        a, b, n = zoo.random_sim_triple(rng)
        cap = rng.randint(1, 3)
        strat = zoo.random_script(rng, cap, 3, n)
        out = induction.sim(a, b, n, strat)
        sign = out[0][0]
        if sign == "-":
            b2 = b + zoo.random_body(rng, max_size=2)
            if induction.sim(a, b2, n, strat) != out:
                return f"extension of B changed a negative-bullet sim: {(a, b, n)!r}"
        elif n != 0:
            a2 = a + zoo.random_body(rng, max_size=2)
            if induction.sim(a2, b, n, strat) != out:
                return f"extension of A changed a positive-bullet sim: {(a, b, n)!r}"
        if sign == "+" and len(b) > cap:
            return f"positive bullet with body larger than the move cap: {(a, b, n)!r}"
    return None


class _TablePremise:
    """Premise strategy answering from a truth table over y."""

    def __init__(self, table):
        self.table = table

    def initial(self):
        return ((), False)

    def feed(self, st, labmoves):
        run, answered = st
        return (run + tuple(labmoves), answered)

    def step(self, st):
        run, answered = st
        bots = [m for label, m in run if label == "B"]
        if answered or not bots:
            return st, None
        _, numer = game.split_move(bots[-1])
        y = game.numer_value(numer or "")
        verdict = "0." if (y < len(self.table) and self.table[y]) else "1."
        return ((run + (("T", verdict),), True)), verdict

    def space(self, st):
        return 0

    def run_view(self, st):
        return st[0]


def _suite_compr(rng, cases):
    for c in range(0, 9):
        for mask in range(2 ** c):
            table = [(mask >> y) & 1 == 1 for y in range(c)]
            err = _one_compr_case(table, c)
            if err:
                return err
    for _ in range(cases):
        c = rng.randint(4, 8)
        table = [rng.random() < 0.5 for _ in range(c)]
        err = _one_compr_case(table, c)
        if err:
            return err
    return None


def _one_compr_case(table, c):
    p = fm.Atom("tbl", (fm.TVar("y"),))
    runner = cp.build_comprehension_solver(
        _TablePremise(table), p, "y", Nat(c), var_order=[])
    moves = runner.poll(())
    if len(moves) != 1:
        return f"comprehension made {len(moves)} moves for table {table!r}"
    _, numer = game.split_move(moves[0])
    got = game.numer_value(numer or "")
    want = sum(1 << y for y in range(c) if y < len(table) and table[y])
    if got != want:
        return f"comprehension value {got} != {want} for table {table!r} c={c}"
    if numer and not game.is_canonical_numer(numer):
        return f"non-canonical numer {numer!r} for table {table!r}"
    return None


_SUITES = {
    "fetch": (_suite_fetch, 1000),
    "windup": (_suite_windup, 0),
    "sim": (_suite_sim, 500),
    "compr": (_suite_compr, 200),
}


def cmd_oracle(args):
    if args.suite not in _SUITES:
        print(f"unknown suite {args.suite!r}; have {', '.join(sorted(_SUITES))}",
              file=sys.stderr)
        return 2
    fn, default_cases = _SUITES[args.suite]
    rng = random.Random(args.seed)
    counterexample = fn(rng, args.cases or default_cases)
    if counterexample:
        print("FAIL:", counterexample)
        return 3
    print(f"oracle suite {args.suite}: all checks passed")
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def build_parser():
    ap = argparse.ArgumentParser(prog="clarith")
    sub = ap.add_subparsers(dest="command", required=True)

    fmt = sub.add_parser("fmt", help="formula tools")
    fmt_sub = fmt.add_subparsers(dest="fmt_command", required=True)
    chk = fmt_sub.add_parser("check", help="parse and report census/bounds")
    chk.add_argument("file")
    chk.set_defaults(fn=cmd_fmt)

    pl = sub.add_parser("play", help="run a match")
    pl.add_argument("machine")
    pl.add_argument("formula")
    pl.add_argument("--env", default=None)
    pl.add_argument("--fuel", type=int, default=None)
    pl.set_defaults(fn=cmd_play)

    tr = sub.add_parser("transform", help="apply a strategy transformer")
    tr_sub = tr.add_subparsers(dest="kind", required=True)

    def common(p):
        p.add_argument("--play", action="store_true")
        p.add_argument("--env", default=None)
        p.add_argument("--fuel", type=int, default=None)
        p.set_defaults(fn=cmd_transform)

    reason = tr_sub.add_parser("reason")
    reason.add_argument("--machine", required=True)
    reason.add_argument("--f", dest="formula", required=True)
    common(reason)

    vasa = tr_sub.add_parser("vasa")
    vasa.add_argument("--machine", required=True)
    vasa.add_argument("--f", dest="formula", required=True)
    vasa.add_argument("--consts", default="")
    common(vasa)

    compr = tr_sub.add_parser("compr")
    compr.add_argument("--premise", required=True)
    compr.add_argument("--p", required=True)
    compr.add_argument("--y", required=True)
    compr.add_argument("--bound", required=True)
    common(compr)

    induct = tr_sub.add_parser("induct")
    induct.add_argument("--n", required=True)
    induct.add_argument("--k", required=True)
    induct.add_argument("--f", dest="formula", required=True)
    induct.add_argument("--trace", default=None)
    common(induct)

    mt = sub.add_parser("meter", help="resource report for a run file")
    mt.add_argument("trace")
    mt.set_defaults(fn=cmd_meter)

    dg = sub.add_parser("diag", help="diagnostics tables")
    dg_sub = dg.add_subparsers(dest="diag_kind", required=True)
    di = dg_sub.add_parser("induct")
    di.add_argument("trace")
    di.set_defaults(fn=cmd_diag)

    orc = sub.add_parser("oracle", help="run a brute-force oracle suite")
    orc.add_argument("suite")
    orc.add_argument("--seed", type=int, default=0)
    orc.add_argument("--cases", type=int, default=None)
    orc.set_defaults(fn=cmd_oracle)

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except FileProblem as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
