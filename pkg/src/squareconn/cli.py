"""Command-line harness: workload generation, trace replay and benchmarking.

Trace format, one operation per line, ``#`` starts a comment::

    insert <id> <x> <y> <side>
    delete <id>
    query <idA> <idB>
"""

from __future__ import annotations

import argparse
import gc
import json
import math
import random
import sys
import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, TextIO

from .engine import Engine
from .geometry import Square, storing_cell
from .oracle import (
    OracleState,
    o_check_matchings,
    o_contained_cells,
    o_counters,
    o_inverse_perimeter,
    o_perimeter,
    storing_cells_of,
)

SCHEMA = 1
EXIT_OK, EXIT_INPUT, EXIT_MISMATCH = 0, 1, 2


class TraceError(Exception):
    pass


@dataclass(frozen=True)
class TraceOp:
    kind: str
    args: tuple
    line: int = 0

    def render(self) -> str:
        return " ".join([self.kind, *map(str, self.args)])


_ARITY = {"insert": 4, "delete": 1, "query": 2}


def parse_trace(lines: Iterable[str]) -> Iterator[TraceOp]:
    for lineno, raw in enumerate(lines, 1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.split()
        kind = parts[0]
        if kind not in _ARITY:
            raise TraceError(f"line {lineno}: unknown operation {kind!r}")
        if len(parts) - 1 != _ARITY[kind]:
            raise TraceError(f"line {lineno}: {kind} takes {_ARITY[kind]} arguments")
        try:
            args = tuple(int(p) for p in parts[1:])
        except ValueError:
            raise TraceError(f"line {lineno}: arguments must be integers") from None
        yield TraceOp(kind, args, lineno)


# -- generation -----------------------------------------------------------------


def generate(
    n: int,
    ops: int,
    psi_max: int,
    seed: int,
    mix: tuple[float, float, float] = (0.45, 0.25, 0.30),
    box: int = 4096,
) -> list[TraceOp]:
    """Pseudorandom trace: ``n`` inserts, then ``ops`` mixed operations."""
    if psi_max < 1 or psi_max & (psi_max - 1):
        raise ValueError("psi_max must be a power of two")
    if len(mix) != 3 or any(p < 0 for p in mix) or not math.isclose(sum(mix), 1.0, abs_tol=1e-9):
        raise ValueError("mix proportions must be non-negative and sum to 1")
    if n < 0 or ops < 0 or box < 0:
        raise ValueError("counts and box must be non-negative")
    rng = random.Random(seed)
    top = math.log2(psi_max)
    live: list[int] = []
    out: list[TraceOp] = []
    next_id = 0

    def insert() -> None:
        nonlocal next_id
        side = max(1, min(psi_max, round(2 ** rng.uniform(0, top))))
        out.append(TraceOp("insert", (next_id, rng.randint(0, box), rng.randint(0, box), side)))
        live.append(next_id)
        next_id += 1

    for _ in range(n):
        insert()
    p_ins, p_del = mix[0], mix[0] + mix[1]
    for _ in range(ops):
        r = rng.random()
        if r < p_ins or not live:
            insert()
        elif r < p_del:
            i = rng.randrange(len(live))
            live[i], live[-1] = live[-1], live[i]
            out.append(TraceOp("delete", (live.pop(),)))
        else:
            out.append(TraceOp("query", (rng.choice(live), rng.choice(live))))
    return out


def generate_aspect_spike(n: int, psi_max: int, seed: int, box: Optional[int] = None) -> list[TraceOp]:
    """One large and one unit square; the unit square leaves, ``n`` large squares arrive, it returns."""
    if psi_max < 1 or psi_max & (psi_max - 1):
        raise ValueError("psi_max must be a power of two")
    rng = random.Random(seed)
    if box is None:
        box = psi_max * max(1, math.isqrt(max(n, 1)))
    small = (psi_max // 2, psi_max // 2, 1)
    out = [TraceOp("insert", (0, 0, 0, psi_max)), TraceOp("insert", (1, *small)), TraceOp("delete", (1,))]
    for i in range(n):
        out.append(TraceOp("insert", (i + 2, rng.randint(0, box), rng.randint(0, box), psi_max)))
    out.append(TraceOp("insert", (1, *small)))
    return out


# -- replay ---------------------------------------------------------------------


@contextmanager
def relaxed_gc(threshold: int = 50000):
    """Collect young objects less often; the engine makes many long-lived small objects."""
    old = gc.get_threshold()
    gc.set_threshold(threshold, *old[1:])
    try:
        yield
    finally:
        gc.set_threshold(*old)


@dataclass
class ReplayResult:
    answers: list[bool]
    mismatches: list[str]
    stats: dict


def _deep_check(engine: Engine, oracle: OracleState, touched: Optional[Square]) -> list[str]:
    problems = []
    try:
        engine.check_invariants()
    except AssertionError as exc:
        problems.append(f"invariant: {exc}")
    problems.extend(o_check_matchings(engine))
    squares = list(oracle.squares.values())
    if engine.quadtree.marked_cells() != dict(o_counters(squares)):
        problems.append("mark counts differ from brute-force containment counts")
    if touched is not None:
        storing = list(storing_cells_of(squares))
        reg = engine.registry
        if reg.perimeter_of_square(touched) != o_perimeter(touched, storing):
            problems.append(f"perimeter of {touched.id!r} differs")
        if reg.report_contained_cells(touched) != o_contained_cells(touched, storing):
            problems.append(f"contained cells of {touched.id!r} differ")
        c = storing_cell(touched)
        stored = {z: list(t) for z, t in reg.trees.items()}
        if reg.inverse_perimeter(c) != o_inverse_perimeter(c, stored):
            problems.append(f"inverse perimeter of {c} differs")
    return problems


def replay(
    ops: Iterable[TraceOp],
    check: bool = False,
    check_deep: bool = False,
    out: Optional[TextIO] = None,
) -> ReplayResult:
    """Run a trace. Raises TraceError on ill-formed operations."""
    with relaxed_gc():
        return _replay(ops, check, check_deep, out)


def _replay(ops, check, check_deep, out) -> ReplayResult:
    engine = Engine()
    oracle = OracleState() if (check or check_deep) else None
    answers: list[bool] = []
    mismatches: list[str] = []
    counts = {"insert": 0, "delete": 0, "query": 0}
    for op in ops:
        where = f"line {op.line}" if op.line else op.render()
        touched = None
        if op.kind == "insert":
            sid, x, y, side = op.args
            if sid in engine.squares:
                raise TraceError(f"{where}: duplicate id {sid}")
            try:
                sq = Square.from_input(sid, x, y, side)
            except (TypeError, ValueError) as exc:
                raise TraceError(f"{where}: {exc}") from None
            engine.insert_square(sq)
            if oracle is not None:
                oracle.insert(sq)
            touched = sq
        elif op.kind == "delete":
            (sid,) = op.args
            if sid not in engine.squares:
                raise TraceError(f"{where}: unknown id {sid}")
            touched = engine.squares[sid]
            engine.delete(sid)
            if oracle is not None:
                oracle.delete(sid)
        else:
            a, b = op.args
            for sid in (a, b):
                if sid not in engine.squares:
                    raise TraceError(f"{where}: unknown id {sid}")
            got = engine.connected(a, b)
            answers.append(got)
            if out is not None:
                out.write("true\n" if got else "false\n")
            if oracle is not None:
                want = oracle.connected(a, b)
                if got != want:
                    mismatches.append(f"{where}: query {a} {b} gave {got}, oracle says {want}")
        counts[op.kind] += 1
        if check_deep and op.kind != "query":
            for p in _deep_check(engine, oracle, touched):
                mismatches.append(f"{where}: {p}")
    stats = {"schema": SCHEMA, "ops": counts, **engine.stats(deep=True), "mismatches": len(mismatches)}
    return ReplayResult(answers, mismatches, stats)


# -- bench ----------------------------------------------------------------------


def _percentiles(xs: list[float]) -> dict:
    if not xs:
        return {}
    xs = sorted(xs)

    def q(p: float) -> float:
        return xs[min(len(xs) - 1, int(p * len(xs)))]

    return {"count": len(xs), "p50": q(0.5), "p90": q(0.9), "p99": q(0.99), "max": xs[-1]}


def bench(ops: list[TraceOp], repetitions: int = 1, sample_every: int = 100) -> dict:
    """Timing and structure-size report; no oracle."""
    with relaxed_gc():
        return _bench(ops, repetitions, sample_every)


def _bench(ops: list[TraceOp], repetitions: int, sample_every: int) -> dict:
    timings: dict[str, list[float]] = {"insert": [], "delete": [], "query": []}
    work: list[int] = []
    series: list[dict] = []
    final: dict = {}
    total = 0.0
    for rep in range(max(1, repetitions)):
        engine = Engine()
        for i, op in enumerate(ops):
            t0 = time.perf_counter()
            if op.kind == "insert":
                engine.insert(*op.args)
            elif op.kind == "delete":
                engine.delete(op.args[0])
            else:
                engine.connected(*op.args)
            dt = time.perf_counter() - t0
            total += dt
            timings[op.kind].append(dt * 1e6)
            if rep == 0:
                if op.kind != "query":
                    u = engine.last_update
                    work.append(u.contained + u.perimeter)
                if i % sample_every == 0 or i == len(ops) - 1:
                    s = engine.stats()
                    series.append({"op": i, "nodes": s["nodes"], "proxy_edges": s["proxy_edges"], "z_star": s["z_star"]})
        final = engine.stats()
    return {
        "schema": SCHEMA,
        "ops": len(ops),
        "repetitions": max(1, repetitions),
        "seconds": total,
        "latency_us": {k: _percentiles(v) for k, v in timings.items() if v},
        "work": work,
        "work_max": max(work) if work else 0,
        "series": series,
        "final": final if ops else {},
    }


# -- entry point ----------------------------------------------------------------


def _mix(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("mix must look like i:d:q")
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError:
        raise argparse.ArgumentTypeError("mix parts must be numbers") from None


def _read_ops(path: str) -> list[TraceOp]:
    if path == "-":
        return list(parse_trace(sys.stdin))
    with open(path) as fh:
        return list(parse_trace(fh))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="squareconn", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("replay", help="run a trace and print one line per query")
    r.add_argument("trace")
    r.add_argument("--check", action="store_true", help="compare every query with the brute-force oracle")
    r.add_argument("--check-deep", action="store_true", help="also verify all structures after each update")
    r.add_argument("--stats", metavar="PATH", help="write the final JSON record to PATH as well")

    g = sub.add_parser("gen", help="write a pseudorandom trace")
    g.add_argument("--n", type=int, default=100, help="initial inserts")
    g.add_argument("--ops", type=int, default=1000, help="mixed operations after the initial inserts")
    g.add_argument("--psi-max", type=int, default=16, help="largest side; a power of two")
    g.add_argument("--seed", type=int, default=0, help="random seed")
    g.add_argument("--mix", type=_mix, default=(0.45, 0.25, 0.30), help="insert:delete:query weights")
    g.add_argument("--box", type=int, default=None, help="positions are drawn from [0, box]^2")
    g.add_argument("--aspect-spike", action="store_true", help="large/small square scenario")
    g.add_argument("-o", "--output", default="-", help="trace file, - for stdout")

    b = sub.add_parser("bench", help="time a trace without the oracle")
    b.add_argument("trace")
    b.add_argument("--repetitions", type=int, default=1, help="replay the trace this many times")
    b.add_argument("-o", "--output", default="-", help="JSON report file, - for stdout")
    return ap


def _emit(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "gen":
            if args.aspect_spike:
                trace = generate_aspect_spike(args.n, args.psi_max, args.seed, args.box)
            else:
                box = 4096 if args.box is None else args.box
                trace = generate(args.n, args.ops, args.psi_max, args.seed, args.mix, box)
            _emit("".join(op.render() + "\n" for op in trace), args.output)
            return EXIT_OK
        ops = _read_ops(args.trace)
        if args.cmd == "bench":
            _emit(json.dumps(bench(ops, args.repetitions), sort_keys=True) + "\n", args.output)
            return EXIT_OK
        result = replay(ops, args.check, args.check_deep, out=sys.stdout)
    except (TraceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    record = json.dumps(result.stats, sort_keys=True)
    print(record)
    if args.stats:
        with open(args.stats, "w") as fh:
            fh.write(record + "\n")
    for m in result.mismatches:
        print(f"mismatch: {m}", file=sys.stderr)
    return EXIT_MISMATCH if result.mismatches else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
