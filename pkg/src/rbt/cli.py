"""Command-line driver: sorting, trace replay, invariant checks, benchmarks.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error.
All commands are deterministic given their flags and seed; I/O counts in the
metrics output are bit-identical across repeated runs (wall time is reported
but never asserted).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass

from .core import DELETED, FOUND, MIN, TreeConfig, check_invariants
from .ops import RandomBufferTree
from .reference import ReferenceStore, events_match
from .selfadjust import SelfAdjustMode
from .workload import (
    RunStats,
    make_tree,
    random_keys,
    run_insert_workload,
    run_sort_workload,
    run_zipf_search_workload,
)

CSV_HEADER = ("workload,n_elements,block,fanout,seed,mode,"
              "reads,writes,height,internal_nodes,wall_ms,ratio")

MODES = {
    "none": SelfAdjustMode.NONE,
    "rerandomize": SelfAdjustMode.RERANDOMIZE,
    "counter": SelfAdjustMode.COUNTER,
}


@dataclass
class MetricsRecord:
    workload: str
    n_elements: int
    block: int
    fanout: int
    seed: int
    mode: str
    reads: int
    writes: int
    height: int
    internal_nodes: int
    wall_ms: float
    ratio: float | None

    def to_row(self) -> list:
        ratio = "" if self.ratio is None else f"{self.ratio:.6f}"
        return [self.workload, self.n_elements, self.block, self.fanout,
                self.seed, self.mode, self.reads, self.writes, self.height,
                self.internal_nodes, f"{self.wall_ms:.3f}", ratio]


def io_ratio(io_total: int, n_elements: int, block: int, fanout: int) -> float | None:
    """io_total / (n * log_f n) with n = N/B; None when n < f."""
    n = n_elements / block
    if n < fanout:
        return None
    return io_total / (n * math.log(n) / math.log(fanout))


def record_from_stats(workload: str, n_elements: int, block: int, fanout: int,
                      seed: int, mode: str, stats: RunStats) -> MetricsRecord:
    return MetricsRecord(
        workload=workload, n_elements=n_elements, block=block, fanout=fanout,
        seed=seed, mode=mode, reads=stats.reads, writes=stats.writes,
        height=stats.height, internal_nodes=stats.internal_nodes,
        wall_ms=stats.wall_ms,
        ratio=io_ratio(stats.io_total, n_elements, block, fanout))


def write_records(records: list[MetricsRecord], out: str | None, fmt: str,
                  summaries: list[dict] | None = None) -> None:
    if fmt == "json":
        doc = {"records": [asdict(r) for r in records]}
        if summaries:
            doc["summaries"] = summaries
        text = json.dumps(doc, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER.split(","))
        for r in records:
            w.writerow(r.to_row())
        text = buf.getvalue()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ----------------------------------------------------------------------
# trace handling

class TraceParseError(Exception):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def parse_trace(text: str) -> list[tuple]:
    """Parse trace lines: i <key> [payload] | d <key> | q <key> | m | f."""
    ops: list[tuple] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        verb = parts[0]
        if verb in ("i", "d", "q"):
            if len(parts) < 2:
                raise TraceParseError(lineno, f"'{verb}' needs a key")
            try:
                key = int(parts[1])
            except ValueError:
                raise TraceParseError(lineno, f"bad key {parts[1]!r}") from None
            if not (-(1 << 63) <= key < (1 << 63)):
                raise TraceParseError(lineno, f"key {key} outside signed 64-bit range")
            if verb == "i":
                ops.append(("i", key, parts[2] if len(parts) > 2 else None))
            else:
                ops.append((verb, key))
        elif verb in ("m", "f"):
            if len(parts) > 1:
                raise TraceParseError(lineno, f"'{verb}' takes no arguments")
            ops.append((verb,))
        else:
            raise TraceParseError(lineno, f"unknown verb {verb!r}")
    return ops


def replay_trace(ops: list[tuple], tree: RandomBufferTree) -> dict:
    """Run a parsed trace against the tree and the reference side by side.

    Returns counts, the per-ticket outcome diffs, and min-event diffs; the
    trace is always settled with a final flush.
    """
    ref = ReferenceStore()
    ref_events: dict[int, object] = {}
    impl_events: dict[int, object] = {}
    min_mismatches = []
    counts = {"i": 0, "d": 0, "q": 0, "m": 0, "f": 0}
    for op in ops:
        verb = op[0]
        counts[verb] += 1
        if verb == "i":
            t = tree.insert(op[1], op[2])
            ref.insert(t, op[1], op[2])
        elif verb == "d":
            t = tree.delete(op[1])
            ref_events[t] = ref.delete(t, op[1])
        elif verb == "q":
            t = tree.search(op[1])
            ref_events[t] = ref.search(t, op[1])
        elif verb == "m":
            ev = tree.deletemin()
            rev = ref.deletemin(ev.ticket if ev is not None else -1)
            if (ev is None) != (rev is None) or (
                    ev is not None and not events_match(ev, rev)):
                min_mismatches.append((ev, rev))
        elif verb == "f":
            tree.flush()
            for ev in tree.poll_results():
                impl_events[ev.ticket] = ev
    tree.flush()
    for ev in tree.poll_results():
        impl_events[ev.ticket] = ev

    mismatches = list(min_mismatches)
    for t, rev in ref_events.items():
        iev = impl_events.get(t)
        if iev is None or not events_match(iev, rev):
            mismatches.append((iev, rev))
    extra = set(impl_events) - set(ref_events)
    for t in extra:
        mismatches.append((impl_events[t], None))
    return {"counts": counts, "mismatches": mismatches, "n_ops": len(ops)}


# ----------------------------------------------------------------------
# fault injection for cmd_check

def inject_fault(tree: RandomBufferTree, kind: str) -> bool:
    core = tree.core
    if kind == "heap":
        for node, _ in core.iter_nodes():
            if node.children and node.runs:
                if any(c.runs for c in node.children):
                    run = node.runs[-1]
                    bid = run.blocks[-1]
                    blk = list(core.store.read(bid))
                    blk[-1] = blk[-1]._replace(priority=0)
                    core.store.write(bid, blk)
                    return True
        return False
    if kind == "keys":
        for node, _ in core.iter_nodes():
            if node.separators and node.children:
                for i, child in enumerate(node.children):
                    if child.runs:
                        bad = (node.separators[i] if i < len(node.separators)
                               else node.separators[-1] - 1)
                        run = child.runs[0]
                        bid = run.blocks[0]
                        blk = list(core.store.read(bid))
                        blk[0] = blk[0]._replace(key=bad)
                        core.store.write(bid, blk)
                        return True
        return False
    raise ValueError(f"unknown fault kind {kind!r}")


# ----------------------------------------------------------------------
# commands

def cmd_sort(args) -> int:
    keys = None
    if args.trace:
        try:
            with open(args.trace) as fh:
                keys = [int(line.strip()) for line in fh if line.strip()]
        except OSError as e:
            print(f"error: cannot read {args.trace}: {e}", file=sys.stderr)
            return 2
        except ValueError as e:
            print(f"error: bad key in {args.trace}: {e}", file=sys.stderr)
            return 2
    n = len(keys) if keys is not None else args.n
    stats = run_sort_workload(args.block, args.fanout, n, args.seed,
                              MODES[args.mode], keys=keys)
    rec = record_from_stats("sort", n, args.block, args.fanout, args.seed,
                            args.mode, stats)
    write_records([rec], args.out, args.format)
    if not stats.ok:
        print("sort verification FAILED", file=sys.stderr)
        return 1
    return 0


def cmd_trace(args) -> int:
    try:
        with open(args.trace) as fh:
            ops = parse_trace(fh.read())
    except OSError as e:
        print(f"error: cannot read {args.trace}: {e}", file=sys.stderr)
        return 2
    except TraceParseError as e:
        print(f"trace parse error: {e}", file=sys.stderr)
        return 2
    tree = make_tree(args.block, args.fanout, args.seed, MODES[args.mode])
    t0 = time.perf_counter()
    outcome = replay_trace(ops, tree)
    wall_ms = (time.perf_counter() - t0) * 1000.0
    violations = check_invariants(tree.core)
    counts = outcome["counts"]
    print("ops: " + " ".join(f"{v}={counts[v]}" for v in "idqmf"))
    stats = tree.io_stats()
    rec = MetricsRecord(
        workload="trace", n_elements=outcome["n_ops"], block=args.block,
        fanout=args.fanout, seed=args.seed, mode=args.mode,
        reads=stats.reads, writes=stats.writes, height=tree.height(),
        internal_nodes=tree.internal_nodes(), wall_ms=wall_ms,
        ratio=io_ratio(stats.total(), outcome["n_ops"], args.block, args.fanout))
    write_records([rec], args.out, args.format)
    ok = True
    if outcome["mismatches"]:
        ok = False
        print(f"{len(outcome['mismatches'])} oracle mismatches:", file=sys.stderr)
        for iev, rev in outcome["mismatches"][:20]:
            print(f"  impl={iev} ref={rev}", file=sys.stderr)
    if violations:
        ok = False
        print(f"{len(violations)} invariant violations after flush", file=sys.stderr)
    return 0 if ok else 1


def cmd_bench(args) -> int:
    sizes = args.n_list
    seeds = args.seed_list
    workloads = (["insert", "sort", "zipf"] if args.workload == "all"
                 else [args.workload])
    records: list[MetricsRecord] = []
    summaries: list[dict] = []
    for workload in workloads:
        for n in sizes:
            ratios = []
            for seed in seeds:
                if workload == "insert":
                    stats = run_insert_workload(args.block, args.fanout, n,
                                                seed, MODES[args.mode])
                elif workload == "sort":
                    stats = run_sort_workload(args.block, args.fanout, n,
                                              seed, MODES[args.mode])
                    if not stats.ok:
                        print(f"sort verification failed at n={n} seed={seed}",
                              file=sys.stderr)
                        return 1
                else:
                    stats = run_zipf_search_workload(
                        args.block, args.fanout, n, 5 * n, seed,
                        MODES[args.mode], flush_every=max(n, 1))
                rec = record_from_stats(workload, n, args.block, args.fanout,
                                        seed, args.mode, stats)
                records.append(rec)
                if rec.ratio is not None:
                    ratios.append(rec.ratio)
            mean = sum(ratios) / len(ratios) if ratios else None
            summaries.append({
                "workload": workload, "n_elements": n,
                "mean_ratio": mean,
                "min_ratio": min(ratios) if ratios else None,
                "max_ratio": max(ratios) if ratios else None,
            })
            records.append(MetricsRecord(
                workload=f"{workload}_summary", n_elements=n, block=args.block,
                fanout=args.fanout, seed=-1, mode=args.mode, reads=0, writes=0,
                height=0, internal_nodes=0, wall_ms=0.0, ratio=mean))
    try:
        write_records(records, args.out, args.format, summaries)
    except OSError as e:
        print(f"error: cannot write {args.out}: {e}", file=sys.stderr)
        return 2
    return 0


def cmd_check(args) -> int:
    if args.trace:
        try:
            with open(args.trace) as fh:
                ops = parse_trace(fh.read())
        except OSError as e:
            print(f"error: cannot read {args.trace}: {e}", file=sys.stderr)
            return 2
        except TraceParseError as e:
            print(f"trace parse error: {e}", file=sys.stderr)
            return 2
        tree = make_tree(args.block, args.fanout, args.seed, MODES[args.mode])
        replay_trace(ops, tree)
    else:
        import random as _random
        rng = _random.Random(args.seed)
        tree = make_tree(args.block, args.fanout, args.seed, MODES[args.mode])
        for key in random_keys(rng, args.n):
            tree.insert(key)
        tree.flush()
    if args.inject:
        if not inject_fault(tree, args.inject):
            print("could not inject fault (tree too small)", file=sys.stderr)
            return 2
    violations = check_invariants(tree.core)
    for v in violations:
        path = "/".join(str(i) for i in v.path) or "root"
        print(f"violation kind={v.kind} node={path}: {v.detail}")
    print(f"{len(violations)} violations")
    return 1 if violations else 0


# ----------------------------------------------------------------------
# argument plumbing

def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def _default_seed() -> int:
    try:
        return int(os.environ.get("RBT_SEED", "1"))
    except ValueError:
        return 1


def _add_common(p: argparse.ArgumentParser, block: int, fanout: int) -> None:
    p.add_argument("--block", type=int, default=block,
                   help="elements per block (B)")
    p.add_argument("--fanout", type=int, default=fanout,
                   help="children per internal node (f)")
    p.add_argument("--seed", type=int, default=_default_seed(),
                   help="RNG seed (default: env RBT_SEED or 1)")
    p.add_argument("--mode", choices=sorted(MODES), default="none",
                   help="self-adjusting heuristic")
    p.add_argument("--out", default=None, help="metrics output path (default stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rbt",
        description="Randomized buffered external-memory search tree driver")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("sort", help="insert N keys then delete-min them all")
    ps.add_argument("--n", type=int, default=1000, help="number of random keys")
    ps.add_argument("--trace", default=None,
                    help="optional input file with one key per line")
    _add_common(ps, block=64, fanout=16)
    ps.set_defaults(func=cmd_sort)

    pt = sub.add_parser("trace", help="replay a trace against the reference oracle")
    pt.add_argument("--trace", required=True, help="trace file")
    _add_common(pt, block=8, fanout=8)
    pt.set_defaults(func=cmd_trace)

    pb = sub.add_parser("bench", help="benchmark sweep emitting metrics rows")
    pb.add_argument("--n", dest="n_list", type=_int_list,
                    default=[4096, 8192, 16384],
                    help="comma-separated element counts")
    pb.add_argument("--seeds", dest="seed_list", type=_int_list,
                    default=[1, 2, 3, 4, 5], help="comma-separated seeds")
    pb.add_argument("--workload", choices=["insert", "sort", "zipf", "all"],
                    default="insert")
    _add_common(pb, block=32, fanout=8)
    pb.set_defaults(func=cmd_bench)

    pc = sub.add_parser("check", help="build a tree, flush, run invariant checks")
    pc.add_argument("--trace", default=None, help="optional trace file to replay")
    pc.add_argument("--n", type=int, default=4096,
                    help="random inserts when no trace is given")
    pc.add_argument("--inject", choices=["heap", "keys"], default=None,
                    help="corrupt the tree first (negative testing)")
    _add_common(pc, block=8, fanout=8)
    pc.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        TreeConfig(block_capacity=args.block, fanout=args.fanout, rng_seed=args.seed)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
