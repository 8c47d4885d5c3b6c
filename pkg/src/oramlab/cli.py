"""Experiment driver CLI.

Subcommands: trace, analyze, distinguish, frequency, codec, report,
graph-export.  Every randomized command needs an explicit seed, either
--seed or the ORAMLAB_SEED environment variable; there is no ambient
entropy anywhere, so any output can be regenerated bit for bit.

Exit codes: 0 success, 1 usage error, 2 model violation, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction

from ._util import ModelViolationError, as_fraction
from .adversary import dense_partition_frequency, estimate_advantage
from .codec import alice_encode, block_data, bob_decode
from .core import OramConfig, gen_write_read_blocks, instantiate_workload, parse_workload_spec
from .graph import build_access_graph
from .orams import ENGINE_NAMES, run_sequence
from .partition import CertificateError
from .traceio import ExperimentReport, TraceFile, analyze_trace, read_trace, write_trace

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MODEL = 2
EXIT_IO = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 by default; the contract says 1
        raise _UsageError(message)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", type=int, default=1, help="client memory cells (default 1)")
    p.add_argument("--M", type=int, default=None, help="logical address range (default: workload length)")
    p.add_argument("--w", type=int, default=32, help="cell width in bits (default 32)")


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("ORAMLAB_SEED")
    if env is not None:
        return int(env)
    raise _UsageError("a seed is required: pass --seed or set ORAMLAB_SEED")


def _config_for(args, n: int) -> OramConfig:
    M = args.M if args.M is not None else max(n, 1)
    return OramConfig(m=args.m, M=M, w=args.w)


def _emit(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(text + "\n")


def build_parser() -> _Parser:
    top = _Parser(prog="oramlab", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", help="run an engine on a workload and write the trace file")
    p.add_argument("--engine", required=True, choices=ENGINE_NAMES)
    p.add_argument("--workload", required=True, help="alt:n=<N> or blocks:n=<N>,k=<K>[,seed=<S>]")
    p.add_argument("--n", type=int, default=None, help="workload length (required for dummy-leaker)")
    _add_config_flags(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--with-boundaries", action="store_true", help="annotate op boundaries (debug)")

    p = sub.add_parser("analyze", help="certified edge/probe lower bound of a trace file")
    p.add_argument("--trace", required=True)
    p.add_argument("--ell", default=None, help="density family threshold (rational, e.g. 64/5)")
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--json", dest="json_out", default=None, help="report path ('-' for stdout)")
    p.add_argument("--csv", dest="csv_out", default=None, help="per-k verdict CSV path")

    p = sub.add_parser("distinguish", help="estimate the dense-partition distinguisher's advantage")
    p.add_argument("--engine", required=True, choices=ENGINE_NAMES)
    p.add_argument("--y", required=True, help="first workload spec")
    p.add_argument("--yprime", required=True, help="second workload spec (block-shaped)")
    p.add_argument("--trials", type=int, required=True)
    _add_config_flags(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", dest="json_out", default=None)

    p = sub.add_parser("frequency", help="dense-partition frequency over fresh block workloads")
    p.add_argument("--engine", required=True, choices=ENGINE_NAMES)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--family", choices=("blocks", "alt"), default="blocks")
    _add_config_flags(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", dest="json_out", default=None)

    p = sub.add_parser("codec", help="round-trip the two-party transfer codec on one block")
    p.add_argument("--engine", required=True, choices=ENGINE_NAMES)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--i", type=int, required=True, help="block index, 1-based")
    _add_config_flags(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--json", dest="json_out", default=None)

    p = sub.add_parser("report", help="run + analyze in one step")
    p.add_argument("--engine", required=True, choices=ENGINE_NAMES)
    p.add_argument("--workload", required=True)
    _add_config_flags(p)
    p.add_argument("--ell", default=None)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--json", dest="json_out", default=None)

    p = sub.add_parser("graph-export", help="export a trace's access graph")
    p.add_argument("--trace", required=True)
    p.add_argument("--format", choices=("dot", "edges"), default="edges")
    p.add_argument("--out", default=None, help="output path (default stdout)")

    return top


def _cmd_trace(args) -> int:
    seed = _resolve_seed(args)
    spec = parse_workload_spec(args.workload)
    if args.n is not None and args.n != spec.n:
        raise _UsageError(f"--n {args.n} disagrees with the workload length {spec.n}")
    if args.engine == "dummy-leaker" and args.n is None:
        raise _UsageError("dummy-leaker must know the length up front: pass --n")
    config = _config_for(args, spec.n)
    y, _ = instantiate_workload(spec, config.w, default_seed=seed)
    _, server = run_sequence(args.engine, config, y, seed)
    tf = TraceFile(
        engine=args.engine,
        workload=spec.render(),
        n=spec.n,
        m=config.m,
        M=config.M,
        w=config.w,
        seed=seed,
        addrs=server.addr_column(),
        op_index=server.op_column() if args.with_boundaries else None,
    )
    write_trace(tf, args.out)
    return EXIT_OK


def _report_payload(report: ExperimentReport, args) -> int:
    _emit(report.as_dict(), args.json_out)
    if getattr(args, "csv_out", None):
        with open(args.csv_out, "w", encoding="ascii") as fh:
            fh.write("\n".join(report.csv_rows()) + "\n")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    tf = read_trace(args.trace)
    ell = as_fraction(Fraction(args.ell)) if args.ell is not None else None
    report = analyze_trace(tf, ell=ell, k_max=args.k_max)
    return _report_payload(report, args)


def _cmd_distinguish(args) -> int:
    seed = _resolve_seed(args)
    spec_y = parse_workload_spec(args.y)
    spec_yp = parse_workload_spec(args.yprime)
    if spec_y.n != spec_yp.n:
        raise _UsageError("the two workloads must have equal length")
    config = _config_for(args, spec_y.n)
    y, _ = instantiate_workload(spec_y, config.w, default_seed=seed)
    y_prime, _ = instantiate_workload(spec_yp, config.w, default_seed=seed + 1)
    est = estimate_advantage(args.engine, config, y, y_prime, args.trials, seed, jobs=args.jobs)
    _emit(est.as_dict(), args.json_out)
    return EXIT_OK


def _cmd_frequency(args) -> int:
    seed = _resolve_seed(args)
    config = _config_for(args, args.n)
    freq = dense_partition_frequency(
        args.engine, config, args.n, args.k, args.trials, seed, family=args.family, jobs=args.jobs
    )
    _emit(
        {
            "engine": args.engine,
            "n": args.n,
            "k": args.k,
            "trials": args.trials,
            "family": args.family,
            "frequency": float(freq),
            "frequency_exact": str(freq),
        },
        args.json_out,
    )
    return EXIT_OK


def _cmd_codec(args) -> int:
    seed = _resolve_seed(args)
    config = _config_for(args, args.n)
    y, layout = gen_write_read_blocks(args.n, args.k, config.w, random.Random(seed))
    msg = alice_encode(args.engine, config, y, layout, args.i, shared_seed=seed, with_checksum=True)
    recovered = bob_decode(msg, args.engine, config, y, layout, args.i, shared_seed=seed)
    hidden = block_data(y, layout, args.i)
    _emit(
        {
            "engine": args.engine,
            "n": args.n,
            "k": args.k,
            "i": args.i,
            "round_trip": recovered == hidden,
            "matched_probes": len(msg.matched),
            "bit_length": msg.bit_length,
        },
        args.json_out,
    )
    return EXIT_OK


def _cmd_report(args) -> int:
    seed = _resolve_seed(args)
    spec = parse_workload_spec(args.workload)
    config = _config_for(args, spec.n)
    y, _ = instantiate_workload(spec, config.w, default_seed=seed)
    _, server = run_sequence(args.engine, config, y, seed, record_meta=False)
    tf = TraceFile(
        engine=args.engine,
        workload=spec.render(),
        n=spec.n,
        m=config.m,
        M=config.M,
        w=config.w,
        seed=seed,
        addrs=server.addr_column(),
    )
    ell = as_fraction(Fraction(args.ell)) if args.ell is not None else None
    report = analyze_trace(tf, ell=ell, k_max=args.k_max)
    return _report_payload(report, args)


def _cmd_graph_export(args) -> int:
    tf = read_trace(args.trace)
    graph = build_access_graph(tf.addrs)
    lines = []
    if args.format == "dot":
        lines.append("digraph access {")
        lines.extend(f"  {u} -> {v};" for u, v in graph.edges)
        lines.append("}")
    else:
        lines.extend(f"{u} {v}" for u, v in graph.edges)
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


_DISPATCH = {
    "trace": _cmd_trace,
    "analyze": _cmd_analyze,
    "distinguish": _cmd_distinguish,
    "frequency": _cmd_frequency,
    "codec": _cmd_codec,
    "report": _cmd_report,
    "graph-export": _cmd_graph_export,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _DISPATCH[args.command](args)
    except _UsageError as exc:
        print(f"oramlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelViolationError, CertificateError) as exc:
        print(f"oramlab: model violation: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except ValueError as exc:
        print(f"oramlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"oramlab: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
