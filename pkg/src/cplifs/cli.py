"""Command-line front end.

Every subcommand reads a JSON config ``{"maps": [...]}``.  Data goes to
stdout (or ``--output``), diagnostics to stderr.  Exit codes: 0 success,
2 invalid config or options, 3 budget or cap exceeded (completed rows are
still written, followed by ``#truncated``), 4 numeric failure.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import math
import os
import sys
from fractions import Fraction

from . import __version__
from .continuity_lab import (FORMULA_HEADER, LEBESGUE_HEADER, SWEEP_HEADER, PerturbationSpec, best_dimension,
                             continuity_sweep, discontinuity_report, lebesgue_positivity_experiment)
from .errors import BudgetExceeded, CapReached, CplifsError, InfeasiblePerturbation, InvalidConfig, NumericFailure
from .ifs_core import Cplifs, Violation, attractor_cover, generated_self_similar, validate
from .markov import (EDGE_CSV_HEADER, diagram_edge_rows, diagram_to_dot, grow_diagram, monotonicity_partition,
                     natural_dimension_markov, verify_edge_rows)
from .orbit_graph import (OVERLAP_CSV_HEADER, build_orbit_graph, esc_min_distance, exact_overlap_search,
                          orbit_to_dot)
from .pressure import box_counting_estimate, moran_dimension, natural_dimension_direct, pressure_curve

FORMAT_VERSION = "1"
EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_NUMERIC = 0, 2, 3, 4


def fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


class RowWriter:
    """CSV writer that can close a partial table with ``#truncated``."""

    def __init__(self, stream):
        self.stream = stream
        self.writer = csv.writer(stream, lineterminator="\n")

    def header(self, names):
        self.writer.writerow(names)

    def row(self, values):
        self.writer.writerow([fmt(v) for v in values])
        self.stream.flush()

    def truncated(self):
        self.stream.write("#truncated\n")


def load_config(path: str, exact: bool | None = None) -> Cplifs:
    try:
        with open(path) as fh:
            raw = json.load(fh, parse_float=str if exact else float)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidConfig([Violation("Unreadable", 0, None, str(exc))]) from exc
    return validate(raw, exact=exact)


def parse_grid(text: str) -> list[float]:
    try:
        a, b, steps = text.split(":")
        a, b, steps = float(a), float(b), int(steps)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected a:b:steps") from exc
    if steps < 1:
        raise argparse.ArgumentTypeError("steps must be >= 1")
    if steps == 1:
        return [a]
    return [a + (b - a) * i / (steps - 1) for i in range(steps)]


def parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected comma-separated numbers") from exc


def positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


# subcommands ----------------------------------------------------------------

def cmd_validate(args, out):
    F = load_config(args.config)
    I = F.interval
    mode = "exact" if F.exact else "float"
    out.write(f"valid: m={F.m} type={list(F.type_vector)} interval=[{fmt(I.lo)}, {fmt(I.hi)}] mode={mode}\n")
    return EXIT_OK


def box_dimension(F: Cplifs, n: int) -> float:
    cover = attractor_cover(F, n)
    longest = max(float(c.hi - c.lo) for c in cover)
    k_max = max(3, int(math.floor(-math.log2(longest))) if longest > 0 else 20)
    return box_counting_estimate(cover, range(max(1, k_max - 8), k_max + 1))


def cmd_dim(args, out):
    F = load_config(args.config)
    w = RowWriter(out)
    w.header(("method", "value", "bracket_lo", "bracket_hi", "depth"))
    if args.method == "direct":
        w.row(natural_dimension_direct(F, args.n, args.tol).row())
    elif args.method == "markov":
        res = natural_dimension_markov(F, r=args.r, tol=args.tol, max_nodes=args.max_nodes)
        w.row(res.row())
        if res.status != "exact":
            w.truncated()
            return EXIT_BUDGET
    elif args.method == "best":
        w.row(best_dimension(F, args.n, args.r, args.tol, args.max_nodes).row())
    elif args.method == "moran":
        if any(F.type_vector):
            raise InvalidConfig([Violation("HasBreakpoints", 0, None, "moran needs maps without breakpoints")])
        v = moran_dimension([abs(f.slopes[0]) for f in F.maps], min(args.tol, 1e-12))
        w.row(("moran", v, v, v, 0))
    else:
        v = box_dimension(F, args.n)
        w.row(("boxcount", v, v, v, args.n))
    return EXIT_OK


def cmd_pressure(args, out):
    F = load_config(args.config)
    w = RowWriter(out)
    w.header(("s", "phi_n", "n"))
    for row in pressure_curve(F, args.s_grid, args.n).rows():
        w.row(row)
    return EXIT_OK


def cmd_diagram(args, out):
    F = load_config(args.config)
    if args.verify:
        with open(args.verify) as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
        if rows and rows[0][0] == EDGE_CSV_HEADER[0]:
            rows = rows[1:]
        bad = verify_edge_rows(F, rows)
        out.write(f"edges checked: {len(rows)}\nviolations: {len(bad)}\n")
        for row in bad:
            print("bad edge: " + ",".join(row), file=sys.stderr)
        return EXIT_OK if not bad else EXIT_NUMERIC
    D = grow_diagram(F, monotonicity_partition(F), args.max_level, args.max_nodes)
    if args.export == "dot":
        out.write(diagram_to_dot(D))
    else:
        w = RowWriter(out)
        w.header(EDGE_CSV_HEADER)
        for row in diagram_edge_rows(D):
            w.row(row)
    if D.cap_reached:
        out.write("#truncated\n")
        print(f"diagram cap reached at level {D.max_level} with {len(D.nodes)} nodes", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


def cmd_orbit(args, out):
    F = load_config(args.config)
    G = build_orbit_graph(F, depth=args.depth)
    if args.export == "dot":
        out.write(orbit_to_dot(G))
    else:
        w = RowWriter(out)
        w.header(("from", "to", "k", "j", "abs_slope"))
        for e in G.edges:
            w.row((str(G.nodes[e.src]), str(G.nodes[e.dst]), e.branch[0], e.branch[1], e.abs_slope))
    if G.cap_reached:
        out.write("#truncated\n")
        return EXIT_BUDGET
    return EXIT_OK


def _similarities(args):
    F = load_config(args.config, exact=True if args.exact_rational else None)
    return generated_self_similar(F), F.exact


def cmd_overlap(args, out):
    S, exact = _similarities(args)
    report = exact_overlap_search(S, args.depth, exact=exact)
    w = RowWriter(out)
    w.header(OVERLAP_CSV_HEADER)
    for p in report.pairs:
        w.row(p.row())
    if report.truncated:
        w.truncated()
        return EXIT_BUDGET
    return EXIT_OK


def cmd_esc(args, out):
    S, exact = _similarities(args)
    w = RowWriter(out)
    w.header(("n", "min_distance", "c_estimate"))
    for n in range(1, args.depth + 1):
        d, c = esc_min_distance(S, n, exact=exact)
        w.row((n, d, "" if c is None else c))
    return EXIT_OK


def _spec(args, delta):
    maps = tuple(int(x) for x in args.maps.split(",")) if args.maps else None
    return PerturbationSpec(delta, frozenset(args.mode.split(",")), args.seed, args.trials, maps,
                            args.distribution, not args.loose_partition)


def cmd_sweep(args, out):
    F = load_config(args.config)
    w = RowWriter(out)
    w.header(SWEEP_HEADER)
    template = _spec(args, max(args.deltas))
    try:
        for row in continuity_sweep(F, args.deltas, template, n=args.n, r=args.r, tol=args.tol):
            w.row(row.row())
    except (BudgetExceeded, CapReached, NumericFailure, InfeasiblePerturbation):
        w.truncated()
        raise
    return EXIT_OK


def cmd_example51(args, out):
    report = discontinuity_report(args.eps, args.nmax)
    out.write(report.text())
    if args.csv:
        with open(args.csv, "w") as fh:
            w = RowWriter(fh)
            w.header(FORMULA_HEADER)
            for row in report.formula_rows:
                w.row(row)
    return EXIT_OK


def cmd_lebesgue(args, out):
    F = load_config(args.config)
    w = RowWriter(out)
    w.header(LEBESGUE_HEADER)
    spec = _spec(args, args.delta)
    if args.delta == 0:
        spec = PerturbationSpec(0.0, trials=1)
    for row in lebesgue_positivity_experiment(F, spec, args.depth):
        for d, est in zip(row.depths, row.estimates):
            w.row((row.trial, row.s_hat, d, est, row.verdict))
    return EXIT_OK


# parser ---------------------------------------------------------------------

def _perturbation_options(p, trials_default=10):
    p.add_argument("--trials", type=positive_int, default=trials_default)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", default="translations",
                   help="comma-separated subset of translations,breakpoints,slopes")
    p.add_argument("--maps", default=None, help="comma-separated 1-based map indices to perturb")
    p.add_argument("--distribution", choices=("uniform", "positive", "fixed"), default="uniform")
    p.add_argument("--loose-partition", action="store_true",
                   help="only enforce the slope and sup-norm closeness clauses")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cplifs", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version=f"cplifs {__version__} (format {FORMAT_VERSION})")
    parser.add_argument("--threads", type=positive_int, default=1,
                        help="accepted for compatibility; computations run in one process")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", default=None, help="write data here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, config=True):
        p = sub.add_parser(name, help=help_, parents=[common])
        if config:
            p.add_argument("config", help="JSON system config")
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "check the constraints of a config")

    p = add("dim", cmd_dim, "natural dimension")
    p.add_argument("--method", choices=("direct", "markov", "boxcount", "moran", "best"), default="best")
    p.add_argument("--n", type=positive_int, default=12, help="cylinder depth")
    p.add_argument("--r", type=positive_int, default=20, help="diagram level cap")
    p.add_argument("--max-nodes", type=positive_int, default=10_000)
    p.add_argument("--tol", type=positive_float, default=1e-6)

    p = add("pressure", cmd_pressure, "finite-depth pressure curve")
    p.add_argument("--s-grid", type=parse_grid, default=parse_grid("0:1:11"))
    p.add_argument("--n", type=positive_int, default=12)

    p = add("diagram", cmd_diagram, "Markov diagram export")
    p.add_argument("--export", choices=("dot", "csv"), default="csv")
    p.add_argument("--max-level", type=positive_int, default=20)
    p.add_argument("--max-nodes", type=positive_int, default=10_000)
    p.add_argument("--verify", metavar="CSV", default=None, help="re-check an exported edge list")

    p = add("orbit", cmd_orbit, "orbit graph of critical points")
    p.add_argument("--depth", type=positive_int, default=12)
    p.add_argument("--export", choices=("dot", "csv"), default="csv")

    p = add("overlap", cmd_overlap, "exact overlaps of the generated self-similar system")
    p.add_argument("--depth", type=positive_int, default=6)
    p.add_argument("--exact-rational", action="store_true", help="read decimals as exact rationals")

    p = add("esc", cmd_esc, "minimal distances between compositions")
    p.add_argument("--depth", type=positive_int, default=6)
    p.add_argument("--exact-rational", action="store_true")

    p = add("sweep", cmd_sweep, "continuity sweep over perturbation sizes")
    p.add_argument("--deltas", type=parse_floats, default=[1e-3, 1e-5])
    p.add_argument("--n", type=positive_int, default=12)
    p.add_argument("--r", type=positive_int, default=20)
    p.add_argument("--tol", type=positive_float, default=1e-6)
    _perturbation_options(p)

    p = add("example51", cmd_example51, "broken-map discontinuity report", config=False)
    p.add_argument("--eps", type=positive_float, default=1e-3)
    p.add_argument("--nmax", type=positive_int, default=12)
    p.add_argument("--csv", default=None, help="write the cylinder-formula check here")

    p = add("lebesgue", cmd_lebesgue, "union length of cylinders at three depths")
    p.add_argument("--depth", type=positive_int, default=8)
    p.add_argument("--delta", type=float, default=0.0)
    _perturbation_options(p, trials_default=1)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    with contextlib.ExitStack() as stack:
        out = sys.stdout if args.output is None else stack.enter_context(open(args.output, "w"))
        try:
            return args.func(args, out)
        except BrokenPipeError:
            raise
        except InvalidConfig as exc:
            for v in exc.violations:
                print(f"error: {v}", file=sys.stderr)
            return EXIT_CONFIG
        except (OSError, ValueError, argparse.ArgumentTypeError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except (BudgetExceeded, CapReached) as exc:
            print(f"budget: {exc}", file=sys.stderr)
            return EXIT_BUDGET
        except (NumericFailure, InfeasiblePerturbation) as exc:
            print(f"numeric failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        except CplifsError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG


def main():
    try:
        code = run()
    except BrokenPipeError:
        # downstream closed the pipe (e.g. `| head`); silence the final flush
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = EXIT_OK
    sys.exit(code)
