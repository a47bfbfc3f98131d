"""Command line front end.

Exit codes: 0 ok, 1 usage or bad input, 2 solver failure, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import logging
import sys
from pathlib import Path

from . import bench, da
from .algos import SolverFailure, StableSet, build_pareto_graph, enumerate_all, pareto_chain
from .encode import EncodingError, decode, encode
from .gen import GenConfig, generate
from .io import dumps, load
from .model import InstanceError, Instance, Matching, is_stable, preprocess
from .oracle import OracleTooLarge, brute_force_stable_set
from .satio import DEFAULT_TIMEOUT, Session, SolverConfig, Status

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


GLOBAL_DEFAULTS = {
    "seed": 0,
    "jobs": 1,
    "sat_timeout": DEFAULT_TIMEOUT,
    "format": "json",
    "backend": "auto",
    "sat_solver": None,
    "verbose": False,
}


def _global_flags(default):
    p = argparse.ArgumentParser(add_help=False)
    kw = (lambda k: {"default": argparse.SUPPRESS}) if default is None else (lambda k: {"default": GLOBAL_DEFAULTS[k]})
    p.add_argument("--seed", type=int, **kw("seed"), help="RNG seed")
    p.add_argument("--jobs", type=int, **kw("jobs"), help="worker processes for batches")
    p.add_argument("--sat-timeout", type=float, **kw("sat_timeout"), help="seconds per SAT call")
    p.add_argument("--format", choices=["csv", "json"], **kw("format"))
    p.add_argument("--backend", choices=["auto", "external", "pysat"], **kw("backend"))
    p.add_argument("--sat-solver", **kw("sat_solver"), help="external solver command line")
    p.add_argument("-v", "--verbose", action="store_true", **kw("verbose"))
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="smpc", parents=[_global_flags(True)],
                     description="Stable matching with couples via SAT.")
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    local = [_global_flags(None)]

    g = sub.add_parser("gen", parents=local, help="generate a random instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--couples-pct", type=float, default=0.0, help="fraction of doctors in couples, 0..1")
    g.add_argument("--single-rol-len", type=int, default=5)
    g.add_argument("--couple-rol-len", type=int, default=15)
    g.add_argument("--quota", type=int, default=1)
    g.add_argument("--out", help="output file (.json for JSON); stdout if omitted")

    s = sub.add_parser("solve", parents=local, help="find one stable matching")
    s.add_argument("instance")
    s.add_argument("--dimacs", help="also write the CNF here")

    e = sub.add_parser("enumerate", parents=local, help="all stable matchings")
    e.add_argument("instance")
    e.add_argument("--limit", type=int)

    o = sub.add_parser("oracle", parents=local, help="all stable matchings by exhaustive search")
    o.add_argument("instance")

    p = sub.add_parser("pareto", parents=local, help="improve a stable matching to resident Pareto optimal")
    p.add_argument("instance")
    p.add_argument("--start", help="JSON file mapping doctor to program; default: first solver model")
    p.add_argument("--incremental", action="store_true")

    d = sub.add_parser("da", parents=local, help="run a deferred-acceptance heuristic")
    d.add_argument("instance")
    _da_flags(d)

    b = sub.add_parser("bench", parents=local, help="batch experiment over a grid")
    b.add_argument("--n", type=int, nargs="+", default=[200])
    b.add_argument("--couples-pct", type=float, nargs="+", default=[0.01, 0.05, 0.10, 0.20])
    b.add_argument("--instances", type=int, default=50)
    b.add_argument("--no-da", action="store_true")
    b.add_argument("--da-cap", type=int)
    b.add_argument("--couple-order", type=int, help="seed for the RP99 couple shuffle")
    b.add_argument("--out")

    gr = sub.add_parser("graph", parents=local, help="Pareto improvement graph in DOT")
    gr.add_argument("instance")
    gr.add_argument("--highlight", choices=["rp99", "kpr"], help="mark this DA result")
    gr.add_argument("--out")
    return parser


def _da_flags(p):
    p.add_argument("--algo", choices=["rp99", "kpr"], default="rp99")
    p.add_argument("--couple-order", help="shuffle seed, or a file listing couples one per line")
    p.add_argument("--da-cap", type=int, help="proposal budget")


# -- helpers ------------------------------------------------------------------


def _solver(args) -> SolverConfig:
    return SolverConfig(backend=args.backend, command=args.sat_solver, timeout=args.sat_timeout)


def _load(path: str) -> Instance:
    try:
        return load(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _emit(text: str, out: str | None = None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj, args, header=()) -> None:
    if args.format == "json":
        _emit(json.dumps(obj, indent=2) + "\n")
        return
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    rows = obj if isinstance(obj, list) else [obj]
    w.writerow(list(rows[0].keys()) if rows else list(header))
    for r in rows:
        w.writerow(["" if v is None else v for v in r.values()])
    _emit(buf.getvalue())


def _assignment_rows(inst: Instance, mu: Matching, **extra) -> list[dict]:
    return [{**extra, "doctor": d, "program": p or ""} for d, p in inst.describe(mu).items()]


def _stable_set_out(inst: Instance, st: StableSet, args) -> None:
    if args.format == "json":
        _dump({
            "satisfiable": st.satisfiable,
            "complete": st.complete,
            "count": len(st),
            "n_rp_opt": st.n_rp_opt,
            "has_ropt": st.has_ropt,
            "matchings": [{"rp_opt": f, "assignment": inst.describe(m)} for m, f in zip(st.matchings, st.rp_opt)],
        }, args)
    else:
        rows = []
        for i, (m, f) in enumerate(zip(st.matchings, st.rp_opt)):
            rows += _assignment_rows(inst, m, matching=i, rp_opt=f)
        _dump(rows, args, header=("matching", "rp_opt", "doctor", "program"))


def _couple_order(inst: Instance, spec: str | None) -> list[int] | None:
    if spec is None:
        return None
    try:
        return da.couple_order(inst, int(spec))
    except ValueError:
        pass
    index = {(inst.doctor_names[a], inst.doctor_names[b]): c for c, (a, b) in enumerate(inst.couples)}
    order = []
    for line in _load_lines(spec):
        names = tuple(line.split())
        if len(names) == 1 and names[0].isdigit():
            order.append(int(names[0]))
        elif names in index:
            order.append(index[names])
        else:
            raise UsageError(f"unknown couple {' '.join(names)!r} in {spec}")
    if sorted(order) != list(range(len(inst.couples))):
        raise UsageError("couple order must list every couple exactly once")
    return order


def _load_lines(path: str) -> list[str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    return [ln.split("#", 1)[0].strip() for ln in text.splitlines() if ln.split("#", 1)[0].strip()]


# -- commands -------------------------------------------------------------------


def cmd_gen(args) -> int:
    cfg = GenConfig(args.n, args.couples_pct, args.single_rol_len, args.couple_rol_len, args.quota, args.seed)
    try:
        inst = generate(cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    fmt = "json" if args.out and args.out.endswith(".json") else "text"
    _emit(dumps(inst, fmt), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = preprocess(_load(args.instance))
    cnf, reg = encode(inst)
    if args.dimacs:
        Path(args.dimacs).write_text(cnf.to_dimacs())
    with Session(cnf, _solver(args)) as session:
        res = session.solve()
    if res.status is Status.UNKNOWN:
        raise SolverFailure("solver returned no answer")
    if not res.sat:
        _dump({"status": "UNSAT"} if args.format == "json" else [{"status": "UNSAT"}], args)
        return EXIT_OK
    mu = decode(res.literals(), reg)
    if not is_stable(mu, inst):
        raise EncodingError("decoded model is not a stable matching")
    if args.format == "json":
        _dump({"status": "SAT", "assignment": inst.describe(mu)}, args)
    else:
        _dump(_assignment_rows(inst, mu), args)
    return EXIT_OK


def cmd_enumerate(args) -> int:
    inst = _load(args.instance)
    st = enumerate_all(inst, limit=args.limit, config=_solver(args))
    _stable_set_out(preprocess(inst), st, args)
    if not st.complete and (args.limit is None or len(st) < args.limit):
        print("smpc: enumeration incomplete (solver gave up)", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = _load(args.instance)
    try:
        st = brute_force_stable_set(inst)
    except OracleTooLarge as exc:
        raise UsageError(str(exc)) from exc
    _stable_set_out(inst, st, args)
    return EXIT_OK


def cmd_pareto(args) -> int:
    inst = preprocess(_load(args.instance))
    config = _solver(args)
    if args.start:
        try:
            names = json.loads(Path(args.start).read_text())
            mu = Matching.from_names(inst, names)
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"bad starting matching: {exc}") from exc
        if not is_stable(mu, inst):
            raise UsageError("starting matching is not stable")
    else:
        st = enumerate_all(inst, limit=1, config=config)
        if not st.matchings:
            if not st.complete:
                raise SolverFailure("solver returned no answer")
            _dump({"status": "UNSAT"} if args.format == "json" else [{"status": "UNSAT"}], args)
            return EXIT_OK
        mu = st.matchings[0]
    chain = pareto_chain(inst, mu, config, incremental=args.incremental)
    if args.format == "json":
        _dump({"steps": len(chain) - 1, "chain": [inst.describe(m) for m in chain]}, args)
    else:
        rows = []
        for i, m in enumerate(chain):
            rows += _assignment_rows(inst, m, step=i)
        _dump(rows, args)
    return EXIT_OK


def cmd_da(args) -> int:
    inst = preprocess(_load(args.instance))
    order = _couple_order(inst, args.couple_order)
    out = da.run(args.algo, inst, cap=args.da_cap, order=order)
    obj = {"algo": args.algo, "status": out.status.value, "iterations": out.iterations}
    if args.format == "json":
        obj["assignment"] = inst.describe(out.matching) if out.matching else None
        _dump(obj, args)
    elif out.matching:
        _dump(_assignment_rows(inst, out.matching, status=out.status.value), args)
    else:
        _dump([{"status": out.status.value, "doctor": "", "program": ""}], args)
    return EXIT_OK


def cmd_bench(args) -> int:
    cells = bench.grid(args.n, args.couples_pct, base_seed=args.seed)
    try:
        for c in cells:
            c.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    toggles = bench.Toggles(run_da=not args.no_da, couple_order_seed=args.couple_order,
                            da_cap=args.da_cap, solver=_solver(args))
    report = bench.run_batch(cells, args.instances, toggles, jobs=args.jobs)
    _emit(report.to_json() + "\n" if args.format == "json" else report.to_csv(), args.out)
    return EXIT_OK


def cmd_graph(args) -> int:
    inst = preprocess(_load(args.instance))
    st = enumerate_all(inst, config=_solver(args))
    if not st.complete:
        raise SolverFailure("enumeration incomplete")
    highlight = None
    if args.highlight:
        highlight = da.run(args.highlight, inst).matching
    _emit(build_pareto_graph(st, inst).to_dot(highlight), args.out)
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen, "solve": cmd_solve, "enumerate": cmd_enumerate, "oracle": cmd_oracle,
    "pareto": cmd_pareto, "da": cmd_da, "bench": cmd_bench, "graph": cmd_graph,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    for k, v in GLOBAL_DEFAULTS.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.cmd](args)
    except (UsageError, InstanceError) as exc:
        print(f"smpc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverFailure as exc:
        print(f"smpc: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (EncodingError, da.DaInvariantError) as exc:
        print(f"smpc: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
