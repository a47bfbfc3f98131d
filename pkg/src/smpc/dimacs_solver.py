"""Minimal DIMACS front end for CaDiCaL (via PySAT), usable as an external
solver executable.

    python -m smpc.dimacs_solver problem.cnf

Prints ``s SATISFIABLE`` / ``s UNSATISFIABLE`` and ``v`` lines, exits 10/20
as competition solvers do.
"""

import sys

from pathlib import Path

from pysat.solvers import Solver

from .encode import parse_dimacs


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: smpc-cadical <file.cnf>", file=sys.stderr)
        return 1
    try:
        formula, _ = parse_dimacs(Path(argv[0]).read_text())
    except (OSError, ValueError) as exc:
        print(f"c error: {exc}", file=sys.stderr)
        return 1
    if any(not cl for cl in formula.clauses):
        print("s UNSATISFIABLE")
        return 20
    with Solver(name="cadical195", bootstrap_with=formula.clauses) as s:
        if not s.solve():
            print("s UNSATISFIABLE")
            return 20
        model = s.get_model() or []
    print("s SATISFIABLE")
    # assign variables the solver never saw
    seen = {abs(x) for x in model}
    model = list(model) + [-v for v in range(1, formula.n_vars + 1) if v not in seen]
    for i in range(0, len(model), 20):
        print("v " + " ".join(map(str, model[i : i + 20])))
    print("v 0")
    return 10


if __name__ == "__main__":
    sys.exit(main())
