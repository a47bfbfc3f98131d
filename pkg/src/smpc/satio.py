"""SAT solver drivers.

Two interchangeable backends sit behind :class:`Session`:

``external``
    writes DIMACS to a temp file and runs a solver executable on it, parsing
    the ``s``/``v`` lines of its output.  Every solve is a full re-solve.
    The executable comes from ``SMPC_SAT_SOLVER`` (a command line, split with
    shlex) or defaults to the bundled ``python -m smpc.dimacs_solver``.
``pysat``
    an in-process incremental CaDiCaL through PySAT.

``auto`` picks ``external`` when ``SMPC_SAT_SOLVER`` is set, else ``pysat``.
"""

from __future__ import annotations

import enum
import logging
import os
import shlex
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field

from .encode import Cnf

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 300.0
ENV_SOLVER = "SMPC_SAT_SOLVER"
PYSAT_SOLVER = "cadical195"


class Status(str, enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"


@dataclass
class SolveResult:
    status: Status
    model: list[bool] | None = None  # model[v] for v in 1..n_vars; index 0 unused
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.model is not None) != (self.status is Status.SAT):
            raise ValueError("model must be present iff status is SAT")

    @property
    def sat(self) -> bool:
        return self.status is Status.SAT

    def literals(self) -> list[int]:
        return [v if val else -v for v, val in enumerate(self.model) if v]


@dataclass
class SolverConfig:
    backend: str = "auto"  # auto | external | pysat
    command: str | None = None
    timeout: float = DEFAULT_TIMEOUT

    def resolved_backend(self) -> str:
        if self.backend != "auto":
            return self.backend
        return "external" if (self.command or os.environ.get(ENV_SOLVER)) else "pysat"

    def argv(self) -> list[str]:
        cmd = self.command or os.environ.get(ENV_SOLVER)
        if cmd:
            return shlex.split(cmd)
        return [sys.executable, "-m", "smpc.dimacs_solver"]


def _complete_model(lits, n_vars: int) -> list[bool]:
    model = [False] * (n_vars + 1)
    for lit in lits:
        if lit > 0 and lit <= n_vars:
            model[lit] = True
    return model


def parse_solver_output(text: str, n_vars: int) -> SolveResult:
    status = Status.UNKNOWN
    lits: list[int] = []
    for line in text.splitlines():
        if line.startswith("s "):
            word = line[2:].strip()
            if word == "SATISFIABLE":
                status = Status.SAT
            elif word == "UNSATISFIABLE":
                status = Status.UNSAT
        elif line.startswith("v "):
            lits.extend(int(tok) for tok in line[2:].split() if tok != "0")
    if status is Status.SAT:
        return SolveResult(status, _complete_model(lits, n_vars))
    return SolveResult(status)


class Session:
    """A base CNF plus an append-only clause log."""

    def __init__(self, cnf: Cnf, config: SolverConfig | None = None):
        self.base = cnf
        self.extra: list[list[int]] = []
        self.config = config or SolverConfig()
        self.backend = self.config.resolved_backend()
        self._solver = None
        self._fed = 0
        self.n_solves = 0

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self):
        if self._solver is not None:
            self._solver.delete()
            self._solver = None

    @property
    def n_vars(self) -> int:
        top = self.base.n_vars
        for cl in self.extra:
            for lit in cl:
                top = max(top, abs(lit))
        return top

    def add_clause(self, clause) -> None:
        self.extra.append([int(x) for x in clause])

    def solve(self) -> SolveResult:
        self.n_solves += 1
        t0 = time.perf_counter()
        if any(not cl for cl in self.extra) or any(not cl for cl in self.base.clauses):
            # some backends choke on the empty clause
            res = SolveResult(Status.UNSAT)
        elif self.backend == "pysat":
            res = self._solve_pysat()
        elif self.backend == "external":
            res = self._solve_external()
        else:
            raise ValueError(f"unknown backend {self.backend!r}")
        res.stats["wall"] = time.perf_counter() - t0
        res.stats["backend"] = self.backend
        return res

    def _solve_pysat(self) -> SolveResult:
        from pysat.solvers import Solver

        if self._solver is None:
            self._solver = Solver(name=PYSAT_SOLVER, bootstrap_with=self.base.clauses)
            self._fed = 0
        for cl in self.extra[self._fed :]:
            self._solver.add_clause(cl)
        self._fed = len(self.extra)
        # CaDiCaL keeps the GIL while searching, so a timer thread cannot
        # interrupt it; search in growing conflict budgets and check the
        # clock between them instead
        deadline = time.monotonic() + self.config.timeout
        budget = 1000
        while True:
            self._solver.conf_budget(budget)
            ok = self._solver.solve_limited()
            if ok is not None or time.monotonic() >= deadline:
                break
            budget = min(2 * budget, 200_000)
        stats = dict(self._solver.accum_stats() or {})
        if ok is None:
            stats["reason"] = "timeout"
            return SolveResult(Status.UNKNOWN, stats=stats)
        if not ok:
            return SolveResult(Status.UNSAT, stats=stats)
        return SolveResult(Status.SAT, _complete_model(self._solver.get_model(), self.n_vars), stats)

    def _solve_external(self) -> SolveResult:
        nv = self.n_vars
        with tempfile.NamedTemporaryFile("w", suffix=".cnf", delete=False) as fh:
            path = fh.name
            fh.write(f"p cnf {nv} {len(self.base.clauses) + len(self.extra)}\n")
            for cl in self.base.clauses:
                fh.write(" ".join(map(str, cl)) + " 0\n")
            for cl in self.extra:
                fh.write(" ".join(map(str, cl)) + " 0\n")
        argv = self.config.argv() + [path]
        try:
            proc = subprocess.run(
                argv, capture_output=True, text=True, timeout=self.config.timeout
            )
        except subprocess.TimeoutExpired:
            return SolveResult(Status.UNKNOWN, stats={"reason": "timeout", "argv": argv})
        except OSError as exc:
            return SolveResult(Status.UNKNOWN, stats={"reason": f"launch failed: {exc}", "argv": argv})
        finally:
            os.unlink(path)
        res = parse_solver_output(proc.stdout, nv)
        if res.status is Status.UNKNOWN:
            res.stats.update(
                reason=f"no status line (exit {proc.returncode})",
                stderr=proc.stderr[-2000:],
                argv=argv,
            )
            log.warning("solver gave no answer: %s", res.stats["reason"])
        return res


def solve(session: Session) -> SolveResult:
    return session.solve()


def add_clause(session: Session, clause) -> None:
    session.add_clause(clause)


def solve_cnf(cnf: Cnf, config: SolverConfig | None = None) -> SolveResult:
    with Session(cnf, config) as s:
        return s.solve()
