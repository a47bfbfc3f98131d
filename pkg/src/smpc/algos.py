"""Solver loops over the encoding: enumerate every stable matching, climb to
a resident Pareto optimal one, and describe the dominance structure of the
stable set."""

from __future__ import annotations

from dataclasses import dataclass, field
from statistics import fmean

from .encode import blocking_clause, decode, domination_constraint, encode
from .model import Instance, Matching, dominates, is_stable, preprocess, resident_ranks
from .satio import Session, SolverConfig, Status


class SolverFailure(RuntimeError):
    """The backend answered UNKNOWN where a definite answer was required."""


@dataclass
class StableSet:
    matchings: list[Matching] = field(default_factory=list)
    rp_opt: list[bool] = field(default_factory=list)
    complete: bool = True
    n_solves: int = 0

    def __len__(self):
        return len(self.matchings)

    @property
    def satisfiable(self) -> bool:
        return bool(self.matchings)

    @property
    def has_unique(self) -> bool:
        return len(self.matchings) == 1

    @property
    def n_rp_opt(self) -> int:
        return sum(self.rp_opt)

    @property
    def has_ropt(self) -> bool:
        return self.n_rp_opt == 1

    @property
    def the_ropt(self) -> Matching | None:
        if not self.has_ropt:
            return None
        return self.matchings[self.rp_opt.index(True)]

    def rp_opt_matchings(self) -> list[Matching]:
        return [m for m, flag in zip(self.matchings, self.rp_opt) if flag]

    def as_set(self) -> frozenset[Matching]:
        return frozenset(self.matchings)


def enumerate_all(
    inst: Instance, limit: int | None = None, config: SolverConfig | None = None
) -> StableSet:
    """Every stable matching of ``inst`` (up to ``limit``), classified.

    A solver UNKNOWN stops the loop and marks the result incomplete.
    """
    inst = preprocess(inst)
    cnf, reg = encode(inst)
    found: list[Matching] = []
    complete = True
    with Session(cnf, config) as session:
        while limit is None or len(found) < limit:
            res = session.solve()
            if res.status is Status.UNKNOWN:
                complete = False
                break
            if not res.sat:
                break
            mu = decode(res.literals(), reg)
            found.append(mu)
            session.add_clause(blocking_clause(mu, reg))
        else:
            complete = False
        n_solves = session.n_solves
    found.sort()
    out = StableSet(found, complete=complete, n_solves=n_solves)
    return classify(out, inst)


def classify(stable: StableSet, inst: Instance) -> StableSet:
    ms = stable.matchings
    stable.rp_opt = [not any(dominates(other, m, inst) for other in ms) for m in ms]
    return stable


def pareto_chain(
    inst: Instance, mu: Matching, config: SolverConfig | None = None, incremental: bool = False
) -> list[Matching]:
    """Successively dominating stable matchings starting at ``mu``; the last
    one is resident Pareto optimal.

    By default every step encodes from scratch.  ``incremental`` keeps one
    solver and guards each round's constraints with a fresh activation
    literal instead.
    """
    inst = preprocess(inst)
    if not is_stable(mu, inst):
        raise ValueError("pareto improvement needs a stable starting matching")
    chain = [mu]
    if incremental:
        cnf, reg = encode(inst)
        with Session(cnf, config) as session:
            while True:
                act = session.n_vars + 1
                for cl in [blocking_clause(mu, reg)] + domination_constraint(mu, reg):
                    session.add_clause([-act] + cl)
                session.add_clause([act])
                res = session.solve()
                # retire this round; the next one demands strictly more anyway
                session.add_clause([-act])
                if res.status is Status.UNKNOWN:
                    raise SolverFailure("solver gave up during pareto improvement")
                if not res.sat:
                    return chain
                mu = decode(res.literals(), reg)
                chain.append(mu)
    while True:
        cnf, reg = encode(inst)
        cnf.add(blocking_clause(mu, reg))
        for cl in domination_constraint(mu, reg):
            cnf.add(cl)
        with Session(cnf, config) as session:
            res = session.solve()
        if res.status is Status.UNKNOWN:
            raise SolverFailure("solver gave up during pareto improvement")
        if not res.sat:
            return chain
        mu = decode(res.literals(), reg)
        chain.append(mu)


def pareto_improve(
    inst: Instance, mu: Matching, config: SolverConfig | None = None, incremental: bool = False
) -> Matching:
    return pareto_chain(inst, mu, config, incremental)[-1]


# -- improvement graph ---------------------------------------------------------


@dataclass
class ParetoGraph:
    matchings: list[Matching]
    averages: list[tuple[float, float]]  # (singles' mean rank, couples' mean rank)
    rp_opt: list[bool]
    edges: list[tuple[int, int, int, int]]  # (from, to, max single gain, max couple gain)

    def components(self) -> list[set[int]]:
        parent = list(range(len(self.matchings)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b, *_ in self.edges:
            parent[find(a)] = find(b)
        groups: dict[int, set[int]] = {}
        for i in range(len(parent)):
            groups.setdefault(find(i), set()).add(i)
        return list(groups.values())

    def to_dot(self, highlight: Matching | None = None) -> str:
        lines = ["digraph pareto {", "  rankdir=BT;"]
        for i, (m, (sa, ca), opt) in enumerate(zip(self.matchings, self.averages, self.rp_opt)):
            attrs = [f'label="({sa:.4g}, {ca:.4g})"']
            if highlight is not None and m == highlight:
                attrs.append("shape=box")
            if opt:
                attrs.append("peripheries=2")
                attrs.append("style=filled")
                attrs.append('fillcolor="lightgrey"')
            lines.append(f"  n{i} [{', '.join(attrs)}];")
        for a, b, gs, gc in self.edges:
            lines.append(f'  n{a} -> n{b} [label="({gs}, {gc})"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _average(xs) -> float:
    return fmean(xs) if xs else 0.0


def build_pareto_graph(stable: StableSet, inst: Instance) -> ParetoGraph:
    """Dominance among the stable matchings with composite moves removed."""
    inst = preprocess(inst)
    ms = stable.matchings
    if len(stable.rp_opt) != len(ms):
        classify(stable, inst)
    ranks = [resident_ranks(m, inst) for m in ms]
    k = len(ms)
    better = [[dominates(ms[b], ms[a], inst) for b in range(k)] for a in range(k)]
    edges = []
    for a in range(k):
        for b in range(k):
            if not better[a][b]:
                continue
            if any(better[a][c] and better[c][b] for c in range(k)):
                continue
            (sa, ca), (sb, cb) = ranks[a], ranks[b]
            gs = max((x - y for x, y in zip(sa, sb)), default=0)
            gc = max((x - y for x, y in zip(ca, cb)), default=0)
            edges.append((a, b, gs, gc))
    averages = [(_average(s), _average(c)) for s, c in ranks]
    return ParetoGraph(list(ms), averages, list(stable.rp_opt), edges)
