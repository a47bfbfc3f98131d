"""CNF encoding whose models correspond one-to-one with stable matchings.

Three families of variables:

* ``m_d[d, p]``  doctor ``d`` is matched to ``p`` (``p`` may be NIL);
* ``m_c[c, i]``  couple ``c`` holds a pair it ranks ``i`` or better;
* ``m_p[p, i, s]`` exactly ``s`` of the first ``i + 1`` doctors on ``p``'s ROL
  are matched to ``p``.

Out-of-range references are folded to constants while clauses are built:
the empty prefix (``i == -1``) has count 0, counts above ``i + 1`` are
impossible, and NIL never refuses anybody.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

from .model import NIL, Instance, Matching, preprocess


class EncodingError(RuntimeError):
    pass


class _Const:
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self.value = value

    def __repr__(self):
        return "TRUE" if self.value else "FALSE"


TRUE = _Const(True)
FALSE = _Const(False)


def neg(lit):
    if lit is TRUE:
        return FALSE
    if lit is FALSE:
        return TRUE
    return -lit


@dataclass
class Cnf:
    n_vars: int = 0
    clauses: list[list[int]] = field(default_factory=list)
    comments: list[str] = field(default_factory=list)

    def new_var(self) -> int:
        self.n_vars += 1
        return self.n_vars

    def add(self, lits: Iterable) -> None:
        """Add a clause, folding constants and dropping tautologies."""
        out: list[int] = []
        seen = set()
        for lit in lits:
            if lit is TRUE:
                return
            if lit is FALSE:
                continue
            if -lit in seen:
                return
            if lit not in seen:
                seen.add(lit)
                out.append(lit)
        self.clauses.append(out)

    def add_equiv_dnf(self, x, terms: Sequence[Sequence]) -> None:
        """x <-> OR of AND-terms, expanded without auxiliary variables."""
        live = []
        for term in terms:
            if any(t is FALSE for t in term):
                continue
            term = [t for t in term if t is not TRUE]
            if not term:
                self.add([x])
                return
            live.append(term)
        if not live:
            self.add([neg(x)])
            return
        for term in live:
            self.add([neg(t) for t in term] + [x])
        for pick in product(*live):
            self.add([neg(x), *pick])

    def to_dimacs(self) -> str:
        lines = [f"c {c}" for c in self.comments]
        lines.append(f"p cnf {self.n_vars} {len(self.clauses)}")
        lines.extend(" ".join(map(str, cl)) + " 0" if cl else "0" for cl in self.clauses)
        return "\n".join(lines) + "\n"


@dataclass
class VarRegistry:
    inst: Instance
    m_d: dict[tuple[int, int], int] = field(default_factory=dict)
    m_c: dict[tuple[int, int], int] = field(default_factory=dict)
    m_p: dict[tuple[int, int, int], int] = field(default_factory=dict)

    def md(self, d: int, p: int):
        return self.m_d.get((d, p), FALSE)

    def mc(self, c: int, i: int):
        return self.m_c[(c, i)]

    def mp(self, p: int, i: int, s: int):
        if i < 0:
            return TRUE if s == 0 else FALSE
        if s < 0 or s > min(i + 1, self.inst.quotas[p] + 1):
            return FALSE
        return self.m_p[(p, i, s)]

    def refuses(self, p: int, d: int, fill: int | None = None):
        """Literal for "p already holds ``fill`` (default: quota) doctors it
        ranks above d"."""
        if p == NIL:
            return FALSE
        q = self.inst.quotas[p] if fill is None else fill
        return self.mp(p, self.inst.rank_program(p, d) - 1, q)


def _at_most_one(cnf: Cnf, xs: Sequence[int], method: str) -> None:
    if method == "pairwise" or len(xs) <= 4:
        for i in range(len(xs)):
            for j in range(i + 1, len(xs)):
                cnf.add([-xs[i], -xs[j]])
    elif method == "sequential":
        s = [cnf.new_var() for _ in range(len(xs) - 1)]
        cnf.add([-xs[0], s[0]])
        for i in range(1, len(xs) - 1):
            cnf.add([-xs[i], s[i]])
            cnf.add([-s[i - 1], s[i]])
            cnf.add([-xs[i], -s[i - 1]])
        cnf.add([-xs[-1], -s[-1]])
    else:
        raise ValueError(f"unknown at-most-one method {method!r}")


def _check_preprocessed(inst: Instance) -> None:
    for d, rol in zip(inst.singles, inst.single_rols):
        for p in rol[:-1]:
            if not inst.acceptable_to_program(p, d):
                raise EncodingError(
                    f"{inst.program_names[p]} does not rank {inst.doctor_names[d]}; preprocess first"
                )
    for (d1, d2), rol in zip(inst.couples, inst.couple_rols):
        for p1, p2 in rol[:-1]:
            for p, d in ((p1, d1), (p2, d2)):
                if p != NIL and not inst.acceptable_to_program(p, d):
                    raise EncodingError(
                        f"{inst.program_names[p]} does not rank {inst.doctor_names[d]}; preprocess first"
                    )


def encode(inst: Instance, amo: str = "pairwise", comments: bool = True) -> tuple[Cnf, VarRegistry]:
    """Encode a preprocessed instance."""
    _check_preprocessed(inst)
    cnf = Cnf()
    reg = VarRegistry(inst)
    names, pnames = inst.doctor_names, inst.program_names

    def pname(p):
        return "@nil" if p == NIL else pnames[p]

    ranked = [inst.ranked(d) for d in range(inst.n_doctors)]
    for d in range(inst.n_doctors):
        for p in ranked[d]:
            reg.m_d[(d, p)] = cnf.new_var()
    for c, rol in enumerate(inst.couple_rols):
        for i in range(len(rol)):
            reg.m_c[(c, i)] = cnf.new_var()
    for p, rol in enumerate(inst.program_rols):
        q = inst.quotas[p]
        for i in range(len(rol) - 1):
            for s in range(min(i + 1, q + 1) + 1):
                reg.m_p[(p, i, s)] = cnf.new_var()
    if comments:
        cnf.comments += [f"map d {names[d]} {pname(p)} {v}" for (d, p), v in reg.m_d.items()]
        for (c, i), v in reg.m_c.items():
            d1, d2 = inst.couples[c]
            cnf.comments.append(f"map c {names[d1]} {names[d2]} {i} {v}")
        cnf.comments += [f"map p {pnames[p]} {i} {s} {v}" for (p, i, s), v in reg.m_p.items()]

    # unique match
    for d in range(inst.n_doctors):
        row = [reg.m_d[(d, p)] for p in ranked[d]]
        _at_most_one(cnf, row, amo)
        cnf.add(row)

    # couple prefix variables
    for c, ((d1, d2), rol) in enumerate(zip(inst.couples, inst.couple_rols)):
        for k, (p1, p2) in enumerate(rol):
            here = [reg.md(d1, p1), reg.md(d2, p2)]
            terms = [here] if k == 0 else [here, [reg.mc(c, k - 1)]]
            cnf.add_equiv_dnf(reg.mc(c, k), terms)
        cnf.add([reg.mc(c, len(rol) - 1)])

    # program fill counters
    for p, rol in enumerate(inst.program_rols):
        q = inst.quotas[p]
        for i in range(len(rol) - 1):
            x = reg.md(rol[i], p)
            for s in range(min(i + 1, q + 1) + 1):
                terms = [[reg.mp(p, i - 1, s), neg(x)], [reg.mp(p, i - 1, s - 1), x]]
                cnf.add_equiv_dnf(reg.mp(p, i, s), terms)
            if q + 1 <= i + 1:
                cnf.add([-reg.mp(p, i, q + 1)])

    # singles
    for d, rol in zip(inst.singles, inst.single_rols):
        for r, p in enumerate(rol[:-1]):
            cnf.add([reg.md(d, pp) for pp in rol[: r + 1]] + [reg.refuses(p, d)])

    # couples
    for c, ((d1, d2), rol) in enumerate(zip(inst.couples, inst.couple_rols)):
        for r, (p1, p2) in enumerate(rol[:-1]):
            here = reg.mc(c, r)
            if p1 != p2:
                no1, no2 = reg.refuses(p1, d1), reg.refuses(p2, d2)
                cnf.add([neg(reg.md(d1, p1)), here, no2])
                cnf.add([neg(reg.md(d2, p2)), here, no1])
                cnf.add([reg.md(d1, p1), reg.md(d2, p2), here, no1, no2])
                continue
            p = p1
            q = inst.quotas[p]
            lo = d2 if inst.rank_program(p, d1) < inst.rank_program(p, d2) else d1
            # whoever sits in p already, the pair is refused iff the lower
            # ranked member would not fit next to the other
            cnf.add([neg(reg.md(d1, p)), here, reg.refuses(p, lo, q if lo == d2 else q - 1)])
            cnf.add([neg(reg.md(d2, p)), here, reg.refuses(p, lo, q if lo == d1 else q - 1)])
            cnf.add(
                [reg.md(d1, p), reg.md(d2, p), here]
                + [reg.refuses(p, d, f) for d in (d1, d2) for f in (q, q - 1)]
            )
    return cnf, reg


def decode(model: Iterable[int], reg: VarRegistry) -> Matching:
    """Read the matching off a model (signed literals or true variable ids)."""
    true = {v for v in model if v > 0}
    inst = reg.inst
    out = [NIL] * inst.n_doctors
    found = [0] * inst.n_doctors
    for (d, p), v in reg.m_d.items():
        if v in true:
            out[d] = p
            found[d] += 1
    bad = [inst.doctor_names[d] for d, k in enumerate(found) if k != 1]
    if bad:
        raise EncodingError(f"model does not place doctors {bad} exactly once")
    return Matching(tuple(out))


def blocking_clause(mu: Matching, reg: VarRegistry) -> list[int]:
    try:
        return [-reg.m_d[(d, p)] for d, p in enumerate(mu.assignment)]
    except KeyError as exc:
        raise EncodingError(f"matching uses an option with no variable: {exc}") from None


def domination_constraint(mu: Matching, reg: VarRegistry) -> list[list[int]]:
    """Clauses forcing every single and couple to do at least as well as in mu."""
    inst = reg.inst
    out = []
    for k, d in enumerate(inst.singles):
        rol = inst.single_rols[k]
        r = inst.rank_single(k, mu[d])
        out.append([reg.m_d[(d, p)] for p in rol[: r + 1]])
    for c, couple in enumerate(inst.couples):
        out.append([reg.mc(c, inst.rank_couple(c, mu.pair(couple)))])
    return out


def encode_instance(inst: Instance, amo: str = "pairwise") -> tuple[Cnf, VarRegistry]:
    """Preprocess then encode."""
    return encode(preprocess(inst), amo=amo)


def parse_dimacs(text: str) -> tuple[Cnf, dict[tuple[str, str], int]]:
    """Parse DIMACS, returning the clauses plus the ``map d`` comments."""
    cnf = Cnf()
    doctor_map = {}
    declared = None
    pending: list[int] = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("c"):
            body = line[1:].strip()
            cnf.comments.append(body)
            parts = body.split()
            if len(parts) == 5 and parts[:2] == ["map", "d"]:
                doctor_map[(parts[2], parts[3])] = int(parts[4])
            continue
        if line.startswith("p"):
            _, fmt, nv, nc = line.split()
            if fmt != "cnf":
                raise ValueError(f"not a CNF header: {line}")
            cnf.n_vars, declared = int(nv), int(nc)
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                cnf.clauses.append(pending)
                pending = []
            else:
                pending.append(lit)
    if pending:
        cnf.clauses.append(pending)
    if declared is not None and declared != len(cnf.clauses):
        raise ValueError(f"header declares {declared} clauses, found {len(cnf.clauses)}")
    return cnf, doctor_map
