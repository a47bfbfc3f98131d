"""Exhaustive ground truth for small instances.

Shares nothing with the SAT path except the stability checker in
:mod:`smpc.model`.  Dominance and optimality are recomputed here straight
from the ROLs.
"""

from __future__ import annotations

from math import prod

from .algos import StableSet
from .model import NIL, Instance, Matching, is_stable

MAX_CANDIDATES = 10**7


class OracleTooLarge(ValueError):
    pass


def search_space(inst: Instance) -> int:
    return prod(len(r) for r in inst.single_rols) * prod(len(r) for r in inst.couple_rols)


def all_stable_matchings(inst: Instance, guard: int = MAX_CANDIDATES) -> list[Matching]:
    size = search_space(inst)
    if size > guard:
        raise OracleTooLarge(f"{size} candidate matchings exceeds guard {guard}")
    # (doctors, options) per participant; couples pick whole ROL entries
    slots = [((d,), [(p,) for p in rol]) for d, rol in zip(inst.singles, inst.single_rols)]
    slots += [(c, list(rol)) for c, rol in zip(inst.couples, inst.couple_rols)]
    load = [0] * inst.n_programs
    assign = [NIL] * inst.n_doctors
    out = []

    def place(k):
        if k == len(slots):
            mu = Matching(tuple(assign))
            if is_stable(mu, inst):
                out.append(mu)
            return
        docs, options = slots[k]
        for opt in options:
            if any(p != NIL and load[p] + opt.count(p) > inst.quotas[p] for p in opt):
                continue
            for d, p in zip(docs, opt):
                assign[d] = p
                if p != NIL:
                    load[p] += 1
            place(k + 1)
            for d, p in zip(docs, opt):
                if p != NIL:
                    load[p] -= 1
                assign[d] = NIL

    place(0)
    return sorted(set(out))


def _prefers_weakly(inst: Instance, a: Matching, b: Matching) -> bool:
    for d, rol in zip(inst.singles, inst.single_rols):
        rol = list(rol)
        ia = rol.index(a[d]) if a[d] in rol else len(rol)
        ib = rol.index(b[d]) if b[d] in rol else len(rol)
        if ia > ib:
            return False
    for (d1, d2), rol in zip(inst.couples, inst.couple_rols):
        rol = list(rol)
        pa, pb = (a[d1], a[d2]), (b[d1], b[d2])
        ia = rol.index(pa) if pa in rol else len(rol)
        ib = rol.index(pb) if pb in rol else len(rol)
        if ia > ib:
            return False
    return True


def naive_dominates(inst: Instance, a: Matching, b: Matching) -> bool:
    return _prefers_weakly(inst, a, b) and not _prefers_weakly(inst, b, a)


def brute_force_stable_set(inst: Instance, guard: int = MAX_CANDIDATES) -> StableSet:
    ms = all_stable_matchings(inst, guard)
    flags = [not any(naive_dominates(inst, o, m) for o in ms) for m in ms]
    return StableSet(ms, flags, complete=True)
