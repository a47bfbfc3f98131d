"""Domain types for matching markets with couples, and the ground-truth
stability checker every other module is validated against.

Doctors and programs are dense 0-based integers.  ``NIL`` stands for the
unmatched option on both sides of the market; it is always acceptable and has
unbounded capacity.  Every ROL stored on an :class:`Instance` carries its
terminator explicitly (``NIL`` for singles and programs, ``(NIL, NIL)`` for
couples).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

NIL = -1
NIL_PAIR = (NIL, NIL)


class InstanceError(ValueError):
    pass


def _check_rol(owner: str, rol: Sequence, terminator) -> None:
    if not rol or rol[-1] != terminator:
        raise InstanceError(f"ROL of {owner} is not terminated by nil")
    body = rol[:-1]
    if terminator in body:
        raise InstanceError(f"ROL of {owner} has nil before its end")
    if len(set(body)) != len(body):
        raise InstanceError(f"ROL of {owner} has duplicates")


@dataclass(frozen=True, eq=True)
class Instance:
    """A complete market.

    ``single_rols[k]`` belongs to doctor ``singles[k]`` and ``couple_rols[k]``
    to ``couples[k]``.  Names are kept for I/O only.
    """

    doctor_names: tuple[str, ...]
    program_names: tuple[str, ...]
    quotas: tuple[int, ...]
    singles: tuple[int, ...]
    couples: tuple[tuple[int, int], ...]
    single_rols: tuple[tuple[int, ...], ...]
    couple_rols: tuple[tuple[tuple[int, int], ...], ...]
    program_rols: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        nd, np_ = len(self.doctor_names), len(self.program_names)
        if len(self.quotas) != np_ or len(self.program_rols) != np_:
            raise InstanceError("quotas/program ROLs must align with programs")
        if len(self.single_rols) != len(self.singles):
            raise InstanceError("single ROLs must align with singles")
        if len(self.couple_rols) != len(self.couples):
            raise InstanceError("couple ROLs must align with couples")
        members = list(self.singles) + [d for c in self.couples for d in c]
        if sorted(members) != list(range(nd)):
            raise InstanceError("singles and couple members must partition the doctors")
        for p, q in enumerate(self.quotas):
            if q < 1:
                raise InstanceError(f"program {self.program_names[p]} has quota {q} < 1")
        for d, rol in zip(self.singles, self.single_rols):
            _check_rol(self.doctor_names[d], rol, NIL)
            if any(not 0 <= p < np_ for p in rol[:-1]):
                raise InstanceError(f"ROL of {self.doctor_names[d]} names an unknown program")
        for (d1, d2), rol in zip(self.couples, self.couple_rols):
            _check_rol(f"({self.doctor_names[d1]}, {self.doctor_names[d2]})", rol, NIL_PAIR)
            for pair in rol[:-1]:
                if any(not (p == NIL or 0 <= p < np_) for p in pair):
                    raise InstanceError("couple ROL names an unknown program")
        for p, rol in enumerate(self.program_rols):
            _check_rol(self.program_names[p], rol, NIL)
            if any(not 0 <= d < nd for d in rol[:-1]):
                raise InstanceError(f"ROL of {self.program_names[p]} names an unknown doctor")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_names(
        cls,
        programs: Mapping[str, int],
        singles: Mapping[str, Sequence[str]],
        couples: Mapping[tuple[str, str], Sequence[tuple[str, str]]],
        program_rols: Mapping[str, Sequence[str]],
        doctor_order: Sequence[str] | None = None,
    ) -> "Instance":
        """Build from name-keyed ROLs without terminators.

        ``None`` (or ``"@nil"``) inside a couple pair means nil.  Doctors are
        numbered in ``doctor_order`` if given, else singles first then couple
        members in mapping order.
        """
        program_names = tuple(programs)
        pidx = {name: i for i, name in enumerate(program_names)}
        if doctor_order is None:
            doctor_order = list(singles) + [d for c in couples for d in c]
        doctor_names = tuple(doctor_order)
        didx = {name: i for i, name in enumerate(doctor_names)}
        if len(didx) != len(doctor_names):
            raise InstanceError("duplicate doctor names")

        def prog(name):
            if name is None or name == "@nil":
                return NIL
            try:
                return pidx[name]
            except KeyError:
                raise InstanceError(f"unknown program {name!r}") from None

        def doc(name):
            try:
                return didx[name]
            except KeyError:
                raise InstanceError(f"unknown doctor {name!r}") from None

        missing = [p for p in program_names if p not in program_rols]
        if missing:
            raise InstanceError(f"programs without ROL: {missing}")
        return cls(
            doctor_names=doctor_names,
            program_names=program_names,
            quotas=tuple(int(programs[p]) for p in program_names),
            singles=tuple(doc(d) for d in singles),
            couples=tuple((doc(a), doc(b)) for a, b in couples),
            single_rols=tuple(tuple(prog(p) for p in rol) + (NIL,) for rol in singles.values()),
            couple_rols=tuple(
                tuple((prog(a), prog(b)) for a, b in rol) + (NIL_PAIR,) for rol in couples.values()
            ),
            program_rols=tuple(tuple(doc(d) for d in program_rols[p]) + (NIL,) for p in program_names),
        )

    # -- derived lookups --------------------------------------------------

    @property
    def n_doctors(self) -> int:
        return len(self.doctor_names)

    @property
    def n_programs(self) -> int:
        return len(self.program_names)

    @cached_property
    def single_pos(self) -> dict[int, int]:
        return {d: k for k, d in enumerate(self.singles)}

    @cached_property
    def couple_of(self) -> dict[int, tuple[int, int]]:
        """doctor -> (couple index, member slot 0/1)"""
        out = {}
        for c, (d1, d2) in enumerate(self.couples):
            out[d1] = (c, 0)
            out[d2] = (c, 1)
        return out

    @cached_property
    def _single_rank(self) -> list[dict[int, int]]:
        return [{p: i for i, p in enumerate(rol)} for rol in self.single_rols]

    @cached_property
    def _couple_rank(self) -> list[dict[tuple[int, int], int]]:
        return [{pair: i for i, pair in enumerate(rol)} for rol in self.couple_rols]

    @cached_property
    def _program_rank(self) -> list[dict[int, int]]:
        return [{d: i for i, d in enumerate(rol)} for rol in self.program_rols]

    def rank_single(self, k: int, p: int) -> int:
        """Rank of program ``p`` on the ROL of the ``k``-th single."""
        return self._single_rank[k].get(p, len(self.single_rols[k]))

    def rank_couple(self, c: int, pair: tuple[int, int]) -> int:
        return self._couple_rank[c].get(tuple(pair), len(self.couple_rols[c]))

    def rank_program(self, p: int, d: int) -> int:
        return self._program_rank[p].get(d, len(self.program_rols[p]))

    def acceptable_to_program(self, p: int, d: int) -> bool:
        """d strictly above nil on p's ROL"""
        return self.rank_program(p, d) < len(self.program_rols[p]) - 1

    def ranked(self, d: int) -> tuple[int, ...]:
        """Options ``d`` could be matched to, in ROL order, ending with NIL."""
        if d in self.single_pos:
            return self.single_rols[self.single_pos[d]]
        c, slot = self.couple_of[d]
        seen: dict[int, None] = {}
        for pair in self.couple_rols[c]:
            seen.setdefault(pair[slot], None)
        seen.pop(NIL, None)
        return tuple(seen) + (NIL,)

    def describe(self, mu: "Matching") -> dict[str, str]:
        return {
            self.doctor_names[d]: "@nil" if p == NIL else self.program_names[p]
            for d, p in enumerate(mu.assignment)
        }


@dataclass(frozen=True, order=True)
class Matching:
    """Total map doctor -> program or NIL; ``assignment[d]`` is d's match."""

    assignment: tuple[int, ...]
    _holders: dict = field(default=None, compare=False, repr=False, hash=False)

    def __getitem__(self, d: int) -> int:
        return self.assignment[d]

    def __len__(self) -> int:
        return len(self.assignment)

    def holders(self, p: int) -> frozenset[int]:
        """Inverse view: doctors matched to ``p``."""
        if self._holders is None:
            inv: dict[int, set[int]] = {}
            for d, q in enumerate(self.assignment):
                inv.setdefault(q, set()).add(d)
            object.__setattr__(self, "_holders", {k: frozenset(v) for k, v in inv.items()})
        return self._holders.get(p, frozenset())

    def pair(self, couple: tuple[int, int]) -> tuple[int, int]:
        return self.assignment[couple[0]], self.assignment[couple[1]]

    @classmethod
    def from_names(cls, inst: Instance, names: Mapping[str, str | None]) -> "Matching":
        pidx = {p: i for i, p in enumerate(inst.program_names)}
        out = [NIL] * inst.n_doctors
        for d, name in enumerate(inst.doctor_names):
            p = names.get(name)
            out[d] = NIL if p in (None, "@nil") else pidx[p]
        return cls(tuple(out))

    @classmethod
    def unmatched(cls, inst: Instance) -> "Matching":
        return cls((NIL,) * inst.n_doctors)


# -- program side -----------------------------------------------------------


def choice(p: int, applicants: Iterable[int], inst: Instance) -> frozenset[int]:
    """The subset of ``applicants`` program ``p`` would keep."""
    applicants = frozenset(applicants)
    if p == NIL:
        return applicants
    ok = sorted(
        (d for d in applicants if inst.acceptable_to_program(p, d)),
        key=lambda d: inst.rank_program(p, d),
    )
    return frozenset(ok[: inst.quotas[p]])


def will_accept(p: int, applicants: Iterable[int], mu: Matching, inst: Instance) -> bool:
    if p == NIL:
        return True
    applicants = frozenset(applicants)
    return applicants <= choice(p, mu.holders(p) | applicants, inst)


# -- stability ----------------------------------------------------------------


@dataclass(frozen=True)
class BlockingPair:
    """``who`` is a doctor (kind 'single') or couple index; ``target`` is a
    program or a program pair."""

    kind: str  # "single" | "couple" | "couple-same"
    who: int
    target: int | tuple[int, int]


def find_blocking_pairs(mu: Matching, inst: Instance) -> list[BlockingPair]:
    out = []
    for k, d in enumerate(inst.singles):
        rol = inst.single_rols[k]
        cur = inst.rank_single(k, mu[d])
        for p in rol[: min(cur, len(rol) - 1)]:
            if will_accept(p, (d,), mu, inst):
                out.append(BlockingPair("single", d, p))
    for c, (d1, d2) in enumerate(inst.couples):
        rol = inst.couple_rols[c]
        cur = inst.rank_couple(c, mu.pair((d1, d2)))
        for p1, p2 in rol[: min(cur, len(rol) - 1)]:
            if p1 != p2:
                if will_accept(p1, (d1,), mu, inst) and will_accept(p2, (d2,), mu, inst):
                    out.append(BlockingPair("couple", c, (p1, p2)))
            elif will_accept(p1, (d1, d2), mu, inst):
                out.append(BlockingPair("couple-same", c, (p1, p2)))
    return out


def is_individually_rational(mu: Matching, inst: Instance) -> bool:
    if len(mu) != inst.n_doctors:
        return False
    for k, d in enumerate(inst.singles):
        if inst.rank_single(k, mu[d]) >= len(inst.single_rols[k]):
            return False
    for c, couple in enumerate(inst.couples):
        if inst.rank_couple(c, mu.pair(couple)) >= len(inst.couple_rols[c]):
            return False
    for p in range(inst.n_programs):
        held = mu.holders(p)
        if len(held) > inst.quotas[p]:
            return False
        if not all(inst.acceptable_to_program(p, d) for d in held):
            return False
    return True


def is_stable(mu: Matching, inst: Instance) -> bool:
    return is_individually_rational(mu, inst) and not find_blocking_pairs(mu, inst)


# -- resident preference --------------------------------------------------------


def resident_ranks(mu: Matching, inst: Instance) -> tuple[list[int], list[int]]:
    """Per-single and per-couple ROL rank of their outcome under ``mu``."""
    singles = [inst.rank_single(k, mu[d]) for k, d in enumerate(inst.singles)]
    couples = [inst.rank_couple(c, mu.pair(cp)) for c, cp in enumerate(inst.couples)]
    return singles, couples


def weakly_dominates(mu1: Matching, mu2: Matching, inst: Instance) -> bool:
    s1, c1 = resident_ranks(mu1, inst)
    s2, c2 = resident_ranks(mu2, inst)
    return all(a <= b for a, b in zip(s1, s2)) and all(a <= b for a, b in zip(c1, c2))


def dominates(mu1: Matching, mu2: Matching, inst: Instance) -> bool:
    """mu1 strictly resident-preferred to mu2.

    Outcomes off a participant's ROL all share the worst rank, so two
    matchings differing only in unacceptable placements compare equal.
    """
    s1, c1 = resident_ranks(mu1, inst)
    s2, c2 = resident_ranks(mu2, inst)
    r1, r2 = s1 + c1, s2 + c2
    return r1 != r2 and all(a <= b for a, b in zip(r1, r2))


# -- preprocessing --------------------------------------------------------------


def preprocess(inst: Instance) -> Instance:
    """Drop ROL entries the program side finds unacceptable."""

    def ok(p, d):
        return p == NIL or inst.acceptable_to_program(p, d)

    singles = tuple(
        tuple(p for p in rol if ok(p, d)) for d, rol in zip(inst.singles, inst.single_rols)
    )
    couples = tuple(
        tuple(pair for pair in rol if ok(pair[0], d1) and ok(pair[1], d2))
        for (d1, d2), rol in zip(inst.couples, inst.couple_rols)
    )
    if singles == inst.single_rols and couples == inst.couple_rols:
        return inst
    return Instance(
        doctor_names=inst.doctor_names,
        program_names=inst.program_names,
        quotas=inst.quotas,
        singles=inst.singles,
        couples=inst.couples,
        single_rols=singles,
        couple_rols=couples,
        program_rols=inst.program_rols,
    )
