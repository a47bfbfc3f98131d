"""Deferred-acceptance heuristics for markets with couples.

Both algorithms share one proposal engine.  Doctors propose down their ROLs
and programs hold the best applicants up to quota.  A couple proposes pair
by pair and is held only if both programs take their member (a pair
``(p, p)`` needs two seats).  When one member of a held couple is bumped,
the partner is withdrawn and the couple resumes below the pair it lost.

Withdrawals open seats behind the proposal front, so after the queue
drains the engine looks for blocking pairs among participants already in
the market and moves the first blocker (singles before couples, in order)
to its best willing option, then drains again.  This repeats until nothing
blocks.  A tentative assignment seen twice at a round
boundary means the engine is cycling; a global proposal budget bounds
everything else.

``rp99``  singles first, then couples inserted one at a time, re-stabilising
          after each insertion.
``kpr``   every single and couple enters the queue at once.
"""

from __future__ import annotations

import enum
import random
from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .model import NIL, Instance, Matching, is_stable


class DaStatus(str, enum.Enum):
    MATCHED = "MATCHED"
    FAILED_CYCLE = "FAILED_CYCLE"
    FAILED_TIMEOUT = "FAILED_TIMEOUT"


@dataclass
class DaOutcome:
    status: DaStatus
    matching: Matching | None
    iterations: int

    @property
    def matched(self) -> bool:
        return self.status is DaStatus.MATCHED


class DaInvariantError(AssertionError):
    """A run finished without blocking pairs but the checker disagrees."""


class _Cycle(Exception):
    pass


class _Budget(Exception):
    pass


def default_cap(inst: Instance) -> int:
    longest = max(
        [len(r) for r in inst.single_rols] + [len(r) for r in inst.couple_rols] + [1]
    )
    return 10 * max(inst.n_doctors, 1) * longest


class _Engine:
    def __init__(self, inst: Instance, cap: int):
        self.inst = inst
        self.cap = cap
        self.events = 0
        self.assign = [NIL] * inst.n_doctors
        self.held: list[set[int]] = [set() for _ in range(inst.n_programs)]
        self.s_ptr = [0] * len(inst.singles)
        self.c_ptr = [0] * len(inst.couples)
        self.in_market_s: list[int] = []
        self.in_market_c: list[int] = []
        self.queue: deque[tuple[str, int]] = deque()

    # -- program side ----------------------------------------------------------

    def _tick(self):
        self.events += 1
        if self.events > self.cap:
            raise _Budget

    def accepts(self, p: int, docs: Sequence[int]) -> bool:
        if p == NIL:
            return True
        inst = self.inst
        if not all(inst.acceptable_to_program(p, d) for d in docs):
            return False
        pool = self.held[p] | set(docs)
        q = inst.quotas[p]
        if len(pool) <= q:
            return True
        worst_new = max(inst.rank_program(p, d) for d in docs)
        better = sum(1 for d in pool if inst.rank_program(p, d) < worst_new)
        return better < q

    def _admit(self, p: int, docs: Sequence[int]) -> None:
        for d in docs:
            self.assign[d] = p
        if p == NIL:
            return
        held = self.held[p]
        held.update(docs)
        q = self.inst.quotas[p]
        while len(held) > q:
            worst = max(held, key=lambda d: self.inst.rank_program(p, d))
            held.discard(worst)
            self._bumped(worst)

    def _vacate(self, d: int) -> None:
        p = self.assign[d]
        if p != NIL:
            self.held[p].discard(d)
        self.assign[d] = NIL

    def _bumped(self, d: int) -> None:
        self.assign[d] = NIL
        inst = self.inst
        if d in inst.single_pos:
            k = inst.single_pos[d]
            self.s_ptr[k] += 1
            self.queue.append(("s", k))
        else:
            c, slot = inst.couple_of[d]
            self._vacate(inst.couples[c][1 - slot])
            self.c_ptr[c] += 1
            self.queue.append(("c", c))

    # -- proposals ----------------------------------------------------------------

    def _propose_single(self, k: int) -> None:
        d = self.inst.singles[k]
        rol = self.inst.single_rols[k]
        while self.s_ptr[k] < len(rol) - 1:
            self._tick()
            p = rol[self.s_ptr[k]]
            if self.accepts(p, (d,)):
                self._admit(p, (d,))
                return
            self.s_ptr[k] += 1
        self.assign[d] = NIL

    def _couple_fits(self, c: int, pair: tuple[int, int]) -> bool:
        d1, d2 = self.inst.couples[c]
        p1, p2 = pair
        if p1 == p2 and p1 != NIL:
            return self.accepts(p1, (d1, d2))
        return self.accepts(p1, (d1,)) and self.accepts(p2, (d2,))

    def _place_couple(self, c: int, pair: tuple[int, int]) -> None:
        d1, d2 = self.inst.couples[c]
        p1, p2 = pair
        if p1 == p2:
            self._admit(p1, (d1, d2))
        else:
            self._admit(p1, (d1,))
            # the first admission may have withdrawn nobody from this couple:
            # its members were unplaced while proposing
            self._admit(p2, (d2,))

    def _propose_couple(self, c: int) -> None:
        rol = self.inst.couple_rols[c]
        while self.c_ptr[c] < len(rol) - 1:
            self._tick()
            pair = rol[self.c_ptr[c]]
            if self._couple_fits(c, pair):
                self._place_couple(c, pair)
                return
            self.c_ptr[c] += 1
        d1, d2 = self.inst.couples[c]
        self.assign[d1] = self.assign[d2] = NIL

    def drain(self) -> None:
        while self.queue:
            kind, i = self.queue.popleft()
            if kind == "s":
                self._propose_single(i)
            else:
                self._propose_couple(i)

    # -- re-stabilisation ------------------------------------------------------------

    def _single_block(self, k: int) -> int | None:
        d = self.inst.singles[k]
        rol = self.inst.single_rols[k]
        for idx in range(min(self.s_ptr[k], len(rol) - 1)):
            if self.accepts(rol[idx], (d,)):
                return idx
        return None

    def _couple_block(self, c: int) -> int | None:
        rol = self.inst.couple_rols[c]
        for idx in range(min(self.c_ptr[c], len(rol) - 1)):
            if self._couple_fits(c, rol[idx]):
                return idx
        return None

    def _move_single(self, k: int, idx: int) -> None:
        self._tick()
        d = self.inst.singles[k]
        self._vacate(d)
        self.s_ptr[k] = idx
        self._admit(self.inst.single_rols[k][idx], (d,))

    def _move_couple(self, c: int, idx: int) -> None:
        self._tick()
        d1, d2 = self.inst.couples[c]
        self._vacate(d1)
        self._vacate(d2)
        self.c_ptr[c] = idx
        self._place_couple(c, self.inst.couple_rols[c][idx])

    def _first_blocker(self) -> tuple[str, int, int] | None:
        for k in self.in_market_s:
            idx = self._single_block(k)
            if idx is not None:
                return "s", k, idx
        for c in self.in_market_c:
            idx = self._couple_block(c)
            if idx is not None:
                return "c", c, idx
        return None

    def stabilize(self) -> None:
        # One blocker moves per round.  A drained state fixes every pointer,
        # so the round transition is a function of the assignment alone and
        # a repeated assignment is a genuine cycle.
        seen: set[tuple[int, ...]] = set()
        while True:
            self.drain()
            state = tuple(self.assign)
            if state in seen:
                raise _Cycle
            seen.add(state)
            blocker = self._first_blocker()
            if blocker is None:
                return
            kind, i, idx = blocker
            if kind == "s":
                self._move_single(i, idx)
            else:
                self._move_couple(i, idx)

    def result(self) -> Matching:
        return Matching(tuple(self.assign))


def _run(inst: Instance, stages: list[list[tuple[str, int]]], cap: int | None) -> DaOutcome:
    eng = _Engine(inst, default_cap(inst) if cap is None else cap)
    try:
        for entrants in stages:
            for kind, i in entrants:
                (eng.in_market_s if kind == "s" else eng.in_market_c).append(i)
                eng.queue.append((kind, i))
            eng.stabilize()
    except _Cycle:
        return DaOutcome(DaStatus.FAILED_CYCLE, None, eng.events)
    except _Budget:
        return DaOutcome(DaStatus.FAILED_TIMEOUT, None, eng.events)
    mu = eng.result()
    if not is_stable(mu, inst):
        raise DaInvariantError("deferred acceptance settled on an unstable matching")
    return DaOutcome(DaStatus.MATCHED, mu, eng.events)


def couple_order(inst: Instance, seed: int | None = None) -> list[int]:
    order = list(range(len(inst.couples)))
    if seed is not None:
        random.Random(seed).shuffle(order)
    return order


def run_rp99(inst: Instance, order: Sequence[int] | None = None, cap: int | None = None) -> DaOutcome:
    order = list(range(len(inst.couples))) if order is None else list(order)
    if sorted(order) != list(range(len(inst.couples))):
        raise ValueError("couple order must be a permutation of the couples")
    stages = [[("s", k) for k in range(len(inst.singles))]]
    stages += [[("c", c)] for c in order]
    return _run(inst, stages, cap)


def run_kpr(inst: Instance, cap: int | None = None) -> DaOutcome:
    # queue follows doctor order; a couple enters at its first member
    entrants, seen = [], set()
    for d in range(inst.n_doctors):
        if d in inst.single_pos:
            entrants.append(("s", inst.single_pos[d]))
        elif inst.couple_of[d][0] not in seen:
            seen.add(inst.couple_of[d][0])
            entrants.append(("c", inst.couple_of[d][0]))
    return _run(inst, [entrants], cap)


def run(algo: str, inst: Instance, cap: int | None = None, order: Sequence[int] | None = None) -> DaOutcome:
    if algo == "rp99":
        return run_rp99(inst, order=order, cap=cap)
    if algo == "kpr":
        return run_kpr(inst, cap=cap)
    raise ValueError(f"unknown algorithm {algo!r}")
