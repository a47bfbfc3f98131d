"""Random markets: n doctors, n programs, a fraction of doctors in couples.

Randomness is numpy's PCG64 seeded through ``SeedSequence``.  Each entity
draws from its own stream, keyed by ``(seed, kind, index)``, so the lists
of earlier entities do not move when the market grows.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import TypeVar

import numpy as np

from .model import NIL, NIL_PAIR, Instance

T = TypeVar("T")

_SINGLE, _COUPLE, _PROGRAM = 1, 2, 3


@dataclass(frozen=True)
class GenConfig:
    n: int
    couples_pct: float = 0.0  # fraction of doctors in couples, 0..1
    single_rol_len: int = 5
    couple_rol_len: int = 15
    quota: int = 1
    seed: int = 0

    @property
    def n_coupled(self) -> int:
        return int(round(self.couples_pct * self.n))

    @property
    def n_couples(self) -> int:
        return self.n_coupled // 2

    def validate(self) -> None:
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if not 0.0 <= self.couples_pct <= 1.0:
            raise ValueError("couples_pct must lie in [0, 1]")
        x = self.couples_pct * self.n
        if abs(x - round(x)) > 1e-6 or round(x) % 2:
            raise ValueError(f"couples_pct * n = {x:g} must be an even integer")
        if self.n_coupled < self.n and not 0 <= self.single_rol_len <= self.n:
            raise ValueError("single_rol_len must be at most n")
        if self.n_couples and not 0 <= self.couple_rol_len <= (self.n + 1) ** 2 - 1:
            raise ValueError("couple_rol_len must be at most (n + 1)^2 - 1")
        if self.quota < 1:
            raise ValueError("quota must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


def entity_rng(seed: int, kind: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(kind, index))))


def sample_ordered_list(source: Sequence[T], k: int, rng: np.random.Generator) -> list[T]:
    """k distinct items of ``source`` in draw order, by rejection."""
    if not 0 <= k <= len(source):
        raise ValueError(f"cannot draw {k} distinct items from {len(source)}")
    out: list[T] = []
    taken: set[int] = set()
    while len(out) < k:
        j = int(rng.integers(len(source)))
        if j not in taken:
            taken.add(j)
            out.append(source[j])
    return out


class _PairSpace(Sequence):
    """P+ x P+ without (nil, nil), indexed lazily."""

    def __init__(self, n: int):
        self.n = n

    def __len__(self):
        return (self.n + 1) ** 2 - 1

    def __getitem__(self, j):
        a, b = divmod(j, self.n + 1)
        return (NIL if a == self.n else a, NIL if b == self.n else b)


def generate(cfg: GenConfig) -> Instance:
    cfg.validate()
    n = cfg.n
    n_singles = n - cfg.n_coupled
    programs = list(range(n))
    singles = tuple(range(n_singles))
    couples = tuple((n_singles + 2 * k, n_singles + 2 * k + 1) for k in range(cfg.n_couples))

    single_rols = []
    rankers: list[set[int]] = [set() for _ in range(n)]
    for d in singles:
        rol = sample_ordered_list(programs, cfg.single_rol_len, entity_rng(cfg.seed, _SINGLE, d))
        for p in rol:
            rankers[p].add(d)
        single_rols.append(tuple(rol) + (NIL,))

    space = _PairSpace(n)
    couple_rols = []
    for c, (d1, d2) in enumerate(couples):
        rol = sample_ordered_list(space, cfg.couple_rol_len, entity_rng(cfg.seed, _COUPLE, c))
        for p1, p2 in rol:
            if p1 != NIL:
                rankers[p1].add(d1)
            if p2 != NIL:
                rankers[p2].add(d2)
        couple_rols.append(tuple(rol) + (NIL_PAIR,))

    program_rols = []
    for p in programs:
        pool = sorted(rankers[p])
        rol = sample_ordered_list(pool, len(pool), entity_rng(cfg.seed, _PROGRAM, p))
        program_rols.append(tuple(rol) + (NIL,))

    return Instance(
        doctor_names=tuple(f"r{d}" for d in range(n)),
        program_names=tuple(f"p{p}" for p in programs),
        quotas=(cfg.quota,) * n,
        singles=singles,
        couples=couples,
        single_rols=tuple(single_rols),
        couple_rols=tuple(couple_rols),
        program_rols=tuple(program_rols),
    )
