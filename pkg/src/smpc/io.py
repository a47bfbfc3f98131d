"""Reading and writing instances in the ``smpc v1`` text format and its JSON
mirror.

Text format, one entity per line (``#`` starts a comment)::

    smpc v1
    program a 1
    single r0 : a b c d
    couple r1 r2 : b,e ; a,d
    progrol a : r3 r0 r1

``@nil`` is the nil token inside couple pairs.  Terminators are implicit.
Doctors are numbered in order of first appearance on ``single``/``couple``
lines, programs in order of their ``program`` lines.
"""

from __future__ import annotations

import json
from pathlib import Path

from .model import NIL, Instance, InstanceError, Matching

HEADER = "smpc v1"
NIL_TOKEN = "@nil"


class FormatError(InstanceError):
    pass


def _records_to_instance(programs, singles, couples, progrols) -> Instance:
    order = [name for _, names in _doctor_lines(singles, couples) for name in names]
    return Instance.from_names(
        programs=dict(programs),
        singles={name: rol for name, rol in singles},
        couples={tuple(names): [tuple(p) for p in rol] for names, rol in couples},
        program_rols=dict(progrols),
        doctor_order=order,
    )


def _doctor_lines(singles, couples):
    # keep first-appearance order across interleaved single/couple lines
    merged = sorted(
        [(pos, "single", [name]) for pos, (name, _) in singles.positions()]
        + [(pos, "couple", list(names)) for pos, (names, _) in couples.positions()]
    )
    return [(kind, names) for _, kind, names in merged]


class _Ordered(list):
    """List of records that remembers the source line of each."""

    def __init__(self):
        super().__init__()
        self._pos = []

    def add(self, pos, rec):
        self.append(rec)
        self._pos.append(pos)

    def positions(self):
        return zip(self._pos, self)


def parse_text(text: str) -> Instance:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    body = [(i, ln) for i, ln in enumerate(lines, 1) if ln]
    if not body or body[0][1] != HEADER:
        raise FormatError(f"missing '{HEADER}' header")
    programs, progrols = [], []
    singles, couples = _Ordered(), _Ordered()
    for lineno, ln in body[1:]:
        head, _, rest = ln.partition(":")
        words = head.split()
        if not words:
            raise FormatError(f"line {lineno}: empty record")
        kind = words[0]
        try:
            if kind == "program":
                if len(words) != 3 or rest:
                    raise FormatError(f"line {lineno}: expected 'program <name> <quota>'")
                programs.append((words[1], int(words[2])))
            elif kind == "single":
                if len(words) != 2:
                    raise FormatError(f"line {lineno}: expected 'single <name> : ...'")
                singles.add(lineno, (words[1], rest.split()))
            elif kind == "couple":
                if len(words) != 3:
                    raise FormatError(f"line {lineno}: expected 'couple <d1> <d2> : ...'")
                pairs = []
                for chunk in rest.split(";"):
                    chunk = chunk.strip()
                    if not chunk:
                        continue
                    a, sep, b = chunk.partition(",")
                    if not sep:
                        raise FormatError(f"line {lineno}: bad program pair {chunk!r}")
                    pairs.append((a.strip(), b.strip()))
                couples.add(lineno, ((words[1], words[2]), pairs))
            elif kind == "progrol":
                if len(words) != 2:
                    raise FormatError(f"line {lineno}: expected 'progrol <name> : ...'")
                progrols.append((words[1], rest.split()))
            else:
                raise FormatError(f"line {lineno}: unknown record {kind!r}")
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"line {lineno}: {exc}") from None
    return _records_to_instance(programs, singles, couples, progrols)


def _pname(inst: Instance, p: int) -> str:
    return NIL_TOKEN if p == NIL else inst.program_names[p]


def format_text(inst: Instance) -> str:
    out = [HEADER]
    for name, q in zip(inst.program_names, inst.quotas):
        out.append(f"program {name} {q}")
    single_k = inst.single_pos
    emitted = set()
    for d in range(inst.n_doctors):
        if d in single_k:
            rol = inst.single_rols[single_k[d]][:-1]
            out.append(f"single {inst.doctor_names[d]} : " + " ".join(_pname(inst, p) for p in rol))
        else:
            c, _ = inst.couple_of[d]
            if c in emitted:
                continue
            emitted.add(c)
            d1, d2 = inst.couples[c]
            pairs = " ; ".join(
                f"{_pname(inst, a)},{_pname(inst, b)}" for a, b in inst.couple_rols[c][:-1]
            )
            out.append(f"couple {inst.doctor_names[d1]} {inst.doctor_names[d2]} : {pairs}")
    for p, rol in enumerate(inst.program_rols):
        out.append(
            f"progrol {inst.program_names[p]} : " + " ".join(inst.doctor_names[d] for d in rol[:-1])
        )
    return "\n".join(line.rstrip() for line in out) + "\n"


def to_json_obj(inst: Instance) -> dict:
    single_k = inst.single_pos
    singles, couples, emitted = [], [], set()
    for d in range(inst.n_doctors):
        if d in single_k:
            rol = inst.single_rols[single_k[d]][:-1]
            singles.append({"name": inst.doctor_names[d], "rol": [_pname(inst, p) for p in rol]})
        else:
            c, _ = inst.couple_of[d]
            if c in emitted:
                continue
            emitted.add(c)
            d1, d2 = inst.couples[c]
            couples.append(
                {
                    "names": [inst.doctor_names[d1], inst.doctor_names[d2]],
                    "rol": [[_pname(inst, a), _pname(inst, b)] for a, b in inst.couple_rols[c][:-1]],
                    "order": d,
                }
            )
    for rec in singles:
        rec["order"] = inst.doctor_names.index(rec["name"])
    return {
        "format": HEADER,
        "program": [{"name": n, "quota": q} for n, q in zip(inst.program_names, inst.quotas)],
        "single": singles,
        "couple": couples,
        "progrol": [
            {"name": inst.program_names[p], "rol": [inst.doctor_names[d] for d in rol[:-1]]}
            for p, rol in enumerate(inst.program_rols)
        ],
    }


def from_json_obj(obj: dict) -> Instance:
    if obj.get("format") != HEADER:
        raise FormatError(f"missing format '{HEADER}'")
    singles, couples = _Ordered(), _Ordered()
    for i, rec in enumerate(obj.get("single", [])):
        singles.add(rec.get("order", i), (rec["name"], list(rec["rol"])))
    for i, rec in enumerate(obj.get("couple", [])):
        couples.add(rec.get("order", 10**9 + i), (tuple(rec["names"]), [tuple(p) for p in rec["rol"]]))
    programs = [(rec["name"], int(rec["quota"])) for rec in obj.get("program", [])]
    progrols = [(rec["name"], list(rec["rol"])) for rec in obj.get("progrol", [])]
    return _records_to_instance(programs, singles, couples, progrols)


def dumps(inst: Instance, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(to_json_obj(inst), indent=1) + "\n"
    return format_text(inst)


def loads(text: str) -> Instance:
    if text.lstrip().startswith("{"):
        return from_json_obj(json.loads(text))
    return parse_text(text)


def load(path: str | Path) -> Instance:
    return loads(Path(path).read_text())


def save(inst: Instance, path: str | Path) -> None:
    path = Path(path)
    path.write_text(dumps(inst, "json" if path.suffix == ".json" else "text"))


def matching_to_obj(inst: Instance, mu: Matching) -> dict[str, str]:
    return inst.describe(mu)
