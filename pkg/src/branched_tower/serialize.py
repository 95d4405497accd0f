"""Line-oriented text format for complexes and cell maps.

Layout::

    branched-tower 1
    p 2
    K const:1
    provenance sha256:<digest of every line after this one>
    complex level
    block 0 7
    block 1 18
    cell 0: 1 0
    ...
    orientation none
    map proj level base: 0 1 2 | 4 4 ... | ...
    end

Output is a pure function of its inputs, so equal objects give equal bytes.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .complex import CellMap, DComplex, build_complex
from .errors import ComplexError, TowerError

FORMAT_VERSION = 1
MAGIC = "branched-tower"


class ParseError(TowerError):
    pass


@dataclass
class ComplexFile:
    header: dict[str, str] = field(default_factory=dict)
    complexes: dict[str, DComplex] = field(default_factory=dict)
    maps: dict[str, tuple[str, str, tuple[tuple[int, ...], ...]]] = field(default_factory=dict)

    def cell_map(self, name: str) -> CellMap:
        src, tgt, rows = self.maps[name]
        return CellMap(self.complexes[src], self.complexes[tgt], rows)


def _complex_lines(name: str, C: DComplex) -> list[str]:
    lines = [f"complex {name}"]
    for d in range(C.dim + 1):
        lines.append(f"block {d} {C.count(d)}")
        if d:
            lines.extend(f"cell {c}: {' '.join(map(str, fs))}" for c, fs in enumerate(C.faces[d]))
    if C.orientation is None:
        lines.append("orientation none")
    else:
        lines.append("orientation " + " ".join(map(str, C.orientation)))
    return lines


def _map_line(name: str, src: str, tgt: str, f: CellMap | Sequence[Sequence[int]]) -> str:
    rows = f.assignment if isinstance(f, CellMap) else f
    body = " | ".join(" ".join(map(str, row)) for row in rows)
    return f"map {name} {src} {tgt}: {body}"


def serialize(
    complexes: Mapping[str, DComplex],
    maps: Mapping[str, tuple[str, str, CellMap]] | None = None,
    header: Mapping[str, str] | None = None,
) -> str:
    """Text for the given named complexes and maps (insertion order is kept)."""
    body: list[str] = []
    for name, C in complexes.items():
        _check_name(name)
        body.extend(_complex_lines(name, C))
    for name, (src, tgt, f) in (maps or {}).items():
        _check_name(name)
        body.append(_map_line(name, src, tgt, f))
    body.append("end")
    text_body = "\n".join(body) + "\n"
    digest = hashlib.sha256(text_body.encode()).hexdigest()
    head = [f"{MAGIC} {FORMAT_VERSION}"]
    for k, v in (header or {}).items():
        if k in ("provenance",) or not k or " " in k:
            raise ValueError(f"bad header key {k!r}")
        head.append(f"{k} {v}")
    head.append(f"provenance sha256:{digest}")
    return "\n".join(head) + "\n" + text_body


def _check_name(name: str) -> None:
    if not name or any(ch.isspace() for ch in name) or ":" in name:
        raise ValueError(f"bad name {name!r}")


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split())


def parse(text: str, check: bool = True) -> ComplexFile:
    """Read a file; face identities are always checked, the hash and maps only when ``check``."""
    lines = text.split("\n")
    if not lines or not lines[0].startswith(MAGIC + " "):
        raise ParseError("missing format header")
    try:
        version = int(lines[0].split()[1])
    except (IndexError, ValueError):
        raise ParseError("bad format header") from None
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported format version {version}")
    out = ComplexFile()
    i = 1
    while i < len(lines) and not lines[i].startswith("provenance "):
        key, _, value = lines[i].partition(" ")
        out.header[key] = value
        i += 1
    if i == len(lines):
        raise ParseError("missing provenance line")
    digest = lines[i].split(":", 1)[-1]
    body = "\n".join(lines[i + 1:])
    if check and hashlib.sha256(body.encode()).hexdigest() != digest:
        raise ParseError("provenance hash does not match the file body")
    out.header["provenance"] = lines[i].split(" ", 1)[1]
    i += 1
    cur_name = None
    table: list = []
    orient = None

    def flush():
        if cur_name is None:
            return
        for d, level in enumerate(table[1:], start=1):
            if None in level:
                raise ParseError(f"complex {cur_name}: {d}-cell {level.index(None)} is missing")
        try:
            out.complexes[cur_name] = build_complex(table, orient)
        except ComplexError as exc:
            raise ParseError(f"complex {cur_name}: {exc}") from exc

    ended = False
    while i < len(lines):
        line = lines[i]
        i += 1
        if not line:
            continue
        try:
            if line.startswith("complex "):
                flush()
                cur_name, table, orient = line.split(" ", 1)[1], [], None
            elif line.startswith("block "):
                d, n = _ints(line[6:])
                if d != len(table):
                    raise ParseError(f"block {d} out of order")
                table.append(n if d == 0 else [])
                if d:
                    table[d] = [None] * n
            elif line.startswith("cell "):
                head, _, rest = line[5:].partition(":")
                c = int(head)
                d = len(table) - 1
                if d < 1 or not 0 <= c < len(table[d]):
                    raise ParseError(f"cell {c} outside its block")
                table[d][c] = _ints(rest)
            elif line.startswith("orientation "):
                val = line[12:]
                orient = None if val == "none" else _ints(val)
            elif line.startswith("map "):
                flush()
                cur_name = None
                head, _, rest = line[4:].partition(":")
                name, src, tgt = head.split()
                rows = tuple(_ints(part) for part in rest.split("|")) if rest.strip() else ()
                out.maps[name] = (src, tgt, rows)
            elif line == "end":
                flush()
                cur_name = None
                ended = True
                break
            else:
                raise ParseError(f"unrecognized line {line[:40]!r}")
        except ValueError as exc:
            raise ParseError(f"line {i}: {exc}") from None
    if not ended:
        raise ParseError("missing end marker")
    for name, (src, tgt, rows) in out.maps.items():
        if src not in out.complexes or tgt not in out.complexes:
            raise ParseError(f"map {name} refers to an unknown complex")
        if check and not out.cell_map(name).is_valid():
            raise ParseError(f"map {name} is not a cell map")
    return out


def dumps_complex(C: DComplex, name: str = "L", header: Mapping[str, str] | None = None) -> str:
    return serialize({name: C}, None, header)


def loads_complex(text: str, name: str | None = None) -> DComplex:
    f = parse(text)
    if name is None:
        if len(f.complexes) != 1:
            raise ParseError("file holds several complexes; name one")
        return next(iter(f.complexes.values()))
    return f.complexes[name]
