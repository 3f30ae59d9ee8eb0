"""Contingency tables and the ct-algebra.

A :class:`ContingencyTable` is a bag of value tuples with multiplicities:
``rows`` maps a value tuple (ordered like ``columns``) to a positive count.
Zero-count rows are never stored. All operators return new tables.

Binary operators match columns by name, so operands may list their columns
in different orders.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .schema import WILDCARD

MAX_COUNT = 2**63 - 1


class CTError(ValueError):
    pass


class ContingencyTable:
    __slots__ = ("columns", "rows", "note", "_index")

    def __init__(
        self,
        columns: Sequence[str],
        rows: Mapping[tuple, int] | None = None,
        note: str = "",
        *,
        validate: bool = True,
    ):
        self.columns = tuple(columns)
        self.rows = dict(rows or {})
        self.note = note
        self._index = {c: i for i, c in enumerate(self.columns)}
        if validate:
            if len(self._index) != len(self.columns):
                raise CTError(f"repeated column in {self.columns}")
            width = len(self.columns)
            for row, count in self.rows.items():
                if len(row) != width:
                    raise CTError(f"row {row} does not match columns {self.columns}")
                if not isinstance(count, int) or count < 0 or count > MAX_COUNT:
                    raise CTError(f"invalid count {count!r} for row {row}")
            self.rows = {r: c for r, c in self.rows.items() if c}

    @classmethod
    def unit(cls, note: str = "") -> "ContingencyTable":
        """The zero-column table with a single row of count 1."""
        return cls((), {(): 1}, note)

    @classmethod
    def from_dicts(cls, columns: Sequence[str], rows: Iterable[tuple[Mapping[str, str], int]]):
        out: dict[tuple, int] = {}
        for rec, n in rows:
            key = tuple(rec[c] for c in columns)
            out[key] = out.get(key, 0) + n
        return cls(columns, out)

    # inspection

    @property
    def total(self) -> int:
        return sum(self.rows.values())

    def __len__(self) -> int:
        return len(self.rows)

    def __bool__(self) -> bool:
        return True

    def is_empty(self) -> bool:
        return not self.rows

    def column_set(self) -> frozenset[str]:
        return frozenset(self.columns)

    def index(self, column: str) -> int:
        try:
            return self._index[column]
        except KeyError:
            raise CTError(f"unknown column {column!r}; table has {self.columns}") from None

    def reorder(self, columns: Sequence[str]) -> "ContingencyTable":
        columns = tuple(columns)
        if columns == self.columns:
            return self
        if set(columns) != set(self.columns) or len(columns) != len(self.columns):
            raise CTError(f"cannot reorder {self.columns} as {columns}")
        idx = [self._index[c] for c in columns]
        rows = {tuple(r[i] for i in idx): n for r, n in self.rows.items()}
        return ContingencyTable(columns, rows, self.note, validate=False)

    def records(self) -> list[tuple[dict[str, str], int]]:
        return [(dict(zip(self.columns, r)), n) for r, n in self.sorted_rows()]

    def sorted_rows(self) -> list[tuple[tuple, int]]:
        return sorted(self.rows.items())

    def canonical(self) -> "ContingencyTable":
        return self.reorder(sorted(self.columns))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ContingencyTable):
            return NotImplemented
        if self.column_set() != other.column_set():
            return False
        return self.rows == other.reorder(self.columns).rows

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"ContingencyTable(columns={self.columns}, rows={len(self.rows)}, total={self.total})"

    def pretty(self) -> str:
        lines = [" | ".join(self.columns + ("count",))]
        for row, n in self.sorted_rows():
            lines.append(" | ".join(row + (str(n),)))
        return "\n".join(lines)


Condition = Mapping[str, str]


def _matcher(ct: ContingencyTable, phi: Condition) -> list[tuple[int, str]]:
    return [(ct.index(var), val) for var, val in phi.items() if val != WILDCARD]


def select(ct: ContingencyTable, phi: Condition) -> ContingencyTable:
    """Rows satisfying every ``var = value`` in ``phi``; ``*`` matches anything."""
    tests = _matcher(ct, phi)
    if not tests:
        return ct
    rows = {r: n for r, n in ct.rows.items() if all(r[i] == v for i, v in tests)}
    return ContingencyTable(ct.columns, rows, ct.note, validate=False)


def project(ct: ContingencyTable, columns: Sequence[str]) -> ContingencyTable:
    columns = tuple(columns)
    idx = [ct.index(c) for c in columns]
    if len(set(columns)) != len(columns):
        raise CTError(f"repeated column in projection {columns}")
    if columns == ct.columns:
        return ct
    rows: dict[tuple, int] = {}
    get = rows.get
    for r, n in ct.rows.items():
        key = tuple([r[i] for i in idx])
        rows[key] = get(key, 0) + n
    return ContingencyTable(columns, rows, ct.note, validate=False)


def condition(ct: ContingencyTable, phi: Condition) -> ContingencyTable:
    """Select on ``phi`` then drop the conditioned columns."""
    for var in phi:
        ct.index(var)
    keep = [c for c in ct.columns if c not in phi]
    return project(select(ct, phi), keep)


def cross_product(a: ContingencyTable, b: ContingencyTable) -> ContingencyTable:
    overlap = a.column_set() & b.column_set()
    if overlap:
        raise CTError(f"cross product operands share columns {sorted(overlap)}")
    columns = a.columns + b.columns
    if not a.rows or not b.rows:
        return ContingencyTable(columns, {}, validate=False)
    if max(a.rows.values()) * max(b.rows.values()) > MAX_COUNT:
        raise OverflowError("count overflow in cross product")
    brows = list(b.rows.items())
    rows = {ra + rb: na * nb for ra, na in a.rows.items() for rb, nb in brows}
    return ContingencyTable(columns, rows, validate=False)


def _aligned(a: ContingencyTable, b: ContingencyTable, op: str) -> ContingencyTable:
    if a.column_set() != b.column_set() or len(a.columns) != len(b.columns):
        raise CTError(f"{op}: column sets differ: {a.columns} vs {b.columns}")
    return b.reorder(a.columns)


def add(a: ContingencyTable, b: ContingencyTable) -> ContingencyTable:
    b = _aligned(a, b, "add")
    rows = dict(a.rows)
    for r, n in b.rows.items():
        rows[r] = rows.get(r, 0) + n
    if a.total + b.total > MAX_COUNT and max(rows.values(), default=0) > MAX_COUNT:
        raise OverflowError("count overflow in addition")
    return ContingencyTable(a.columns, rows, validate=False)


def subtract(a: ContingencyTable, b: ContingencyTable) -> ContingencyTable:
    """Row-wise ``a - b``; b's rows must be a sub-bag of a's."""
    b = _aligned(a, b, "subtract")
    rows = dict(a.rows)
    for r, n in b.rows.items():
        have = rows.get(r)
        if have is None:
            raise CTError(f"subtract: row {dict(zip(a.columns, r))} missing from minuend")
        if have < n:
            raise CTError(
                f"subtract: row {dict(zip(a.columns, r))} has count {have} < {n}"
            )
        if have == n:
            del rows[r]
        else:
            rows[r] = have - n
    return ContingencyTable(a.columns, rows, validate=False)


def extend_with_constant(
    ct: ContingencyTable, column: str | Mapping[str, str], value: str | None = None
) -> ContingencyTable:
    """Append constant-valued columns; either ``(ct, name, value)`` or ``(ct, {name: value})``."""
    extra = {column: value} if isinstance(column, str) else dict(column)
    clash = ct.column_set() & set(extra)
    if clash:
        raise CTError(f"extend: columns {sorted(clash)} already present")
    suffix = tuple(extra.values())
    rows = {r + suffix: n for r, n in ct.rows.items()}
    return ContingencyTable(ct.columns + tuple(extra), rows, ct.note, validate=False)


def union_disjoint(a: ContingencyTable, b: ContingencyTable) -> ContingencyTable:
    b = _aligned(a, b, "union")
    rows = dict(a.rows)
    for r, n in b.rows.items():
        if r in rows:
            raise CTError(f"union: row {dict(zip(a.columns, r))} present in both operands")
        rows[r] = n
    return ContingencyTable(a.columns, rows, validate=False)


def first_difference(a: ContingencyTable, b: ContingencyTable) -> str | None:
    """Describe the first row (in sorted order) where two tables disagree."""
    if a.column_set() != b.column_set():
        return f"column sets differ: {sorted(a.column_set())} vs {sorted(b.column_set())}"
    a = a.canonical()
    b = b.canonical()
    for row in sorted(set(a.rows) | set(b.rows)):
        x, y = a.rows.get(row, 0), b.rows.get(row, 0)
        if x != y:
            return f"row {dict(zip(a.columns, row))}: {x} vs {y}"
    return None


# serialization


def to_csv(ct: ContingencyTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(ct.columns) + ["count"])
    for row, n in ct.sorted_rows():
        w.writerow(list(row) + [n])
    return buf.getvalue()


def write_ct(ct: ContingencyTable, path: str | Path) -> None:
    Path(path).write_text(to_csv(ct), encoding="utf-8")


def read_ct(path: str | Path) -> ContingencyTable:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CTError(f"{path}: empty file") from None
        if not header or header[-1] != "count":
            raise CTError(f"{path}: last column must be 'count'")
        rows: dict[tuple, int] = {}
        for rec in reader:
            if not rec:
                continue
            if len(rec) != len(header):
                raise CTError(f"{path}: malformed row {rec}")
            key = tuple(rec[:-1])
            if key in rows:
                raise CTError(f"{path}: repeated row {rec[:-1]}")
            rows[key] = int(rec[-1])
    return ContingencyTable(header[:-1], rows, note=str(path))
