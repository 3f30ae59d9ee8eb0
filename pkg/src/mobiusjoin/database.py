"""In-memory database instance loaded from one CSV file per table."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping, Sequence

from .schema import NA, Schema


class DataError(ValueError):
    pass


@dataclass
class AccessCounter:
    """Counts raw data tuples handed out by a DatabaseInstance."""

    count: int = 0


Link = tuple[str, str, tuple[str, ...]]


class DatabaseInstance:
    """Entity and relationship tuples for a schema.

    ``entities[pop][key]`` is the tuple of attribute values in declaration
    order; ``links[rel]`` is a list of ``(key1, key2, attribute values)``.
    Every read through :meth:`iter_entities`, :meth:`iter_links` or
    :meth:`entity` bumps :attr:`accesses`.
    """

    def __init__(
        self,
        schema: Schema,
        entities: Mapping[str, Mapping[str, tuple[str, ...]]],
        links: Mapping[str, Sequence[Link]],
    ):
        self.schema = schema
        self._entities = {p: dict(rows) for p, rows in entities.items()}
        self._links = {r: tuple(rows) for r, rows in links.items()}
        self.accesses = AccessCounter()
        self._validate()

    def _validate(self) -> None:
        s = self.schema
        for p in s.populations:
            rows = self._entities.setdefault(p.name, {})
            for key, vals in rows.items():
                if len(vals) != len(p.attributes):
                    raise DataError(f"{p.table}: row {key} has wrong arity")
                for a, v in zip(p.attributes, vals):
                    if v not in a.domain:
                        raise DataError(
                            f"{p.table}: value {v!r} of {a.name} for {key} outside declared domain"
                        )
        unknown = set(self._entities) - {p.name for p in s.populations}
        if unknown:
            raise DataError(f"data for unknown populations {sorted(unknown)}")
        for r in s.relationships:
            rows = self._links.setdefault(r.name, ())
            seen = set()
            pops = [self._entities[slot.population] for slot in r.slots]
            for k1, k2, vals in rows:
                if (k1, k2) in seen:
                    raise DataError(f"{r.table}: duplicate pair ({k1}, {k2})")
                seen.add((k1, k2))
                for k, pop, slot in zip((k1, k2), pops, r.slots):
                    if k not in pop:
                        raise DataError(
                            f"{r.table}: dangling foreign key {slot.variable}={k!r}"
                        )
                if len(vals) != len(r.attributes):
                    raise DataError(f"{r.table}: row ({k1}, {k2}) has wrong arity")
                for a, v in zip(r.attributes, vals):
                    if v not in a.domain:
                        raise DataError(
                            f"{r.table}: value {v!r} of {a.name} outside declared domain"
                        )
        unknown = set(self._links) - {r.name for r in s.relationships}
        if unknown:
            raise DataError(f"data for unknown relationships {sorted(unknown)}")

    @classmethod
    def from_records(
        cls,
        schema: Schema,
        entities: Mapping[str, Mapping[str, Mapping[str, str]]],
        links: Mapping[str, Sequence[tuple[str, str, Mapping[str, str]]]] | None = None,
    ) -> "DatabaseInstance":
        """Build from attribute-name keyed records, e.g. for hand-made fixtures."""
        ents = {}
        for pname, rows in entities.items():
            attrs = schema.population(pname).attributes
            ents[pname] = {
                str(k): tuple(str(rec[a.name]) for a in attrs) for k, rec in rows.items()
            }
        lks = {}
        for rname, rows in (links or {}).items():
            attrs = schema.relationship(rname).attributes
            lks[rname] = [
                (str(k1), str(k2), tuple(str(rec[a.name]) for a in attrs))
                for k1, k2, rec in rows
            ]
        return cls(schema, ents, lks)

    # reads

    def population_size(self, population: str) -> int:
        if population not in self._entities:
            raise DataError(f"unknown population {population}")
        return len(self._entities[population])

    def variable_size(self, variable: str) -> int:
        return len(self._entities[self.schema.population_of(variable).name])

    def link_count(self, relationship: str) -> int:
        return len(self._links[relationship])

    def iter_entities(self, population: str) -> Iterator[tuple[str, tuple[str, ...]]]:
        for item in self._entities[population].items():
            self.accesses.count += 1
            yield item

    def iter_links(self, relationship: str) -> Iterator[Link]:
        for row in self._links[relationship]:
            self.accesses.count += 1
            yield row

    def entity(self, population: str, key: str) -> tuple[str, ...]:
        self.accesses.count += 1
        return self._entities[population][key]

    def keys(self, population: str) -> list[str]:
        return list(self._entities[population])

    def link_map(self, relationship: str) -> dict[tuple[str, str], tuple[str, ...]]:
        """Uncounted ``(key1, key2) -> attribute values`` lookup (oracle use)."""
        return {(a, b): vals for a, b, vals in self._links[relationship]}

    def entity_map(self, population: str) -> dict[str, tuple[str, ...]]:
        """Uncounted view of one entity table (oracle use)."""
        return dict(self._entities[population])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DatabaseInstance):
            return NotImplemented
        return (
            self.schema == other.schema
            and self._entities == other._entities
            and {r: sorted(v) for r, v in self._links.items()}
            == {r: sorted(v) for r, v in other._links.items()}
        )

    def with_entity_copies(self, factor: int) -> "DatabaseInstance":
        """Each entity replicated ``factor`` times with its links (scaling studies)."""
        ents = {
            p: {f"{k}#{j}": vals for k, vals in rows.items() for j in range(factor)}
            for p, rows in self._entities.items()
        }
        lks = {}
        for r in self.schema.relationships:
            lks[r.name] = [
                (f"{a}#{i}", f"{b}#{j}", vals)
                for a, b, vals in self._links[r.name]
                for i in range(factor)
                for j in range(factor)
            ]
        return DatabaseInstance(self.schema, ents, lks)


def population_size(db: DatabaseInstance, population: str) -> int:
    return db.population_size(population)


def _read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    if not path.is_file():
        raise DataError(f"missing table file {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: missing header row") from None
        rows = [row for row in reader if row]
    for row in rows:
        if len(row) != len(header):
            raise DataError(f"{path}: row {row} does not match header")
    return header, rows


def _column_index(path: Path, header: list[str], expected: list[str]) -> list[int]:
    unknown = set(header) - set(expected)
    if unknown:
        raise DataError(f"{path}: unknown column(s) {sorted(unknown)}")
    missing = [c for c in expected if c not in header]
    if missing:
        raise DataError(f"{path}: missing column(s) {missing}")
    if len(set(header)) != len(header):
        raise DataError(f"{path}: repeated column name")
    return [header.index(c) for c in expected]


def load_database(schema: Schema, directory: str | Path) -> DatabaseInstance:
    """Read ``<table>.csv`` for every entity and relationship table."""
    directory = Path(directory)
    entities: dict[str, dict[str, tuple[str, ...]]] = {}
    for p in schema.populations:
        path = directory / f"{p.table}.csv"
        header, rows = _read_csv(path)
        idx = _column_index(path, header, [p.key] + [a.name for a in p.attributes])
        table: dict[str, tuple[str, ...]] = {}
        for row in rows:
            key = row[idx[0]]
            if key in table:
                raise DataError(f"{path}: duplicate key {key!r}")
            vals = tuple(row[i] for i in idx[1:])
            if NA in vals:
                raise DataError(f"{path}: reserved value {NA!r} in raw data")
            table[key] = vals
        entities[p.name] = table
    links: dict[str, list[Link]] = {}
    for r in schema.relationships:
        path = directory / f"{r.table}.csv"
        header, rows = _read_csv(path)
        idx = _column_index(path, header, list(r.variables) + [a.name for a in r.attributes])
        out = []
        for row in rows:
            vals = tuple(row[i] for i in idx[2:])
            if NA in vals:
                raise DataError(f"{path}: reserved value {NA!r} in raw data")
            out.append((row[idx[0]], row[idx[1]], vals))
        links[r.name] = out
    return DatabaseInstance(schema, entities, links)


def write_database(db: DatabaseInstance, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for p in db.schema.populations:
        with (directory / f"{p.table}.csv").open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([p.key] + [a.name for a in p.attributes])
            for key, vals in db.entity_map(p.name).items():
                w.writerow([key, *vals])
    for r in db.schema.relationships:
        with (directory / f"{r.table}.csv").open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(list(r.variables) + [a.name for a in r.attributes])
            for (a, b), vals in sorted(db.link_map(r.name).items()):
                w.writerow([a, b, *vals])

