"""Schema model: populations, binary relationships, derived random variables,
and the lattice of relationship chains.

Column names follow functor notation, qualified by first-order variables:
``intelligence(S)`` for an entity attribute, ``capability(P,S)`` for a
relationship attribute and ``RA(P,S)`` for the relationship indicator itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping

NA = "n/a"
WILDCARD = "*"
TRUE = "T"
FALSE = "F"
RESERVED_VALUES = frozenset({NA, WILDCARD})

RELATIONSHIP = "relationship"
ENTITY_ATTRIBUTE = "1Att"
RELATIONSHIP_ATTRIBUTE = "2Att"


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class Attribute:
    name: str
    domain: tuple[str, ...]


@dataclass(frozen=True)
class Population:
    name: str
    table: str
    key: str
    variable: str
    attributes: tuple[Attribute, ...] = ()


@dataclass(frozen=True)
class Slot:
    variable: str
    population: str


@dataclass(frozen=True)
class RelationshipDecl:
    name: str
    table: str
    slots: tuple[Slot, Slot]
    attributes: tuple[Attribute, ...] = ()

    @property
    def variables(self) -> tuple[str, str]:
        return (self.slots[0].variable, self.slots[1].variable)

    @property
    def column(self) -> str:
        return f"{self.name}({','.join(self.variables)})"

    @property
    def attribute_columns(self) -> tuple[str, ...]:
        args = ",".join(self.variables)
        return tuple(f"{a.name}({args})" for a in self.attributes)


@dataclass(frozen=True)
class RandomVariable:
    kind: str
    name: str
    functor: str
    owner: str
    domain: tuple[str, ...]


@dataclass(frozen=True)
class EntityNode:
    """Level-0 lattice node: a first-order variable and its population."""

    variable: str
    population: str

    @property
    def label(self) -> str:
        return self.variable


@dataclass(frozen=True, eq=False)
class RelationshipChain:
    """An ordered list of relationships forming a connected set.

    Equality and hashing ignore the order, so a chain can be looked up in a
    table map regardless of how its elements were listed.
    """

    relationships: tuple[RelationshipDecl, ...]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.relationships)

    @property
    def key(self) -> frozenset[str]:
        return frozenset(self.names)

    @property
    def label(self) -> str:
        return "+".join(self.names)

    def __len__(self) -> int:
        return len(self.relationships)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RelationshipChain):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"RelationshipChain([{', '.join(self.names)}])"

    @property
    def variables(self) -> tuple[str, ...]:
        """First-order variables in order of first appearance."""
        seen: dict[str, None] = {}
        for rel in self.relationships:
            for v in rel.variables:
                seen.setdefault(v, None)
        return tuple(seen)

    @property
    def relationship_columns(self) -> tuple[str, ...]:
        return tuple(r.column for r in self.relationships)

    @property
    def attribute_columns_2(self) -> tuple[str, ...]:
        return tuple(c for r in self.relationships for c in r.attribute_columns)

    def without(self, index: int) -> tuple[RelationshipDecl, ...]:
        return self.relationships[:index] + self.relationships[index + 1:]

    def is_connected(self) -> bool:
        return len(connected_components(self.relationships)) <= 1


def connected_components(
    rels: Iterable[RelationshipDecl],
) -> list[tuple[RelationshipDecl, ...]]:
    """Split relationships into groups linked by shared first-order variables.

    Components keep the input's relative order; components are ordered by
    their first member.
    """
    rels = list(rels)
    groups: list[list[RelationshipDecl]] = []
    group_vars: list[set[str]] = []
    for rel in rels:
        touching = [i for i, vs in enumerate(group_vars) if vs & set(rel.variables)]
        merged_rels = [rel]
        merged_vars = set(rel.variables)
        for i in reversed(touching):
            merged_rels = groups.pop(i) + merged_rels
            merged_vars |= group_vars.pop(i)
        groups.append(merged_rels)
        group_vars.append(merged_vars)
    order = {r.name: i for i, r in enumerate(rels)}
    out = [tuple(sorted(g, key=lambda r: order[r.name])) for g in groups]
    out.sort(key=lambda g: order[g[0].name])
    return out


def canonical_order(rels: Iterable[RelationshipDecl]) -> tuple[RelationshipDecl, ...]:
    """Lexicographically smallest ordering in which every element after the
    first shares a first-order variable with its predecessors.

    Falls back to plain name order for the unconnected remainder.
    """
    pending = sorted(rels, key=lambda r: r.name)
    if not pending:
        return ()
    ordered = [pending.pop(0)]
    bound = set(ordered[0].variables)
    while pending:
        for i, rel in enumerate(pending):
            if bound & set(rel.variables):
                break
        else:
            i = 0
        rel = pending.pop(i)
        ordered.append(rel)
        bound |= set(rel.variables)
    return tuple(ordered)


@dataclass
class ChainLattice:
    entity_nodes: tuple[EntityNode, ...]
    levels: dict[int, tuple[RelationshipChain, ...]]
    # chain -> connected sub-chains one level down
    children: dict[RelationshipChain, tuple[RelationshipChain, ...]] = field(
        default_factory=dict
    )

    @property
    def chains(self) -> list[RelationshipChain]:
        return [c for level in sorted(self.levels) for c in self.levels[level]]

    @property
    def max_level(self) -> int:
        return max(self.levels, default=0)

    def __len__(self) -> int:
        return len(self.entity_nodes) + sum(len(v) for v in self.levels.values())

    def top(self) -> list[RelationshipChain]:
        """Chains not contained in any other chain of the lattice."""
        chains = self.chains
        return [c for c in chains if not any(c.key < d.key for d in chains)]


class Schema:
    """Validated, immutable relational schema."""

    def __init__(
        self,
        populations: Iterable[Population],
        relationships: Iterable[RelationshipDecl] = (),
    ):
        self.populations = tuple(populations)
        self.relationships = tuple(relationships)
        self._pop = {p.name: p for p in self.populations}
        self._rel = {r.name: r for r in self.relationships}
        self._validate()
        self._var_pop = self._first_order_variables()
        self._domains = {rv.name: rv.domain for rv in derive_random_variables(self)}

    def _validate(self) -> None:
        if len(self._pop) != len(self.populations):
            raise SchemaError("duplicate population name")
        if len(self._rel) != len(self.relationships):
            raise SchemaError("duplicate relationship name")
        tables = [p.table for p in self.populations] + [r.table for r in self.relationships]
        if len(set(tables)) != len(tables):
            raise SchemaError("duplicate table name")
        for owner, attrs in [(p.name, p.attributes) for p in self.populations] + [
            (r.name, r.attributes) for r in self.relationships
        ]:
            names = [a.name for a in attrs]
            if len(set(names)) != len(names):
                raise SchemaError(f"duplicate attribute in {owner}")
            for a in attrs:
                _check_domain(owner, a)
        for p in self.populations:
            if p.key in {a.name for a in p.attributes}:
                raise SchemaError(f"population {p.name}: key column clashes with an attribute")
        for rel in self.relationships:
            if len(rel.slots) != 2:
                raise SchemaError(f"non-binary relationship {rel.name}")
            a, b = rel.slots
            if a.variable == b.variable:
                raise SchemaError(
                    f"relationship {rel.name}: slots need distinct first-order variables"
                )
            for s in rel.slots:
                if s.population not in self._pop:
                    raise SchemaError(f"relationship {rel.name}: unknown population {s.population}")
            for s in rel.slots:
                if s.variable in {x.name for x in rel.attributes}:
                    raise SchemaError(f"relationship {rel.name}: column clash on {s.variable}")

    def _first_order_variables(self) -> dict[str, str]:
        var_pop: dict[str, str] = {}
        for rel in self.relationships:
            for s in rel.slots:
                if var_pop.setdefault(s.variable, s.population) != s.population:
                    raise SchemaError(
                        f"first-order variable {s.variable} bound to two populations"
                    )
        used = set(var_pop.values())
        for p in self.populations:
            if p.name not in used:
                if var_pop.setdefault(p.variable, p.name) != p.name:
                    raise SchemaError(f"first-order variable {p.variable} bound to two populations")
        return var_pop

    # lookups

    def population(self, name: str) -> Population:
        try:
            return self._pop[name]
        except KeyError:
            raise SchemaError(f"unknown population {name}") from None

    def relationship(self, name: str) -> RelationshipDecl:
        try:
            return self._rel[name]
        except KeyError:
            raise SchemaError(f"unknown relationship {name}") from None

    @property
    def variables(self) -> dict[str, str]:
        """First-order variable -> population name."""
        return dict(self._var_pop)

    def population_of(self, variable: str) -> Population:
        return self._pop[self._var_pop[variable]]

    def entity_columns(self, variable: str) -> tuple[str, ...]:
        return tuple(f"{a.name}({variable})" for a in self.population_of(variable).attributes)

    def chain_columns(self, chain: RelationshipChain) -> tuple[str, ...]:
        """Canonical column order of a chain's full table."""
        one_atts = tuple(c for v in chain.variables for c in self.entity_columns(v))
        return chain.relationship_columns + one_atts + chain.attribute_columns_2

    def domain(self, column: str) -> tuple[str, ...]:
        return self._domains[column]

    def has_column(self, column: str) -> bool:
        return column in self._domains

    def chain(self, names: Iterable[str], *, ordered: bool = False) -> RelationshipChain:
        rels = [self.relationship(n) for n in names]
        if not ordered:
            rels = list(canonical_order(rels))
        return RelationshipChain(tuple(rels))

    def entity_node(self, variable: str) -> EntityNode:
        return EntityNode(variable, self._var_pop[variable])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Schema):
            return NotImplemented
        return (self.populations, self.relationships) == (
            other.populations,
            other.relationships,
        )

    def __repr__(self) -> str:
        return (
            f"Schema(populations={[p.name for p in self.populations]}, "
            f"relationships={[r.name for r in self.relationships]})"
        )

    # serialization

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Schema":
        try:
            pops = [
                Population(
                    name=str(p["name"]),
                    table=str(p.get("table", p["name"])),
                    key=str(p.get("key", "id")),
                    variable=str(p.get("variable", p["name"])),
                    attributes=_parse_attributes(p.get("attributes", {})),
                )
                for p in doc["populations"]
            ]
            rels = []
            for r in doc.get("relationships", []):
                args = r["arguments"]
                if len(args) != 2:
                    raise SchemaError(f"non-binary relationship {r.get('name')}")
                slots = tuple(Slot(str(a["variable"]), str(a["population"])) for a in args)
                rels.append(
                    RelationshipDecl(
                        name=str(r["name"]),
                        table=str(r.get("table", r["name"])),
                        slots=slots,  # type: ignore[arg-type]
                        attributes=_parse_attributes(r.get("attributes", {})),
                    )
                )
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed schema document: {exc!r}") from exc
        return cls(pops, rels)

    def to_dict(self) -> dict:
        def atts(attributes):
            return {a.name: list(a.domain) for a in attributes}

        return {
            "populations": [
                {
                    "name": p.name,
                    "table": p.table,
                    "key": p.key,
                    "variable": p.variable,
                    "attributes": atts(p.attributes),
                }
                for p in self.populations
            ],
            "relationships": [
                {
                    "name": r.name,
                    "table": r.table,
                    "arguments": [
                        {"variable": s.variable, "population": s.population} for s in r.slots
                    ],
                    "attributes": atts(r.attributes),
                }
                for r in self.relationships
            ],
        }


def _parse_attributes(spec) -> tuple[Attribute, ...]:
    if isinstance(spec, Mapping):
        items = spec.items()
    else:
        items = ((a["name"], a["domain"]) for a in spec)
    return tuple(Attribute(str(name), tuple(str(v) for v in dom)) for name, dom in items)


def _check_domain(owner: str, attr: Attribute) -> None:
    if not attr.domain:
        raise SchemaError(f"empty domain for {owner}.{attr.name}")
    if len(set(attr.domain)) != len(attr.domain):
        raise SchemaError(f"repeated value in domain of {owner}.{attr.name}")
    bad = RESERVED_VALUES.intersection(attr.domain)
    if bad:
        raise SchemaError(f"domain of {owner}.{attr.name} contains reserved value {sorted(bad)}")


def load_schema(path: str | Path) -> Schema:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"cannot parse schema file {path}: {exc}") from exc
    return Schema.from_dict(doc)


def derive_random_variables(schema: Schema) -> list[RandomVariable]:
    """Translate the schema into random variables.

    One indicator per relationship, one entity attribute per (first-order
    variable, attribute), one relationship attribute per (relationship,
    attribute) whose domain gains ``n/a``.
    """
    out = [
        RandomVariable(RELATIONSHIP, r.column, r.name, r.name, (TRUE, FALSE))
        for r in schema.relationships
    ]
    for var, pop_name in schema.variables.items():
        for a in schema.population(pop_name).attributes:
            out.append(RandomVariable(ENTITY_ATTRIBUTE, f"{a.name}({var})", a.name, var, a.domain))
    for r in schema.relationships:
        for a, col in zip(r.attributes, r.attribute_columns):
            out.append(
                RandomVariable(RELATIONSHIP_ATTRIBUTE, col, a.name, r.name, a.domain + (NA,))
            )
    names = [rv.name for rv in out]
    if len(set(names)) != len(names):
        dup = sorted({n for n in names if names.count(n) > 1})
        raise SchemaError(f"qualified variable names collide: {dup}")
    return out


def enumerate_chain_lattice(schema: Schema, max_length: int | None = None) -> ChainLattice:
    """All connected relationship sets of size <= max_length, level by level."""
    m = len(schema.relationships)
    if max_length is None:
        max_length = max(m, 1)
    if max_length < 1:
        raise ValueError("max_length must be >= 1")
    entity_nodes = tuple(schema.entity_node(v) for v in schema.variables)
    levels: dict[int, tuple[RelationshipChain, ...]] = {}
    children: dict[RelationshipChain, tuple[RelationshipChain, ...]] = {}
    names = sorted(r.name for r in schema.relationships)
    for length in range(1, min(max_length, m) + 1):
        found = []
        for combo in combinations(names, length):
            rels = [schema.relationship(n) for n in combo]
            if len(connected_components(rels)) != 1:
                continue
            chain = RelationshipChain(canonical_order(rels))
            found.append(chain)
            if length > 1:
                subs = []
                for i in range(length):
                    rest = chain.without(i)
                    if len(connected_components(rest)) == 1:
                        subs.append(RelationshipChain(canonical_order(rest)))
                children[chain] = tuple(subs)
        if not found:
            break
        levels[length] = tuple(found)
    return ChainLattice(entity_nodes, levels, children)
