"""Brute-force ground truth by enumerating the entity cross product.

Every instantiation of a chain's first-order variables is visited once and
tallied into its cell. This is the baseline the virtual join avoids; it is
kept deliberately naive so it shares no code path with the join.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from fractions import Fraction
from math import prod

from .ct import ContingencyTable, first_difference
from .database import DatabaseInstance
from .schema import FALSE, NA, TRUE, ChainLattice, RelationshipChain

DEFAULT_CAP = 10**7


class OracleCapExceeded(RuntimeError):
    """The cross product is too large to enumerate; use the virtual join instead."""


def cross_product_size(db: DatabaseInstance, chain: RelationshipChain) -> int:
    return prod(db.variable_size(v) for v in chain.variables)


def oracle_ct(
    db: DatabaseInstance, chain: RelationshipChain, cap: int = DEFAULT_CAP
) -> ContingencyTable:
    schema = db.schema
    variables = chain.variables
    size = cross_product_size(db, chain)
    if size > cap:
        raise OracleCapExceeded(f"cross product of {chain.label} has {size} tuples > cap {cap}")
    pops = [schema.population_of(v).name for v in variables]
    entity_maps = [db.entity_map(p) for p in pops]
    pos = {v: i for i, v in enumerate(variables)}
    rels = [
        (pos[r.variables[0]], pos[r.variables[1]], db.link_map(r.name), len(r.attributes))
        for r in chain.relationships
    ]
    counts: dict[tuple, int] = defaultdict(int)
    for keys in itertools.product(*(list(m) for m in entity_maps)):
        indicators: tuple = ()
        two_atts: tuple = ()
        for i, j, links, n_att in rels:
            att = links.get((keys[i], keys[j]))
            if att is None:
                indicators += (FALSE,)
                two_atts += (NA,) * n_att
            else:
                indicators += (TRUE,)
                two_atts += att
        one_atts = tuple(v for m, k in zip(entity_maps, keys) for v in m[k])
        counts[indicators + one_atts + two_atts] += 1
    columns = (
        chain.relationship_columns
        + tuple(c for v in variables for c in schema.entity_columns(v))
        + chain.attribute_columns_2
    )
    return ContingencyTable(columns, counts, note=f"oracle {chain.label}")


def oracle_entity_ct(db: DatabaseInstance, variable: str) -> ContingencyTable:
    counts: dict[tuple, int] = defaultdict(int)
    for vals in db.entity_map(db.schema.population_of(variable).name).values():
        counts[vals] += 1
    return ContingencyTable(db.schema.entity_columns(variable), counts)


def compression_ratio(
    db: DatabaseInstance,
    chain: RelationshipChain,
    ct: ContingencyTable | None = None,
    cap: int = DEFAULT_CAP,
) -> Fraction:
    """Cross-product size over number of statistics (rows) in the chain's table.

    An empty cross product with an empty table is defined as ratio 1.
    """
    size = cross_product_size(db, chain)
    if ct is None:
        ct = oracle_ct(db, chain, cap)
    if size == 0 and len(ct) == 0:
        return Fraction(1)
    if len(ct) == 0:
        raise ZeroDivisionError(f"{chain.label}: empty table for a non-empty cross product")
    return Fraction(size, len(ct))


def verify(
    db: DatabaseInstance,
    lattice: ChainLattice,
    tables,
    cap: int = DEFAULT_CAP,
) -> list[tuple[str, str]]:
    """Compare computed tables with the oracle; returns ``(label, first difference)``."""
    out = []
    for node in lattice.entity_nodes:
        diff = first_difference(tables[node], oracle_entity_ct(db, node.variable))
        if diff:
            out.append((f"entity {node.label}", diff))
    for chain in lattice.chains:
        diff = first_difference(tables[chain], oracle_ct(db, chain, cap))
        if diff:
            out.append((f"chain {chain.label}", diff))
    return out

