"""Counts for positive relationships only: entity tables and chain joins.

``positive_chain_ct`` is the in-memory equivalent of::

    SELECT COUNT(*), <1Atts>, <2Atts> FROM <entity tables>, <relationship tables>
    WHERE <foreign keys match> GROUP BY <1Atts>, <2Atts>

It joins one relationship at a time on shared first-order variables and keeps
only aggregated partial states: the keys of variables that later
relationships still need, plus the attribute values collected so far.
"""

from __future__ import annotations

from collections import defaultdict

from .ct import ContingencyTable
from .database import DatabaseInstance
from .schema import RelationshipChain


def entity_ct(db: DatabaseInstance, variable: str) -> ContingencyTable:
    """ct(1Atts(X)); the zero-column table with count |X| when X has no attributes."""
    pop = db.schema.population_of(variable)
    columns = db.schema.entity_columns(variable)
    rows: dict[tuple, int] = defaultdict(int)
    for _, vals in db.iter_entities(pop.name):
        rows[vals] += 1
    return ContingencyTable(columns, rows, note=f"entity {variable}", validate=False)


def positive_chain_ct(db: DatabaseInstance, chain: RelationshipChain) -> ContingencyTable:
    """ct(1Atts(chain), 2Atts(chain) | every chain relationship = T)."""
    schema = db.schema
    rels = chain.relationships
    last_use = {}
    for pos, rel in enumerate(rels):
        for v in rel.variables:
            last_use[v] = pos

    bound: list[str] = []  # variables whose keys are carried in the state
    columns: list[str] = []  # attribute columns collected so far
    state: dict[tuple[tuple, tuple], int] = {((), ()): 1}

    for pos, rel in enumerate(rels):
        v1, v2 = rel.variables
        shared = [v for v in (v1, v2) if v in bound]
        # hash the relationship on the variables already bound
        index: dict[tuple, list[tuple[str, str, tuple]]] = defaultdict(list)
        for k1, k2, vals in db.iter_links(rel.name):
            probe = tuple(k1 if v == v1 else k2 for v in shared)
            index[probe].append((k1, k2, vals))
        pos_in_bound = [bound.index(v) for v in shared]
        new_vars = [v for v in (v1, v2) if v not in bound]
        next_bound = bound + new_vars
        columns = columns + list(rel.attribute_columns)

        new_state: dict[tuple[tuple, tuple], int] = defaultdict(int)
        for (keys, vals), n in state.items():
            probe = tuple(keys[i] for i in pos_in_bound)
            for k1, k2, att in index.get(probe, ()):
                fresh = tuple(k1 if v == v1 else k2 for v in new_vars)
                new_state[(keys + fresh, vals + att)] += n

        # resolve variables no later relationship needs into their 1Atts
        done = [v for v in next_bound if last_use[v] == pos]
        if done:
            keep_idx = [i for i, v in enumerate(next_bound) if last_use[v] != pos]
            done_idx = [next_bound.index(v) for v in done]
            pops = [schema.population_of(v).name for v in done]
            for v in done:
                columns.extend(schema.entity_columns(v))
            resolved: dict[tuple[tuple, tuple], int] = defaultdict(int)
            cache: dict[tuple[str, str], tuple] = {}
            for (keys, vals), n in new_state.items():
                extra: tuple = ()
                for i, pop in zip(done_idx, pops):
                    k = keys[i]
                    got = cache.get((pop, k))
                    if got is None:
                        got = cache[(pop, k)] = db.entity(pop, k)
                    extra += got
                resolved[(tuple(keys[i] for i in keep_idx), vals + extra)] += n
            new_state = resolved
            next_bound = [next_bound[i] for i in keep_idx]
        bound = next_bound
        state = new_state

    rows: dict[tuple, int] = defaultdict(int)
    for (_, vals), n in state.items():
        rows[vals] += n
    ct = ContingencyTable(columns, rows, note=f"positive {chain.label}", validate=False)
    canonical = [c for c in schema.chain_columns(chain) if c in ct.column_set()]
    return ct.reorder(canonical)
