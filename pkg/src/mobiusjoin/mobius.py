"""Extension of positive-only counts to full tables with negative relationships.

The dynamic program walks the chain lattice bottom-up. For each chain it
starts from the table where every relationship is true and pivots on each
relationship in turn: the rows where the pivot is false are obtained by
subtracting the pivot-true counts from a table in which the pivot is left
unconstrained, and that table is assembled from already finished tables one
level down (plus entity tables for variables the pivot alone introduces).

Only the first phase (entity and positive chain tables) reads raw tuples.
The second phase works on contingency tables alone, so its cost depends on
table sizes and the schema, not on the number of data records.
"""

from __future__ import annotations

import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import comb, prod
from typing import Mapping

from .ct import (
    ContingencyTable,
    CTError,
    condition,
    cross_product,
    extend_with_constant,
    project,
    subtract,
    union_disjoint,
)
from .database import DatabaseInstance
from .positive import entity_ct, positive_chain_ct
from .schema import (
    FALSE,
    NA,
    TRUE,
    WILDCARD,
    ChainLattice,
    EntityNode,
    RelationshipChain,
    RelationshipDecl,
    connected_components,
)

OP_KINDS = ("select", "project", "condition", "cross_product", "add", "subtract", "union")


class PivotError(CTError):
    pass


class MissingTableError(KeyError):
    pass


def count_ops_bound(m: int) -> int:
    """Worst-case ct-algebra operation count for m relationship variables."""
    if m < 0:
        raise ValueError("m must be non-negative")
    if m == 0:
        return 0
    return 6 * m * 2 ** (m - 1)


def chain_weighted_sum(m: int) -> int:
    """sum over l of C(m, l) * l, i.e. total pivots if every subset were a chain."""
    return sum(comb(m, k) * k for k in range(1, m + 1))


def pivot(
    ct_T: ContingencyTable,
    ct_star: ContingencyTable,
    rel: RelationshipDecl,
    tally: Counter | None = None,
    check: bool = False,
) -> ContingencyTable:
    """Complete a pivot-true table with the pivot-false rows.

    ``ct_T`` holds counts with ``rel`` true over ``Vars`` plus rel's
    attributes; ``ct_star`` holds counts over ``Vars`` with ``rel``
    unconstrained. The result covers ``Vars``, rel's attributes and rel
    itself, with attributes set to ``n/a`` wherever rel is false.
    """
    tally = tally if tally is not None else Counter()
    two_atts = rel.attribute_columns
    if rel.column in ct_T.column_set() or rel.column in ct_star.column_set():
        raise PivotError(f"pivot variable {rel.column} already present in an input table")
    if set(two_atts) & ct_star.column_set():
        raise PivotError(f"attributes of {rel.name} must not appear in ct_star")
    missing = set(two_atts) - ct_T.column_set()
    if missing:
        raise PivotError(f"ct_T lacks attributes {sorted(missing)} of {rel.name}")
    variables = [c for c in ct_T.columns if c not in two_atts]
    if set(variables) != ct_star.column_set():
        raise PivotError(
            f"ct_T and ct_star disagree on shared columns: {variables} vs {ct_star.columns}"
        )

    positives = project(ct_T, variables)
    tally["project"] += 1
    try:
        ct_F = subtract(ct_star, positives)
    except CTError as exc:
        raise PivotError(f"inconsistent pivot inputs for {rel.name}: {exc}") from exc
    tally["subtract"] += 1

    ct_F_plus = extend_with_constant(ct_F, {rel.column: FALSE, **{a: NA for a in two_atts}})
    ct_T_plus = extend_with_constant(ct_T, rel.column, TRUE)
    out = union_disjoint(ct_T_plus, ct_F_plus)
    tally["union"] += 1

    if check:
        marginal = condition(out, {rel.column: WILDCARD, **{a: WILDCARD for a in two_atts}})
        if marginal != ct_star:
            raise PivotError(f"summing out {rel.name} does not recover ct_star")
        falses = condition(out, {rel.column: FALSE})
        idx = [falses.index(a) for a in two_atts]
        if project(falses, variables) != ct_F or any(
            row[i] != NA for row in falses.rows for i in idx
        ):
            raise PivotError(f"false rows of {rel.name} are inconsistent")
    out.note = f"pivot {rel.name}"
    return out


def build_ct_star(
    chain: RelationshipChain,
    i: int,
    lower_tables: Mapping[RelationshipChain, ContingencyTable],
    entity_cts: Mapping[str, ContingencyTable],
    tally: Counter | None = None,
) -> ContingencyTable:
    """Table for pivot position ``i`` (0-based) with that relationship unconstrained.

    Columns: 1Atts of the whole chain, 2Atts of every other relationship, and
    the indicators of relationships before position ``i``; rows count
    instantiations where relationships after ``i`` are true.

    The finished table of ``chain`` minus position ``i`` is conditioned on the
    later relationships; if that remainder is disconnected, its components'
    tables are multiplied (they share no variables). Entity tables supply the
    variables that only the pivot relationship mentions.
    """
    tally = tally if tally is not None else Counter()
    rels = chain.relationships
    rel = rels[i]
    rest = chain.without(i)
    later = {r.name for r in rels[i + 1:]}
    rest_vars = {v for r in rest for v in r.variables}
    factors: list[ContingencyTable] = []
    for comp in connected_components(rest):
        key = RelationshipChain(comp)
        try:
            table = lower_tables[key]
        except KeyError:
            raise MissingTableError(f"no table for sub-chain {key!r} of {chain!r}") from None
        phi = {r.column: TRUE for r in comp if r.name in later}
        if phi:
            table = condition(table, phi)
            tally["condition"] += 1
        factors.append(table)
    for v in rel.variables:
        if v not in rest_vars:
            factors.append(entity_cts[v])
    if not factors:
        return ContingencyTable.unit()
    out = factors[0]
    for f in factors[1:]:
        out = cross_product(out, f)
        tally["cross_product"] += 1
    return out


def extend_chain(
    chain: RelationshipChain,
    ct_T: ContingencyTable,
    lower_tables: Mapping[RelationshipChain, ContingencyTable],
    entity_cts: Mapping[str, ContingencyTable],
    check: bool = False,
) -> tuple[ContingencyTable, Counter]:
    """Pivot on every chain relationship in order; returns the full table and op tally."""
    tally: Counter = Counter()
    current = ct_T
    for i, rel in enumerate(chain.relationships):
        ct_star = build_ct_star(chain, i, lower_tables, entity_cts, tally)
        current = pivot(current, ct_star, rel, tally, check)
    return current, tally


@dataclass
class ChainStats:
    label: str
    length: int
    ops: dict[str, int]
    rows: int
    negative_rows: int

    @property
    def total_ops(self) -> int:
        return sum(self.ops.values())


@dataclass
class ComplexityReport:
    """Operation and statistics counts of one run.

    ``r`` counts output rows (over all chain tables) with at least one false
    relationship; ``d`` is the common size of the relationship-assignment
    subtables of the largest chain table, or None when they differ.
    """

    m: int
    link_analysis: bool
    chains: list[ChainStats] = field(default_factory=list)
    r: int = 0
    total_rows: int = 0
    d: int | None = None
    phase_times: dict[str, float] = field(default_factory=dict)
    data_accesses: dict[str, int] = field(default_factory=dict)

    @property
    def total_ops(self) -> int:
        return sum(c.total_ops for c in self.chains)

    @property
    def ops_by_kind(self) -> dict[str, int]:
        out: Counter = Counter()
        for c in self.chains:
            out.update(c.ops)
        return {k: out.get(k, 0) for k in OP_KINDS}

    @property
    def op_bound(self) -> int:
        return count_ops_bound(self.m)

    def op_signature(self) -> list[tuple[str, int, tuple[tuple[str, int], ...]]]:
        """Data-independent part of the report, for equality checks."""
        return [(c.label, c.length, tuple(sorted(c.ops.items()))) for c in self.chains]

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "link_analysis": self.link_analysis,
            "total_ops": self.total_ops,
            "op_bound": self.op_bound,
            "ops_by_kind": self.ops_by_kind,
            "r": self.r,
            "total_rows": self.total_rows,
            "d": self.d,
            "phase_times": self.phase_times,
            "data_accesses": self.data_accesses,
            "chains": [
                {
                    "chain": c.label,
                    "length": c.length,
                    "ops": {k: c.ops.get(k, 0) for k in OP_KINDS},
                    "total_ops": c.total_ops,
                    "rows": c.rows,
                    "negative_rows": c.negative_rows,
                }
                for c in self.chains
            ],
        }


def negative_rows(ct: ContingencyTable, chain: RelationshipChain) -> int:
    idx = [ct.index(c) for c in chain.relationship_columns]
    return sum(1 for row in ct.rows if any(row[i] == FALSE for i in idx))


def uniform_subtable_size(ct: ContingencyTable, chain: RelationshipChain) -> int | None:
    idx = [ct.index(c) for c in chain.relationship_columns]
    sizes = Counter(tuple(row[i] for i in idx) for row in ct.rows)
    if len(sizes) != 2 ** len(idx) or len(set(sizes.values())) != 1:
        return None
    return next(iter(sizes.values()))


def _extend_task(args):
    chain, ct_T, lower, ents, check = args
    return extend_chain(chain, ct_T, lower, ents, check)


TableKey = EntityNode | RelationshipChain


def mobius_join(
    db: DatabaseInstance,
    lattice: ChainLattice,
    *,
    link_analysis: bool = True,
    check: bool = False,
    jobs: int = 1,
) -> tuple[dict[TableKey, ContingencyTable], ComplexityReport]:
    """Compute the table of every lattice node.

    With ``link_analysis=False`` chain tables hold positive statistics only,
    with every relationship column fixed to T.
    """
    schema = db.schema
    report = ComplexityReport(m=len(schema.relationships), link_analysis=link_analysis)
    acc = db.accesses

    start = acc.count
    t0 = time.perf_counter()
    entity_cts = {node.variable: entity_ct(db, node.variable) for node in lattice.entity_nodes}
    positives = {chain: positive_chain_ct(db, chain) for chain in lattice.chains}
    t1 = time.perf_counter()
    report.data_accesses["positive"] = acc.count - start
    report.phase_times["positive"] = t1 - t0

    start = acc.count
    tables: dict[TableKey, ContingencyTable] = {
        node: entity_cts[node.variable] for node in lattice.entity_nodes
    }
    finished: dict[RelationshipChain, ContingencyTable] = {}
    tallies: dict[RelationshipChain, Counter] = {}
    if link_analysis:
        pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
        try:
            for level in sorted(lattice.levels):
                chains = lattice.levels[level]
                tasks = [
                    (c, positives[c], _needed_lower(c, finished), entity_cts, check)
                    for c in chains
                ]
                results = pool.map(_extend_task, tasks) if pool else map(_extend_task, tasks)
                for chain, (table, tally) in zip(chains, results):
                    finished[chain] = table.reorder(schema.chain_columns(chain))
                    tallies[chain] = tally
        finally:
            if pool:
                pool.shutdown()
    else:
        for chain in lattice.chains:
            table = extend_with_constant(
                positives[chain], {c: TRUE for c in chain.relationship_columns}
            )
            finished[chain] = table.reorder(schema.chain_columns(chain))
            tallies[chain] = Counter()
    t2 = time.perf_counter()
    report.data_accesses["negative"] = acc.count - start
    report.phase_times["negative"] = t2 - t1

    for chain in lattice.chains:
        table = finished[chain]
        table.note = f"chain {chain.label}"
        tables[chain] = table
        report.chains.append(
            ChainStats(
                label=chain.label,
                length=len(chain),
                ops=dict(tallies[chain]),
                rows=len(table),
                negative_rows=negative_rows(table, chain),
            )
        )
    report.r = sum(c.negative_rows for c in report.chains)
    report.total_rows = sum(c.rows for c in report.chains)
    tops = lattice.top()
    if tops:
        biggest = max(tops, key=len)
        report.d = uniform_subtable_size(finished[biggest], biggest)
    return tables, report


def _needed_lower(
    chain: RelationshipChain, finished: Mapping[RelationshipChain, ContingencyTable]
) -> dict[RelationshipChain, ContingencyTable]:
    out = {}
    for i in range(len(chain)):
        for comp in connected_components(chain.without(i)):
            key = RelationshipChain(comp)
            if key in finished:
                out[key] = finished[key]
    return out


def expected_total(db: DatabaseInstance, chain: RelationshipChain) -> int:
    """Number of instantiations of the chain's first-order variables."""
    return prod(db.variable_size(v) for v in chain.variables)
