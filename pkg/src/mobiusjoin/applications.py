"""Consumers of precomputed tables: association rules, log-likelihood, MI ranking.

Everything here reads counts from a ContingencyTable only; no data access.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from graphlib import CycleError, TopologicalSorter
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .ct import ContingencyTable, CTError, project

Item = tuple[str, str]


@dataclass(frozen=True)
class AssociationRule:
    body: tuple[Item, ...]
    head: Item
    support: Fraction
    confidence: Fraction
    lift: Fraction

    @property
    def variables(self) -> set[str]:
        return {v for v, _ in self.body} | {self.head[0]}

    def mentions(self, columns: Iterable[str]) -> bool:
        return bool(self.variables & set(columns))

    def __str__(self) -> str:
        return f"{_fmt_items(self.body)} -> {_fmt_items((self.head,))}"


def _fmt_items(items: Iterable[Item]) -> str:
    return " & ".join(f"{v}={x}" for v, x in items)


def _itemset_counts(
    ct: ContingencyTable, min_count: int, max_length: int
) -> dict[tuple[Item, ...], int]:
    """Levelwise (Apriori) search for frequent conjunctions over distinct columns."""
    varying = [
        i for i, c in enumerate(ct.columns) if len({row[i] for row in ct.rows}) > 1
    ]
    singles: dict[tuple[Item, ...], int] = defaultdict(int)
    for row, n in ct.rows.items():
        for i in varying:
            singles[((ct.columns[i], row[i]),)] += n
    frequent = {k: v for k, v in singles.items() if v >= min_count}
    out = dict(frequent)
    # per row: its items that are frequent on their own, in column order
    row_items = [
        ([(ct.columns[i], row[i]) for i in varying if ((ct.columns[i], row[i]),) in frequent], n)
        for row, n in ct.rows.items()
    ]
    level = sorted(frequent)
    size = 1
    while level and size < max_length:
        size += 1
        prev = set(level)
        candidates = set()
        for a, b in combinations(level, 2):
            if a[:-1] != b[:-1] or a[-1][0] == b[-1][0]:
                continue
            cand = tuple(sorted(a + (b[-1],)))
            if all(sub in prev for sub in combinations(cand, size - 1)):
                candidates.add(cand)
        if not candidates:
            break
        counts: dict[tuple[Item, ...], int] = defaultdict(int)
        for items, n in row_items:
            for sub in combinations(sorted(items), size):
                if sub in candidates:
                    counts[sub] += n
        level = sorted(k for k, v in counts.items() if v >= min_count)
        out.update({k: counts[k] for k in level})
    return out


def mine_rules(
    ct: ContingencyTable,
    top_k: int = 20,
    min_support: float = 0.1,
    max_length: int = 3,
) -> list[AssociationRule]:
    """Top rules ``body -> head`` by lift, single-item heads.

    Frequencies are count sums over the table total. Columns that take a
    single value in ``ct`` never enter a rule. Ties in lift are broken by
    (body, head) in lexicographic order.
    """
    if ct.is_empty():
        raise CTError("cannot mine rules from an empty table")
    if not 0 < min_support <= 1:
        raise ValueError("min_support must lie in (0, 1]")
    total = ct.total
    min_count = math.ceil(Fraction(min_support).limit_denominator(10**9) * total)
    counts = _itemset_counts(ct, max(min_count, 1), max_length)
    rules = []
    for itemset, n in counts.items():
        if len(itemset) < 2:
            continue
        for k, head in enumerate(itemset):
            body = itemset[:k] + itemset[k + 1:]
            confidence = Fraction(n, counts[body])
            lift = confidence / Fraction(counts[(head,)], total)
            rules.append(AssociationRule(body, head, Fraction(n, total), confidence, lift))
    rules.sort(key=lambda r: (-r.lift, r.body, r.head))
    return rules[:top_k]


def rules_to_csv(rules: Sequence[AssociationRule]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["body", "head", "support", "confidence", "lift"])
    for r in rules:
        w.writerow(
            [
                _fmt_items(r.body),
                _fmt_items((r.head,)),
                f"{float(r.support):.6f}",
                f"{float(r.confidence):.6f}",
                f"{float(r.lift):.6f}",
            ]
        )
    return buf.getvalue()


def _check_structure(structure: Mapping[str, Sequence[str]], ct: ContingencyTable) -> None:
    for node, parents in structure.items():
        for v in (node, *parents):
            if v not in ct.column_set():
                raise CTError(f"unknown variable {v!r} in structure")
        if node in parents:
            raise ValueError(f"cyclic structure: {node} is its own parent")
    try:
        tuple(TopologicalSorter({k: list(v) for k, v in structure.items()}).static_order())
    except CycleError as exc:
        raise ValueError(f"cyclic structure: {exc.args[1]}") from exc


def score_loglikelihood(
    structure: Mapping[str, Sequence[str]], ct: ContingencyTable
) -> float:
    """Frequency-weighted log-likelihood of a parent map under MLE parameters.

    ``sum_rows freq(row) * sum_v log p(v | parents(v))`` with natural logs;
    only nodes that are keys of ``structure`` contribute a term.
    """
    _check_structure(structure, ct)
    total = ct.total
    if total == 0:
        raise CTError("cannot score an empty table")
    score = 0.0
    for node, parents in structure.items():
        parents = list(parents)
        family = project(ct, parents + [node])
        parent_counts = project(ct, parents).rows
        for row, n in family.rows.items():
            score += n / total * math.log(n / parent_counts[row[:-1]])
    return score


def mutual_information(ct: ContingencyTable, x: str, y: str) -> float:
    """I(x; y) in bits under the table's frequencies."""
    total = ct.total
    joint = project(ct, [x, y]).rows
    px = project(ct, [x]).rows
    py = project(ct, [y]).rows
    mi = 0.0
    for (a, b), n in joint.items():
        mi += n / total * math.log2(n * total / (px[(a,)] * py[(b,)]))
    return max(mi, 0.0)


def rank_features(ct: ContingencyTable, target: str) -> list[tuple[str, float]]:
    """Every other column with its MI against ``target``, highest first."""
    ct.index(target)
    scores = [(c, mutual_information(ct, c, target)) for c in ct.columns if c != target]
    scores.sort(key=lambda p: (-round(p[1], 12), p[0]))
    return scores
