import itertools
import math
import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mobiusjoin.applications import (
    mine_rules,
    mutual_information,
    rank_features,
    rules_to_csv,
    score_loglikelihood,
)
from mobiusjoin.ct import ContingencyTable, CTError
from mobiusjoin.mobius import mobius_join
from mobiusjoin.schema import enumerate_chain_lattice
from mobiusjoin.synthetic import planted_instance


def _chain_table(db, link_analysis=True):
    lattice = enumerate_chain_lattice(db.schema)
    tables, _ = mobius_join(db, lattice, link_analysis=link_analysis)
    return tables[lattice.chains[0]]


def brute_force_rules(ct, min_support, max_length):
    """Every (body, head) over distinct varying columns, counted row by row."""
    total = ct.total
    varying = [c for c in ct.columns if len({r[ct.index(c)] for r in ct.rows}) > 1]
    domains = {c: sorted({r[ct.index(c)] for r in ct.rows}) for c in varying}

    def freq(items):
        return sum(
            n for row, n in ct.rows.items() if all(row[ct.index(c)] == v for c, v in items)
        )

    out = []
    for k in range(2, max_length + 1):
        for cols in itertools.combinations(sorted(varying), k):
            for vals in itertools.product(*(domains[c] for c in cols)):
                items = tuple(zip(cols, vals))
                n = freq(items)
                if n == 0 or Fraction(n, total) < Fraction(min_support).limit_denominator(10**9):
                    continue
                for i, head in enumerate(items):
                    body = items[:i] + items[i + 1:]
                    conf = Fraction(n, freq(body))
                    out.append((conf / Fraction(freq((head,)), total), body, head))
    out.sort(key=lambda t: (-t[0], t[1], t[2]))
    return out


def test_planted_rule_is_top():
    ct = _chain_table(planted_instance(8))
    rules = mine_rules(ct, top_k=20)
    top = rules[0]
    assert top.body == (("a(X)", "1"), ("b(Y)", "1"))
    assert top.head == ("R(X,Y)", "T")
    assert top.lift == 4
    assert top.confidence == 1


@pytest.mark.parametrize("seed", range(5))
def test_rules_match_brute_force(seed):
    ct = _chain_table(planted_instance(8, seed))
    got = [(r.lift, r.body, r.head) for r in mine_rules(ct, top_k=1000, min_support=0.05)]
    assert got == brute_force_rules(ct, 0.05, 3)


def test_link_off_rules_never_mention_relationship():
    ct = _chain_table(planted_instance(16, seed=3), link_analysis=False)
    rules = mine_rules(ct, top_k=100, min_support=0.01)
    assert not any(r.mentions(["R(X,Y)"]) for r in rules)


def test_single_row_table_has_no_rules():
    # constant columns never enter a rule, so the claim "every rule has
    # confidence 1 and lift 1" holds vacuously
    ct = ContingencyTable(["a", "b"], {("1", "2"): 7})
    rules = mine_rules(ct)
    assert rules == []
    assert all(r.confidence == 1 and r.lift == 1 for r in rules)


def test_rule_errors():
    with pytest.raises(CTError):
        mine_rules(ContingencyTable(["a"], {}))
    with pytest.raises(ValueError):
        mine_rules(ContingencyTable(["a"], {("1",): 1}), min_support=0)


def test_rules_csv():
    ct = _chain_table(planted_instance(8))
    text = rules_to_csv(mine_rules(ct, top_k=1))
    assert text.splitlines()[0] == "body,head,support,confidence,lift"
    assert text.splitlines()[1].endswith(",1.000000,4.000000")


# log-likelihood


def test_score_uniform_independent():
    ct = ContingencyTable(["x"], {("0",): 5, ("1",): 5})
    assert score_loglikelihood({"x": []}, ct) == pytest.approx(-math.log(2))


def test_score_deterministic_child_is_zero():
    ct = ContingencyTable(["x", "y"], {("0", "a"): 3, ("1", "b"): 5})
    assert score_loglikelihood({"y": ["x"]}, ct) == pytest.approx(0.0)


def test_score_f1_capability_given_ra(f1):
    ct = _chain_table(f1)
    assert score_loglikelihood({"cap(P,S)": ["RA(P,S)"]}, ct) == pytest.approx(0.0)


def test_score_errors():
    ct = ContingencyTable(["x", "y"], {("0", "a"): 1})
    with pytest.raises(ValueError, match="cyclic"):
        score_loglikelihood({"x": ["y"], "y": ["x"]}, ct)
    with pytest.raises(ValueError, match="cyclic"):
        score_loglikelihood({"x": ["x"]}, ct)
    with pytest.raises(CTError):
        score_loglikelihood({"z": []}, ct)


@given(st.permutations(range(6)))
def test_score_invariant_to_row_order(order):
    rng = random.Random(0)
    rows = [((str(rng.randint(0, 1)), str(rng.randint(0, 2))), rng.randint(1, 9)) for _ in range(6)]
    counts = Counter()
    for i in order:
        counts[rows[i][0]] += rows[i][1]
    ct = ContingencyTable(["x", "y"], dict(counts))
    reference = ContingencyTable(["x", "y"], dict(sorted(counts.items())))
    assert score_loglikelihood({"y": ["x"], "x": []}, ct) == pytest.approx(
        score_loglikelihood({"y": ["x"], "x": []}, reference)
    )


# mutual information


def brute_mi(ct, x, y):
    total = ct.total
    joint, px, py = Counter(), Counter(), Counter()
    for row, n in ct.rows.items():
        a, b = row[ct.index(x)], row[ct.index(y)]
        joint[a, b] += n
        px[a] += n
        py[b] += n
    return sum(
        n / total * math.log2((n / total) / ((px[a] / total) * (py[b] / total)))
        for (a, b), n in joint.items()
    )


def test_mi_identical_is_entropy():
    ct = ContingencyTable(["x", "y"], {("0", "0"): 1, ("1", "1"): 3})
    h = -(0.25 * math.log2(0.25) + 0.75 * math.log2(0.75))
    assert mutual_information(ct, "x", "y") == pytest.approx(h)


def test_mi_independent_is_zero():
    ct = ContingencyTable(["x", "y"], {(a, b): 2 for a in "01" for b in "ab"})
    assert mutual_information(ct, "x", "y") == pytest.approx(0.0)


def test_mi_f1_ra_intel(f1):
    ct = _chain_table(f1)
    assert mutual_information(ct, "RA(P,S)", "intel(S)") == pytest.approx(1.0)
    assert mutual_information(ct, "RA(P,S)", "intel(S)") == pytest.approx(
        brute_mi(ct, "RA(P,S)", "intel(S)")
    )


def test_rank_features(university):
    lattice = enumerate_chain_lattice(university.schema)
    tables, _ = mobius_join(university, lattice)
    ct = tables[lattice.chains[0]]
    ranked = rank_features(ct, "RA(P,S)")
    assert len(ranked) == len(ct.columns) - 1
    scores = [s for _, s in ranked]
    assert scores == sorted(scores, reverse=True)
    for name, s in ranked:
        assert s == pytest.approx(brute_mi(ct, name, "RA(P,S)"))
    with pytest.raises(CTError):
        rank_features(ct, "nope")
