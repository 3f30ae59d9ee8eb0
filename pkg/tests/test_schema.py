import itertools
import json
from math import comb

import pytest

from mobiusjoin.schema import (
    NA,
    Schema,
    SchemaError,
    canonical_order,
    connected_components,
    derive_random_variables,
    enumerate_chain_lattice,
    load_schema,
)
from mobiusjoin.synthetic import build_schema, random_config

from conftest import UNIVERSITY


def test_load_university():
    schema = load_schema(UNIVERSITY / "schema.json")
    assert [p.name for p in schema.populations] == ["Student", "Professor", "Course"]
    assert len(schema.relationships) == 3
    assert schema.variables == {"P": "Professor", "S": "Student", "C": "Course"}


def test_zero_relationships_is_valid(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"populations": [{"name": "A", "attributes": {"x": [1, 2]}}]}))
    schema = load_schema(path)
    lattice = enumerate_chain_lattice(schema)
    assert lattice.chains == []
    assert [n.variable for n in lattice.entity_nodes] == ["A"]


@pytest.mark.parametrize(
    "doc, message",
    [
        (
            {
                "populations": [{"name": "A"}],
                "relationships": [
                    {
                        "name": "R",
                        "arguments": [
                            {"variable": "X", "population": "A"},
                            {"variable": "Y", "population": "A"},
                            {"variable": "Z", "population": "A"},
                        ],
                    }
                ],
            },
            "non-binary",
        ),
        ({"populations": [{"name": "A"}, {"name": "A", "table": "b"}]}, "duplicate"),
        ({"populations": [{"name": "A", "attributes": {"x": []}}]}, "empty domain"),
        ({"populations": [{"name": "A", "attributes": {"x": ["a", "n/a"]}}]}, "reserved"),
        (
            {
                "populations": [{"name": "A"}],
                "relationships": [
                    {
                        "name": "R",
                        "arguments": [
                            {"variable": "X", "population": "A"},
                            {"variable": "X", "population": "A"},
                        ],
                    }
                ],
            },
            "distinct",
        ),
        ({"populations": [{"name": "A"}], "relationships": [{"name": "R"}]}, "malformed"),
    ],
)
def test_invalid_schemas(doc, message):
    with pytest.raises(SchemaError, match=message):
        Schema.from_dict(doc)


def test_unparseable_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(SchemaError, match="parse"):
        load_schema(path)


def test_random_variables_university():
    schema = load_schema(UNIVERSITY / "schema.json")
    rvs = {rv.name: rv for rv in derive_random_variables(schema)}
    for name in ["RA(P,S)", "intelligence(S)", "ranking(S)", "capability(P,S)", "salary(P,S)"]:
        assert name in rvs
    assert rvs["RA(P,S)"].domain == ("T", "F")
    assert NA in rvs["capability(P,S)"].domain
    assert NA not in rvs["intelligence(S)"].domain
    kinds = [rv.kind for rv in rvs.values()]
    assert kinds.count("relationship") == 3
    assert kinds.count("1Att") == 6
    assert kinds.count("2Att") == 4


def test_attributeless_population_has_no_1atts():
    schema = Schema.from_dict({"populations": [{"name": "A"}, {"name": "B", "attributes": {"x": ["1"]}}]})
    rvs = derive_random_variables(schema)
    assert [rv.name for rv in rvs] == ["x(B)"]


def test_self_relationship_variables(borders):
    rvs = derive_random_variables(borders.schema)
    names = [rv.name for rv in rvs]
    assert names == [
        "Borders(C1,C2)",
        "continent(C1)",
        "size(C1)",
        "continent(C2)",
        "size(C2)",
        "length(C1,C2)",
    ]
    # brute force: each slot variable over Country carries every Country attribute
    pop = borders.schema.population("Country")
    expected = {f"{a.name}({v})" for v in ("C1", "C2") for a in pop.attributes}
    assert {rv.name for rv in rvs if rv.kind == "1Att"} == expected


def test_derive_is_deterministic():
    a = derive_random_variables(load_schema(UNIVERSITY / "schema.json"))
    b = derive_random_variables(load_schema(UNIVERSITY / "schema.json"))
    assert a == b


def test_university_lattice_has_ten_nodes():
    lattice = enumerate_chain_lattice(load_schema(UNIVERSITY / "schema.json"), 3)
    assert {k: len(v) for k, v in lattice.levels.items()} == {1: 3, 2: 3, 3: 1}
    assert len(lattice.entity_nodes) == 3
    assert len(lattice) == 10


def test_lattice_respects_max_length():
    lattice = enumerate_chain_lattice(load_schema(UNIVERSITY / "schema.json"), 2)
    assert lattice.max_level == 2
    assert len(lattice) == 9
    with pytest.raises(ValueError):
        enumerate_chain_lattice(load_schema(UNIVERSITY / "schema.json"), 0)


def test_single_relationship_lattice(f1_schema):
    lattice = enumerate_chain_lattice(f1_schema)
    assert len(lattice.chains) == 1


def _two_islands():
    return Schema.from_dict(
        {
            "populations": [{"name": n} for n in "ABCD"],
            "relationships": [
                {
                    "name": "R",
                    "arguments": [
                        {"variable": "A", "population": "A"},
                        {"variable": "B", "population": "B"},
                    ],
                },
                {
                    "name": "S",
                    "arguments": [
                        {"variable": "C", "population": "C"},
                        {"variable": "D", "population": "D"},
                    ],
                },
            ],
        }
    )


def test_disconnected_relationships_form_no_chain():
    lattice = enumerate_chain_lattice(_two_islands())
    assert list(lattice.levels) == [1]


def test_canonical_order_keeps_prefixes_connected():
    schema = Schema.from_dict(
        {
            "populations": [{"name": n} for n in "WXYZ"],
            "relationships": [
                {"name": "A", "arguments": [{"variable": "W", "population": "W"}, {"variable": "X", "population": "X"}]},
                {"name": "B", "arguments": [{"variable": "Y", "population": "Y"}, {"variable": "Z", "population": "Z"}]},
                {"name": "C", "arguments": [{"variable": "X", "population": "X"}, {"variable": "Y", "population": "Y"}]},
            ],
        }
    )
    lattice = enumerate_chain_lattice(schema)
    (top,) = lattice.levels[3]
    assert top.names == ("A", "C", "B")
    assert sorted(c.names for c in lattice.children[top]) == [("A", "C"), ("B", "C")]
    assert len(connected_components(top.without(1))) == 2


def _lattice_invariants(schema, lattice):
    m = len(schema.relationships)
    for level, chains in lattice.levels.items():
        assert len(chains) <= comb(m, level)
        for chain in chains:
            assert len(chain) == level
            bound = set(chain.relationships[0].variables)
            for rel in chain.relationships[1:]:
                assert bound & set(rel.variables)
                bound |= set(rel.variables)
            if level >= 2:
                prefix = type(chain)(chain.relationships[:-1])
                assert prefix in lattice.levels[level - 1]
    # brute force: every connected subset appears exactly once
    names = [r.name for r in schema.relationships]
    expected = set()
    for k in range(1, m + 1):
        for combo in itertools.combinations(names, k):
            rels = [schema.relationship(n) for n in combo]
            if len(connected_components(rels)) == 1:
                expected.add(frozenset(combo))
    assert {c.key for c in lattice.chains} == expected


@pytest.mark.parametrize("seed", range(40))
def test_lattice_invariants_random(seed):
    schema = build_schema(random_config(seed))
    _lattice_invariants(schema, enumerate_chain_lattice(schema))


def test_lattice_invariants_university():
    schema = load_schema(UNIVERSITY / "schema.json")
    _lattice_invariants(schema, enumerate_chain_lattice(schema))


def test_canonical_order_is_lexicographic_when_possible():
    schema = load_schema(UNIVERSITY / "schema.json")
    ordered = canonical_order(schema.relationships)
    assert [r.name for r in ordered] == ["RA", "Reg", "Teaches"]


def test_schema_round_trip():
    schema = load_schema(UNIVERSITY / "schema.json")
    assert Schema.from_dict(json.loads(json.dumps(schema.to_dict()))) == schema
