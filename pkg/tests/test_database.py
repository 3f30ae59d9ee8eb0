import pytest

from mobiusjoin.database import (
    DatabaseInstance,
    DataError,
    load_database,
    population_size,
    write_database,
)
from mobiusjoin.synthetic import generate, random_config

from conftest import F1_ENTITIES


def _write(directory, name, text):
    (directory / f"{name}.csv").write_text(text)


@pytest.fixture
def f1_dir(tmp_path, f1):
    write_database(f1, tmp_path)
    return tmp_path


def test_load_f1(f1_dir, f1_schema):
    db = load_database(f1_schema, f1_dir)
    assert population_size(db, "Student") == 2
    assert population_size(db, "Professor") == 1
    assert db.link_count("RA") == 1
    assert db.entity_map("Student") == {"s1": ("hi", "1"), "s2": ("lo", "2")}


def test_round_trip(f1_dir, f1_schema, f1, tmp_path_factory):
    db = load_database(f1_schema, f1_dir)
    again = tmp_path_factory.mktemp("again")
    write_database(db, again)
    assert load_database(f1_schema, again) == db == f1


@pytest.mark.parametrize("seed", range(10))
def test_round_trip_random(seed, tmp_path):
    schema, db = generate(random_config(seed))
    write_database(db, tmp_path)
    assert load_database(schema, tmp_path) == db


def test_empty_relationship_table(f1_dir, f1_schema):
    _write(f1_dir, "RA", "P,S,cap,sal\n")
    db = load_database(f1_schema, f1_dir)
    assert db.link_count("RA") == 0


def test_empty_entity_table(f1_schema):
    db = DatabaseInstance.from_records(
        f1_schema, {"Student": {}, "Professor": F1_ENTITIES["Professor"]}
    )
    assert db.population_size("Student") == 0


@pytest.mark.parametrize(
    "table, text, message",
    [
        ("RA", "P,S,cap,sal\np1,s9,hi,high\n", "dangling"),
        ("RA", "P,S,cap,sal\np1,s1,hi,high\np1,s1,lo,low\n", "duplicate pair"),
        ("RA", "P,S,cap,sal,bonus\np1,s1,hi,high,1\n", "unknown column"),
        ("RA", "P,S,cap,sal\np1,s1,hi,huge\n", "outside declared domain"),
        ("RA", "P,S,cap,sal\np1,s1,n/a,high\n", "reserved"),
        ("student", "s_id,intel,rank\ns1,hi,1\ns1,lo,2\n", "duplicate key"),
        ("student", "s_id,intel,rank\ns1,mid,1\n", "outside declared domain"),
        ("student", "s_id,intel\ns1,hi\n", "missing column"),
    ],
)
def test_load_errors(f1_dir, f1_schema, table, text, message):
    _write(f1_dir, table, text)
    with pytest.raises(DataError, match=message):
        load_database(f1_schema, f1_dir)


def test_missing_file(f1_dir, f1_schema):
    (f1_dir / "RA.csv").unlink()
    with pytest.raises(DataError, match="missing table file"):
        load_database(f1_schema, f1_dir)


def test_unknown_population(f1):
    with pytest.raises(DataError):
        population_size(f1, "Course")


def test_access_counter_counts_reads(f1):
    before = f1.accesses.count
    list(f1.iter_links("RA"))
    list(f1.iter_entities("Student"))
    assert f1.accesses.count - before == 3
    f1.link_map("RA")
    f1.entity_map("Student")
    assert f1.accesses.count - before == 3


def test_entity_copies_scale_populations(f1):
    big = f1.with_entity_copies(10)
    assert big.population_size("Student") == 20
    assert big.link_count("RA") == 100
