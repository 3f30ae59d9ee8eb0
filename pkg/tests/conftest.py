from pathlib import Path

import pytest

from mobiusjoin import DatabaseInstance, Schema, load_database, load_schema

ROOT = Path(__file__).resolve().parents[1]
UNIVERSITY = ROOT / "data" / "university"

STUDENT = {
    "name": "Student",
    "table": "student",
    "key": "s_id",
    "variable": "S",
    "attributes": {"intel": ["hi", "lo"], "rank": ["1", "2"]},
}
PROFESSOR = {
    "name": "Professor",
    "table": "professor",
    "key": "p_id",
    "variable": "P",
    "attributes": {"pop": ["hi", "lo"], "teach": ["hi", "lo"]},
}
COURSE = {
    "name": "Course",
    "table": "course",
    "key": "c_id",
    "variable": "C",
    "attributes": {"diff": ["easy", "hard"]},
}
RA = {
    "name": "RA",
    "arguments": [
        {"variable": "P", "population": "Professor"},
        {"variable": "S", "population": "Student"},
    ],
    "attributes": {"cap": ["hi", "lo"], "sal": ["high", "low"]},
}
REG = {
    "name": "Reg",
    "arguments": [
        {"variable": "S", "population": "Student"},
        {"variable": "C", "population": "Course"},
    ],
    "attributes": {"grade": ["A", "B"]},
}

F1_ENTITIES = {
    "Student": {
        "s1": {"intel": "hi", "rank": "1"},
        "s2": {"intel": "lo", "rank": "2"},
    },
    "Professor": {"p1": {"pop": "hi", "teach": "hi"}},
}
F1_LINKS = {"RA": [("p1", "s1", {"cap": "hi", "sal": "high"})]}


@pytest.fixture
def f1_schema():
    return Schema.from_dict({"populations": [STUDENT, PROFESSOR], "relationships": [RA]})


@pytest.fixture
def f1(f1_schema):
    return DatabaseInstance.from_records(f1_schema, F1_ENTITIES, F1_LINKS)


@pytest.fixture
def f2():
    schema = Schema.from_dict(
        {"populations": [STUDENT, PROFESSOR, COURSE], "relationships": [RA, REG]}
    )
    entities = dict(F1_ENTITIES, Course={"c1": {"diff": "easy"}})
    links = dict(
        F1_LINKS,
        Reg=[("s1", "c1", {"grade": "A"}), ("s2", "c1", {"grade": "B"})],
    )
    return DatabaseInstance.from_records(schema, entities, links)


@pytest.fixture
def university():
    schema = load_schema(UNIVERSITY / "schema.json")
    return load_database(schema, UNIVERSITY)


def borders_db():
    schema = Schema.from_dict(
        {
            "populations": [
                {
                    "name": "Country",
                    "key": "code",
                    "variable": "C1",
                    "attributes": {"continent": ["eu", "as"], "size": ["s", "l"]},
                }
            ],
            "relationships": [
                {
                    "name": "Borders",
                    "arguments": [
                        {"variable": "C1", "population": "Country"},
                        {"variable": "C2", "population": "Country"},
                    ],
                    "attributes": {"length": ["short", "long"]},
                }
            ],
        }
    )
    entities = {
        "Country": {
            "fr": {"continent": "eu", "size": "l"},
            "be": {"continent": "eu", "size": "s"},
            "cn": {"continent": "as", "size": "l"},
        }
    }
    links = {
        "Borders": [
            ("fr", "be", {"length": "short"}),
            ("be", "fr", {"length": "short"}),
            ("cn", "fr", {"length": "long"}),
        ]
    }
    return DatabaseInstance.from_records(schema, entities, links)


@pytest.fixture
def borders():
    return borders_db()


# one PASS/FAIL line per acceptance criterion

_CRITERIA: dict[int, list[str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    if report.when == "call" or report.outcome != "passed":
        _CRITERIA.setdefault(n, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        outcomes = _CRITERIA[n]
        ok = all(o == "passed" for o in outcomes)
        terminalreporter.write_line(
            f"criterion {n}: {'PASS' if ok else 'FAIL'} ({len(outcomes)} checks)"
        )
