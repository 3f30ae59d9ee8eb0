"""Seeded random schemas and instances for tests and scaling studies."""

from __future__ import annotations

import gc
import math
import random
import statistics
import time
from dataclasses import dataclass, field
from typing import Any, Mapping

from .database import DatabaseInstance
from .mobius import mobius_join
from .schema import (
    Attribute,
    Population,
    RelationshipDecl,
    Schema,
    Slot,
    enumerate_chain_lattice,
)


@dataclass
class PopulationSpec:
    name: str
    size: int
    attributes: dict[str, int] = field(default_factory=dict)  # name -> domain size
    variable: str | None = None


@dataclass
class RelationshipSpec:
    name: str
    arguments: list[tuple[str, str]]  # (first-order variable, population)
    density: float
    attributes: dict[str, int] = field(default_factory=dict)


@dataclass
class GeneratorConfig:
    populations: list[PopulationSpec]
    relationships: list[RelationshipSpec] = field(default_factory=list)
    seed: int = 0

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "GeneratorConfig":
        if "seed" not in doc:
            raise ValueError("generator config needs an explicit seed")
        pops = [
            PopulationSpec(
                name=p["name"],
                size=int(p["size"]),
                attributes={k: int(v) for k, v in p.get("attributes", {}).items()},
                variable=p.get("variable"),
            )
            for p in doc["populations"]
        ]
        rels = [
            RelationshipSpec(
                name=r["name"],
                arguments=[(a["variable"], a["population"]) for a in r["arguments"]],
                density=float(r["density"]),
                attributes={k: int(v) for k, v in r.get("attributes", {}).items()},
            )
            for r in doc.get("relationships", [])
        ]
        return cls(pops, rels, int(doc["seed"]))

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "populations": [
                {
                    "name": p.name,
                    "size": p.size,
                    "attributes": p.attributes,
                    **({"variable": p.variable} if p.variable else {}),
                }
                for p in self.populations
            ],
            "relationships": [
                {
                    "name": r.name,
                    "arguments": [{"variable": v, "population": p} for v, p in r.arguments],
                    "density": r.density,
                    "attributes": r.attributes,
                }
                for r in self.relationships
            ],
        }


def _domain(k: int) -> tuple[str, ...]:
    return tuple(f"v{i}" for i in range(k))


def build_schema(config: GeneratorConfig) -> Schema:
    pops = [
        Population(
            name=p.name,
            table=p.name,
            key="id",
            variable=p.variable or p.name,
            attributes=tuple(Attribute(a, _domain(k)) for a, k in p.attributes.items()),
        )
        for p in config.populations
    ]
    rels = [
        RelationshipDecl(
            name=r.name,
            table=r.name,
            slots=tuple(Slot(v, p) for v, p in r.arguments),  # type: ignore[arg-type]
            attributes=tuple(Attribute(a, _domain(k)) for a, k in r.attributes.items()),
        )
        for r in config.relationships
    ]
    return Schema(pops, rels)


def generate(config: GeneratorConfig) -> tuple[Schema, DatabaseInstance]:
    """Uniform attribute values; each entity pair linked with probability ``density``."""
    rng = random.Random(config.seed)
    schema = build_schema(config)
    entities = {}
    for p in schema.populations:
        spec = next(s for s in config.populations if s.name == p.name)
        entities[p.name] = {
            f"{p.name.lower()}{i}": tuple(rng.choice(a.domain) for a in p.attributes)
            for i in range(spec.size)
        }
    links = {}
    for r in schema.relationships:
        spec = next(s for s in config.relationships if s.name == r.name)
        left = list(entities[r.slots[0].population])
        right = list(entities[r.slots[1].population])
        rows = []
        for a in left:
            for b in right:
                if spec.density >= 1 or (spec.density > 0 and rng.random() < spec.density):
                    rows.append((a, b, tuple(rng.choice(x.domain) for x in r.attributes)))
        links[r.name] = rows
    return schema, DatabaseInstance(schema, entities, links)


def random_config(
    seed: int,
    max_relationships: int = 3,
    max_population: int = 6,
    max_domain: int = 3,
    density: float | None = None,
) -> GeneratorConfig:
    """A small random schema shape, possibly with self-relationships."""
    rng = random.Random(seed)
    n_pops = rng.randint(1, 3)
    pops = []
    for i in range(n_pops):
        name = "ABC"[i]
        n_att = rng.randint(0, 2)
        pops.append(
            PopulationSpec(
                name=name,
                size=rng.randint(1, max_population) if rng.random() > 0.05 else 0,
                attributes={f"a{i}{j}": rng.randint(1, max_domain) for j in range(n_att)},
                variable=name,
            )
        )
    rels = []
    for j in range(rng.randint(1, max_relationships)):
        p1, p2 = rng.choice(pops).name, rng.choice(pops).name
        if p1 == p2:
            args = [(p1, p1), (f"{p1}{j + 2}", p1)]
        else:
            args = [(p1, p1), (p2, p2)]
        d = density if density is not None else rng.choice([0.0, 0.3, 0.5, 0.8, 1.0, rng.random()])
        rels.append(
            RelationshipSpec(
                name=f"R{j}",
                arguments=args,
                density=d,
                attributes={f"w{j}{k}": rng.randint(1, max_domain) for k in range(rng.randint(0, 2))},
            )
        )
    return GeneratorConfig(pops, rels, seed)


def planted_instance(size: int = 8, seed: int = 0) -> DatabaseInstance:
    """R(X, Y) holds exactly when a(X) = 1 and b(Y) = 1; c and e are noise.

    Half of each population has the planted value, so the rule
    ``a(X)=1 & b(Y)=1 -> R(X,Y)=T`` has confidence 1 and lift 4.
    """
    if size < 2 or size % 2:
        raise ValueError("size must be an even number >= 2")
    rng = random.Random(seed)
    schema = Schema.from_dict(
        {
            "populations": [
                {"name": "X", "attributes": {"a": ["0", "1"], "c": ["0", "1"]}},
                {"name": "Y", "attributes": {"b": ["0", "1"], "e": ["0", "1"]}},
            ],
            "relationships": [
                {
                    "name": "R",
                    "arguments": [
                        {"variable": "X", "population": "X"},
                        {"variable": "Y", "population": "Y"},
                    ],
                }
            ],
        }
    )
    xs = {f"x{i}": {"a": str(i % 2), "c": rng.choice("01")} for i in range(size)}
    ys = {f"y{i}": {"b": str(i % 2), "e": rng.choice("01")} for i in range(size)}
    links = [
        (x, y, {})
        for x, xv in xs.items()
        for y, yv in ys.items()
        if xv["a"] == "1" and yv["b"] == "1"
    ]
    return DatabaseInstance.from_records(schema, {"X": xs, "Y": ys}, {"R": links})


def scaling_family(
    points: int = 9, seed: int = 11, n_min: int = 30, n_max: int = 900
) -> list[GeneratorConfig]:
    """Instances whose number of negative statistics grows geometrically.

    One relationship ``R(X, Y)`` with sparse links and attribute domains as
    large as the populations, so the number of rows with ``R = F`` grows
    roughly like ``n * n`` as ``n`` sweeps geometrically from ``n_min`` to
    ``n_max``.
    """
    out = []
    for i in range(points):
        n = round(n_min * (n_max / n_min) ** (i / max(points - 1, 1)))
        out.append(
            GeneratorConfig(
                populations=[
                    PopulationSpec("X", n, {"a": n}),
                    PopulationSpec("Y", n, {"b": n}),
                ],
                relationships=[
                    RelationshipSpec("R", [("X", "X"), ("Y", "Y")], density=min(1.0, 3 / n))
                ],
                seed=seed + i,
            )
        )
    return out


def loglog_slope(xs, ys) -> float:
    lx = [math.log(x) for x in xs]
    ly = [math.log(y) for y in ys]
    return statistics.linear_regression(lx, ly).slope


def time_negative_phase(schema: Schema, db: DatabaseInstance, repeats: int = 3) -> tuple[int, float, dict]:
    """Extra statistics and best-of-``repeats`` time of the negative-extension phase."""
    lattice = enumerate_chain_lattice(schema)
    best = math.inf
    report = None
    for _ in range(repeats):
        # collector pauses would be charged to whichever phase triggers them
        gc.collect()
        gc.disable()
        try:
            _, report = mobius_join(db, lattice)
        finally:
            gc.enable()
        best = min(best, report.phase_times["negative"])
    return report.r, best, report.to_dict()


def run_bench(doc: Mapping[str, Any]) -> dict:
    """Scaling study over the instances listed in a bench config."""
    repeats = int(doc.get("repeats", 3))
    if "instances" in doc:
        configs = [GeneratorConfig.from_dict(c) for c in doc["instances"]]
    else:
        configs = scaling_family(int(doc.get("points", 9)), int(doc["seed"]))
    points = []
    for cfg in configs:
        t0 = time.perf_counter()
        schema, db = generate(cfg)
        gen_time = time.perf_counter() - t0
        extra, t, report = time_negative_phase(schema, db, repeats)
        points.append(
            {
                "seed": cfg.seed,
                "populations": {p.name: p.size for p in cfg.populations},
                "extra_statistics": extra,
                "extra_time": t,
                "positive_time": report["phase_times"]["positive"],
                "generate_time": gen_time,
                "total_rows": report["total_rows"],
                "total_ops": report["total_ops"],
            }
        )
    usable = [p for p in points if p["extra_statistics"] > 0 and p["extra_time"] > 0]
    slope = (
        loglog_slope([p["extra_statistics"] for p in usable], [p["extra_time"] for p in usable])
        if len(usable) >= 2
        else None
    )
    return {"points": points, "loglog_slope": slope}
