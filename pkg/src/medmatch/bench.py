"""Scaling study harness: pipeline timing against synthetic catalogs.

Query size follows the cumulative-range metric: an attribute spanning
1..100 contributes 100, so five such attributes make a size-500 query.
For each requested size the harness synthesizes attributes summing to
it, a uniform random catalog, and a conjunctive query pinning every
attribute to one randomly chosen witness provider's exact values, so
each instance has exactly one matching provider and a workload shape
that isolates formula size as the variable under study.

Timing split mirrors the two reported columns: translation covers
everything that turns the snapshot and query into the solver's Boolean
model (encoding, width reduction, clause database construction);
solve covers model enumeration.  Repetitions are interleaved round-
robin across sizes so background load perturbs all sizes evenly.
"""

from __future__ import annotations

import random
import statistics
import time
from dataclasses import dataclass

from .catalog import AttributeSchema, CatalogSnapshot, ProviderRecord, range_attribute
from .encoder import VarTable, encode_catalog_model, reduce_to_3sat, tseitin_cnf
from .querylang import Atom, AtomConstraint, Node, fold_and
from .satcore import Solver

DEFAULT_SIZES = (200, 350, 1000, 1500, 2300, 3000, 3500, 4000, 5000)
DEFAULT_REPETITIONS = 5
DEFAULT_PROVIDERS = 100


@dataclass(frozen=True)
class BenchRow:
    query_size: int
    translation_ms: float
    solve_ms: float


def synthesize_attributes(size: int) -> list[AttributeSchema]:
    """Attributes whose value-range spans sum to `size` (each ≤ 100)."""
    if size < 100:
        raise ValueError("bench sizes start at 100")
    schemas = []
    remaining = size
    index = 0
    while remaining > 0:
        span = min(100, remaining)
        schemas.append(range_attribute(f"attr_{index:02d}", 1, span, "synthetic"))
        remaining -= span
        index += 1
    return schemas


def synthesize_catalog(
    schemas: list[AttributeSchema], providers: int, rng: random.Random
) -> CatalogSnapshot:
    records = []
    for i in range(providers):
        values = {s.name: rng.randint(s.lo, s.hi) for s in schemas}
        records.append(
            ProviderRecord(
                provider_id=f"p{i:03d}",
                display_name=f"synthetic provider {i}",
                kind="hospital",
                values=values,
            )
        )
    return CatalogSnapshot(1, tuple(schemas), tuple(records))


def synthesize_query(snapshot: CatalogSnapshot, rng: random.Random) -> Node:
    """Conjunction over all attributes at a random witness's exact values.

    Exactly the witness (plus any value-identical provider) matches, so
    enumeration work does not swing with the threshold draw.
    """
    witness = snapshot.providers[rng.randrange(len(snapshot.providers))]
    atoms = [
        Atom(AtomConstraint(s.name, "=", witness.values[s.name]))
        for s in snapshot.schemas
    ]
    return fold_and(atoms)


@dataclass
class _BenchInstance:
    size: int
    snapshot: CatalogSnapshot
    query: Node
    translation_samples: list[float]
    solve_samples: list[float]


def _run_instance(instance: _BenchInstance) -> None:
    snapshot, query = instance.snapshot, instance.query
    started = time.perf_counter()
    table = VarTable()
    # sequential one-hot keeps the clause count linear in providers, so
    # the translation signal stays proportional to query size
    model = encode_catalog_model(snapshot, table, at_most_one="sequential")
    root, fragment = tseitin_cnf(query, snapshot.schemas, table)
    fragment = reduce_to_3sat(fragment, table)
    solver = Solver(table.num_vars)
    for clause in model.formula.clauses:
        solver.add_clause(clause)
    for clause in fragment.clauses:
        solver.add_clause(clause)
    solver.add_clause([root])
    translation_ms = (time.perf_counter() - started) * 1000.0

    started = time.perf_counter()
    projection = [table.selectors[p.provider_id] for p in snapshot.providers]
    models = solver.enumerate_models(projection, limit=len(snapshot.providers))
    solve_ms = (time.perf_counter() - started) * 1000.0
    if not models:
        raise RuntimeError("bench query lost its witness provider")

    instance.translation_samples.append(translation_ms)
    instance.solve_samples.append(solve_ms)


def run_bench(
    sizes=DEFAULT_SIZES,
    repetitions: int = DEFAULT_REPETITIONS,
    providers: int = DEFAULT_PROVIDERS,
    seed: int = 0,
) -> list[BenchRow]:
    instances = []
    for size in sizes:
        if size < 100:
            raise ValueError(f"bench size {size} below minimum 100")
        rng = random.Random(seed * 1_000_003 + size)
        schemas = synthesize_attributes(size)
        snapshot = synthesize_catalog(schemas, providers, rng)
        query = synthesize_query(snapshot, rng)
        instances.append(_BenchInstance(size, snapshot, query, [], []))
    for _ in range(repetitions):
        for instance in instances:
            _run_instance(instance)
    return [
        BenchRow(
            query_size=instance.size,
            translation_ms=statistics.median(instance.translation_samples),
            solve_ms=statistics.median(instance.solve_samples),
        )
        for instance in instances
    ]


def bench_csv(rows: list[BenchRow]) -> str:
    lines = ["query_size,translation_ms,solve_ms"]
    for row in rows:
        lines.append(f"{row.query_size},{row.translation_ms:.3f},{row.solve_ms:.3f}")
    return "\n".join(lines) + "\n"
