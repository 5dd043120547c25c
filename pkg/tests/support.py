"""Shared generators and brute-force oracles for the test suite."""

from __future__ import annotations

import itertools
import random

from medmatch.catalog import (
    AttributeSchema,
    CatalogSnapshot,
    ProviderRecord,
    boolean_attribute,
    default_schemas,
    range_attribute,
)
from medmatch.querylang import And, Atom, AtomConstraint, Node, Not, Or, fold_and


def pigeonhole(pigeons: int, holes: int) -> tuple[int, list[list[int]]]:
    """PHP(p, h): p pigeons into h holes; UNSAT whenever p > h."""

    def var(i: int, j: int) -> int:
        return i * holes + j + 1

    clauses = [[var(i, j) for j in range(holes)] for i in range(pigeons)]
    for j in range(holes):
        for i1 in range(pigeons):
            for i2 in range(i1 + 1, pigeons):
                clauses.append([-var(i1, j), -var(i2, j)])
    return pigeons * holes, clauses


def random_3cnf(rng: random.Random, num_vars: int, num_clauses: int) -> list[list[int]]:
    clauses = []
    for _ in range(num_clauses):
        width = min(3, num_vars)
        chosen = rng.sample(range(1, num_vars + 1), width)
        clauses.append([v if rng.random() < 0.5 else -v for v in chosen])
    return clauses


def count_models_bruteforce(clauses: list[list[int]], num_vars: int) -> int:
    """Model count by full truth-table enumeration (≤ ~16 vars)."""
    count = 0
    for bits in itertools.product((False, True), repeat=num_vars):
        assignment = {v: bits[v - 1] for v in range(1, num_vars + 1)}
        if all(any(assignment[abs(l)] == (l > 0) for l in c) for c in clauses):
            count += 1
    return count


def make_record(
    schemas: list[AttributeSchema], provider_id: str, kind: str = "hospital", **values
) -> ProviderRecord:
    base = {s.name: s.lo for s in schemas}
    base.update(values)
    return ProviderRecord(provider_id, provider_id, kind, base)


def demo_like_snapshot() -> CatalogSnapshot:
    """Small catalog over the default schemas for matcher tests."""
    schemas = default_schemas()
    providers = (
        make_record(
            schemas, "H1", patient_centered=100, clinical_standards=70,
            tied_up_with_insurance=1, low_cost=40,
        ),
        make_record(
            schemas, "H2", patient_centered=40, clinical_standards=90,
            tied_up_with_insurance=1, low_cost=80,
        ),
        make_record(
            schemas, "H3", patient_centered=100, clinical_standards=60,
            tied_up_with_insurance=0, low_cost=10,
        ),
    )
    return CatalogSnapshot(1, tuple(schemas), providers)


def random_schemas(rng: random.Random, max_attrs: int = 4) -> list[AttributeSchema]:
    schemas = []
    for i in range(rng.randint(1, max_attrs)):
        if rng.random() < 0.3:
            schemas.append(boolean_attribute(f"a{i}"))
        else:
            lo = rng.randint(0, 5)
            schemas.append(range_attribute(f"a{i}", lo, lo + rng.randint(0, 30)))
    return schemas


def random_snapshot(
    rng: random.Random,
    schemas: list[AttributeSchema],
    max_providers: int = 20,
    min_providers: int = 0,
) -> CatalogSnapshot:
    providers = tuple(
        ProviderRecord(
            f"p{j:02d}",
            f"provider {j}",
            "hospital",
            {s.name: rng.randint(s.lo, s.hi) for s in schemas},
        )
        for j in range(rng.randint(min_providers, max_providers))
    )
    return CatalogSnapshot(1, tuple(schemas), providers)


def random_atom(rng: random.Random, schemas: list[AttributeSchema]) -> Atom:
    schema = schemas[rng.randrange(len(schemas))]
    if schema.is_boolean:
        return Atom(AtomConstraint(schema.name, "=", rng.randint(0, 1)))
    op = rng.choice([">=", "<=", "=", "any"])
    if op == "any":
        return Atom(AtomConstraint(schema.name, "any"))
    return Atom(AtomConstraint(schema.name, op, rng.randint(schema.lo, schema.hi)))


def random_validated_ast(
    rng: random.Random, schemas: list[AttributeSchema], max_atoms: int = 8
) -> Node:
    """Random query AST with at most `max_atoms` atom leaves."""

    def build(budget: int) -> tuple[Node, int]:
        if budget <= 1 or rng.random() < 0.35:
            return random_atom(rng, schemas), 1
        kind = rng.random()
        if kind < 0.2:
            child, used = build(budget)
            return Not(child), used
        left, used_left = build(budget - 1)
        right, used_right = build(budget - used_left)
        node = And(left, right) if kind < 0.65 else Or(left, right)
        return node, used_left + used_right

    node, _ = build(max_atoms)
    return node


def random_conjunction(
    rng: random.Random, schemas: list[AttributeSchema], max_conjuncts: int = 5
) -> Node:
    """Conjunction of simple (possibly negated) atoms, for relaxation tests."""
    count = rng.randint(1, max_conjuncts)
    conjuncts: list[Node] = []
    for _ in range(count):
        atom = random_atom(rng, schemas)
        conjuncts.append(Not(atom) if rng.random() < 0.3 else atom)
    return fold_and(conjuncts)
