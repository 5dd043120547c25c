"""Query matching: encode, solve, enumerate providers, suggest relaxations.

The query and the catalog model share one variable table; asserting the
query's root literal and enumerating models projected onto the provider
selectors yields exactly the satisfying providers.  When nothing
matches, minimal sets of droppable top-level conjuncts (minimal
correction sets) are searched by increasing cardinality with
assumption-based solving.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations

from .catalog import CatalogSnapshot, ProviderRecord
from .encoder import (
    VarTable,
    decode_selected_provider,
    encode_catalog_model,
    reduce_to_3sat,
    tseitin_cnf,
)
from .querylang import And, Atom, Node, Not, Or, conjuncts_of, fold_and, to_text
from .satcore import Solver, SolverStats

# Caps keeping the relaxation search interactive.
MAX_RELAXATION_CARDINALITY = 3
MAX_RELAXATION_SOLVER_CALLS = 50


class MatchError(Exception):
    pass


@dataclass(frozen=True)
class Match:
    provider_id: str
    display_name: str
    kind: str
    values: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "provider_id": self.provider_id,
            "display_name": self.display_name,
            "kind": self.kind,
            "values": dict(self.values),
        }


@dataclass(frozen=True)
class RelaxationSuggestion:
    """A minimal set of top-level conjuncts whose removal restores matches."""

    dropped: tuple[tuple[int, str], ...]  # (conjunct index, conjunct text)
    resulting_matches: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "dropped": [{"index": i, "text": text} for i, text in self.dropped],
            "resulting_matches": list(self.resulting_matches),
        }


@dataclass
class MatchReport:
    query_text: str
    snapshot_version: int
    empty_catalog: bool
    matches: list[Match]
    relaxations: list[RelaxationSuggestion]
    queried_attributes: list[str]
    constraints: list[dict]
    timings: dict[str, float]  # translation_ms, solve_ms
    stats: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "query_text": self.query_text,
            "snapshot_version": self.snapshot_version,
            "empty_catalog": self.empty_catalog,
            "matches": [m.to_dict() for m in self.matches],
            "relaxations": [r.to_dict() for r in self.relaxations],
            "queried_attributes": list(self.queried_attributes),
            "constraints": [dict(c) for c in self.constraints],
            "timings": dict(self.timings),
            "stats": dict(self.stats),
        }


def evaluate_direct(ast: Node, record: ProviderRecord) -> bool:
    """Truth of the query on one record, by plain recursive evaluation.

    This is the matcher's independent oracle: it never touches the CNF
    pipeline.
    """
    if isinstance(ast, Atom):
        constraint = ast.constraint
        if constraint.op == "any":
            return True
        if constraint.op == "bare":
            raise MatchError(f"unvalidated bare atom {constraint.attribute!r}")
        value = record.values[constraint.attribute]
        assert constraint.threshold is not None
        if constraint.op == ">=":
            return value >= constraint.threshold
        if constraint.op == "<=":
            return value <= constraint.threshold
        return value == constraint.threshold
    if isinstance(ast, Not):
        return not evaluate_direct(ast.child, record)
    if isinstance(ast, And):
        return evaluate_direct(ast.left, record) and evaluate_direct(ast.right, record)
    if isinstance(ast, Or):
        return evaluate_direct(ast.left, record) or evaluate_direct(ast.right, record)
    raise MatchError(f"bad AST node {ast!r}")


def _collect_constraints(ast: Node) -> list[dict]:
    """Atoms in first-appearance order, as JSON-ready dicts."""
    out: list[dict] = []
    seen = set()

    def walk(node: Node) -> None:
        if isinstance(node, Atom):
            c = node.constraint
            key = (c.attribute, c.op, c.threshold)
            if key not in seen:
                seen.add(key)
                out.append(
                    {
                        "attribute": c.attribute,
                        "op": c.op,
                        "threshold": c.threshold,
                        "text": to_text(node),
                    }
                )
        elif isinstance(node, Not):
            walk(node.child)
        else:
            walk(node.left)
            walk(node.right)

    walk(ast)
    return out


def match_query(
    ast: Node,
    snapshot: CatalogSnapshot,
    query_text: str = "",
    max_suggestions: int = 5,
    suggest: bool = True,
) -> MatchReport:
    """Answer a validated query against a snapshot via the SAT pipeline."""
    started = time.perf_counter()
    table = VarTable()
    model = encode_catalog_model(snapshot, table)
    root, fragment = tseitin_cnf(ast, snapshot.schemas, table)
    fragment = reduce_to_3sat(fragment, table)
    translation_ms = (time.perf_counter() - started) * 1000.0

    solve_started = time.perf_counter()
    solver = Solver(table.num_vars)
    for clause in model.formula.clauses:
        solver.add_clause(clause)
    for clause in fragment.clauses:
        solver.add_clause(clause)
    solver.add_clause([root])
    projection = [table.selectors[p.provider_id] for p in snapshot.providers]
    models = (
        solver.enumerate_models(projection, limit=max(1, len(snapshot.providers)))
        if projection
        else []
    )
    solve_ms = (time.perf_counter() - solve_started) * 1000.0

    records = {p.provider_id: p for p in snapshot.providers}
    matched_ids = []
    for projected in models:
        provider_id = decode_selected_provider(projected, table)
        if provider_id is None:
            raise MatchError("model without a selected provider")
        matched_ids.append(provider_id)
    if len(set(matched_ids)) != len(matched_ids):
        raise MatchError("duplicate provider in enumeration")
    matches = [
        Match(
            provider_id=pid,
            display_name=records[pid].display_name,
            kind=records[pid].kind,
            values=dict(records[pid].values),
        )
        for pid in sorted(matched_ids)
    ]

    constraints = _collect_constraints(ast)
    queried = []
    for entry in constraints:
        if entry["attribute"] not in queried:
            queried.append(entry["attribute"])

    relaxations: list[RelaxationSuggestion] = []
    if suggest and not matches and not model.empty_catalog:
        relaxations = relax(ast, snapshot, max_suggestions)

    return MatchReport(
        query_text=query_text or to_text(ast),
        snapshot_version=snapshot.version,
        empty_catalog=model.empty_catalog,
        matches=matches,
        relaxations=relaxations,
        queried_attributes=queried,
        constraints=constraints,
        timings={"translation_ms": translation_ms, "solve_ms": solve_ms},
        stats=solver.stats.as_dict(),
    )


def _resulting_matches(
    conjuncts: list[Node], dropped: tuple[int, ...], snapshot: CatalogSnapshot
) -> tuple[str, ...]:
    remaining = [c for i, c in enumerate(conjuncts) if i not in dropped]
    if not remaining:
        return tuple(sorted(p.provider_id for p in snapshot.providers))
    report = match_query(fold_and(remaining), snapshot, suggest=False)
    return tuple(m.provider_id for m in report.matches)


def relax(
    ast: Node, snapshot: CatalogSnapshot, max_suggestions: int = 5
) -> list[RelaxationSuggestion]:
    """Minimal correction sets over top-level conjuncts, smallest first.

    One relaxation selector guards each conjunct; candidate drop sets
    are tested by assumption-based solving in increasing cardinality,
    skipping supersets of sets already found (those cannot be minimal).
    """
    if not snapshot.providers:
        return []
    conjuncts = conjuncts_of(ast)
    texts = [to_text(c) for c in conjuncts]
    k = len(conjuncts)
    if k == 1:
        all_ids = tuple(sorted(p.provider_id for p in snapshot.providers))
        return [RelaxationSuggestion(dropped=((0, texts[0]),), resulting_matches=all_ids)]

    table = VarTable()
    model = encode_catalog_model(snapshot, table)
    guard_clauses: list[list[int]] = []
    guards: list[int] = []
    for conjunct in conjuncts:
        root, fragment = tseitin_cnf(conjunct, snapshot.schemas, table)
        fragment = reduce_to_3sat(fragment, table)
        guard = table.new_aux()
        guards.append(guard)
        guard_clauses.extend(fragment.clauses)
        guard_clauses.append([-guard, root])

    solver = Solver(table.num_vars)
    for clause in model.formula.clauses:
        solver.add_clause(clause)
    for clause in guard_clauses:
        solver.add_clause(clause)

    found: list[tuple[int, ...]] = []
    suggestions: list[RelaxationSuggestion] = []
    calls = 0
    for cardinality in range(1, min(k, MAX_RELAXATION_CARDINALITY) + 1):
        for candidate in combinations(range(k), cardinality):
            if len(suggestions) >= max_suggestions:
                return suggestions
            if calls >= MAX_RELAXATION_SOLVER_CALLS:
                return suggestions
            candidate_set = set(candidate)
            if any(set(prior) <= candidate_set for prior in found):
                continue  # superset of a correction set: not minimal
            assumptions = [guards[i] for i in range(k) if i not in candidate_set]
            calls += 1
            outcome = solver.solve(assumptions)
            if outcome.sat:
                found.append(candidate)
                resulting = _resulting_matches(conjuncts, candidate, snapshot)
                if not resulting:
                    raise MatchError("correction set produced no matches")
                suggestions.append(
                    RelaxationSuggestion(
                        dropped=tuple((i, texts[i]) for i in candidate),
                        resulting_matches=resulting,
                    )
                )
    return suggestions
