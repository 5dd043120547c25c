"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with its runtime.  Run with `pytest tests/test_acceptance.py -v -s`.
"""

import itertools
import json
import random
import subprocess
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import support
from fastapi.testclient import TestClient
from medmatch.bench import run_bench
from medmatch.catalog import boolean_attribute, range_attribute
from medmatch.cli import main as cli_main
from medmatch.encoder import (
    VarTable,
    bitblast_attribute,
    encode_comparison,
    reduce_to_3sat,
    tseitin_cnf,
)
from medmatch.matching import evaluate_direct, match_query, relax
from medmatch.querylang import AtomConstraint, conjuncts_of, fold_and
from medmatch.satcore import Solver, check_model, dpll_oracle
from medmatch.service import ServiceConfig, create_app

ROOT = Path(__file__).resolve().parents[1]
DEMO_QUERY = "patient_centered >= 100 & clinical_standards >= 60 & tied_up_with_insurance"


@contextmanager
def criterion(name: str, budget_s: float):
    started = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {name}: FAIL ({time.perf_counter() - started:.1f}s)")
        raise
    elapsed = time.perf_counter() - started
    print(f"ACCEPTANCE {name}: PASS ({elapsed:.1f}s, budget {budget_s:.0f}s)")
    assert elapsed < budget_s, f"{name} exceeded its {budget_s}s budget: {elapsed:.1f}s"


def test_pipeline_oracle_equivalence():
    rng = random.Random(20_2400)
    with criterion("pipeline-oracle-equivalence (500 instances)", 30.0):
        for _ in range(500):
            schemas = support.random_schemas(rng, max_attrs=4)
            snapshot = support.random_snapshot(rng, schemas, max_providers=20)
            ast = support.random_validated_ast(rng, schemas, max_atoms=8)
            report = match_query(ast, snapshot, suggest=False)
            sat_side = [m.provider_id for m in report.matches]
            direct_side = sorted(
                p.provider_id for p in snapshot.providers if evaluate_direct(ast, p)
            )
            assert sat_side == direct_side, (sat_side, direct_side)


def _check_comparator(schema, op, threshold):
    table, clauses = VarTable(), []
    bits = bitblast_attribute(schema, table, clauses)
    out = encode_comparison(
        AtomConstraint(schema.name, op, threshold), bits, schema, table, clauses
    )
    for pattern in range(1 << len(bits)):
        value = pattern + schema.lo
        in_domain = pattern <= schema.hi - schema.lo
        if op == ">=":
            holds = value >= threshold
        elif op == "<=":
            holds = value <= threshold
        else:
            holds = value == threshold
        units = [b if (pattern >> i) & 1 else -b for i, b in enumerate(bits)]
        positive = dpll_oracle(clauses + [[u] for u in units] + [[out]], table.num_vars)[0]
        negative = dpll_oracle(clauses + [[u] for u in units] + [[-out]], table.num_vars)[0]
        assert positive == (in_domain and holds), (schema, op, threshold, pattern)
        assert negative == (in_domain and not holds), (schema, op, threshold, pattern)


def test_encoder_exhaustive_checks():
    ranges = [
        boolean_attribute("x"),
        range_attribute("x", 3, 3),
        range_attribute("x", 0, 7),
        range_attribute("x", 2, 9),
        range_attribute("x", 0, 63),
        range_attribute("x", 10, 90),
        range_attribute("x", 0, 100),
    ]
    rng = random.Random(77_000)
    with criterion("encoder-exhaustive (comparators + equisatisfiability)", 60.0):
        for schema in ranges:
            ops = ["="] if schema.is_boolean else [">=", "<=", "="]
            for op in ops:
                for threshold in range(schema.lo, schema.hi + 1):
                    _check_comparator(schema, op, threshold)

        # Tseitin + width-3 reduction: truth tables over all attribute values
        schemas = [range_attribute(f"a{i}", 0, 7) for i in range(3)]
        for _ in range(20):
            ast = support.random_validated_ast(rng, schemas, max_atoms=5)
            table = VarTable()
            base = []
            for schema in schemas:
                bitblast_attribute(schema, table, base)
            root, fragment = tseitin_cnf(ast, schemas, table)
            reduced = reduce_to_3sat(fragment, table)
            for values in itertools.product(range(8), repeat=3):
                record = support.make_record(
                    schemas, "p", **{f"a{i}": v for i, v in enumerate(values)}
                )
                expected = evaluate_direct(ast, record)
                units = []
                for i, schema in enumerate(schemas):
                    bits = table.bits_of(schema.name)
                    units.extend(
                        b if (values[i] >> j) & 1 else -b for j, b in enumerate(bits)
                    )
                for clause_set in (fragment.clauses, reduced.clauses):
                    got = dpll_oracle(
                        base + clause_set + [[u] for u in units] + [[root]],
                        table.num_vars,
                    )[0]
                    assert got == expected, (ast, values)


def test_solver_differential_fuzzing():
    rng = random.Random(424242)
    with criterion("solver-differential (1000 instances + pigeonhole)", 120.0):
        for _ in range(1000):
            num_vars = rng.randint(5, 25)
            ratio = rng.uniform(2.0, 6.0)
            clauses = support.random_3cnf(rng, num_vars, max(1, int(num_vars * ratio)))
            solver = Solver(num_vars)
            for clause in clauses:
                solver.add_clause(clause)
            outcome = solver.solve()
            assert outcome.sat == dpll_oracle(clauses, num_vars)[0]
            if outcome.sat:
                assert check_model(clauses, outcome.model)
        for pigeons, holes in [(4, 3), (5, 4)]:
            num_vars, clauses = support.pigeonhole(pigeons, holes)
            solver = Solver(num_vars)
            for clause in clauses:
                solver.add_clause(clause)
            assert not solver.solve().sat, f"PHP({pigeons},{holes}) must be UNSAT"


def test_relaxation_minimality():
    rng = random.Random(909090)
    with criterion("relaxation-minimality (200 zero-match instances)", 60.0):
        verified = 0
        while verified < 200:
            schemas = support.random_schemas(rng, max_attrs=3)
            snapshot = support.random_snapshot(
                rng, schemas, max_providers=6, min_providers=1
            )
            ast = support.random_conjunction(rng, schemas, max_conjuncts=5)
            if any(evaluate_direct(ast, p) for p in snapshot.providers):
                continue
            verified += 1
            conjuncts = conjuncts_of(ast)
            suggestions = relax(ast, snapshot, max_suggestions=50)
            for suggestion in suggestions:
                dropped = {i for i, _ in suggestion.dropped}
                remaining = [c for i, c in enumerate(conjuncts) if i not in dropped]
                if remaining:
                    relaxed = fold_and(remaining)
                    direct = sorted(
                        p.provider_id
                        for p in snapshot.providers
                        if evaluate_direct(relaxed, p)
                    )
                else:
                    direct = sorted(p.provider_id for p in snapshot.providers)
                # sufficiency: dropping exactly these conjuncts restores matches
                assert direct, "suggestion failed to restore any match"
                assert list(suggestion.resulting_matches) == direct
                # minimality: no proper subset restores anything
                for smaller in range(1, len(dropped)):
                    for subset in itertools.combinations(sorted(dropped), smaller):
                        kept = [
                            c for i, c in enumerate(conjuncts) if i not in set(subset)
                        ]
                        partial = fold_and(kept)
                        assert not any(
                            evaluate_direct(partial, p) for p in snapshot.providers
                        ), "a proper subset already restores matches"


def _linear_r2(xs, ys):
    n = len(xs)
    mean_x, mean_y = sum(xs) / n, sum(ys) / n
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    sxx = sum((x - mean_x) ** 2 for x in xs)
    beta = sxy / sxx
    alpha = mean_y - beta * mean_x
    residual = sum((y - (alpha + beta * x)) ** 2 for x, y in zip(xs, ys))
    total = sum((y - mean_y) ** 2 for y in ys)
    return 1.0 - residual / total


def test_scaling_trend():
    sizes = (200, 350, 1000, 1500, 2300, 3000, 3500, 4000, 5000)
    with criterion("scaling-trend (translation linear, solve flat)", 300.0):
        rows = run_bench(sizes=sizes, repetitions=9, seed=0)
        translation = [row.translation_ms for row in rows]
        solve = [row.solve_ms for row in rows]
        print("  translation ms:", [round(t, 2) for t in translation])
        print("  solve ms:      ", [round(s, 3) for s in solve])
        print(
            f"  size-5000 pipeline total: {translation[-1] + solve[-1]:.2f} ms "
            "(hardware-bound; trend is the assertion, absolute values are context)"
        )
        for smaller, larger in zip(translation, translation[1:]):
            assert larger >= smaller, f"translation not monotone: {translation}"
        r2 = _linear_r2(list(sizes), translation)
        assert r2 >= 0.9, f"translation/size linear fit R^2 {r2:.3f} < 0.9"
        ratio = max(solve) / min(solve)
        assert ratio <= 3.0, f"solve max/min ratio {ratio:.2f} > 3"


def _strip_volatile(payload: dict) -> dict:
    doc = dict(payload)
    doc.pop("timings", None)
    doc.pop("stats", None)
    return doc


def test_end_to_end_demo():
    with criterion("end-to-end-demo (oracle = CLI = HTTP)", 60.0):
        oracle_out = subprocess.run(
            [sys.executable, str(ROOT / "scripts" / "demo_oracle.py")],
            capture_output=True,
            text=True,
            check=True,
        )
        oracle = json.loads(oracle_out.stdout)
        assert oracle["query"] == DEMO_QUERY
        expected_ids = oracle["matches"]
        assert expected_ids, "demo oracle must produce at least one match"

        cli_out = subprocess.run(
            [
                sys.executable,
                "-m",
                "medmatch.cli",
                "query",
                "--catalog",
                str(ROOT / "data" / "demo_providers.csv"),
                "--json",
                DEMO_QUERY,
            ],
            capture_output=True,
            text=True,
            check=True,
        )
        cli_payload = json.loads(cli_out.stdout)["machine_payload"]
        assert [m["provider_id"] for m in cli_payload["matches"]] == expected_ids

        app = create_app(ServiceConfig())
        with TestClient(app) as client:
            login = client.post(
                "/login", json={"username": "admin", "password": "admin-password"}
            ).json()
            headers = {"Authorization": f"Bearer {login['token']}"}
            ingest = client.post(
                "/providers",
                content=(ROOT / "data" / "demo_providers.csv").read_text("utf-8"),
                headers={**headers, "Content-Type": "text/csv"},
            )
            assert ingest.status_code == 200
            response = client.post(
                "/query", json={"query": DEMO_QUERY}, headers=headers
            )
            assert response.status_code == 200
            http_payload = response.json()["machine_payload"]

        assert [m["provider_id"] for m in http_payload["matches"]] == expected_ids
        # identical machine payloads modulo run-dependent timing/stat fields
        assert _strip_volatile(cli_payload) == _strip_volatile(http_payload)
