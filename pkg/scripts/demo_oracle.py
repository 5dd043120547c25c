#!/usr/bin/env python3
"""Reference answer for the seeded demo query, by direct evaluation.

Loads the committed demo catalog and evaluates the demo hospital query
record by record with the plain recursive evaluator (no CNF, no
solver).  The printed provider ids are the ground truth the SAT
pipeline (CLI and HTTP alike) must reproduce exactly.
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from medmatch.catalog import default_schemas, ingest_providers
from medmatch.matching import evaluate_direct
from medmatch.querylang import parse_query, validate

DEMO_QUERY = "patient_centered >= 100 & clinical_standards >= 60 & tied_up_with_insurance"
DEMO_CATALOG = Path(__file__).resolve().parents[1] / "data" / "demo_providers.csv"


def main() -> int:
    schemas = default_schemas()
    snapshot = ingest_providers(DEMO_CATALOG.read_text(encoding="utf-8"), schemas)
    ast = validate(parse_query(DEMO_QUERY), schemas)
    matches = sorted(
        record.provider_id
        for record in snapshot.providers
        if evaluate_direct(ast, record)
    )
    print(json.dumps({"query": DEMO_QUERY, "matches": matches}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
