"""Attribute schemas, provider records, and the versioned provider catalog.

The catalog is the backend database image the matcher runs against:
a set of attribute schemas (boolean or bounded integer range) plus one
value vector per provider.  Ingestion produces immutable, monotonically
versioned snapshots so queries always evaluate against a stable image
while new provider data is loaded.
"""

from __future__ import annotations

import csv
import io
import json
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path

ATTRIBUTE_NAME_RE = re.compile(r"[a-z][a-z0-9_]*\Z")

PROVIDER_KINDS = ("hospital", "diagnostic_center", "insurance_org")


class CatalogError(Exception):
    """Raised for malformed schema or provider documents."""


@dataclass(frozen=True)
class AttributeSchema:
    """One requirement attribute: boolean or a bounded integer range."""

    name: str
    kind: str  # "boolean" | "integer-range"
    lo: int
    hi: int
    description: str = ""

    def __post_init__(self) -> None:
        if not ATTRIBUTE_NAME_RE.match(self.name):
            raise CatalogError(f"bad attribute name {self.name!r}")
        if self.kind == "boolean":
            if (self.lo, self.hi) != (0, 1):
                raise CatalogError(f"boolean attribute {self.name!r} must span [0, 1]")
        elif self.kind == "integer-range":
            if self.lo > self.hi:
                raise CatalogError(
                    f"malformed range for {self.name!r}: lo {self.lo} > hi {self.hi}"
                )
        else:
            raise CatalogError(f"unknown attribute kind {self.kind!r}")

    @property
    def is_boolean(self) -> bool:
        return self.kind == "boolean"

    @property
    def span(self) -> int:
        """Number of representable values (hi - lo + 1)."""
        return self.hi - self.lo + 1


def boolean_attribute(name: str, description: str = "") -> AttributeSchema:
    return AttributeSchema(name, "boolean", 0, 1, description)


def range_attribute(name: str, lo: int, hi: int, description: str = "") -> AttributeSchema:
    return AttributeSchema(name, "integer-range", lo, hi, description)


def default_schemas() -> list[AttributeSchema]:
    """The built-in twelve requirement attributes.

    Percent-style attributes are [0, 100] ranges; tie-up and tooling
    attributes are boolean.
    """
    return [
        range_attribute("high_quality_care", 0, 100, "overall care quality score (percent)"),
        range_attribute("patient_centered", 0, 100, "patient centered service level (percent)"),
        range_attribute("min_length_of_stay", 0, 100, "minimum length of stay (days)"),
        range_attribute("low_readmission", 0, 100, "freedom-from-readmission score (percent)"),
        range_attribute("adequate_staff", 0, 100, "staffing adequacy score (percent)"),
        range_attribute("low_cost", 0, 100, "cost effectiveness score (percent)"),
        range_attribute(
            "available_medical_services", 0, 100, "breadth of medical services (percent)"
        ),
        range_attribute("reputed_physician", 0, 100, "physician reputation score (percent)"),
        range_attribute("clinical_standards", 0, 100, "clinical standards compliance (percent)"),
        boolean_attribute("modern_it_tools", "uses modern IT tooling"),
        boolean_attribute("tied_up_with_insurance", "tied up with a good insurance agency"),
        range_attribute("better_treatment_plan", 0, 100, "treatment plan quality (percent)"),
    ]


@dataclass(frozen=True)
class ProviderRecord:
    """One provider's concrete attribute-value vector."""

    provider_id: str
    display_name: str
    kind: str  # one of PROVIDER_KINDS
    values: dict[str, int]

    def __post_init__(self) -> None:
        if not self.provider_id:
            raise CatalogError("provider_id must be nonempty")
        if self.kind not in PROVIDER_KINDS:
            raise CatalogError(f"unknown provider kind {self.kind!r}")


@dataclass(frozen=True)
class Violation:
    attribute: str
    reason: str


@dataclass(frozen=True)
class CatalogSnapshot:
    """Immutable, versioned image of the provider database."""

    version: int
    schemas: tuple[AttributeSchema, ...]
    providers: tuple[ProviderRecord, ...]

    def schema_map(self) -> dict[str, AttributeSchema]:
        return {s.name: s for s in self.schemas}

    def provider(self, provider_id: str) -> ProviderRecord:
        for record in self.providers:
            if record.provider_id == provider_id:
                return record
        raise KeyError(provider_id)


def empty_snapshot(schemas: list[AttributeSchema] | None = None) -> CatalogSnapshot:
    return CatalogSnapshot(0, tuple(schemas or ()), ())


def validate_record(
    record: ProviderRecord, schemas: list[AttributeSchema] | tuple[AttributeSchema, ...]
) -> list[Violation]:
    """Check a record against the schema set; empty result means ok."""
    violations = []
    known = set()
    for schema in schemas:
        known.add(schema.name)
        if schema.name not in record.values:
            violations.append(Violation(schema.name, "missing"))
            continue
        value = record.values[schema.name]
        if not isinstance(value, int) or isinstance(value, bool):
            violations.append(Violation(schema.name, f"non-integer value {value!r}"))
        elif not schema.lo <= value <= schema.hi:
            violations.append(
                Violation(
                    schema.name,
                    f"value {value} out of range [{schema.lo}, {schema.hi}]",
                )
            )
    for name in record.values:
        if name not in known:
            violations.append(Violation(name, "not in schema set"))
    return violations


def load_schema(source: str | list) -> list[AttributeSchema]:
    """Parse a schema document (JSON array of attribute objects).

    Booleans may omit lo/hi; integer ranges must carry both.
    """
    if isinstance(source, str):
        try:
            parsed = json.loads(source)
        except json.JSONDecodeError as exc:
            raise CatalogError(f"schema document is not valid JSON: {exc}") from exc
    else:
        parsed = source
    if not isinstance(parsed, list):
        raise CatalogError("schema document must be a JSON array")
    schemas: list[AttributeSchema] = []
    seen: set[str] = set()
    for entry in parsed:
        if not isinstance(entry, dict) or "name" not in entry or "kind" not in entry:
            raise CatalogError(f"schema entry must carry name and kind: {entry!r}")
        name, kind = entry["name"], entry["kind"]
        if name in seen:
            raise CatalogError(f"duplicate attribute name {name!r}")
        seen.add(name)
        description = entry.get("description", "")
        if kind == "boolean":
            schemas.append(
                AttributeSchema(name, kind, entry.get("lo", 0), entry.get("hi", 1), description)
            )
        else:
            if "lo" not in entry or "hi" not in entry:
                raise CatalogError(f"attribute {name!r} needs lo and hi bounds")
            schemas.append(AttributeSchema(name, kind, entry["lo"], entry["hi"], description))
    return schemas


def _records_from_json(parsed: list) -> list[ProviderRecord]:
    records = []
    for entry in parsed:
        if not isinstance(entry, dict):
            raise CatalogError(f"provider entry must be an object: {entry!r}")
        try:
            values = entry["values"]
            record = ProviderRecord(
                provider_id=entry["provider_id"],
                display_name=entry.get("display_name", entry["provider_id"]),
                kind=entry["kind"],
                values={str(k): v for k, v in values.items()},
            )
        except KeyError as exc:
            raise CatalogError(f"provider entry missing field {exc}") from exc
        records.append(record)
    return records


def _records_from_csv(text: str) -> list[ProviderRecord]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CatalogError("empty CSV provider document") from None
    header = [h.strip() for h in header]
    if header[:3] != ["provider_id", "display_name", "kind"]:
        raise CatalogError(
            "CSV header must start with provider_id,display_name,kind; got " + ",".join(header[:3])
        )
    attr_names = header[3:]
    records = []
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise CatalogError(f"row {row_no}: expected {len(header)} cells, got {len(row)}")
        values = {}
        for name, cell in zip(attr_names, row[3:]):
            cell = cell.strip()
            try:
                values[name] = int(cell)
            except ValueError:
                raise CatalogError(
                    f"row {row_no}, column {name!r}: integer cell required, got {cell!r}"
                ) from None
        records.append(
            ProviderRecord(
                provider_id=row[0].strip(),
                display_name=row[1].strip(),
                kind=row[2].strip(),
                values=values,
            )
        )
    return records


def parse_provider_document(source: str | list) -> list[ProviderRecord]:
    """Parse a provider document: JSON array or CSV text."""
    if isinstance(source, list):
        return _records_from_json(source)
    stripped = source.lstrip()
    if stripped.startswith("["):
        try:
            parsed = json.loads(source)
        except json.JSONDecodeError as exc:
            raise CatalogError(f"provider document is not valid JSON: {exc}") from exc
        return _records_from_json(parsed)
    return _records_from_csv(source)


def ingest_providers(
    source: str | list,
    schemas: list[AttributeSchema] | tuple[AttributeSchema, ...],
    previous_version: int = 0,
) -> CatalogSnapshot:
    """Validate a provider document and build the next snapshot."""
    if not schemas:
        raise CatalogError("cannot ingest providers without a schema set")
    records = parse_provider_document(source)
    seen_ids: set[str] = set()
    for record in records:
        if record.provider_id in seen_ids:
            raise CatalogError(f"duplicate provider_id {record.provider_id!r}")
        seen_ids.add(record.provider_id)
        violations = validate_record(record, schemas)
        if violations:
            first = violations[0]
            raise CatalogError(
                f"provider {record.provider_id!r}: {first.attribute}: {first.reason}"
            )
    return CatalogSnapshot(previous_version + 1, tuple(schemas), tuple(records))


def snapshot_to_json(snapshot: CatalogSnapshot) -> str:
    doc = {
        "version": snapshot.version,
        "schemas": [
            {
                "name": s.name,
                "kind": s.kind,
                "lo": s.lo,
                "hi": s.hi,
                "description": s.description,
            }
            for s in snapshot.schemas
        ],
        "providers": [
            {
                "provider_id": p.provider_id,
                "display_name": p.display_name,
                "kind": p.kind,
                "values": p.values,
            }
            for p in snapshot.providers
        ],
    }
    return json.dumps(doc, indent=2)


def snapshot_from_json(text: str) -> CatalogSnapshot:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"snapshot file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "schemas" not in doc:
        raise CatalogError("snapshot file must be an object with schemas and providers")
    schemas = load_schema(doc["schemas"])
    records = _records_from_json(doc.get("providers", []))
    for record in records:
        violations = validate_record(record, schemas)
        if violations:
            first = violations[0]
            raise CatalogError(
                f"provider {record.provider_id!r}: {first.attribute}: {first.reason}"
            )
    return CatalogSnapshot(int(doc.get("version", 0)), tuple(schemas), tuple(records))


class CatalogStore:
    """Versioned snapshot store: one serialized writer, lock-free readers.

    Readers always see the latest published snapshot; every snapshot ever
    published stays addressable by version for query-log replay.
    """

    def __init__(self, schemas: list[AttributeSchema] | None = None):
        self._lock = threading.Lock()
        self._schemas = list(schemas) if schemas is not None else default_schemas()
        self._current = empty_snapshot(self._schemas)
        self._history: dict[int, CatalogSnapshot] = {0: self._current}

    @property
    def schemas(self) -> list[AttributeSchema]:
        return list(self._schemas)

    def snapshot(self) -> CatalogSnapshot:
        return self._current

    def snapshot_at(self, version: int) -> CatalogSnapshot:
        return self._history[version]

    def ingest(self, source: str | list) -> CatalogSnapshot:
        with self._lock:
            snapshot = ingest_providers(source, self._schemas, self._current.version)
            self._history[snapshot.version] = snapshot
            self._current = snapshot
            return snapshot

    def save(self, path: str | Path) -> None:
        Path(path).write_text(snapshot_to_json(self._current), encoding="utf-8")

    def load(self, path: str | Path) -> CatalogSnapshot:
        with self._lock:
            snapshot = snapshot_from_json(Path(path).read_text(encoding="utf-8"))
            self._schemas = list(snapshot.schemas)
            self._current = snapshot
            self._history[snapshot.version] = snapshot
            return snapshot
