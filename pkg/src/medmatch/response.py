"""Deterministic rendering of match reports to text and UI payloads.

Natural-language output is template-driven: fixed strings with named
placeholders, overridable from a template file (`name = text` lines).
Every number that appears in rendered text comes from the report or the
schema set, never from rendering logic.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .catalog import AttributeSchema
from .matching import MatchReport


class ResponseError(Exception):
    """Report references attributes the schema set does not know."""


DEFAULT_TEMPLATES = {
    "summary_one": "1 provider satisfies all requirements: {providers}.",
    "summary_many": "{count} providers satisfy all requirements: {providers}.",
    "summary_none": "no provider satisfies all requirements.",
    "summary_relaxed": (
        "no provider satisfies all requirements; dropping {dropped} yields "
        "{count} provider(s): {providers}."
    ),
    "summary_empty_catalog": "catalog is empty; there are no providers to match.",
    "relaxation": "drop {dropped} to match {count} provider(s): {providers}",
}


def load_templates(path: str | Path | None) -> dict[str, str]:
    """Defaults overridden by `name = text` lines from a template file."""
    templates = dict(DEFAULT_TEMPLATES)
    if path is None:
        return templates
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ResponseError(f"template line {line_no}: expected name = text")
        name, text = line.split("=", 1)
        templates[name.strip()] = text.strip()
    return templates


@dataclass
class RenderedResponse:
    summary_text: str
    provider_cards: list[dict]
    relaxation_texts: list[str]
    machine_payload: dict

    def to_dict(self) -> dict:
        return {
            "summary_text": self.summary_text,
            "provider_cards": self.provider_cards,
            "relaxation_texts": self.relaxation_texts,
            "machine_payload": self.machine_payload,
        }


def _dropped_phrase(suggestion_doc: dict) -> str:
    return " and ".join(d["text"] for d in suggestion_doc["dropped"])


def render(
    report: MatchReport,
    schemas: list[AttributeSchema] | tuple[AttributeSchema, ...],
    templates: dict[str, str] | None = None,
) -> RenderedResponse:
    """Build the user-facing response for a match report."""
    templates = templates or DEFAULT_TEMPLATES
    by_name = {s.name: s for s in schemas}
    for attribute in report.queried_attributes:
        if attribute not in by_name:
            raise ResponseError(
                f"report references unknown attribute {attribute!r} "
                "(schema/report version skew)"
            )

    cards = []
    for match in report.matches:
        attributes = []
        for constraint in report.constraints:
            name = constraint["attribute"]
            schema = by_name[name]
            attributes.append(
                {
                    "name": name,
                    "value": match.values[name],
                    "requirement": constraint["text"],
                    "description": schema.description,
                }
            )
        cards.append(
            {
                "provider_id": match.provider_id,
                "display_name": match.display_name,
                "kind": match.kind,
                "attributes": attributes,
            }
        )

    relaxation_texts = []
    for suggestion in report.relaxations:
        doc = suggestion.to_dict()
        relaxation_texts.append(
            templates["relaxation"].format(
                dropped=_dropped_phrase(doc),
                count=len(doc["resulting_matches"]),
                providers=", ".join(doc["resulting_matches"]),
            )
        )

    if report.empty_catalog:
        summary = templates["summary_empty_catalog"]
    elif report.matches:
        ids = ", ".join(m.provider_id for m in report.matches)
        if len(report.matches) == 1:
            summary = templates["summary_one"].format(providers=ids)
        else:
            summary = templates["summary_many"].format(count=len(report.matches), providers=ids)
    elif report.relaxations:
        first = report.relaxations[0].to_dict()
        summary = templates["summary_relaxed"].format(
            dropped=_dropped_phrase(first),
            count=len(first["resulting_matches"]),
            providers=", ".join(first["resulting_matches"]),
        )
    else:
        summary = templates["summary_none"]

    return RenderedResponse(
        summary_text=summary,
        provider_cards=cards,
        relaxation_texts=relaxation_texts,
        machine_payload=report.to_dict(),
    )


def render_plain(report: MatchReport) -> str:
    """Fixed-width table of matches over the queried attributes."""
    columns = ["provider_id", "display_name"] + list(report.queried_attributes)
    rows = [
        [match.provider_id, match.display_name]
        + [str(match.values[a]) for a in report.queried_attributes]
        for match in report.matches
    ]
    if not rows:
        rows = [["(no matches)"] + [""] * (len(columns) - 1)]
    widths = [
        max(len(columns[i]), max(len(row[i]) for row in rows)) for i in range(len(columns))
    ]
    lines = [
        "  ".join(columns[i].ljust(widths[i]) for i in range(len(columns))).rstrip(),
        "  ".join("-" * widths[i] for i in range(len(columns))).rstrip(),
    ]
    for row in rows:
        lines.append("  ".join(row[i].ljust(widths[i]) for i in range(len(columns))).rstrip())
    return "\n".join(lines) + "\n"
