"""Compilation of queries and catalog snapshots into CNF.

Integer attributes are bit-blasted to binary offset encodings (value −
lo, least significant bit first) with domain clauses excluding patterns
beyond hi − lo.  Query ASTs become CNF via Tseitin definitions with
negation folded into literal polarity, comparisons become unsigned
comparator circuits against constants, and wide clauses are chained
down to width ≤ 3.  The catalog model ties a one-hot provider selector
to the attribute bits so that each model of the formula is exactly one
provider's value vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .catalog import AttributeSchema, CatalogSnapshot
from .querylang import And, Atom, AtomConstraint, Node, Not, Or

# Pairwise at-most-one is quadratic; beyond this many providers the
# sequential encoding keeps the clause count linear.
PAIRWISE_SELECTOR_LIMIT = 200


class EncodingError(Exception):
    pass


@dataclass
class CnfFormula:
    num_vars: int
    clauses: list[list[int]]

    def copy(self) -> "CnfFormula":
        return CnfFormula(self.num_vars, [list(c) for c in self.clauses])


@dataclass
class VarTable:
    """Variable allocation for one encoding session.

    entries maps (attribute, bit index) to a variable id; selectors map
    provider ids to their one-hot variables; every other allocated
    variable is an auxiliary.
    """

    entries: dict[tuple[str, int], int] = field(default_factory=dict)
    selectors: dict[str, int] = field(default_factory=dict)
    auxiliaries: list[int] = field(default_factory=list)
    next_id: int = 1
    true_var: int | None = None

    @property
    def num_vars(self) -> int:
        return self.next_id - 1

    def _fresh(self) -> int:
        var = self.next_id
        self.next_id += 1
        return var

    def new_bit(self, attribute: str, index: int) -> int:
        var = self._fresh()
        self.entries[(attribute, index)] = var
        return var

    def new_selector(self, provider_id: str) -> int:
        var = self._fresh()
        self.selectors[provider_id] = var
        return var

    def new_aux(self) -> int:
        var = self._fresh()
        self.auxiliaries.append(var)
        return var

    def has_bits(self, attribute: str) -> bool:
        return (attribute, 0) in self.entries

    def bits_of(self, attribute: str) -> list[int]:
        bits = []
        index = 0
        while (attribute, index) in self.entries:
            bits.append(self.entries[(attribute, index)])
            index += 1
        if not bits:
            raise EncodingError(f"attribute {attribute!r} has no allocated bits")
        return bits

    def varmap(self) -> dict:
        """JSON-ready sidecar mapping variable ids to their meaning."""
        vars_doc: dict[str, dict] = {}
        for (attribute, index), var in self.entries.items():
            vars_doc[str(var)] = {"kind": "bit", "attribute": attribute, "bit": index}
        for provider_id, var in self.selectors.items():
            vars_doc[str(var)] = {"kind": "selector", "provider_id": provider_id}
        for var in self.auxiliaries:
            vars_doc[str(var)] = {"kind": "aux"}
        if self.true_var is not None:
            vars_doc[str(self.true_var)] = {"kind": "const_true"}
        return {"num_vars": self.num_vars, "vars": vars_doc}


def bit_width(schema: AttributeSchema) -> int:
    """Bits needed for the attribute's span; at least one."""
    return max(1, (schema.span - 1).bit_length())


def _true_lit(table: VarTable, clauses: list[list[int]]) -> int:
    if table.true_var is None:
        table.true_var = table.new_aux()
        clauses.append([table.true_var])
    return table.true_var


def _and_gate(
    a: int | None, b: int | None, table: VarTable, clauses: list[list[int]]
) -> int | None:
    """AND of two literals; None stands for constant true."""
    if a is None:
        return b
    if b is None:
        return a
    t = table.true_var
    if t is not None:
        if a == t:
            return b
        if b == t:
            return a
        if a == -t or b == -t:
            return -t
    if a == b:
        return a
    if a == -b:
        return -_true_lit(table, clauses)
    v = table.new_aux()
    clauses.append([-v, a])
    clauses.append([-v, b])
    clauses.append([v, -a, -b])
    return v


def _or_gate(
    a: int | None, b: int | None, table: VarTable, clauses: list[list[int]]
) -> int | None:
    """OR of two literals; None stands for constant true."""
    if a is None or b is None:
        return None
    t = table.true_var
    if t is not None:
        if a == t or b == t:
            return t
        if a == -t:
            return b
        if b == -t:
            return a
    if a == b:
        return a
    if a == -b:
        return _true_lit(table, clauses)
    v = table.new_aux()
    clauses.append([v, -a])
    clauses.append([v, -b])
    clauses.append([-v, a, b])
    return v


def _materialize(lit: int | None, table: VarTable, clauses: list[list[int]]) -> int:
    return lit if lit is not None else _true_lit(table, clauses)


def _domain_clauses(bits: list[int], max_offset: int) -> list[list[int]]:
    """Clauses forbidding bit patterns above max_offset."""
    out = []
    for i in range(len(bits)):
        if not (max_offset >> i) & 1:
            clause = [-bits[i]]
            clause.extend(-bits[j] for j in range(i + 1, len(bits)) if (max_offset >> j) & 1)
            out.append(clause)
    return out


def bitblast_attribute(
    schema: AttributeSchema, table: VarTable, clauses: list[list[int]]
) -> list[int]:
    """Allocate the attribute's bit vector plus its domain clauses.

    Values are encoded as the unsigned offset (value − lo), least
    significant bit first.  Idempotent per table and attribute.
    """
    if table.has_bits(schema.name):
        return table.bits_of(schema.name)
    bits = [table.new_bit(schema.name, i) for i in range(bit_width(schema))]
    clauses.extend(_domain_clauses(bits, schema.span - 1))
    return bits


def _ge_const(bits: list[int], c: int, table: VarTable, clauses: list[list[int]]) -> int:
    lit: int | None = None  # empty suffix: x >= 0 holds
    for i, b in enumerate(bits):
        if (c >> i) & 1:
            lit = _and_gate(b, lit, table, clauses)
        else:
            lit = _or_gate(b, lit, table, clauses)
    return _materialize(lit, table, clauses)


def _le_const(bits: list[int], c: int, table: VarTable, clauses: list[list[int]]) -> int:
    lit: int | None = None
    for i, b in enumerate(bits):
        if (c >> i) & 1:
            lit = _or_gate(-b, lit, table, clauses)
        else:
            lit = _and_gate(-b, lit, table, clauses)
    return _materialize(lit, table, clauses)


def _eq_const(bits: list[int], c: int, table: VarTable, clauses: list[list[int]]) -> int:
    lit: int | None = None
    for i, b in enumerate(bits):
        lit = _and_gate(b if (c >> i) & 1 else -b, lit, table, clauses)
    return _materialize(lit, table, clauses)


def encode_comparison(
    atom: AtomConstraint,
    bits: list[int],
    schema: AttributeSchema,
    table: VarTable,
    clauses: list[list[int]],
) -> int:
    """Comparator circuit for one atom; returns its output literal."""
    if atom.op == "any":
        return _true_lit(table, clauses)
    assert atom.op in (">=", "<=", "="), f"unresolved atom {atom!r}"
    assert atom.threshold is not None
    offset = atom.threshold - schema.lo
    if atom.op == ">=":
        if offset <= 0:
            return _true_lit(table, clauses)
        return _ge_const(bits, offset, table, clauses)
    if atom.op == "<=":
        if offset >= schema.span - 1:
            return _true_lit(table, clauses)
        return _le_const(bits, offset, table, clauses)
    return _eq_const(bits, offset, table, clauses)


def tseitin_cnf(
    ast: Node,
    schemas: list[AttributeSchema] | tuple[AttributeSchema, ...],
    table: VarTable | None = None,
    clauses: list[list[int]] | None = None,
) -> tuple[int, CnfFormula]:
    """Definitional CNF for a validated AST.

    Returns the root literal and the clause fragment added by this
    call.  Asserting the root literal on top of the fragment is
    equisatisfiable with the AST; restricted to attribute bits the
    models coincide with direct evaluation.
    """
    table = table if table is not None else VarTable()
    clauses = clauses if clauses is not None else []
    by_name = {s.name: s for s in schemas}
    start = len(clauses)

    def walk(node: Node) -> int:
        if isinstance(node, Atom):
            constraint = node.constraint
            if constraint.op == "any":
                return _true_lit(table, clauses)
            schema = by_name.get(constraint.attribute)
            if schema is None:
                raise EncodingError(f"attribute {constraint.attribute!r} not in schema set")
            bits = bitblast_attribute(schema, table, clauses)
            return encode_comparison(constraint, bits, schema, table, clauses)
        if isinstance(node, Not):
            return -walk(node.child)
        if isinstance(node, And):
            return _and_gate(walk(node.left), walk(node.right), table, clauses)
        if isinstance(node, Or):
            return _or_gate(walk(node.left), walk(node.right), table, clauses)
        raise EncodingError(f"bad AST node {node!r}")

    root = walk(ast)
    fragment = CnfFormula(table.num_vars, [list(c) for c in clauses[start:]])
    return root, fragment


def reduce_to_3sat(formula: CnfFormula, table: VarTable | None = None) -> CnfFormula:
    """Chain clauses wider than three literals into width-3 clauses.

    Fresh chaining variables come from the table when given (so callers
    sharing a table stay collision-free), else from past num_vars.
    Equisatisfiable, and models projected onto the original variables
    are preserved exactly.
    """
    next_free = formula.num_vars + 1

    def fresh() -> int:
        nonlocal next_free
        if table is not None:
            return table.new_aux()
        var = next_free
        next_free += 1
        return var

    out: list[list[int]] = []
    for clause in formula.clauses:
        width = len(clause)
        if width <= 3:
            out.append(list(clause))
            continue
        links = [fresh() for _ in range(width - 3)]
        out.append([clause[0], clause[1], links[0]])
        for t in range(1, width - 3):
            out.append([-links[t - 1], clause[t + 1], links[t]])
        out.append([-links[-1], clause[width - 2], clause[width - 1]])
    num_vars = table.num_vars if table is not None else next_free - 1
    return CnfFormula(num_vars, out)


@dataclass
class CatalogModel:
    """Symbolic image of a catalog snapshot: selector one-hot + values."""

    formula: CnfFormula
    table: VarTable
    snapshot_version: int
    empty_catalog: bool


def _at_most_one(
    selectors: list[int],
    table: VarTable,
    clauses: list[list[int]],
    strategy: str = "auto",
) -> None:
    if strategy == "auto":
        strategy = "pairwise" if len(selectors) <= PAIRWISE_SELECTOR_LIMIT else "sequential"
    if len(selectors) < 2:
        return
    if strategy == "pairwise":
        for i in range(len(selectors)):
            for j in range(i + 1, len(selectors)):
                clauses.append([-selectors[i], -selectors[j]])
        return
    if strategy != "sequential":
        raise EncodingError(f"unknown at-most-one strategy {strategy!r}")
    # sequential encoding: prefix[i] means "some selector among 0..i"
    prefix = table.new_aux()
    clauses.append([-selectors[0], prefix])
    for i in range(1, len(selectors)):
        clauses.append([-selectors[i], -prefix])
        if i < len(selectors) - 1:
            nxt = table.new_aux()
            clauses.append([-prefix, nxt])
            clauses.append([-selectors[i], nxt])
            prefix = nxt


def encode_catalog_model(
    snapshot: CatalogSnapshot,
    table: VarTable | None = None,
    at_most_one: str = "auto",
) -> CatalogModel:
    """Compile a snapshot into CNF with one-hot provider selectors.

    Every model of the resulting formula assigns exactly one selector
    true and fixes each attribute's bits to that provider's values.
    An empty catalog yields the unsatisfiable empty at-least-one clause,
    flagged on the result.
    """
    if not snapshot.schemas:
        raise EncodingError("cannot encode a snapshot without schemas")
    table = table if table is not None else VarTable()
    clauses: list[list[int]] = []
    bits_by_attr = {
        schema.name: bitblast_attribute(schema, table, clauses)
        for schema in snapshot.schemas
    }
    selectors = [table.new_selector(p.provider_id) for p in snapshot.providers]
    clauses.append(list(selectors))  # at-least-one; empty when no providers
    _at_most_one(selectors, table, clauses, at_most_one)
    for record, selector in zip(snapshot.providers, selectors):
        for schema in snapshot.schemas:
            offset = record.values[schema.name] - schema.lo
            for i, bit in enumerate(bits_by_attr[schema.name]):
                clauses.append([-selector, bit if (offset >> i) & 1 else -bit])
    reduced = reduce_to_3sat(CnfFormula(table.num_vars, clauses), table)
    return CatalogModel(
        formula=reduced,
        table=table,
        snapshot_version=snapshot.version,
        empty_catalog=not snapshot.providers,
    )


def decode_attribute(model: dict[int, bool], table: VarTable, schema: AttributeSchema) -> int:
    """Read an attribute's integer value out of a model."""
    value = 0
    for i, bit in enumerate(table.bits_of(schema.name)):
        if model.get(bit, False):
            value |= 1 << i
    return value + schema.lo


def decode_selected_provider(model: dict[int, bool], table: VarTable) -> str | None:
    """The provider whose selector is true, or None."""
    for provider_id, var in table.selectors.items():
        if model.get(var, False):
            return provider_id
    return None


def export_dimacs(formula: CnfFormula) -> str:
    """Standard DIMACS CNF text for the formula."""
    lines = [f"p cnf {formula.num_vars} {len(formula.clauses)}"]
    for clause in formula.clauses:
        lines.append(" ".join(str(lit) for lit in clause) + " 0" if clause else "0")
    return "\n".join(lines) + "\n"
