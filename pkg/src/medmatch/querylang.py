"""Tokenizer, parser, and validator for the requirement query language.

Surface syntax: `&` (and), `|` (or), `!` (not), comparisons `>= <= =`
on integer attributes, bare names for boolean attributes, parentheses,
and `ANY(attr)` as an explicit no-constraint marker.  Precedence is
NOT > AND > OR with left associativity; AND/OR chains fold left into
binary nodes.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from functools import reduce

from .catalog import AttributeSchema


class QuerySyntaxError(Exception):
    """Lexical or grammatical error, with a character offset."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.message = message
        self.position = position


class QueryValidationError(Exception):
    """Semantic error: unknown attribute, bad threshold, bad operator."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.message = message
        self.position = position


# --- tokens -----------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<any>ANY\b)
  | (?P<ident>[a-z][a-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<ge>>=)
  | (?P<le><=)
  | (?P<eq>=)
  | (?P<and>&)
  | (?P<or>\|)
  | (?P<not>!)
  | (?P<lparen>\()
  | (?P<rparen>\))
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int


def tokenize(text: str) -> list[Token]:
    """Split query text into tokens; illegal characters report their offset."""
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise QuerySyntaxError(f"illegal character {text[pos]!r}", position=pos)
        kind = match.lastgroup
        assert kind is not None
        if kind != "ws":
            tokens.append(Token(kind, match.group(), pos))
        pos = match.end()
    return tokens


# --- AST --------------------------------------------------------------

CMP_OPS = (">=", "<=", "=")


@dataclass(frozen=True)
class AtomConstraint:
    """One attribute constraint.

    `op` is one of ">=", "<=", "=", "any" (explicit no-op), or "bare"
    (a name with no comparison; resolved during validation).
    """

    attribute: str
    op: str
    threshold: int | None = None
    position: int | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.op not in (">=", "<=", "=", "any", "bare"):
            raise ValueError(f"bad constraint op {self.op!r}")


@dataclass(frozen=True)
class Atom:
    constraint: AtomConstraint


@dataclass(frozen=True)
class Not:
    child: "Node"


@dataclass(frozen=True)
class And:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Or:
    left: "Node"
    right: "Node"


Node = Atom | Not | And | Or


def fold_and(nodes: list[Node]) -> Node:
    return reduce(And, nodes)


def fold_or(nodes: list[Node]) -> Node:
    return reduce(Or, nodes)


def conjuncts_of(node: Node) -> list[Node]:
    """Flatten the left-associative AND spine into top-level conjuncts."""
    if isinstance(node, And):
        return conjuncts_of(node.left) + conjuncts_of(node.right)
    return [node]


# --- parser -----------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.index = 0

    def peek(self) -> Token | None:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def next(self, expected: str | None = None) -> Token:
        token = self.peek()
        if token is None:
            raise QuerySyntaxError("unexpected end of input")
        if expected is not None and token.kind != expected:
            raise QuerySyntaxError(
                f"expected {expected}, got {token.text!r}", position=token.position
            )
        self.index += 1
        return token

    def parse_expression(self) -> Node:
        node = self.parse_conjunction()
        while self.peek() is not None and self.peek().kind == "or":
            self.next()
            node = Or(node, self.parse_conjunction())
        return node

    def parse_conjunction(self) -> Node:
        node = self.parse_unary()
        while self.peek() is not None and self.peek().kind == "and":
            self.next()
            node = And(node, self.parse_unary())
        return node

    def parse_unary(self) -> Node:
        token = self.peek()
        if token is not None and token.kind == "not":
            self.next()
            return Not(self.parse_unary())
        return self.parse_primary()

    def parse_primary(self) -> Node:
        token = self.peek()
        if token is None:
            raise QuerySyntaxError("unexpected end of input")
        if token.kind == "lparen":
            self.next()
            node = self.parse_expression()
            closing = self.peek()
            if closing is None or closing.kind != "rparen":
                raise QuerySyntaxError(
                    "unbalanced parentheses",
                    position=closing.position if closing else None,
                )
            self.next()
            return node
        if token.kind == "any":
            self.next()
            self.next("lparen")
            ident = self.next("ident")
            self.next("rparen")
            return Atom(AtomConstraint(ident.text, "any", position=ident.position))
        if token.kind == "ident":
            self.next()
            nxt = self.peek()
            if nxt is not None and nxt.kind in ("ge", "le", "eq"):
                op_token = self.next()
                value = self.next("int")
                op = {"ge": ">=", "le": "<=", "eq": "="}[op_token.kind]
                return Atom(
                    AtomConstraint(token.text, op, int(value.text), position=token.position)
                )
            return Atom(AtomConstraint(token.text, "bare", position=token.position))
        raise QuerySyntaxError(f"unexpected token {token.text!r}", position=token.position)


def parse(tokens: list[Token]) -> Node:
    """Parse a token list into an AST; trailing input is an error."""
    if not tokens:
        raise QuerySyntaxError("empty query")
    parser = _Parser(tokens)
    node = parser.parse_expression()
    trailing = parser.peek()
    if trailing is not None:
        raise QuerySyntaxError(
            f"trailing input {trailing.text!r}", position=trailing.position
        )
    return node


def parse_query(text: str) -> Node:
    return parse(tokenize(text))


# --- groups -----------------------------------------------------------


@dataclass(frozen=True)
class RequirementGroups:
    """Mandatory / optional / except requirement atoms.

    Composes as: AND(mandatory) & OR(optional) & NOT(each except);
    empty groups contribute no conjunct.
    """

    mandatory: tuple[AtomConstraint, ...] = ()
    optional: tuple[AtomConstraint, ...] = ()
    excluded: tuple[AtomConstraint, ...] = ()


def compose_groups(groups: RequirementGroups) -> Node:
    conjuncts: list[Node] = []
    if groups.mandatory:
        conjuncts.append(fold_and([Atom(c) for c in groups.mandatory]))
    if groups.optional:
        conjuncts.append(fold_or([Atom(c) for c in groups.optional]))
    for constraint in groups.excluded:
        conjuncts.append(Not(Atom(constraint)))
    if not conjuncts:
        raise QueryValidationError("all requirement groups are empty")
    return fold_and(conjuncts)


# --- validation -------------------------------------------------------


def validate(ast: Node, schemas: list[AttributeSchema]) -> Node:
    """Resolve attributes, range-check thresholds, desugar bare booleans.

    Bare names are sugar for `= 1` on boolean attributes only; integer
    attributes require an explicit comparison.
    """
    by_name = {s.name: s for s in schemas}

    def check_atom(constraint: AtomConstraint) -> AtomConstraint:
        schema = by_name.get(constraint.attribute)
        if schema is None:
            raise QueryValidationError(
                f"unknown attribute {constraint.attribute!r}", constraint.position
            )
        if constraint.op == "any":
            return constraint
        if constraint.op == "bare":
            if not schema.is_boolean:
                raise QueryValidationError(
                    f"bare atom {constraint.attribute!r} requires a boolean attribute; "
                    "use an explicit comparison",
                    constraint.position,
                )
            return replace(constraint, op="=", threshold=1)
        if schema.is_boolean and constraint.op != "=":
            raise QueryValidationError(
                f"boolean attribute {constraint.attribute!r} only supports = 0 or = 1",
                constraint.position,
            )
        assert constraint.threshold is not None
        if not schema.lo <= constraint.threshold <= schema.hi:
            raise QueryValidationError(
                f"threshold {constraint.threshold} out of range "
                f"[{schema.lo}, {schema.hi}] for attribute {constraint.attribute!r}",
                constraint.position,
            )
        return constraint

    def walk(node: Node) -> Node:
        if isinstance(node, Atom):
            return Atom(check_atom(node.constraint))
        if isinstance(node, Not):
            return Not(walk(node.child))
        if isinstance(node, And):
            return And(walk(node.left), walk(node.right))
        return Or(walk(node.left), walk(node.right))

    return walk(ast)


# --- printing & serialization ----------------------------------------

_PRECEDENCE = {Or: 1, And: 2, Not: 3, Atom: 4}


def constraint_text(constraint: AtomConstraint) -> str:
    if constraint.op == "any":
        return f"ANY({constraint.attribute})"
    if constraint.op == "bare":
        return constraint.attribute
    return f"{constraint.attribute} {constraint.op} {constraint.threshold}"


def to_text(node: Node) -> str:
    """Render an AST back to query text; reparsing yields an identical tree."""

    def wrap(child: Node, parent_prec: int, strict: bool) -> str:
        prec = _PRECEDENCE[type(child)]
        text = to_text(child)
        if prec < parent_prec or (strict and prec == parent_prec):
            return f"({text})"
        return text

    if isinstance(node, Atom):
        return constraint_text(node.constraint)
    if isinstance(node, Not):
        return "!" + wrap(node.child, _PRECEDENCE[Not], strict=False)
    if isinstance(node, And):
        return f"{wrap(node.left, 2, False)} & {wrap(node.right, 2, True)}"
    return f"{wrap(node.left, 1, False)} | {wrap(node.right, 1, True)}"


def ast_to_dict(node: Node) -> dict:
    if isinstance(node, Atom):
        return {
            "op": "atom",
            "attribute": node.constraint.attribute,
            "cmp": node.constraint.op,
            "threshold": node.constraint.threshold,
        }
    if isinstance(node, Not):
        return {"op": "not", "child": ast_to_dict(node.child)}
    if isinstance(node, And):
        return {"op": "and", "left": ast_to_dict(node.left), "right": ast_to_dict(node.right)}
    return {"op": "or", "left": ast_to_dict(node.left), "right": ast_to_dict(node.right)}


def ast_from_dict(doc: dict) -> Node:
    op = doc.get("op")
    if op == "atom":
        return Atom(AtomConstraint(doc["attribute"], doc["cmp"], doc.get("threshold")))
    if op == "not":
        return Not(ast_from_dict(doc["child"]))
    if op == "and":
        return And(ast_from_dict(doc["left"]), ast_from_dict(doc["right"]))
    if op == "or":
        return Or(ast_from_dict(doc["left"]), ast_from_dict(doc["right"]))
    raise ValueError(f"bad AST node {doc!r}")


def ast_to_json(node: Node) -> str:
    return json.dumps(ast_to_dict(node))


def ast_from_json(text: str) -> Node:
    return ast_from_dict(json.loads(text))
