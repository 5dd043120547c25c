import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medmatch.catalog import boolean_attribute, default_schemas, range_attribute
from medmatch.querylang import (
    And,
    Atom,
    AtomConstraint,
    Not,
    Or,
    QuerySyntaxError,
    QueryValidationError,
    RequirementGroups,
    ast_from_json,
    ast_to_json,
    compose_groups,
    conjuncts_of,
    parse,
    parse_query,
    to_text,
    tokenize,
    validate,
)

SCHEMAS = default_schemas()


def atom(name, op="bare", threshold=None):
    return Atom(AtomConstraint(name, op, threshold))


# --- tokenizer ---------------------------------------------------------


def test_tokenize_operators_and_idents():
    kinds = [t.kind for t in tokenize("a & !b")]
    assert kinds == ["ident", "and", "not", "ident"]


def test_tokenize_comparison():
    tokens = tokenize("x >= 60")
    assert [(t.kind, t.text) for t in tokens] == [("ident", "x"), ("ge", ">="), ("int", "60")]


def test_tokenize_reports_illegal_character_offset():
    with pytest.raises(QuerySyntaxError) as excinfo:
        tokenize("a $ b")
    assert excinfo.value.position == 2


def test_tokenize_positions():
    tokens = tokenize("ab & cd")
    assert [t.position for t in tokens] == [0, 3, 5]


# --- parser ------------------------------------------------------------


def test_parse_paper_style_disjunction_of_mandatories():
    ast = parse_query(
        "(high_quality_care | patient_centered) & low_cost & !tied_up_with_insurance"
    )
    expected = And(
        And(
            Or(atom("high_quality_care"), atom("patient_centered")),
            atom("low_cost"),
        ),
        Not(atom("tied_up_with_insurance")),
    )
    assert ast == expected


def test_parse_threshold_chain_with_trailing_negation():
    ast = parse_query(
        "patient_centered >= 100 & clinical_standards >= 60 & tied_up_with_insurance & !low_cost"
    )
    assert ast == And(
        And(
            And(
                atom("patient_centered", ">=", 100),
                atom("clinical_standards", ">=", 60),
            ),
            atom("tied_up_with_insurance"),
        ),
        Not(atom("low_cost")),
    )


def test_parse_precedence_or_under_and():
    ast = parse_query("a | b & c")
    assert ast == Or(atom("a"), And(atom("b"), atom("c")))


def test_parse_any_marker():
    ast = parse_query("ANY(low_cost)")
    assert ast == Atom(AtomConstraint("low_cost", "any"))


def test_parse_double_negation():
    assert parse_query("!!a") == Not(Not(atom("a")))


def test_parse_errors():
    with pytest.raises(QuerySyntaxError, match="unexpected end of input"):
        parse_query("a &")
    with pytest.raises(QuerySyntaxError, match="unbalanced parentheses"):
        parse_query("(a | b")
    with pytest.raises(QuerySyntaxError, match="trailing input"):
        parse_query("a b")
    with pytest.raises(QuerySyntaxError, match="empty query"):
        parse([])
    with pytest.raises(QuerySyntaxError, match="unexpected token"):
        parse_query("& a")


# --- groups ------------------------------------------------------------


def test_compose_groups_full():
    groups = RequirementGroups(
        mandatory=(AtomConstraint("m1", "bare"), AtomConstraint("m2", "bare")),
        optional=(AtomConstraint("o1", "bare"), AtomConstraint("o2", "bare")),
        excluded=(AtomConstraint("e1", "bare"),),
    )
    ast = compose_groups(groups)
    assert ast == And(
        And(
            And(atom("m1"), atom("m2")),
            Or(atom("o1"), atom("o2")),
        ),
        Not(atom("e1")),
    )


def test_compose_groups_single_mandatory_collapses():
    groups = RequirementGroups(mandatory=(AtomConstraint("m1", "bare"),))
    assert compose_groups(groups) == atom("m1")


def test_compose_groups_all_empty_rejected():
    with pytest.raises(QueryValidationError):
        compose_groups(RequirementGroups())


def test_compose_groups_output_validates():
    groups = RequirementGroups(
        mandatory=(AtomConstraint("patient_centered", ">=", 100),),
        optional=(
            AtomConstraint("tied_up_with_insurance", "bare"),
            AtomConstraint("modern_it_tools", "bare"),
        ),
        excluded=(AtomConstraint("low_cost", "<=", 10),),
    )
    validate(compose_groups(groups), SCHEMAS)  # must not raise


# --- validation --------------------------------------------------------


def test_validate_accepts_boundary_threshold():
    validate(parse_query("patient_centered >= 100"), SCHEMAS)


def test_validate_rejects_out_of_range_threshold():
    with pytest.raises(QueryValidationError, match="out of range"):
        validate(parse_query("patient_centered >= 101"), SCHEMAS)


def test_validate_rejects_unknown_attribute():
    with pytest.raises(QueryValidationError, match="unknown attribute"):
        validate(parse_query("unknown_attr = 1"), SCHEMAS)


def test_validate_desugars_bare_boolean():
    ast = validate(parse_query("tied_up_with_insurance"), SCHEMAS)
    assert ast == Atom(AtomConstraint("tied_up_with_insurance", "=", 1))


def test_validate_rejects_bare_integer_attribute():
    with pytest.raises(QueryValidationError, match="bare atom"):
        validate(parse_query("low_cost"), SCHEMAS)


def test_validate_rejects_inequality_on_boolean():
    with pytest.raises(QueryValidationError, match="boolean attribute"):
        validate(parse_query("tied_up_with_insurance >= 1"), SCHEMAS)


def test_validate_accepts_any_on_any_kind():
    validate(parse_query("ANY(low_cost) & ANY(tied_up_with_insurance)"), SCHEMAS)


# --- round trips and grammar coverage ----------------------------------


def _ast_strategy():
    names = st.sampled_from(["alpha", "beta", "gamma", "delta"])
    bare = st.builds(lambda n: Atom(AtomConstraint(n, "bare")), names)
    cmp_atom = st.builds(
        lambda n, op, t: Atom(AtomConstraint(n, op, t)),
        names,
        st.sampled_from([">=", "<=", "="]),
        st.integers(min_value=0, max_value=100),
    )
    any_atom = st.builds(lambda n: Atom(AtomConstraint(n, "any")), names)
    leaves = st.one_of(bare, cmp_atom, any_atom)
    return st.recursive(
        leaves,
        lambda children: st.one_of(
            st.builds(Not, children),
            st.builds(And, children, children),
            st.builds(Or, children, children),
        ),
        max_leaves=12,
    )


@settings(max_examples=200, deadline=None)
@given(_ast_strategy())
def test_print_parse_round_trip(ast):
    assert parse_query(to_text(ast)) == ast


@settings(max_examples=100, deadline=None)
@given(_ast_strategy())
def test_ast_json_round_trip(ast):
    assert ast_from_json(ast_to_json(ast)) == ast


def test_grammar_coverage_random_productions():
    """Strings generated by the abstract grammar's productions all parse."""
    rng = random.Random(12345)
    atoms = ["alpha", "beta >= 3", "gamma = 1", "delta <= 90", "ANY(epsilon)"]

    def generate(depth: int) -> str:
        if depth <= 0:
            return rng.choice(atoms)
        production = rng.randrange(4)
        if production == 0:
            return f"({generate(depth - 1)} & {generate(depth - 1)})"
        if production == 1:
            return f"({generate(depth - 1)} | {generate(depth - 1)})"
        if production == 2:
            return f"!{generate(depth - 1)}"
        return rng.choice(atoms)

    for _ in range(300):
        text = generate(rng.randint(1, 5))
        parse_query(text)  # must not raise


def test_conjuncts_of_flattens_left_spine():
    ast = parse_query("a & b & c & d")
    assert [to_text(c) for c in conjuncts_of(ast)] == ["a", "b", "c", "d"]
