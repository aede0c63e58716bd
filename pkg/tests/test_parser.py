"""Parser, printer, and round-trip properties for the script language."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trackkit.parser import (
    Assign,
    BinOp,
    Bool,
    Call,
    ExprStmt,
    Index,
    LexError,
    ListLit,
    Load,
    Num,
    ParseError,
    Program,
    ScriptError,
    Str,
    Var,
    deparse,
    deparse_expr,
    deparse_top,
    make_program,
    parse,
)

# --- statement forms ---


def test_assign_both_arrows_canonicalize():
    left = parse("x <- 1")
    right = parse("x = 1")
    assert left.exprs == right.exprs
    assert deparse_top(left.exprs[0]) == "x <- 1"


def test_load_statement():
    p = parse("library(vizlib)")
    assert p.exprs == (Load("vizlib", 0),)
    assert deparse_top(p.exprs[0]) == "library(vizlib)"


def test_statement_separators():
    p = parse("a <- 1; b <- 2\nc <- 3")
    assert [e.name for e in p.exprs] == ["a", "b", "c"]
    assert [e.index for e in p.exprs] == [0, 1, 2]


def test_expression_statement():
    p = parse("summary(fit)")
    assert p.exprs == (ExprStmt(Call("summary", ((None, Var("fit")),)), 0),)


def test_nested_library_is_an_ordinary_call():
    p = parse("x <- library(stats)")
    assert isinstance(p.exprs[0].value, Call)


# --- expressions ---


def test_precedence_and_associativity():
    e = parse("1 + 2 * 3 - 4").exprs[0].value
    assert e == BinOp("-", BinOp("+", Num(1), BinOp("*", Num(2), Num(3))), Num(4))
    assert deparse_expr(e) == "1 + 2 * 3 - 4"


def test_parens_survive_via_structure():
    e = parse("(1 + 2) * 3").exprs[0].value
    assert e == BinOp("*", BinOp("+", Num(1), Num(2)), Num(3))
    assert deparse_expr(e) == "(1 + 2) * 3"


def test_unary_minus_folds_into_literal():
    assert parse("-5").exprs[0].value == Num(-5)
    assert parse("-5.5").exprs[0].value == Num(-5.5)
    assert parse("--5").exprs[0].value == Num(5)


def test_unary_minus_on_name_becomes_subtraction():
    assert parse("-x").exprs[0].value == BinOp("-", Num(0), Var("x"))


def test_call_with_named_and_positional_args():
    e = parse('plot_spec(d, x = "carat", geoms = ["point"])').exprs[0].value
    assert e.func == "plot_spec"
    assert e.args[0] == (None, Var("d"))
    assert e.args[1] == ("x", Str("carat"))
    assert e.args[2] == ("geoms", ListLit((Str("point"),)))


def test_index_chains():
    e = parse("m[1][2]").exprs[0].value
    assert e == Index(Index(Var("m"), Num(1)), Num(2))


def test_list_literal_and_empty_list():
    assert parse("[1, 2]").exprs[0].value == ListLit((Num(1), Num(2)))
    assert parse("[]").exprs[0].value == ListLit(())


def test_booleans():
    assert parse("TRUE").exprs[0].value == Bool(True)
    assert parse("FALSE").exprs[0].value == Bool(False)


def test_string_escapes():
    assert parse(r'"a\"b\\c\nd\te\r"').exprs[0].value == Str('a"b\\c\nd\te\r')


def test_newlines_allowed_inside_call_parens():
    p = parse("f(a,\n  b)")
    assert p.exprs[0].value == Call("f", ((None, Var("a")), (None, Var("b"))))


# --- comments ---


def test_comments_attach_forward():
    p = parse("# load data\n# and sample\nd <- read_csv(\"x.csv\")\n")
    assert p.exprs[0].leading_comments == ("load data", "and sample")


def test_trailing_comment_moves_to_next_statement():
    p = parse("x <- 1 # note\ny <- 2")
    assert p.exprs[0].leading_comments == ()
    assert p.exprs[1].leading_comments == ("note",)


def test_comments_after_last_statement_kept_on_program():
    p = parse("x <- 1\n# done")
    assert p.trailing_comments == ("done",)


def test_comment_lines_round_trip():
    src = "# one\nx <- 1\n# two\ny <- x + 1\n"
    assert deparse(parse(src)) == src


# --- errors ---


@pytest.mark.parametrize(
    "bad",
    [
        '"unterminated',
        '"bad \\q escape"',
        "x <- 1e999999",
        "x <<- 1",
        "x <- ",
        "f(a,)",
        "x[1",
        "1 +",
        "TRUE <- 1",
        "library(1)",
        'library("pkg" )'.replace(" )", ")"),
        "x <- 1 y <- 2",
        "@",
    ],
)
def test_bad_source_raises_script_error(bad):
    with pytest.raises(ScriptError):
        parse(bad)


def test_error_carries_position():
    with pytest.raises(ParseError) as info:
        parse("x <- 1\ny <- *")
    assert info.value.line == 2


def test_unknown_escape_is_a_lex_error():
    with pytest.raises(LexError):
        parse('"\\q"')


# --- round trip ---

_names = st.from_regex(r"[a-z][a-z0-9_.]{0,5}", fullmatch=True).filter(
    lambda s: s not in ("library",)
)
_comment_text = st.text(alphabet="abc xyz09", max_size=10).map(str.strip)

_leaf = st.one_of(
    st.builds(Num, st.integers(min_value=-(10**9), max_value=10**9)),
    st.builds(Num, st.floats(allow_nan=False, allow_infinity=False, width=64)),
    st.builds(Str, st.text(max_size=8)),
    st.builds(Bool, st.booleans()),
    st.builds(Var, _names),
)


def _compound(children):
    args = st.lists(
        st.tuples(st.one_of(st.none(), _names), children), max_size=3
    ).map(tuple)
    return st.one_of(
        st.builds(ListLit, st.lists(children, max_size=3).map(tuple)),
        st.builds(Call, _names, args),
        st.builds(BinOp, st.sampled_from(["+", "-", "*", "/"]), children, children),
        st.builds(Index, children, children),
    )


_expr = st.recursive(_leaf, _compound, max_leaves=12)

_top = st.one_of(
    st.builds(Assign, _names, _expr, st.just(0), st.lists(_comment_text, max_size=2).map(tuple)),
    st.builds(ExprStmt, _expr, st.just(0), st.lists(_comment_text, max_size=2).map(tuple)),
    st.builds(Load, _names, st.just(0), st.lists(_comment_text, max_size=2).map(tuple)),
)

_program = st.builds(
    make_program,
    st.lists(_top, max_size=6),
    st.lists(_comment_text, max_size=2).map(tuple),
)


@settings(max_examples=300, deadline=None)
@given(_program)
def test_roundtrip_parse_deparse(program: Program):
    assert parse(deparse(program)) == program


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet='abc019 .,"()[]<>=-+*/#;\n\\te', max_size=40))
def test_fuzz_parse_never_crashes(text: str):
    try:
        program = parse(text)
    except ScriptError:
        return
    # whatever parses must already be canonical after one printing pass
    assert parse(deparse(program)) == program
