"""Parsing and printing for the small analysis scripts the tracker records.

The language is deliberately tiny: straight-line statements with no
control flow, one statement per line (or per ';').  A statement is an
assignment to a name, a bare expression, or a ``library(name)`` package
load.  Expressions cover names, string/number/boolean literals, list
literals, calls with positional and named arguments, the four arithmetic
operators, and 1-based indexing with ``base[key]``.

``deparse`` prints a program in canonical form: one statement per line,
``<-`` for every assignment, single spaces around operators.  Parsing the
canonical text yields the identical program, which the tests rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable


class ScriptError(Exception):
    """Source text that cannot be turned into a program."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} at line {line}, col {col}")
        self.line = line
        self.col = col


class LexError(ScriptError):
    pass


class ParseError(ScriptError):
    pass


# --- tokens ---

@dataclass
class Token:
    kind: str  # NAME NUMBER STRING OP COMMENT NEWLINE EOF
    text: str
    line: int
    col: int
    value: object = None


_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t", "r": "\r"}
_SINGLE_OPS = "=+-*/()[],"


def _name_start(ch: str) -> bool:
    return ch.isalpha() or ch in "._"


def _name_part(ch: str) -> bool:
    return ch.isalnum() or ch in "._"


def lex(source: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(source)
    line = 1
    col = 1
    depth = 0  # newlines are statement separators only outside (), []

    def emit(kind: str, text: str, value: object = None, at_col: int | None = None):
        tokens.append(Token(kind, text, line, at_col if at_col is not None else col, value))

    while i < n:
        ch = source[i]
        if ch == "\n":
            if depth == 0:
                emit("NEWLINE", "\n")
            i += 1
            line += 1
            col = 1
        elif ch in " \t\r":
            i += 1
            col += 1
        elif ch == "#":
            j = i
            while j < n and source[j] != "\n":
                j += 1
            emit("COMMENT", source[i:j], value=source[i + 1 : j].strip())
            col += j - i
            i = j
        elif ch == '"':
            start_col = col
            i += 1
            col += 1
            parts: list[str] = []
            while True:
                if i >= n or source[i] == "\n":
                    raise LexError("unterminated string", line, start_col)
                c = source[i]
                if c == '"':
                    i += 1
                    col += 1
                    break
                if c == "\\":
                    if i + 1 >= n:
                        raise LexError("unterminated string", line, start_col)
                    esc = source[i + 1]
                    if esc not in _ESCAPES:
                        raise LexError(f"unknown escape '\\{esc}'", line, col)
                    parts.append(_ESCAPES[esc])
                    i += 2
                    col += 2
                else:
                    parts.append(c)
                    i += 1
                    col += 1
            emit("STRING", "", value="".join(parts), at_col=start_col)
        elif ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            start = i
            start_col = col
            is_float = False
            while i < n and source[i].isdigit():
                i += 1
            if i < n and source[i] == ".":
                is_float = True
                i += 1
                while i < n and source[i].isdigit():
                    i += 1
            if i < n and source[i] in "eE":
                j = i + 1
                if j < n and source[j] in "+-":
                    j += 1
                if j >= n or not source[j].isdigit():
                    raise LexError("malformed number", line, start_col)
                is_float = True
                i = j
                while i < n and source[i].isdigit():
                    i += 1
            text = source[start:i]
            col += i - start
            value: int | float = float(text) if is_float else int(text)
            if isinstance(value, float) and math.isinf(value):
                raise LexError("number literal too large", line, start_col)
            emit("NUMBER", text, value=value, at_col=start_col)
        elif _name_start(ch):
            start = i
            start_col = col
            while i < n and _name_part(source[i]):
                i += 1
            col += i - start
            emit("NAME", source[start:i], at_col=start_col)
        elif ch == "<":
            if i + 1 < n and source[i + 1] == "-":
                emit("OP", "<-")
                i += 2
                col += 2
            else:
                raise LexError("unexpected character '<'", line, col)
        elif ch == ";":
            emit("NEWLINE", ";")
            i += 1
            col += 1
        elif ch in _SINGLE_OPS:
            if ch in "([":
                depth += 1
            elif ch in ")]" and depth > 0:
                depth -= 1
            emit("OP", ch)
            i += 1
            col += 1
        else:
            raise LexError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("EOF", "", line, col))
    return tokens


# --- syntax tree ---

@dataclass(frozen=True)
class Num:
    value: int | float


@dataclass(frozen=True)
class Str:
    value: str


@dataclass(frozen=True)
class Bool:
    value: bool


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class ListLit:
    items: tuple["Expr", ...]


@dataclass(frozen=True)
class Call:
    func: str
    # (name, expr) pairs in source order; name is None for positional args
    args: tuple[tuple[str | None, "Expr"], ...]

    def positional(self) -> list["Expr"]:
        return [e for name, e in self.args if name is None]

    def named(self) -> dict[str, "Expr"]:
        return {name: e for name, e in self.args if name is not None}


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Index:
    base: "Expr"
    key: "Expr"


Expr = Num | Str | Bool | Var | ListLit | Call | BinOp | Index


@dataclass(frozen=True)
class Assign:
    name: str
    value: Expr
    index: int = 0
    leading_comments: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExprStmt:
    value: Expr
    index: int = 0
    leading_comments: tuple[str, ...] = ()


@dataclass(frozen=True)
class Load:
    package: str
    index: int = 0
    leading_comments: tuple[str, ...] = ()


TopExpr = Assign | ExprStmt | Load


@dataclass(frozen=True)
class Program:
    exprs: tuple[TopExpr, ...]
    trailing_comments: tuple[str, ...] = ()


def make_program(exprs: Iterable[TopExpr], trailing_comments: tuple[str, ...] = ()) -> Program:
    """Build a program from statements, renumbering their indices."""
    fixed = tuple(replace(e, index=i) for i, e in enumerate(exprs))
    return Program(fixed, trailing_comments)


# --- parser ---

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0
        self.pending: list[str] = []  # comment texts awaiting the next statement

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def take(self) -> Token:
        tok = self.toks[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind.lower()
            raise ParseError(f"expected {want!r} but found {self._describe(tok)}", tok.line, tok.col)
        return self.take()

    @staticmethod
    def _describe(tok: Token) -> str:
        if tok.kind == "EOF":
            return "end of input"
        if tok.kind == "NEWLINE":
            return "end of statement"
        return repr(tok.text or tok.value)

    def _at(self, kind: str, text: str | None = None, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok.kind == kind and (text is None or tok.text == text)

    def skip_separators(self):
        while True:
            tok = self.peek()
            if tok.kind == "NEWLINE":
                self.take()
            elif tok.kind == "COMMENT":
                self.pending.append(tok.value)  # type: ignore[arg-type]
                self.take()
            else:
                return

    def expect_separator(self):
        while self._at("COMMENT"):
            self.pending.append(self.take().value)  # type: ignore[arg-type]
        tok = self.peek()
        if tok.kind in ("NEWLINE", "EOF"):
            return
        raise ParseError(f"expected end of statement but found {self._describe(tok)}", tok.line, tok.col)

    # statements

    def parse_top(self, index: int, comments: tuple[str, ...]) -> TopExpr:
        if self._at("NAME"):
            name = self.peek().text
            if self._at("OP", "<-", k=1) or self._at("OP", "=", k=1):
                if name in ("TRUE", "FALSE"):
                    tok = self.peek()
                    raise ParseError("cannot assign to a boolean literal", tok.line, tok.col)
                self.take()
                self.take()
                return Assign(name, self.parse_expr(), index, comments)
            if name == "library" and self._at("OP", "(", k=1):
                self.take()
                self.take()
                pkg = self.expect("NAME")
                self.expect("OP", ")")
                return Load(pkg.text, index, comments)
        return ExprStmt(self.parse_expr(), index, comments)

    # expressions

    def parse_expr(self) -> Expr:
        return self.parse_binop(1)

    def parse_binop(self, min_prec: int) -> Expr:
        left = self.parse_unary()
        while True:
            tok = self.peek()
            if tok.kind != "OP" or tok.text not in _PREC or _PREC[tok.text] < min_prec:
                return left
            op = self.take().text
            right = self.parse_binop(_PREC[op] + 1)
            left = BinOp(op, left, right)

    def parse_unary(self) -> Expr:
        if self._at("OP", "-"):
            self.take()
            operand = self.parse_unary()
            if isinstance(operand, Num):
                return Num(-operand.value)
            return BinOp("-", Num(0), operand)
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        e = self.parse_atom()
        while self._at("OP", "["):
            self.take()
            key = self.parse_expr()
            self.expect("OP", "]")
            e = Index(e, key)
        return e

    def parse_atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.take()
            return Num(tok.value)  # type: ignore[arg-type]
        if tok.kind == "STRING":
            self.take()
            return Str(tok.value)  # type: ignore[arg-type]
        if tok.kind == "NAME":
            self.take()
            if tok.text == "TRUE":
                return Bool(True)
            if tok.text == "FALSE":
                return Bool(False)
            if self._at("OP", "("):
                return self.parse_call(tok.text)
            return Var(tok.text)
        if self._at("OP", "("):
            self.take()
            e = self.parse_expr()
            self.expect("OP", ")")
            return e
        if self._at("OP", "["):
            self.take()
            items: list[Expr] = []
            if not self._at("OP", "]"):
                while True:
                    items.append(self.parse_expr())
                    if self._at("OP", ","):
                        self.take()
                        continue
                    break
            self.expect("OP", "]")
            return ListLit(tuple(items))
        raise ParseError(f"unexpected {self._describe(tok)}", tok.line, tok.col)

    def parse_call(self, func: str) -> Expr:
        self.expect("OP", "(")
        args: list[tuple[str | None, Expr]] = []
        if self._at("OP", ")"):
            self.take()
            return Call(func, ())
        while True:
            if self._at("NAME") and self._at("OP", "=", k=1):
                argname = self.take().text
                self.take()
                args.append((argname, self.parse_expr()))
            else:
                args.append((None, self.parse_expr()))
            if self._at("OP", ","):
                self.take()
                continue
            self.expect("OP", ")")
            return Call(func, tuple(args))


def parse(source: str) -> Program:
    """Parse script text into a program, attaching comments forward."""
    p = _Parser(lex(source))
    exprs: list[TopExpr] = []
    while True:
        p.skip_separators()
        if p.peek().kind == "EOF":
            break
        comments = tuple(p.pending)
        p.pending.clear()
        exprs.append(p.parse_top(len(exprs), comments))
        p.expect_separator()
    return Program(tuple(exprs), trailing_comments=tuple(p.pending))


# --- printing ---

_POSTFIX_PREC = 4
_UNARY_PREC = 3


def _num_text(value: int | float) -> str:
    if isinstance(value, bool):  # guard: bool is an int subclass
        raise TypeError("boolean in numeric literal")
    return repr(value) if isinstance(value, float) else str(value)


def _escape(text: str) -> str:
    out = []
    for ch in text:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        else:
            out.append(ch)
    return "".join(out)


def _prec_of(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Num) and _num_text(e.value).startswith("-"):
        return _UNARY_PREC
    return _POSTFIX_PREC


def _dp(e: Expr, min_prec: int) -> str:
    text: str
    if isinstance(e, Num):
        text = _num_text(e.value)
    elif isinstance(e, Str):
        text = f'"{_escape(e.value)}"'
    elif isinstance(e, Bool):
        text = "TRUE" if e.value else "FALSE"
    elif isinstance(e, Var):
        text = e.name
    elif isinstance(e, ListLit):
        text = "[" + ", ".join(_dp(item, 1) for item in e.items) + "]"
    elif isinstance(e, Call):
        parts = [(f"{name} = " if name else "") + _dp(arg, 1) for name, arg in e.args]
        text = f"{e.func}({', '.join(parts)})"
    elif isinstance(e, Index):
        text = f"{_dp(e.base, _POSTFIX_PREC)}[{_dp(e.key, 1)}]"
    elif isinstance(e, BinOp):
        left = _dp(e.left, _PREC[e.op])
        right = _dp(e.right, _PREC[e.op] + 1)  # left-associative
        text = f"{left} {e.op} {right}"
    else:
        raise TypeError(f"not an expression: {e!r}")
    if _prec_of(e) < min_prec:
        return f"({text})"
    return text


def deparse_expr(e: Expr) -> str:
    return _dp(e, 1)


def deparse_top(top: TopExpr) -> str:
    """One canonical line of code, comments not included."""
    if isinstance(top, Assign):
        return f"{top.name} <- {deparse_expr(top.value)}"
    if isinstance(top, ExprStmt):
        return deparse_expr(top.value)
    if isinstance(top, Load):
        return f"library({top.package})"
    raise TypeError(f"not a statement: {top!r}")


def deparse(program: Program) -> str:
    """Canonical program text, comment lines preserved."""
    lines: list[str] = []
    for top in program.exprs:
        for comment in top.leading_comments:
            lines.append(f"# {comment}" if comment else "#")
        lines.append(deparse_top(top))
    for comment in program.trailing_comments:
        lines.append(f"# {comment}" if comment else "#")
    return "\n".join(lines) + ("\n" if lines else "")
