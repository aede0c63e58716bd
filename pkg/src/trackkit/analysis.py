"""Def-use analysis, backward slicing, and code summaries for scripts.

Statements are straight-line, so dependency analysis reduces to tracking
the latest prior definition of each name.  Two wrinkles:

* Random-number state is threaded through calls rather than named in the
  source, so it is modeled as the reserved pseudo-variable ``.rng``:
  ``set_seed`` defines it, ``sample_rows`` both uses and redefines it.
  Dot-prefixed names are reserved for this kind of internal bookkeeping.
* ``library()`` loads change the evaluation context without defining
  anything an expression mentions, so every load preceding the target
  rides along with every slice.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .parser import (
    Assign,
    BinOp,
    Call,
    Expr,
    ExprStmt,
    Index,
    ListLit,
    Load,
    Program,
    TopExpr,
    Var,
    deparse_top,
    make_program,
)

RNG_VAR = ".rng"
_RNG_SETTERS = frozenset({"set_seed"})
_RNG_CONSUMERS = frozenset({"sample_rows"})  # these also advance the state


def _walk(e: Expr) -> Iterator[Expr]:
    yield e
    if isinstance(e, ListLit):
        for item in e.items:
            yield from _walk(item)
    elif isinstance(e, Call):
        for _, arg in e.args:
            yield from _walk(arg)
    elif isinstance(e, BinOp):
        yield from _walk(e.left)
        yield from _walk(e.right)
    elif isinstance(e, Index):
        yield from _walk(e.base)
        yield from _walk(e.key)


def statement_expr(top: TopExpr) -> Expr | None:
    if isinstance(top, Assign):
        return top.value
    if isinstance(top, ExprStmt):
        return top.value
    return None


def called_functions(top: TopExpr) -> frozenset[str]:
    e = statement_expr(top)
    if e is None:
        return frozenset()
    return frozenset(node.func for node in _walk(e) if isinstance(node, Call))


def names_used(top: TopExpr) -> frozenset[str]:
    e = statement_expr(top)
    if e is None:
        return frozenset()
    used = {node.name for node in _walk(e) if isinstance(node, Var)}
    if called_functions(top) & _RNG_CONSUMERS:
        used.add(RNG_VAR)
    return frozenset(used)


def names_defined(top: TopExpr) -> frozenset[str]:
    defined: set[str] = set()
    if isinstance(top, Assign):
        defined.add(top.name)
    elif isinstance(top, Load):
        defined.add(top.package)
    funcs = called_functions(top)
    if funcs & _RNG_SETTERS or funcs & _RNG_CONSUMERS:
        defined.add(RNG_VAR)
    return frozenset(defined)


def def_use_edges(program: Program) -> dict[int, frozenset[int]]:
    """Map each statement index to the indices defining the names it uses."""
    last_def: dict[str, int] = {}
    edges: dict[int, frozenset[int]] = {}
    for i, top in enumerate(program.exprs):
        deps = {last_def[name] for name in names_used(top) if name in last_def}
        edges[i] = frozenset(deps)
        for name in names_defined(top):
            last_def[name] = i
    return edges


def backward_slice(program: Program, at: int) -> tuple[int, ...]:
    """Indices of the statements the statement at ``at`` depends on.

    Includes ``at`` itself, the transitive closure over def-use edges, and
    every ``library()`` load at or before ``at``.
    """
    if not 0 <= at < len(program.exprs):
        raise IndexError(f"statement index {at} out of range")
    edges = def_use_edges(program)
    keep = {at}
    stack = [at]
    while stack:
        for dep in edges[stack.pop()]:
            if dep not in keep:
                keep.add(dep)
                stack.append(dep)
    for i in range(at + 1):
        if isinstance(program.exprs[i], Load):
            keep.add(i)
    return tuple(sorted(keep))


def last_definition(program: Program, name: str) -> int | None:
    """Index of the final statement assigning ``name``, if any."""
    found = None
    for i, top in enumerate(program.exprs):
        if isinstance(top, Assign) and top.name == name:
            found = i
    return found


def slice_program(program: Program, indices: Sequence[int]) -> Program:
    """A fresh renumbered program containing only the chosen statements."""
    return make_program(program.exprs[i] for i in sorted(set(indices)))


# --- code summaries ---

@dataclass(frozen=True)
class CodeFeatures:
    source: str                  # canonical text of the backward slice
    input_vars: tuple[str, ...]  # names read by the slice but defined outside it
    packages: tuple[str, ...]    # loads riding with the slice, in load order
    functions: tuple[str, ...]   # functions called anywhere in the slice
    n_statements: int


def extract_code_features(program: Program, at: int) -> CodeFeatures:
    indices = backward_slice(program, at)
    chosen = [program.exprs[i] for i in indices]

    defined: set[str] = set()
    free: set[str] = set()
    functions: set[str] = set()
    packages: list[str] = []
    for top in chosen:
        for name in names_used(top):
            if name not in defined and not name.startswith("."):
                free.add(name)
        defined |= names_defined(top)
        functions |= called_functions(top)
        if isinstance(top, Load):
            packages.append(top.package)

    source = "\n".join(deparse_top(top) for top in chosen)
    return CodeFeatures(
        source=source,
        input_vars=tuple(sorted(free)),
        packages=tuple(packages),
        functions=tuple(sorted(functions)),
        n_statements=len(chosen),
    )
