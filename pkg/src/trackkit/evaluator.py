"""Script evaluation: values, built-in functions, and model fitting.

Evaluation is straight-line with continue-on-error: each statement either
produces a value or an error message, and later statements still run.
Randomness comes from a MINSTD linear congruential generator owned by the
environment so that seeded runs reproduce exactly across platforms.

The linear-model fitter solves the normal equations with partial
pivoting and reports coefficient standard errors, t statistics, and
two-sided p values computed through the regularized incomplete beta
function; no third-party numerics are involved.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

from .parser import (
    Assign,
    BinOp,
    Bool,
    Call,
    Expr,
    ExprStmt,
    Index,
    ListLit,
    Load,
    Num,
    Program,
    Str,
    TopExpr,
    Var,
)


class EvalError(Exception):
    pass


# --- values ---

ScalarValue = int | float | str | bool


@dataclass(frozen=True)
class Scalar:
    value: ScalarValue


@dataclass(frozen=True)
class Vector:
    values: tuple[ScalarValue, ...]


@dataclass(frozen=True)
class Table:
    columns: tuple[str, ...]
    data: tuple[tuple[ScalarValue, ...], ...]  # data[i] holds columns[i]

    def nrow(self) -> int:
        return len(self.data[0]) if self.data else 0

    def column(self, name: str) -> tuple[ScalarValue, ...]:
        try:
            return self.data[self.columns.index(name)]
        except ValueError:
            raise EvalError(f"no column named '{name}'") from None


@dataclass(frozen=True)
class PlotSpec:
    data: Table
    x: str
    y: str
    color: str | None
    facet: str | None
    geoms: tuple[str, ...]
    stats: tuple[str, ...]  # aligned with geoms
    title: str | None


@dataclass(frozen=True)
class ModelFit:
    formula: str
    response: str
    predictors: tuple[str, ...]
    coef_names: tuple[str, ...]
    coefficients: tuple[float, ...]
    std_errors: tuple[float, ...]
    t_values: tuple[float, ...]
    p_values: tuple[float, ...]
    nobs: int
    residual_df: int
    rss: float
    r_squared: float


@dataclass(frozen=True)
class Unit:
    pass


UNIT = Unit()

ArtifactValue = Scalar | Vector | Table | PlotSpec | ModelFit | Unit


GEOMS = ("point", "smooth", "line", "bar", "boxplot", "histogram")
GEOM_STATS = {
    "point": "identity",
    "smooth": "smooth",
    "line": "identity",
    "bar": "count",
    "boxplot": "boxplot",
    "histogram": "bin",
}


# --- random numbers ---

class Minstd:
    """Lehmer generator: state' = 48271 * state mod (2**31 - 1)."""

    MODULUS = 2**31 - 1
    MULTIPLIER = 48271

    def __init__(self, seed: int = 1):
        self.state = 1
        self.reseed(seed)

    def reseed(self, seed: int) -> None:
        seed = int(seed) % self.MODULUS
        self.state = seed if seed != 0 else 1

    def draw(self) -> int:
        self.state = (self.state * self.MULTIPLIER) % self.MODULUS
        return self.state


# --- environment and evaluation ---

@dataclass
class Env:
    vars: dict[str, ArtifactValue] = field(default_factory=dict)
    rng: Minstd = field(default_factory=Minstd)
    base_dir: Path = field(default_factory=Path.cwd)


@dataclass
class EvalOutcome:
    index: int
    ok: bool
    value: ArtifactValue | None = None
    error: str | None = None


def eval_program(program: Program, env: Env) -> list[EvalOutcome]:
    outcomes = []
    for top in program.exprs:
        outcomes.append(eval_top(top, env))
    return outcomes


def eval_top(top: TopExpr, env: Env) -> EvalOutcome:
    try:
        if isinstance(top, Assign):
            value = eval_expr(top.value, env)
            env.vars[top.name] = value
        elif isinstance(top, Load):
            env.vars[top.package] = Scalar(top.package)
            value = UNIT
        else:
            value = eval_expr(top.value, env)
        return EvalOutcome(top.index, True, value=value)
    except EvalError as err:
        return EvalOutcome(top.index, False, error=str(err))


def eval_expr(e: Expr, env: Env) -> ArtifactValue:
    if isinstance(e, Num):
        return Scalar(e.value)
    if isinstance(e, Str):
        return Scalar(e.value)
    if isinstance(e, Bool):
        return Scalar(e.value)
    if isinstance(e, Var):
        try:
            return env.vars[e.name]
        except KeyError:
            raise EvalError(f"undefined variable '{e.name}'") from None
    if isinstance(e, ListLit):
        items = []
        for item in e.items:
            value = eval_expr(item, env)
            if not isinstance(value, Scalar):
                raise EvalError("lists may only hold scalar values")
            items.append(value.value)
        return Vector(tuple(items))
    if isinstance(e, BinOp):
        return _eval_binop(e, env)
    if isinstance(e, Index):
        return _eval_index(e, env)
    if isinstance(e, Call):
        return _eval_call(e, env)
    raise EvalError(f"cannot evaluate {type(e).__name__}")


def _as_number(value: ArtifactValue, what: str) -> int | float:
    if isinstance(value, Scalar) and isinstance(value.value, (int, float)) and not isinstance(value.value, bool):
        return value.value
    raise EvalError(f"{what} must be a number")


def _eval_binop(e: BinOp, env: Env) -> Scalar:
    left = _as_number(eval_expr(e.left, env), f"left side of '{e.op}'")
    right = _as_number(eval_expr(e.right, env), f"right side of '{e.op}'")
    if e.op == "+":
        return Scalar(left + right)
    if e.op == "-":
        return Scalar(left - right)
    if e.op == "*":
        return Scalar(left * right)
    if right == 0:
        raise EvalError("division by zero")
    return Scalar(left / right)


def _eval_index(e: Index, env: Env) -> ArtifactValue:
    base = eval_expr(e.base, env)
    key = eval_expr(e.key, env)
    if not isinstance(key, Scalar):
        raise EvalError("index must be a scalar")
    if isinstance(base, Vector):
        pos = key.value
        if isinstance(pos, bool) or not isinstance(pos, int):
            raise EvalError("vector index must be an integer")
        if not 1 <= pos <= len(base.values):
            raise EvalError(f"index {pos} out of range 1..{len(base.values)}")
        return Scalar(base.values[pos - 1])
    if isinstance(base, Table):
        if isinstance(key.value, str):
            return Vector(base.column(key.value))
        if isinstance(key.value, int) and not isinstance(key.value, bool):
            pos = key.value
            if not 1 <= pos <= len(base.columns):
                raise EvalError(f"column index {pos} out of range 1..{len(base.columns)}")
            return Vector(base.data[pos - 1])
        raise EvalError("table index must be a column name or position")
    raise EvalError("only vectors and tables can be indexed")


# --- built-in functions ---


def _bind(func: str, params: tuple[str, ...], required: tuple[str, ...], call_args):
    """Fill declared parameters from positional-then-named call arguments."""
    bound: dict[str, ArtifactValue] = {}
    positional = [value for name, value in call_args if name is None]
    if len(positional) > len(params):
        raise EvalError(f"{func}() takes at most {len(params)} arguments")
    for name, value in zip(params, positional):
        bound[name] = value
    for name, value in call_args:
        if name is None:
            continue
        if name not in params:
            raise EvalError(f"{func}() has no argument '{name}'")
        if name in bound:
            raise EvalError(f"{func}() got argument '{name}' twice")
        bound[name] = value
    for name in required:
        if name not in bound:
            raise EvalError(f"{func}() is missing required argument '{name}'")
    return bound


def _eval_call(e: Call, env: Env) -> ArtifactValue:
    builtin = _BUILTINS.get(e.func)
    if builtin is None:
        raise EvalError(f"unknown function '{e.func}'")
    call_args = [(name, eval_expr(arg, env)) for name, arg in e.args]
    return builtin(env, call_args)


def _expect_str(bound, name: str, func: str) -> str:
    value = bound[name]
    if not (isinstance(value, Scalar) and isinstance(value.value, str)):
        raise EvalError(f"{func}() argument '{name}' must be a string")
    return value.value


def _expect_table(bound, name: str, func: str) -> Table:
    value = bound[name]
    if not isinstance(value, Table):
        raise EvalError(f"{func}() argument '{name}' must be a table")
    return value


def _expect_int(bound, name: str, func: str) -> int:
    value = bound[name]
    if not (isinstance(value, Scalar) and isinstance(value.value, int) and not isinstance(value.value, bool)):
        raise EvalError(f"{func}() argument '{name}' must be an integer")
    return value.value


def _builtin_read_csv(env: Env, call_args) -> Table:
    bound = _bind("read_csv", ("path",), ("path",), call_args)
    path = Path(_expect_str(bound, "path", "read_csv"))
    if not path.is_absolute():
        path = env.base_dir / path
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as err:
        raise EvalError(f"cannot read '{path}': {err.strerror or err}") from None
    if not rows:
        raise EvalError(f"'{path}' is empty; a header row is required")
    header = rows[0]
    if len(set(header)) != len(header) or any(not h for h in header):
        raise EvalError("header must name every column uniquely")
    body = rows[1:]
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise EvalError(f"row {lineno} has {len(row)} fields, expected {len(header)}")
    columns = []
    for j in range(len(header)):
        raw = [row[j] for row in body]
        columns.append(_convert_column(raw))
    return Table(tuple(header), tuple(columns))


def _convert_column(raw: list[str]) -> tuple[ScalarValue, ...]:
    try:
        return tuple(int(cell) for cell in raw)
    except ValueError:
        pass
    try:
        return tuple(float(cell) for cell in raw)
    except ValueError:
        return tuple(raw)


def _builtin_set_seed(env: Env, call_args) -> Unit:
    bound = _bind("set_seed", ("seed",), ("seed",), call_args)
    env.rng.reseed(_expect_int(bound, "seed", "set_seed"))
    return UNIT


def _builtin_sample_rows(env: Env, call_args) -> Table:
    bound = _bind("sample_rows", ("data", "n"), ("data", "n"), call_args)
    table = _expect_table(bound, "data", "sample_rows")
    n = _expect_int(bound, "n", "sample_rows")
    total = table.nrow()
    if n < 0 or n > total:
        raise EvalError(f"cannot sample {n} of {total} rows")
    indices = list(range(total))
    for i in range(n):
        j = i + env.rng.draw() % (total - i)
        indices[i], indices[j] = indices[j], indices[i]
    chosen = indices[:n]
    data = tuple(tuple(col[i] for i in chosen) for col in table.data)
    return Table(table.columns, data)


def _builtin_plot_spec(env: Env, call_args) -> PlotSpec:
    params = ("data", "x", "y", "color", "facet", "geoms", "title")
    bound = _bind("plot_spec", params, ("data", "x", "y", "geoms"), call_args)
    table = _expect_table(bound, "data", "plot_spec")
    x = _expect_str(bound, "x", "plot_spec")
    y = _expect_str(bound, "y", "plot_spec")
    color = _expect_str(bound, "color", "plot_spec") if "color" in bound else None
    facet = _expect_str(bound, "facet", "plot_spec") if "facet" in bound else None
    title = _expect_str(bound, "title", "plot_spec") if "title" in bound else None
    for role, column in (("x", x), ("y", y), ("color", color), ("facet", facet)):
        if column is not None and column not in table.columns:
            raise EvalError(f"plot_spec() {role} column '{column}' is not in the data")
    geoms_value = bound["geoms"]
    if isinstance(geoms_value, Scalar) and isinstance(geoms_value.value, str):
        geoms = (geoms_value.value,)
    elif isinstance(geoms_value, Vector):
        geoms = tuple(g for g in geoms_value.values)
    else:
        raise EvalError("plot_spec() geoms must be a string or a list of strings")
    if not geoms:
        raise EvalError("plot_spec() needs at least one geom")
    for g in geoms:
        if g not in GEOMS:
            raise EvalError(f"unknown geom '{g}'; choose from {', '.join(GEOMS)}")
    stats = tuple(GEOM_STATS[g] for g in geoms)
    return PlotSpec(table, x, y, color, facet, geoms, stats, title)


def _builtin_fit_lm(env: Env, call_args) -> ModelFit:
    bound = _bind("fit_lm", ("formula", "data"), ("formula", "data"), call_args)
    formula = _expect_str(bound, "formula", "fit_lm")
    table = _expect_table(bound, "data", "fit_lm")
    response, predictors = _parse_formula(formula)
    y = _numeric_column(table, response)
    xs = [_numeric_column(table, p) for p in predictors]
    return fit_linear_model(response, predictors, y, xs)


def _parse_formula(formula: str) -> tuple[str, tuple[str, ...]]:
    if formula.count("~") != 1:
        raise EvalError(f"formula must contain exactly one '~': {formula!r}")
    left, right = formula.split("~")
    response = left.strip()
    if not response:
        raise EvalError("formula needs a response variable")
    terms = [t.strip() for t in right.split("+")]
    if any(not t for t in terms):
        raise EvalError(f"empty term in formula {formula!r}")
    if terms == ["1"]:
        return response, ()
    return response, tuple(terms)


def _numeric_column(table: Table, name: str) -> list[float]:
    values = table.column(name)
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise EvalError(f"column '{name}' must be numeric to fit a model")
        out.append(float(v))
    return out


def _builtin_nrow(env: Env, call_args) -> Scalar:
    bound = _bind("nrow", ("x",), ("x",), call_args)
    return Scalar(_expect_table(bound, "x", "nrow").nrow())


def _builtin_summary(env: Env, call_args) -> Table:
    bound = _bind("summary", ("x",), ("x",), call_args)
    value = bound["x"]
    if isinstance(value, ModelFit):
        return Table(
            ("term", "estimate", "std_error", "t_value", "p_value"),
            (
                value.coef_names,
                value.coefficients,
                value.std_errors,
                value.t_values,
                value.p_values,
            ),
        )
    if isinstance(value, Table):
        names, types, distincts = [], [], []
        for name, col in zip(value.columns, value.data):
            names.append(name)
            is_num = all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in col)
            types.append("numeric" if is_num and col else "character")
            distincts.append(len(set(col)))
        return Table(("column", "type", "distinct"), (tuple(names), tuple(types), tuple(distincts)))
    if isinstance(value, Vector):
        nums = [v for v in value.values if isinstance(v, (int, float)) and not isinstance(v, bool)]
        if len(nums) != len(value.values) or not nums:
            return Table(("length", "distinct"), ((len(value.values),), (len(set(value.values)),)))
        ordered = sorted(nums)
        mid = len(ordered) // 2
        median = float(ordered[mid]) if len(ordered) % 2 else (ordered[mid - 1] + ordered[mid]) / 2
        return Table(
            ("min", "median", "mean", "max"),
            ((float(ordered[0]),), (median,), (sum(nums) / len(nums),), (float(ordered[-1]),)),
        )
    raise EvalError("summary() expects a table, vector, or model fit")


_BUILTINS = {
    "read_csv": _builtin_read_csv,
    "set_seed": _builtin_set_seed,
    "sample_rows": _builtin_sample_rows,
    "plot_spec": _builtin_plot_spec,
    "fit_lm": _builtin_fit_lm,
    "nrow": _builtin_nrow,
    "summary": _builtin_summary,
}


# --- numerics ---

class SingularDesign(EvalError):
    pass


def _solve_spd(a: list[list[float]], b: list[float]) -> list[float]:
    """Gaussian elimination with partial pivoting; raises on near-singular."""
    n = len(a)
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    scale = max(abs(a[i][i]) for i in range(n)) if n else 1.0
    for k in range(n):
        pivot_row = max(range(k, n), key=lambda r: abs(m[r][k]))
        if abs(m[pivot_row][k]) < 1e-10 * max(scale, 1e-300):
            raise SingularDesign("design matrix is singular or nearly singular")
        m[k], m[pivot_row] = m[pivot_row], m[k]
        for r in range(k + 1, n):
            factor = m[r][k] / m[k][k]
            for c in range(k, n + 1):
                m[r][c] -= factor * m[k][c]
    x = [0.0] * n
    for k in range(n - 1, -1, -1):
        x[k] = (m[k][n] - sum(m[k][c] * x[c] for c in range(k + 1, n))) / m[k][k]
    return x


def _invert(a: list[list[float]]) -> list[list[float]]:
    n = len(a)
    cols = []
    for j in range(n):
        e = [1.0 if i == j else 0.0 for i in range(n)]
        cols.append(_solve_spd(a, e))
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def fit_linear_model(
    response: str,
    predictors: tuple[str, ...],
    y: list[float],
    xs: list[list[float]],
) -> ModelFit:
    n = len(y)
    p = len(predictors) + 1  # intercept
    if n < p + 1:
        raise EvalError(f"need at least {p + 1} rows to fit {p} coefficients")
    design = [[1.0] + [col[i] for col in xs] for i in range(n)]

    xtx = [[sum(design[i][r] * design[i][c] for i in range(n)) for c in range(p)] for r in range(p)]
    xty = [sum(design[i][r] * y[i] for i in range(n)) for r in range(p)]
    beta = _solve_spd(xtx, xty)

    fitted = [sum(design[i][c] * beta[c] for c in range(p)) for i in range(n)]
    rss = sum((y[i] - fitted[i]) ** 2 for i in range(n))
    mean_y = sum(y) / n
    tss = sum((v - mean_y) ** 2 for v in y)
    df = n - p
    sigma2 = rss / df
    cov = _invert(xtx)

    std_errors, t_values, p_values = [], [], []
    for c in range(p):
        se = math.sqrt(max(sigma2 * cov[c][c], 0.0))
        std_errors.append(se)
        if se > 0:
            t = beta[c] / se
            pv = student_t_two_sided(t, df)
        elif beta[c] == 0:
            t, pv = 0.0, 1.0
        else:
            t = math.inf if beta[c] > 0 else -math.inf
            pv = 0.0
        t_values.append(t)
        p_values.append(pv)

    canonical = f"{response} ~ {' + '.join(predictors) if predictors else '1'}"
    return ModelFit(
        formula=canonical,
        response=response,
        predictors=predictors,
        coef_names=("(Intercept)",) + predictors,
        coefficients=tuple(beta),
        std_errors=tuple(std_errors),
        t_values=tuple(t_values),
        p_values=tuple(p_values),
        nobs=n,
        residual_df=df,
        rss=rss,
        r_squared=1.0 - rss / tss if tss > 0 else (1.0 if rss == 0 else 0.0),
    )


def _beta_cont_fraction(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-12:
            return h
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_fraction(a, b, x) / a
    return 1.0 - front * _beta_cont_fraction(b, a, 1.0 - x) / b


def student_t_two_sided(t: float, df: int) -> float:
    """P(|T| >= |t|) for Student's t with df degrees of freedom."""
    if math.isinf(t):
        return 0.0
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)
