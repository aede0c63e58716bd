"""Builders shared by the store, service, and acceptance tests."""

from trackkit.evaluator import ModelFit, PlotSpec, Scalar, Table, Vector
from trackkit.store import Record, build_record

CLARITIES = ("SI1", "VS2", "VVS1", "IF")


def make_table(n=6, seed=0):
    carat = tuple(round(0.2 + 0.1 * ((i + seed) % 9), 2) for i in range(n))
    price = tuple(300 + 50 * ((i * 7 + seed) % 11) for i in range(n))
    clarity = tuple(CLARITIES[(i + seed) % len(CLARITIES)] for i in range(n))
    return Table(("carat", "price", "clarity"), (carat, price, clarity))


def make_plot(n=6, seed=0, color="clarity", geoms=("point", "smooth")):
    stats_by_geom = {
        "point": "identity",
        "smooth": "smooth",
        "line": "identity",
        "bar": "count",
        "boxplot": "boxplot",
        "histogram": "bin",
    }
    return PlotSpec(
        data=make_table(n, seed),
        x="carat",
        y="price",
        color=color,
        facet=None,
        geoms=tuple(geoms),
        stats=tuple(stats_by_geom[g] for g in geoms),
        title=None,
    )


def make_fit(seed=0, predictors=("carat",)):
    names = ("(Intercept)",) + tuple(predictors)
    k = len(names)
    return ModelFit(
        formula=f"price ~ {' + '.join(predictors)}",
        response="price",
        predictors=tuple(predictors),
        coef_names=names,
        coefficients=tuple(float(seed + i) for i in range(k)),
        std_errors=tuple(1.0 + 0.1 * i for i in range(k)),
        t_values=tuple(float(seed + i) / (1.0 + 0.1 * i) for i in range(k)),
        p_values=tuple(min(1.0, 0.01 * (seed + i + 1)) for i in range(k)),
        nobs=10 + seed,
        residual_df=10 + seed - k,
        rss=1.0 + seed,
        r_squared=0.5,
    )


def stamp(i: int) -> str:
    return f"2026-01-01T{i // 3600:02d}:{(i // 60) % 60:02d}:{i % 60:02d}.000000Z"


def varied_record(i: int, **overrides) -> Record:
    """A deterministic record whose shape cycles through the value kinds."""
    kind = i % 4
    if kind == 0:
        value = make_plot(n=4 + i % 5, seed=i, color="clarity" if i % 2 else None)
        tags = ("scatter", f"batch{i % 3}")
    elif kind == 1:
        value = make_fit(seed=i % 7, predictors=("carat", "depth")[: 1 + i % 2])
        tags = (f"batch{i % 3}",)
    elif kind == 2:
        value = make_table(n=3 + i % 6, seed=i)
        tags = ("raw", f"gems{i % 5}")
    else:
        value = Scalar(i) if i % 2 else Vector(tuple(range(i % 5 + 1)))
        tags = ()
    defaults = dict(
        tags=tags,
        user=("alice", "bob", "carol")[i % 3],
        timestamp=stamp(i),
        source_file=f"scripts/job{i % 4}.tk",
        project=("gems", "survey")[i % 2],
    )
    defaults.update(overrides)
    return build_record(value, **defaults)
