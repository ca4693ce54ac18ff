"""Analysis instruments: edge-type activation scores and strength statistics.

The activation score summarizes, per edge type, how strongly the relational
layer's per-type aggregate fires across nodes and subjects; tracking it over
training shows which edge type the model leans on. The strength statistics
compare per-subject mean edge weights between categories with a paired
t-test whose p-value comes from a continued-fraction incomplete beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .graph_model import ALL, INTER, INTRA
from .datagen import Dataset


@dataclass
class EMSRecord:
    """One traced activation-score row."""

    epoch: int
    layer: int
    ems_intra: float
    ems_inter: float


def ems(per_edge_type_aggregates, n_nodes: int, n_subjects: int) -> tuple[float, float]:
    """Mean per-type aggregate over subjects, nodes, and hidden dims.

    `per_edge_type_aggregates` holds one dict per subject (for a single
    layer) mapping edge type to its captured n x d aggregate. In merged
    (homogeneous) mode there is a single type and its value is returned in
    both slots.
    """
    if len(per_edge_type_aggregates) != n_subjects or n_subjects == 0:
        raise ConfigError(
            f"expected captures for {n_subjects} subjects, got {len(per_edge_type_aggregates)}"
        )
    totals: dict[str, float] = {}
    for captured in per_edge_type_aggregates:
        if not captured:
            raise ConfigError("a subject is missing its edge-type captures")
        for r, agg in captured.items():
            if agg.shape[0] != n_nodes:
                raise ConfigError(f"capture for {r!r} has {agg.shape[0]} rows, expected {n_nodes}")
            totals[r] = totals.get(r, 0.0) + float(agg.mean(axis=1).sum()) / n_nodes
    means = {r: v / n_subjects for r, v in totals.items()}
    if set(means) == {ALL}:
        return means[ALL], means[ALL]
    if set(means) != {INTRA, INTER}:
        raise ConfigError(f"unexpected edge types in captures: {sorted(means)}")
    return means[INTRA], means[INTER]


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz continued fraction for the incomplete beta
    max_iter = 300
    eps = 3e-16
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
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
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) evaluated by continued fraction, accurate to ~1e-14."""
    if not 0.0 <= x <= 1.0:
        raise ConfigError(f"x must lie in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return x
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: float) -> float:
    """P(|T_df| >= |t|) for the Student t distribution."""
    if df <= 0:
        raise ConfigError(f"degrees of freedom must be positive, got {df}")
    if math.isinf(t):
        return 0.0
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))


def paired_t_test(x, y) -> tuple[float, float]:
    """Paired t on the differences; two-sided p.

    Zero-variance conventions: all-zero differences give (0, 1); identical
    nonzero differences give (+/-inf, 0).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ConfigError(f"paired samples must be equal-length vectors, got {x.shape} and {y.shape}")
    n = x.size
    if n < 2:
        raise ConfigError(f"paired t-test needs at least 2 pairs, got {n}")
    d = x - y
    mean = d.mean()
    sd = d.std(ddof=1)
    if sd == 0.0:
        if mean == 0.0:
            return 0.0, 1.0
        return math.copysign(math.inf, mean), 0.0
    t = mean / (sd / math.sqrt(n))
    return t, student_t_two_sided_p(t, n - 1)


@dataclass
class ComparisonResult:
    t: float
    p: float
    n_pairs: int
    n_excluded: int


@dataclass
class StrengthStats:
    """Per-subject category means and the paired comparisons between them."""

    absolute: bool
    left_intra: np.ndarray
    right_intra: np.ndarray
    inter: np.ndarray
    comparisons: dict[str, ComparisonResult]

    def to_report(self) -> dict:
        def cat(v: np.ndarray) -> dict:
            ok = np.isfinite(v)
            return {
                "mean_of_subject_means": float(v[ok].mean()) if ok.any() else None,
                "n_subjects": int(ok.sum()),
            }

        return {
            "absolute": self.absolute,
            "categories": {
                "left_intra": cat(self.left_intra),
                "right_intra": cat(self.right_intra),
                "inter": cat(self.inter),
            },
            "comparisons": {
                name: {"t": r.t, "p": r.p, "n_pairs": r.n_pairs, "n_excluded": r.n_excluded}
                for name, r in self.comparisons.items()
            },
        }


def _category_mean(weights: np.ndarray, row_ids, col_ids, absolute: bool) -> float:
    block = weights[np.ix_(row_ids, col_ids)]
    mask = block > 0
    if not mask.any():
        return math.nan
    vals = block[mask]
    return float(np.abs(vals).mean() if absolute else vals.mean())


def edge_strength_stats(dataset: Dataset, absolute: bool = False) -> StrengthStats:
    """Per-subject mean strengths of the three edge categories plus paired t-tests.

    Subjects lacking edges in a category are excluded from comparisons that
    involve it, with the exclusion count recorded.
    """
    from .graph_model import Hemisphere

    if len(dataset.subjects) < 2:
        raise ConfigError("need at least 2 subjects for strength statistics")
    li, ri, ix = [], [], []
    for g, _ in dataset.subjects:
        left = g.nodes_of(Hemisphere.LEFT)
        right = g.nodes_of(Hemisphere.RIGHT)
        li.append(_category_mean(g.intra_adj, left, left, absolute))
        ri.append(_category_mean(g.intra_adj, right, right, absolute))
        ix.append(_category_mean(g.inter_adj, left, right, absolute))
    li = np.array(li)
    ri = np.array(ri)
    ix = np.array(ix)
    comparisons = {}
    for name, a, b in (
        ("left_intra_vs_inter", li, ix),
        ("right_intra_vs_inter", ri, ix),
        ("left_intra_vs_right_intra", li, ri),
    ):
        ok = np.isfinite(a) & np.isfinite(b)
        if ok.sum() < 2:
            raise ConfigError(f"comparison {name} has fewer than 2 valid subject pairs")
        t, p = paired_t_test(a[ok], b[ok])
        comparisons[name] = ComparisonResult(
            t=t, p=p, n_pairs=int(ok.sum()), n_excluded=int((~ok).sum())
        )
    return StrengthStats(
        absolute=absolute, left_intra=li, right_intra=ri, inter=ix, comparisons=comparisons
    )
