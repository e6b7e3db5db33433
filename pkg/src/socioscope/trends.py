"""Per-term daily timeseries and penalized changepoint detection.

The segmenter is an exact PELT over a normal cost with per-segment free
mean and variance; sweeping a decreasing penalty schedule ranks each
changepoint by the largest penalty at which it first appears.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from .corpus import CorpusHandle
from .errors import IngestError, SeriesError

LOG_2PI = math.log(2.0 * math.pi)
VAR_FLOOR = 1e-12
MIN_SEGMENT = 2


@dataclass(frozen=True)
class TermSeries:
    """Daily counts and fractions for one term in one community.

    ``days`` is contiguous; ``fraction[i]`` is 0 whenever ``totals[i]``
    is 0.
    """

    term: str
    community: str
    days: tuple[date, ...]
    counts: np.ndarray
    totals: np.ndarray
    fraction: np.ndarray

    def __post_init__(self):
        n = len(self.days)
        if not (len(self.counts) == len(self.totals) == len(self.fraction) == n):
            raise SeriesError("days/counts/totals/fraction lengths differ")

    def __len__(self) -> int:
        return len(self.days)


@dataclass(frozen=True)
class ChangepointSet:
    """Segment boundaries plus the penalty at which each first appeared.

    ``indices`` are the first indices of new segments, strictly
    increasing and strictly inside (0, n).  ``segments`` holds the
    (mean, variance) of each segment induced by all indices.  For a
    single-penalty run ``total_cost`` is the optimal penalized cost.
    """

    indices: tuple[int, ...]
    rank_penalty: tuple[float, ...]
    segments: tuple[tuple[float, float], ...]
    n: int
    total_cost: float | None = None

    def ranked(self) -> list[tuple[int, float]]:
        """(index, first_penalty) ordered by significance.

        Descending penalty; ties broken by the earlier index.
        """
        order = sorted(
            range(len(self.indices)),
            key=lambda i: (-self.rank_penalty[i], self.indices[i]),
        )
        return [(self.indices[i], self.rank_penalty[i]) for i in order]


def day_axis(corpus: CorpusHandle, community: str) -> tuple[tuple[date, ...], np.ndarray]:
    """Contiguous day range of a community plus its daily post totals."""
    if community not in corpus.communities:
        raise IngestError(f"unknown community: {community}")
    first, last = corpus.day_range(community)
    ndays = (last - first).days + 1
    days = tuple(first + timedelta(days=i) for i in range(ndays))
    totals = np.zeros(ndays, dtype=np.int64)
    for d, per_comm in corpus.date_index.items():
        c = per_comm.get(community, 0)
        if c and first <= d <= last:
            totals[(d - first).days] = c
    return days, totals


def fractions_for(counts: np.ndarray, totals: np.ndarray) -> np.ndarray:
    return np.divide(
        counts, totals, out=np.zeros(len(counts), dtype=np.float64), where=totals > 0
    )


def build_term_series(corpus: CorpusHandle, term: str, community: str) -> TermSeries:
    """Daily fraction of ``community`` posts containing ``term``.

    Covers every day from the community's first to last post; days
    without posts get count 0, total 0, fraction 0.
    """
    days, totals = day_axis(corpus, community)
    first = days[0]
    ndays = len(days)

    counts = np.zeros(ndays, dtype=np.int64)
    for comm, pid in corpus.term_index.get(term, frozenset()):
        if comm == community:
            d = corpus.post((comm, pid)).day
            counts[(d - first).days] += 1

    return TermSeries(
        term, community, days, counts, totals, fractions_for(counts, totals)
    )


def rolling_mean(series: TermSeries, window: int) -> TermSeries:
    """Centered moving average of the fraction; edges use the truncated
    window. Window must be odd and >= 1."""
    if window < 1 or window % 2 == 0:
        raise SeriesError(f"window must be odd and positive, got {window}")
    half = window // 2
    n = len(series)
    smoothed = np.empty(n, dtype=np.float64)
    for i in range(n):
        lo, hi = max(0, i - half), min(n, i + half + 1)
        smoothed[i] = series.fraction[lo:hi].mean()
    return TermSeries(
        series.term, series.community, series.days,
        series.counts, series.totals, smoothed,
    )


def increase_ratio(series: TermSeries, edge_window: int = 14) -> float:
    """Mean fraction over the last ``edge_window`` days divided by the
    mean over the first ``edge_window`` days.

    Returns 1.0 when both means are 0, +inf when only the start is 0.
    """
    if edge_window < 1:
        raise SeriesError("edge_window must be >= 1")
    if len(series) < 2 * edge_window:
        raise SeriesError(
            f"series too short: {len(series)} days < 2*{edge_window}"
        )
    start = float(series.fraction[:edge_window].mean())
    end = float(series.fraction[-edge_window:].mean())
    if start == 0.0:
        return 1.0 if end == 0.0 else math.inf
    return end / start


def _prefix_sums(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p1 = np.zeros(len(values) + 1)
    p2 = np.zeros(len(values) + 1)
    np.cumsum(values, out=p1[1:])
    np.cumsum(values * values, out=p2[1:])
    return p1, p2


def _segment_stats(p1, p2, starts, end):
    n = end - starts
    mean = (p1[end] - p1[starts]) / n
    var = (p2[end] - p2[starts]) / n - mean * mean
    return mean, np.maximum(var, 0.0)


def _segment_cost(p1, p2, starts, end):
    # n * (log 2pi + log max(sigma^2, floor) + 1): -2 log L of a normal
    # segment at its MLE, with a floor so constant segments stay finite
    n = end - starts
    _, var = _segment_stats(p1, p2, starts, end)
    return n * (LOG_2PI + np.log(np.maximum(var, VAR_FLOOR)) + 1.0)


def pelt_segment(values, penalty: float) -> ChangepointSet:
    """Exact penalized segmentation of ``values`` under the normal cost.

    Minimizes sum of segment costs plus ``penalty`` per changepoint,
    with a minimum segment length of 2.  Pruning follows the optimal-
    partitioning dominance rule; because of the minimum segment length a
    dominated candidate is only dropped once every future time it could
    have served has seen the dominating candidate, which preserves
    equality with the unpruned dynamic program.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise SeriesError("values must be one-dimensional")
    if len(x) < 2 * MIN_SEGMENT:
        raise SeriesError(f"need at least {2 * MIN_SEGMENT} values, got {len(x)}")
    if np.isnan(x).any():
        raise SeriesError("values contain NaN")
    if not penalty > 0:
        raise SeriesError("penalty must be positive")

    n = len(x)
    # center for numerical stability; the cost is location invariant
    p1, p2 = _prefix_sums(x - x.mean())

    f = np.full(n + 1, np.inf)
    f[0] = -penalty
    prev = np.zeros(n + 1, dtype=np.int64)

    cand = np.array([0], dtype=np.int64)
    # time at which each candidate became dominated (inf = never)
    marked = np.array([math.inf])

    for t in range(MIN_SEGMENT, n + 1):
        # a changepoint position tau is usable at t once both adjacent
        # segments can reach the minimum length
        entering = t - MIN_SEGMENT
        if entering >= MIN_SEGMENT:
            cand = np.append(cand, entering)
            marked = np.append(marked, math.inf)

        # removal is delayed: a candidate marked at time m only stops
        # being needed once t - m >= MIN_SEGMENT
        keep = marked > t - MIN_SEGMENT
        cand, marked = cand[keep], marked[keep]

        costs = f[cand] + _segment_cost(p1, p2, cand, t)
        best = int(np.argmin(costs))
        f[t] = costs[best] + penalty
        prev[t] = cand[best]

        newly_dominated = (costs > f[t]) & np.isinf(marked)
        marked[newly_dominated] = t

    cps: list[int] = []
    t = n
    while t > 0:
        tau = int(prev[t])
        if tau > 0:
            cps.append(tau)
        t = tau
    cps.reverse()

    return ChangepointSet(
        indices=tuple(cps),
        rank_penalty=tuple(float(penalty) for _ in cps),
        segments=_segments_of(x, cps),
        n=n,
        total_cost=float(f[n]),
    )


def _segments_of(x: np.ndarray, cps: list[int]) -> tuple[tuple[float, float], ...]:
    bounds = [0] + list(cps) + [len(x)]
    out = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        seg = x[lo:hi]
        out.append((float(seg.mean()), float(seg.var())))
    return tuple(out)


def default_penalty_schedule(n: int, points: int = 25,
                             hi: float = 50.0, lo: float = 0.5) -> np.ndarray:
    """Geometric schedule from hi*log(n) down to lo*log(n)."""
    return np.geomspace(hi, lo, points) * math.log(n)


def rank_changepoints(values, penalties) -> ChangepointSet:
    """Sweep a strictly decreasing penalty schedule and rank changepoints
    by the largest penalty at which each first appears."""
    pens = [float(p) for p in penalties]
    if len(pens) < 2:
        raise SeriesError("penalty schedule needs at least 2 entries")
    if any(b >= a for a, b in zip(pens, pens[1:])):
        raise SeriesError("penalty schedule must be strictly decreasing")

    x = np.asarray(values, dtype=np.float64)
    first_pen: dict[int, float] = {}
    seen_any: set[int] = set()
    for pen in pens:
        result = pelt_segment(x, pen)
        for idx in result.indices:
            seen_any.add(idx)
            first_pen.setdefault(idx, pen)

    indices = sorted(first_pen)
    assert all(i in seen_any for i in indices)  # every ranked cp came from a sweep run

    return ChangepointSet(
        indices=tuple(indices),
        rank_penalty=tuple(first_pen[i] for i in indices),
        segments=_segments_of(x, indices),
        n=len(x),
        total_cost=None,
    )


def series_to_csv(series: TermSeries, path, smooth_window: int = 7) -> None:
    smoothed = rolling_mean(series, smooth_window)
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["day", "count", "total", "fraction", "smoothed_fraction"])
        for i, d in enumerate(series.days):
            w.writerow([
                d.isoformat(),
                int(series.counts[i]),
                int(series.totals[i]),
                repr(float(series.fraction[i])),
                repr(float(smoothed.fraction[i])),
            ])


def changepoints_to_json(cset: ChangepointSet, days, path) -> None:
    """Ranked changepoints as a JSON array of
    {date, rank, first_penalty, pre_mean, post_mean}."""
    by_index = {idx: pos for pos, idx in enumerate(cset.indices)}
    rows = []
    for rank, (idx, pen) in enumerate(cset.ranked(), start=1):
        pos = by_index[idx]
        rows.append({
            "date": days[idx].isoformat(),
            "rank": rank,
            "first_penalty": pen,
            "pre_mean": cset.segments[pos][0],
            "post_mean": cset.segments[pos + 1][0],
        })
    with open(path, "w", encoding="utf-8") as f:
        json.dump(rows, f, indent=2)
        f.write("\n")
