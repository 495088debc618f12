"""Monthly decay-weighted narrative indices per ordered topic pair.

Each chain link contributes decay_weight(d) * similarity to the month of
its result event; the decay is logistic, 1 / (1 + a * e^(b*d)), with b
derived from a configured half-life so that the weight at the half-life
is exactly half the weight at d = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .chains import ChainSet
from .corpus import MonthKey, month_range

DEFAULT_A = 0.05
DEFAULT_HALF_LIFE_DAYS = 1825  # five years, no leap adjustment


@dataclass(frozen=True)
class DecayParams:
    a: float
    b: float
    half_life_days: int

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0 or self.half_life_days <= 0:
            raise ValueError("decay parameters must be positive")
        exponent = self.b * self.half_life_days
        # weight(H)/weight(0) analytically; huge exponents mean ratio ~ 0
        ratio = (1.0 + self.a) / (1.0 + self.a * math.exp(exponent)) if exponent < 700 else 0.0
        if abs(ratio - 0.5) > 1e-9:
            raise ValueError(f"b does not encode the half-life: ratio {ratio}")


def solve_decay(a: float, half_life_days: int) -> DecayParams:
    """Derive b so that weight(half_life) is half of weight(0)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if half_life_days <= 0:
        raise ValueError("half_life_days must be positive")
    b = math.log((1.0 + 2.0 * a) / a) / half_life_days
    return DecayParams(a=a, b=b, half_life_days=half_life_days)


def decay_weight(d: int, params: DecayParams) -> float:
    """Logistic weight 1 / (1 + a * e^(b*d)) for a gap of d days."""
    if d < 0:
        raise ValueError("day gap must be non-negative")
    return 1.0 / (1.0 + params.a * math.exp(params.b * d))


@dataclass(frozen=True)
class NarrativeSeries:
    src_topic: str
    dst_topic: str
    values: dict[MonthKey, float]


@dataclass(frozen=True)
class NarrativeMatrix:
    period: tuple[MonthKey, MonthKey]
    topics: tuple[str, ...]
    cells: dict[tuple[str, str], float]  # diagonal excluded


def monthly_index(chains: ChainSet, src: str, dst: str, m: MonthKey, params: DecayParams) -> float:
    """Sum of decay_weight(d) * similarity over the (src, dst, m) group."""
    total = 0.0
    for link in chains.group(src, dst, m):
        total += decay_weight(link.d, params) * link.similarity
    return total


def full_grid(chains: ChainSet, topics: list[str], params: DecayParams) -> list[NarrativeSeries]:
    """One series per ordered topic pair (src != dst): T*(T-1) series."""
    if len(topics) < 2:
        raise ValueError("need at least two topics")
    if len(set(topics)) != len(topics):
        raise ValueError("topic list contains duplicates")
    grid = []
    for src in topics:
        for dst in topics:
            if src == dst:
                continue
            values = {m: monthly_index(chains, src, dst, m, params) for m in chains.months}
            grid.append(NarrativeSeries(src_topic=src, dst_topic=dst, values=values))
    return grid


def period_matrix(series: list[NarrativeSeries], start: MonthKey, end: MonthKey,
                  topics: list[str] | None = None) -> NarrativeMatrix:
    """Mean of monthly values over [start, end]; absent months count as 0."""
    if start > end:
        raise ValueError(f"period start {start} is after end {end}")
    window = month_range(start, end)
    n = len(window)
    cells = {}
    seen: list[str] = []
    for s in series:
        for t in (s.src_topic, s.dst_topic):
            if t not in seen:
                seen.append(t)
        cells[(s.src_topic, s.dst_topic)] = sum(s.values.get(m, 0.0) for m in window) / n
    ordered = tuple(topics) if topics is not None else tuple(sorted(seen))
    return NarrativeMatrix(period=(start, end), topics=ordered, cells=cells)


def write_series(grid: list[NarrativeSeries], path) -> None:
    """CSV with one row per (pair, month), values at fixed 9 decimals."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("src_topic,dst_topic,year,month,value\n")
        for s in sorted(grid, key=lambda s: (s.src_topic, s.dst_topic)):
            for m in sorted(s.values):
                fh.write(f"{s.src_topic},{s.dst_topic},{m.year},{m.month},{s.values[m]:.9f}\n")


def read_series(path) -> list[NarrativeSeries]:
    table: dict[tuple[str, str], dict[MonthKey, float]] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("src_topic,"):
            raise ValueError(f"unexpected series header: {header!r}")
        for line in fh:
            if not line.strip():
                continue
            src, dst, year, month, value = line.rstrip("\n").split(",")
            table.setdefault((src, dst), {})[MonthKey(int(year), int(month))] = float(value)
    return [NarrativeSeries(src, dst, values) for (src, dst), values in sorted(table.items())]


def write_matrix(matrix: NarrativeMatrix, path) -> None:
    """CSV with topic-labeled rows (source) and columns (destination)."""
    topics = matrix.topics
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# period," + str(matrix.period[0]) + "," + str(matrix.period[1]) + "\n")
        fh.write("src\\dst," + ",".join(topics) + "\n")
        for src in topics:
            row = [src]
            for dst in topics:
                if src == dst:
                    row.append("")
                else:
                    row.append(f"{matrix.cells.get((src, dst), 0.0):.9f}")
            fh.write(",".join(row) + "\n")


def read_matrix(path) -> NarrativeMatrix:
    with open(path, encoding="utf-8") as fh:
        period_line = fh.readline().rstrip("\n")
        parts = period_line.split(",")
        if not period_line.startswith("# period") or len(parts) != 3:
            raise ValueError(f"unexpected matrix period line: {period_line!r}")
        period = (MonthKey.parse(parts[1]), MonthKey.parse(parts[2]))
        header = fh.readline().rstrip("\n").split(",")
        topics = tuple(header[1:])
        cells = {}
        for line in fh:
            fields = line.rstrip("\n").split(",")
            src = fields[0]
            for dst, raw in zip(topics, fields[1:]):
                if raw != "":
                    cells[(src, dst)] = float(raw)
    return NarrativeMatrix(period=period, topics=topics, cells=cells)
