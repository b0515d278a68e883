"""Quarterly fundamentals: CSV ingestion, universe filter, windowing, scaling."""

from __future__ import annotations

import csv
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

FEATURES = (
    "revenue", "cogs", "sga", "ebit", "net_income",
    "cash_and_equivalents", "accounts_receivable", "inventory", "ppe", "oca",
    "debt_in_current_liabilities", "accounts_payable", "other_current_liabilities",
    "total_liabilities",
)
EBIT_INDEX = FEATURES.index("ebit")
CSV_COLUMNS = ("company_id", "sector", "period", "market_cap", "ev") + FEATURES
WINDOW_LEN = 8
STD_FLOOR = 1e-12


class IngestError(ValueError):
    pass


class Period(NamedTuple):
    year: int
    quarter: int

    @classmethod
    def parse(cls, text: str) -> "Period":
        text = text.strip()
        year, sep, q = text.partition("-Q")
        if not sep or not year.lstrip("-").isdigit() or q not in ("1", "2", "3", "4"):
            raise ValueError(f"period {text!r} is not YYYY-Qn")
        return cls(int(year), int(q))

    @classmethod
    def from_index(cls, idx: int) -> "Period":
        return cls(idx // 4, idx % 4 + 1)

    @property
    def index(self) -> int:
        """Quarters since year 0; consecutive quarters differ by exactly 1."""
        return self.year * 4 + self.quarter - 1

    def next(self) -> "Period":
        return Period(self.year + 1, 1) if self.quarter == 4 else Period(self.year, self.quarter + 1)

    def __str__(self) -> str:
        return f"{self.year:04d}-Q{self.quarter}"


@dataclass(frozen=True)
class QuarterlyRecord:
    company_id: str
    sector: str
    period: Period
    market_cap: float
    ev: float
    fundamentals: tuple[float, ...]

    def __post_init__(self):
        if self.ev == 0:
            raise ValueError(f"{self.company_id} {self.period}: ev must be nonzero")
        if self.period.quarter not in (1, 2, 3, 4):
            raise ValueError(f"quarter must be 1-4, got {self.period.quarter}")
        if len(self.fundamentals) != len(FEATURES):
            raise ValueError(f"expected {len(FEATURES)} fundamentals, got {len(self.fundamentals)}")


@dataclass(frozen=True, eq=False)
class SequenceSample:
    company_id: str
    start: Period
    window: np.ndarray
    target: float

    @property
    def periods(self) -> list[Period]:
        return [Period.from_index(self.start.index + t) for t in range(self.window.shape[0])]

    @property
    def target_period(self) -> Period:
        return Period.from_index(self.start.index + self.window.shape[0])


@dataclass
class IngestResult:
    records: list[QuarterlyRecord]
    rejections: Counter = field(default_factory=Counter)

    @property
    def rejected(self) -> int:
        return sum(self.rejections.values())


def ingest_csv(path) -> IngestResult:
    """Read records; bad rows are dropped and counted by reason.

    A bad header or unreadable file raises IngestError.
    """
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise IngestError(f"{path}:1: missing header")
        header = [h.strip() for h in header]
        for col, (got, want) in enumerate(zip(header, CSV_COLUMNS), start=1):
            if got != want:
                raise IngestError(f"{path}:1:{col}: expected column {want!r}, found {got!r}")
        if len(header) != len(CSV_COLUMNS):
            raise IngestError(f"{path}:1:{min(len(header), len(CSV_COLUMNS)) + 1}: "
                              f"expected {len(CSV_COLUMNS)} columns, found {len(header)}")
        result = IngestResult([])
        seen = set()
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            rec, reason = _parse_row(row)
            if rec is not None and (rec.company_id, rec.period) in seen:
                rec, reason = None, "duplicate_period"
            if rec is None:
                result.rejections[reason] += 1
                continue
            seen.add((rec.company_id, rec.period))
            result.records.append(rec)
    return result


def _parse_row(row: list[str]) -> tuple[QuarterlyRecord | None, str]:
    if len(row) != len(CSV_COLUMNS):
        return None, "column_count"
    cells = [c.strip() for c in row]
    if any(c == "" for c in cells):
        return None, "missing_field"
    try:
        period = Period.parse(cells[2])
    except ValueError:
        return None, "bad_period"
    try:
        nums = [float(c) for c in cells[3:]]
    except ValueError:
        return None, "non_numeric"
    if not all(math.isfinite(v) for v in nums):
        return None, "non_numeric"
    if nums[1] == 0:
        return None, "zero_ev"
    return QuarterlyRecord(cells[0], cells[1], period, nums[0], nums[1], tuple(nums[2:])), ""


def write_csv(records: Iterable[QuarterlyRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow([r.company_id, r.sector, str(r.period), repr(r.market_cap), repr(r.ev),
                        *(repr(v) for v in r.fundamentals)])


def _by_company(records: Iterable[QuarterlyRecord]) -> dict[str, list[QuarterlyRecord]]:
    groups: dict[str, list[QuarterlyRecord]] = defaultdict(list)
    for r in records:
        groups[r.company_id].append(r)
    for recs in groups.values():
        recs.sort(key=lambda r: r.period)
    return dict(sorted(groups.items()))


def filter_universe(records: Sequence[QuarterlyRecord], top_n: int,
                    excluded_sectors: Iterable[str] = ("Financials",)) -> list[QuarterlyRecord]:
    """Keep the ``top_n`` largest companies by latest market cap, minus excluded sectors.

    Sector names compare case-insensitively. Ties on market cap go to the
    smaller company_id.
    """
    excluded = {s.strip().casefold() for s in excluded_sectors}
    groups = _by_company(r for r in records if r.sector.strip().casefold() not in excluded)
    latest_cap = {cid: recs[-1].market_cap for cid, recs in groups.items()}
    keep = set(sorted(latest_cap, key=lambda c: (-latest_cap[c], c))[:max(top_n, 0)])
    return [r for r in records if r.company_id in keep]


def ev_normalize(r: QuarterlyRecord) -> np.ndarray:
    return np.asarray(r.fundamentals, dtype=np.float64) / r.ev


def consecutive_runs(recs: Sequence[QuarterlyRecord]) -> list[list[QuarterlyRecord]]:
    """Split period-sorted records of one company into gap-free runs."""
    runs: list[list[QuarterlyRecord]] = []
    for r in recs:
        if runs and r.period.index == runs[-1][-1].period.index + 1:
            runs[-1].append(r)
        else:
            runs.append([r])
    return runs


def build_windows(records: Iterable[QuarterlyRecord], window_len: int = WINDOW_LEN) -> list[SequenceSample]:
    """Stride-1 windows of ``window_len`` consecutive quarters.

    The target is EBIT/EV of the quarter right after the window. Windows
    never cross a gap in a company's history.
    """
    samples = []
    for cid, recs in _by_company(records).items():
        for run in consecutive_runs(recs):
            if len(run) <= window_len:
                continue
            feats = np.stack([ev_normalize(r) for r in run])
            for s in range(len(run) - window_len):
                target = feats[s + window_len, EBIT_INDEX]
                samples.append(SequenceSample(cid, run[s].period, feats[s:s + window_len].copy(),
                                              float(target)))
    return samples


def latest_windows(records: Iterable[QuarterlyRecord], window_len: int = WINDOW_LEN
                   ) -> tuple[dict[str, np.ndarray], list[str]]:
    """Each company's most recent ``window_len`` quarters, if gap-free.

    Returns (windows by company, omitted company ids).
    """
    windows, omitted = {}, []
    for cid, recs in _by_company(records).items():
        run = consecutive_runs(recs)[-1]
        if len(run) < window_len:
            omitted.append(cid)
            continue
        windows[cid] = np.stack([ev_normalize(r) for r in run[-window_len:]])
    return windows, omitted


def stack_samples(samples: Sequence[SequenceSample]) -> tuple[np.ndarray, np.ndarray]:
    if not samples:
        return np.zeros((0, WINDOW_LEN, len(FEATURES))), np.zeros(0)
    return np.stack([s.window for s in samples]), np.array([s.target for s in samples])


@dataclass(frozen=True)
class FeatureScaler:
    mean: np.ndarray
    std: np.ndarray

    def transform(self, windows) -> np.ndarray:
        return (np.asarray(windows, dtype=np.float64) - self.mean) / self.std

    def inverse_transform(self, windows) -> np.ndarray:
        return np.asarray(windows, dtype=np.float64) * self.std + self.mean


def zscore_fit(train_windows) -> FeatureScaler:
    """Per-feature mean and population std over every training timestep.

    Accepts an array (..., features) or a list of SequenceSample.
    """
    if isinstance(train_windows, (list, tuple)) and train_windows and isinstance(train_windows[0], SequenceSample):
        train_windows = stack_samples(train_windows)[0]
    X = np.asarray(train_windows, dtype=np.float64)
    if X.size == 0:
        raise ValueError("cannot fit a scaler on an empty training set")
    flat = X.reshape(-1, X.shape[-1])
    mean = flat.mean(axis=0)
    std = flat.std(axis=0)
    std = np.where(std < STD_FLOOR, 1.0, std)
    return FeatureScaler(mean, std)


def zscore_apply(scaler: FeatureScaler, windows):
    """Scale windows; SequenceSample targets are left in raw units."""
    if isinstance(windows, (list, tuple)) and windows and isinstance(windows[0], SequenceSample):
        return [SequenceSample(s.company_id, s.start, scaler.transform(s.window), s.target) for s in windows]
    return scaler.transform(windows)
