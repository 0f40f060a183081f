"""Survey CSV ingestion, validation, listwise deletion and descriptive tables.

Percent (0-100) is the storage scale for ``prior`` and ``post``.  Use
:func:`from_percent` / :func:`to_percent` when crossing into the belief
module, which works on [0, 1].
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np
import pandas as pd

from .errors import EmptyAfterFilter, InvariantViolation, MalformedRow, OutOfRange, SchemaMismatch

COLUMNS = ("prior", "change", "post", "gender", "age", "police", "educ_int", "matching_gender")
FLOAT_COLUMNS = ("prior", "post")
INT_COLUMNS = ("change", "gender", "age", "police", "educ_int", "matching_gender")
MISSING_TOKENS = ("", "NA")

LABELS = {
    "prior": "Prior",
    "change": "Change",
    "post": "Post",
    "gender": "Gender",
    "age": "Age",
    "police": "Police",
    "educ_int": "Educ_Int",
    "matching_gender": "Matching_Gender",
}

# inclusive coded ranges
RANGES = {
    "prior": (0.0, 100.0),
    "post": (0.0, 100.0),
    "change": (0, 1),
    "gender": (0, 1),
    "age": (16, 94),
    "police": (1, 5),
    "educ_int": (0, 1),
    "matching_gender": (0, 1),
}


@dataclass(frozen=True)
class SurveyRecord:
    """One interview.  ``age`` and ``police`` may be ``None`` (missing)."""

    prior: float
    change: int
    post: float
    gender: int
    age: int | None
    police: int | None
    educ_int: int
    matching_gender: int

    def violations(self) -> list[str]:
        return _record_problems({c: getattr(self, c) for c in COLUMNS})

    @classmethod
    def from_row(cls, row: Mapping) -> SurveyRecord:
        def get(c):
            v = row[c]
            if v is None or (isinstance(v, float) and math.isnan(v)):
                return None
            return int(v) if c in INT_COLUMNS else float(v)

        return cls(**{c: get(c) for c in COLUMNS})


@dataclass(frozen=True)
class Violation:
    line: int
    message: str


@dataclass
class MissingnessReport:
    n_rows: int
    missing_rows: dict[str, frozenset[int]]
    violations: list[Violation] = field(default_factory=list)

    @property
    def missing(self) -> dict[str, int]:
        return {c: len(rows) for c, rows in self.missing_rows.items()}

    @property
    def n_invalid(self) -> int:
        return len({v.line for v in self.violations})

    def dropped(self, covariates: Sequence[str]) -> int:
        """Rows lost to listwise deletion on ``covariates`` (missingness only)."""
        rows: set[int] = set()
        for c in covariates:
            rows |= self.missing_rows.get(c, frozenset())
        return len(rows)


# ---------------------------------------------------------------------------
# Scale bridge
# ---------------------------------------------------------------------------


def to_percent(p01: float) -> float:
    if not 0.0 <= p01 <= 1.0:
        raise OutOfRange(f"probability must lie in [0, 1], got {p01}")
    return p01 * 100.0


def from_percent(pct: float) -> float:
    if not 0.0 <= pct <= 100.0:
        raise OutOfRange(f"percent must lie in [0, 100], got {pct}")
    return pct / 100.0


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _present(v) -> bool:
    return v is not None and not (isinstance(v, float) and math.isnan(v))


def _record_problems(row: Mapping) -> list[str]:
    problems = []
    for c in COLUMNS:
        v = row.get(c)
        if not _present(v):
            continue
        lo, hi = RANGES[c]
        if c in INT_COLUMNS and float(v) != int(v):
            problems.append(f"{c}={v} is not an integer code")
        elif not lo <= v <= hi:
            problems.append(f"{c}={v} outside [{lo}, {hi}]")
    prior, change, post = row.get("prior"), row.get("change"), row.get("post")
    if _present(prior) and _present(change) and _present(post):
        if change == 0 and post != prior:
            problems.append(f"change=0 but post ({post}) != prior ({prior})")
        elif change == 1 and not post < prior:
            problems.append(f"change=1 but post ({post}) is not below prior ({prior})")
    return problems


def validate_frame(frame: pd.DataFrame, lines: Sequence[int] | None = None) -> tuple[np.ndarray, list[Violation]]:
    """Row-level invariant check; returns a validity mask and the violations.

    ``lines`` labels rows in the messages (defaults to CSV line numbers
    assuming a header on line 1).
    """
    if lines is None:
        lines = range(2, len(frame) + 2)
    lines = list(lines)
    valid = np.ones(len(frame), dtype=bool)
    out = []
    for i, row in enumerate(frame[list(COLUMNS)].itertuples(index=False)):
        problems = _record_problems(row._asdict())
        if problems:
            valid[i] = False
            out.extend(Violation(int(lines[i]), p) for p in problems)
    return valid, out


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _parse_cell(text: str, line: int, column: str) -> float:
    token = text.strip()
    if token in MISSING_TOKENS:
        return math.nan
    try:
        value = float(token)
    except ValueError:
        raise MalformedRow(line, f"column {column!r}: cannot parse {text!r} as a number") from None
    if not math.isfinite(value):
        raise MalformedRow(line, f"column {column!r}: non-finite value {text!r}")
    return value


def read_survey(source, strict: bool = False) -> tuple[pd.DataFrame, MissingnessReport]:
    """Parse survey CSV text from an open file or string buffer."""
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaMismatch("file is empty") from None
    names = [h.strip().lower() for h in header]
    if sorted(names) != sorted(COLUMNS) or len(set(names)) != len(names):
        raise SchemaMismatch(f"header {header} does not match schema {list(COLUMNS)}")
    order = [names.index(c) for c in COLUMNS]

    rows = []
    for line, fields in enumerate(reader, start=2):
        if not fields or (len(fields) == 1 and not fields[0].strip()):
            continue
        if len(fields) != len(COLUMNS):
            raise MalformedRow(line, f"expected {len(COLUMNS)} fields, got {len(fields)}")
        rows.append([line] + [_parse_cell(fields[j], line, c) for j, c in zip(order, COLUMNS)])

    frame = pd.DataFrame(rows, columns=["line", *COLUMNS])
    for c in INT_COLUMNS:
        frame[c] = frame[c].astype("float64")
    lines = frame["line"].to_numpy()

    valid, violations = validate_frame(frame, lines)
    if violations and strict:
        raise InvariantViolation(violations)
    if violations:
        warnings.warn(f"{len(violations)} invariant violation(s); affected rows are excluded from analysis", stacklevel=2)
    low = frame["prior"] < 1.0
    if low.any():
        warnings.warn(f"{int(low.sum())} row(s) with prior below 1%", stacklevel=2)

    frame["valid"] = valid
    missing_rows = {c: frozenset(int(x) for x in lines[frame[c].isna().to_numpy()]) for c in COLUMNS}
    frame = frame.set_index("line")
    return frame, MissingnessReport(len(frame), missing_rows, violations)


def load_survey(path, strict: bool = False) -> tuple[pd.DataFrame, MissingnessReport]:
    """Load a survey CSV.

    Every row is kept; rows breaking an invariant get ``valid = False`` and
    are listed in the report (``strict=True`` raises instead).  Missing
    cells (empty or ``NA``) become NaN.  The frame is indexed by file line.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        return read_survey(fh, strict=strict)


def format_number(value, integer: bool = False) -> str:
    """Shortest decimal that round-trips; ``NA`` for missing."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "NA"
    value = float(value)
    if integer or (value.is_integer() and abs(value) < 1e15):
        return str(int(value))
    return repr(value)


def format_survey(frame: pd.DataFrame) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    cols = [frame[c].to_numpy(dtype=float) for c in COLUMNS]
    for values in zip(*cols):
        writer.writerow([format_number(v, c in INT_COLUMNS) for v, c in zip(values, COLUMNS)])
    return buf.getvalue()


def write_survey(frame: pd.DataFrame, path) -> None:
    Path(path).write_text(format_survey(frame), encoding="utf-8")


# ---------------------------------------------------------------------------
# Analysis subsets
# ---------------------------------------------------------------------------


def analysis_rows(frame: pd.DataFrame, columns: Sequence[str]) -> pd.DataFrame:
    """Valid rows with no missing value among ``columns`` (listwise deletion)."""
    out = frame
    if "valid" in out.columns:
        out = out[out["valid"].astype(bool)]
    return out.dropna(subset=list(columns))


Filter = Callable[[pd.DataFrame], "pd.Series"] | Mapping[str, float] | None


def apply_filter(frame: pd.DataFrame, filt: Filter) -> pd.DataFrame:
    if filt is None:
        return frame
    if callable(filt):
        return frame[np.asarray(filt(frame), dtype=bool)]
    mask = np.ones(len(frame), dtype=bool)
    for col, value in filt.items():
        mask &= (frame[col] == value).to_numpy()
    return frame[mask]


def parse_filter(text: str | None) -> dict[str, float] | None:
    """``"change=1,gender=0"`` -> ``{"change": 1.0, "gender": 0.0}``."""
    if not text:
        return None
    out = {}
    for part in text.split(","):
        key, sep, value = part.partition("=")
        key = key.strip().lower()
        if not sep or key not in COLUMNS:
            raise ValueError(f"bad filter term {part!r}; expected column=value")
        out[key] = float(value)
    return out


@dataclass(frozen=True)
class DescriptiveRow:
    variable: str
    mean: float
    sd: float
    min: float
    max: float
    missing: int
    n: int


def describe(frame: pd.DataFrame, filt: Filter = None, include_invalid: bool = False) -> list[DescriptiveRow]:
    """Mean, sample sd, min, max and missing count per schema variable.

    Statistics use the non-missing values of each variable.  A variable
    with one observation reports sd 0.
    """
    if not include_invalid and "valid" in frame.columns:
        frame = frame[frame["valid"].astype(bool)]
    frame = apply_filter(frame, filt)
    if len(frame) == 0:
        raise EmptyAfterFilter("no rows left after filtering")
    out = []
    for c in COLUMNS:
        col = frame[c].to_numpy(dtype=float)
        present = col[~np.isnan(col)]
        missing = int(col.size - present.size)
        if present.size == 0:
            out.append(DescriptiveRow(c, math.nan, math.nan, math.nan, math.nan, missing, 0))
            continue
        sd = float(np.std(present, ddof=1)) if present.size > 1 else 0.0
        out.append(
            DescriptiveRow(c, float(np.mean(present)), sd, float(present.min()), float(present.max()), missing, int(present.size))
        )
    return out
