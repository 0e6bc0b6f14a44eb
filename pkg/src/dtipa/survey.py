"""Survey score ingestion, validation and reliability.

Input is a UTF-8 CSV with a header of attribute labels and one integer
score per attribute per respondent. Incomplete or out-of-range rows are
rejected at load time and recorded with a reason.
"""

from __future__ import annotations

import csv
import io
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np


class SurveyError(ValueError):
    """Raised when a survey file cannot produce a usable score matrix."""


@dataclass(frozen=True)
class SurveyMatrix:
    attribute_names: tuple[str, ...]
    overall_index: int
    scores: np.ndarray
    scale_min: int = 1
    scale_max: int = 5

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.int64)
        if scores.ndim != 2:
            raise SurveyError("scores must be a 2-d table")
        n, m = scores.shape
        if n < 1:
            raise SurveyError("survey has no rows")
        if m < 2 or m != len(self.attribute_names):
            raise SurveyError("need at least 2 attributes matching the header")
        if not 0 <= self.overall_index < m:
            raise SurveyError("overall_index out of range")
        if scores.min() < self.scale_min or scores.max() > self.scale_max:
            raise SurveyError("score outside the rating scale")
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "attribute_names", tuple(self.attribute_names))

    @property
    def n_rows(self) -> int:
        return self.scores.shape[0]

    @property
    def n_attributes(self) -> int:
        return self.scores.shape[1]

    @property
    def overall_name(self) -> str:
        return self.attribute_names[self.overall_index]

    @property
    def labels(self) -> np.ndarray:
        """Overall-quality scores, the class label of every respondent."""
        return self.scores[:, self.overall_index]

    @property
    def splitter_indices(self) -> list[int]:
        return [i for i in range(self.n_attributes) if i != self.overall_index]

    def index_of(self, name: str) -> int:
        try:
            return self.attribute_names.index(name)
        except ValueError:
            raise KeyError(f"unknown attribute {name!r}") from None

    def subset(self, rows: Sequence[int]) -> "SurveyMatrix":
        return SurveyMatrix(self.attribute_names, self.overall_index,
                            self.scores[np.asarray(rows, dtype=np.int64)],
                            self.scale_min, self.scale_max)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.attribute_names)
        writer.writerows(self.scores.tolist())
        return buf.getvalue()


@dataclass
class RejectedRow:
    line: int
    reason: str


@dataclass
class ValidationReport:
    rows_loaded: int
    rejected: list[RejectedRow] = field(default_factory=list)
    duplicate_rows: list[int] = field(default_factory=list)
    cronbach_alpha: float | None = None
    alpha_threshold: float = 0.7

    @property
    def rows_rejected(self) -> int:
        return len(self.rejected)

    @property
    def reliable(self) -> bool:
        return self.cronbach_alpha is not None and self.cronbach_alpha >= self.alpha_threshold

    def to_dict(self) -> dict:
        return {
            "rows_loaded": self.rows_loaded,
            "rows_rejected": self.rows_rejected,
            "rejected": [{"line": r.line, "reason": r.reason} for r in self.rejected],
            "duplicate_rows": list(self.duplicate_rows),
            "cronbach_alpha": self.cronbach_alpha,
            "alpha_threshold": self.alpha_threshold,
            "reliable": self.reliable,
        }


def _open_text(source) -> IO[str]:
    if isinstance(source, (str, os.PathLike)):
        return open(source, encoding="utf-8-sig", newline="")
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8-sig"))
    if isinstance(source, io.TextIOBase):
        return source
    # binary stream
    return io.TextIOWrapper(source, encoding="utf-8-sig", newline="")


def read_survey(source, overall_column: str, scale_min: int = 1,
                scale_max: int = 5) -> tuple[SurveyMatrix, ValidationReport]:
    """Parse a survey CSV into a matrix plus a report of rejected rows.

    ``source`` may be a path, raw bytes, or a text/binary stream.
    """
    stream = _open_text(source)
    try:
        reader = csv.reader(stream)
        header = next(reader, None)
        if not header or not any(h.strip() for h in header):
            raise SurveyError("missing header row")
        header = [h.strip() for h in header]
        if overall_column not in header:
            raise SurveyError(f"overall column {overall_column!r} not in header")
        if len(set(header)) != len(header):
            raise SurveyError("duplicate attribute labels in header")

        rows: list[list[int]] = []
        rejected: list[RejectedRow] = []
        for lineno, raw in enumerate(reader, start=2):
            if not raw or all(not c.strip() for c in raw):
                continue
            if len(raw) != len(header):
                rejected.append(RejectedRow(lineno, "wrong field count"))
                continue
            cells = [c.strip() for c in raw]
            if any(c == "" for c in cells):
                rejected.append(RejectedRow(lineno, "missing value"))
                continue
            try:
                values = [int(c) for c in cells]
            except ValueError:
                rejected.append(RejectedRow(lineno, "non-integer value"))
                continue
            if any(v < scale_min or v > scale_max for v in values):
                rejected.append(RejectedRow(lineno, "out of range"))
                continue
            rows.append(values)
    finally:
        if isinstance(source, (str, os.PathLike)):
            stream.close()

    if not rows:
        raise SurveyError("zero valid rows")

    matrix = SurveyMatrix(tuple(header), header.index(overall_column),
                          np.array(rows, dtype=np.int64), scale_min, scale_max)
    seen: Counter = Counter()
    duplicates = []
    for i, row in enumerate(rows):
        key = tuple(row)
        if seen[key]:
            duplicates.append(i)
        seen[key] += 1
    report = ValidationReport(rows_loaded=len(rows), rejected=rejected,
                              duplicate_rows=duplicates)
    return matrix, report


def load_survey(source, overall_column: str, scale_min: int = 1,
                scale_max: int = 5) -> SurveyMatrix:
    return read_survey(source, overall_column, scale_min, scale_max)[0]


def cronbach_alpha(m: SurveyMatrix, include_overall: bool = True) -> float:
    """Cronbach's alpha over the attribute columns.

    Uses unbiased (N-1) variances for both the items and the row totals.
    Set ``include_overall=False`` to leave the overall-quality column out.
    """
    cols = list(range(m.n_attributes)) if include_overall else m.splitter_indices
    x = m.scores[:, cols].astype(float)
    if x.shape[0] < 2:
        raise SurveyError("cronbach alpha needs at least 2 respondents")
    k = x.shape[1]
    item_var = x.var(axis=0, ddof=1).sum()
    total_var = x.sum(axis=1).var(ddof=1)
    if total_var == 0:
        raise SurveyError("degenerate survey (all respondents identical totals)")
    return float(k / (k - 1) * (1.0 - item_var / total_var))


def attribute_means(m: SurveyMatrix) -> dict[str, float]:
    """Per-column arithmetic mean; the overall column is included.

    Use ``m.overall_name`` to tell it apart from the splitter attributes.
    """
    means = m.scores.mean(axis=0)
    return {name: float(v) for name, v in zip(m.attribute_names, means)}


def validate_survey(source, overall_column: str, alpha_threshold: float = 0.7,
                    include_overall: bool = True, scale_min: int = 1,
                    scale_max: int = 5) -> tuple[SurveyMatrix, ValidationReport]:
    matrix, report = read_survey(source, overall_column, scale_min, scale_max)
    report.alpha_threshold = alpha_threshold
    if matrix.n_rows >= 2:
        try:
            report.cronbach_alpha = cronbach_alpha(matrix, include_overall)
        except SurveyError:
            report.cronbach_alpha = None
    return matrix, report
