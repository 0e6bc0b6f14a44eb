"""Improvement feasibility from pairwise expert judgments (AHP)."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

# Saaty's random consistency index, indexed by matrix order
RANDOM_INDEX = {1: 0.0, 2: 0.0, 3: 0.58, 4: 0.90, 5: 1.12, 6: 1.24, 7: 1.32, 8: 1.41, 9: 1.45}
CR_LIMIT = 0.1


class InconsistentJudgmentsError(ValueError):
    def __init__(self, cr: float):
        super().__init__(f"inconsistent judgments, revise matrix (CR = {cr:.4f} >= {CR_LIMIT})")
        self.cr = cr


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class JudgmentMatrix:
    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        q = len(self.labels)
        if v.shape != (q, q):
            raise ValueError("judgment matrix must be square and match the labels")
        if len(set(self.labels)) != q:
            raise ValueError("duplicate labels")
        if np.any(v <= 0):
            raise ValueError("judgments must be positive")
        if not np.allclose(np.diag(v), 1.0, atol=1e-9):
            raise ValueError("diagonal must be 1")
        if not np.allclose(v * v.T, 1.0, atol=1e-9):
            raise ValueError("matrix is not reciprocal")
        if np.any(v < 1 / 9 - 1e-9) or np.any(v > 9 + 1e-9):
            raise ValueError("judgments must lie within [1/9, 9]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def order(self) -> int:
        return len(self.labels)

    @classmethod
    def from_upper(cls, labels: Sequence[str],
                   upper: Mapping[tuple[str, str], float]) -> "JudgmentMatrix":
        """Build from strict-upper-triangle judgments keyed by label pairs.

        A pair may be given in either orientation; the reciprocal is derived.
        """
        labels = list(labels)
        q = len(labels)
        pos = {lab: i for i, lab in enumerate(labels)}
        v = np.ones((q, q))
        seen = set()
        for (a, b), value in upper.items():
            if a not in pos or b not in pos or a == b:
                raise ValueError(f"bad judgment pair ({a}, {b})")
            i, j = pos[a], pos[b]
            if i > j:
                i, j, value = j, i, 1 / float(value)
            if (i, j) in seen:
                raise ValueError(f"duplicate judgment for ({a}, {b})")
            seen.add((i, j))
            v[i, j] = float(value)
            v[j, i] = 1 / float(value)
        missing = [(labels[i], labels[j]) for i in range(q) for j in range(i + 1, q)
                   if (i, j) not in seen]
        if missing:
            raise ValueError(f"missing judgments for {missing}")
        return cls(tuple(labels), v)

    @classmethod
    def from_weights(cls, labels: Sequence[str], weights: Sequence[float]) -> "JudgmentMatrix":
        w = np.asarray(weights, dtype=float)
        return cls(tuple(labels), w[:, None] / w[None, :])


def parse_ratio(text: str) -> float:
    return float(Fraction(text.strip()))


def read_judgments(source) -> JudgmentMatrix:
    """Read an ``i,j,value`` CSV of upper-triangle judgments.

    Values may be integers or reciprocals such as ``1/3``. Label order is
    the order of first appearance.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8-sig", newline="") as fh:
            text = fh.read()
    elif isinstance(source, (bytes, bytearray)):
        text = bytes(source).decode("utf-8-sig")
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8-sig")
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["i", "j", "value"]:
        raise ValueError("judgments file needs header i,j,value")
    labels: list[str] = []
    upper = {}
    for row in reader:
        a, b = row["i"].strip(), row["j"].strip()
        for lab in (a, b):
            if lab not in labels:
                labels.append(lab)
        upper[(a, b)] = parse_ratio(row["value"])
    return JudgmentMatrix.from_upper(labels, upper)


def principal_eigenvector(j: JudgmentMatrix, tol: float = 1e-10,
                          max_iter: int = 1000) -> tuple[float, np.ndarray]:
    """Dominant eigenpair by power iteration, iterates normalized to sum 1."""
    a = j.values
    q = j.order
    if q < 2:
        raise ValueError("need at least 2 attributes")
    v = np.full(q, 1.0 / q)
    for _ in range(max_iter):
        nxt = a @ v
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - v)) < tol:
            v = nxt
            break
        v = nxt
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations")
    lam = float(np.mean((a @ v) / v))
    return lam, v


def consistency_ratio(j: JudgmentMatrix, lambda_max: float) -> tuple[float, float]:
    q = j.order
    if q <= 2:
        return 0.0, 0.0
    if q not in RANDOM_INDEX:
        raise ValueError(f"no random index for order {q}")
    ci = (lambda_max - q) / (q - 1)
    return ci, ci / RANDOM_INDEX[q]


@dataclass(frozen=True)
class FeasibilityVector:
    feasibility: dict[str, float]
    lambda_max: float
    consistency_index: float
    consistency_ratio: float

    def __getitem__(self, attribute: str) -> float:
        return self.feasibility[attribute]

    def __contains__(self, attribute: str) -> bool:
        return attribute in self.feasibility

    def to_dict(self) -> dict:
        return {
            "feasibility": dict(self.feasibility),
            "lambda_max": self.lambda_max,
            "consistency_index": self.consistency_index,
            "consistency_ratio": self.consistency_ratio,
        }


def feasibility_vector(j: JudgmentMatrix) -> FeasibilityVector:
    """Normalized principal eigenvector; rejects matrices with CR >= 0.1."""
    lam, v = principal_eigenvector(j)
    ci, cr = consistency_ratio(j, lam)
    if cr >= CR_LIMIT:
        raise InconsistentJudgmentsError(cr)
    return FeasibilityVector(dict(zip(j.labels, (float(x) for x in v))), lam, ci, cr)
