"""Flat-file formats: market CSV, distribution, family, sequence and constraint files."""

from __future__ import annotations

import csv
import re
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import MarketError
from .logopt import PortfolioConstraints
from .market import Market

SUM_TOL = 1e-9


class ParseError(ValueError):
    def __init__(self, path, line: Optional[int], message: str):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


def _rows(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return [(n, row) for n, row in enumerate(csv.reader(fh), start=1) if any(c.strip() for c in row)]
    except UnicodeDecodeError as exc:
        raise ParseError(path, None, f"not UTF-8 text ({exc.reason})") from exc


def _number(path, line, col, text) -> float:
    try:
        value = float(text.strip())
    except ValueError:
        raise ParseError(path, line, f"column {col}: {text.strip()!r} is not a number") from None
    if not np.isfinite(value):
        raise ParseError(path, line, f"column {col}: value must be finite")
    return value


def read_market_csv(path) -> tuple[Market, Optional[np.ndarray]]:
    """Read ``outcome,<asset_1>,...,<asset_k>[,prob]``.

    Returns the market and the probability column if present.
    """
    rows = _rows(path)
    if not rows:
        raise ParseError(path, None, "empty file")
    line, header = rows[0]
    header = [h.strip() for h in header]
    if len(header) < 2 or header[0].lower() != "outcome":
        raise ParseError(path, line, "header must start with 'outcome' followed by asset names")
    has_prob = header[-1].lower() == "prob"
    assets = header[1:-1] if has_prob else header[1:]
    if not assets:
        raise ParseError(path, line, "no asset columns")
    width = len(header)
    labels, values, probs = [], [], []
    for line, row in rows[1:]:
        if len(row) != width:
            raise ParseError(path, line, f"expected {width} fields, got {len(row)}")
        labels.append(row[0].strip())
        entries = []
        for col, text in enumerate(row[1 : 1 + len(assets)], start=2):
            value = _number(path, line, col, text)
            if value < 0:
                raise ParseError(path, line, f"column {col} ({header[col - 1]}): negative price relative {value}")
            entries.append(value)
        values.append(entries)
        if has_prob:
            prob = _number(path, line, width, row[-1])
            if prob < 0:
                raise ParseError(path, line, f"column {width} (prob): negative probability")
            probs.append(prob)
    if not values:
        raise ParseError(path, None, "no outcome rows")
    try:
        market = Market(np.array(values), tuple(assets), tuple(labels))
    except MarketError as exc:
        raise ParseError(path, None, str(exc)) from exc
    p = normalize(np.array(probs), path) if has_prob else None
    return market, p


def normalize(p: np.ndarray, source="distribution") -> np.ndarray:
    """Check a probability vector sums to 1 within ``SUM_TOL`` and rescale it exactly."""
    if p.size == 0 or np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ParseError(source, None, "probabilities must be finite and nonnegative")
    if abs(p.sum() - 1.0) > SUM_TOL:
        raise ParseError(source, None, f"probabilities sum to {p.sum()!r}, not 1")
    return p / p.sum()


def parse_vector(text: str, source="argument") -> np.ndarray:
    parts = [t for t in re.split(r"[,\s;]+", text.strip()) if t]
    if not parts:
        raise ParseError(source, None, "empty vector")
    return np.array([_number(source, None, i + 1, t) for i, t in enumerate(parts)])


def read_distribution(path, m: Optional[int] = None) -> np.ndarray:
    """A single CSV row or a single column of probabilities."""
    rows = _rows(path)
    flat = [(line, cell) for line, row in rows for cell in row if cell.strip()]
    values = np.array([_number(path, line, 1, cell) for line, cell in flat])
    if m is not None and values.size != m:
        raise ParseError(path, None, f"distribution has {values.size} entries, market has {m} outcomes")
    return normalize(values, path)


def read_family(path, m: int) -> list[np.ndarray]:
    """One distribution per CSV row."""
    family = []
    for line, row in _rows(path):
        values = np.array([_number(path, line, c + 1, t) for c, t in enumerate(row) if t.strip()])
        if values.size != m:
            raise ParseError(path, line, f"expected {m} probabilities, got {values.size}")
        if abs(values.sum() - 1.0) > SUM_TOL or np.any(values < 0):
            raise ParseError(path, line, f"row is not a probability vector (sum {values.sum()!r})")
        family.append(values / values.sum())
    if not family:
        raise ParseError(path, None, "empty family")
    return family


def read_sequence(path, market: Market) -> list[int]:
    """Outcome indices or outcome labels separated by commas, whitespace or newlines."""
    lookup = {name: j for j, name in enumerate(market.outcome_names)}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(path, None, "not UTF-8 text") from exc
    out = []
    for line, content in enumerate(text.splitlines(), start=1):
        for token in (t for t in re.split(r"[,\s]+", content.strip()) if t):
            if token in lookup:
                out.append(lookup[token])
            elif token.isdigit():
                j = int(token)
                if j >= market.m:
                    raise ParseError(path, line, f"outcome index {j} out of range")
                out.append(j)
            else:
                raise ParseError(path, line, f"unknown outcome {token!r}")
    return out


def read_constraints(path, k: int) -> PortfolioConstraints:
    """Rows ``c_1,...,c_k,bound`` meaning ``sum_i c_i b_i <= bound``; a non-numeric header row is skipped."""
    rows = _rows(path)
    coeffs, bounds = [], []
    for n, (line, row) in enumerate(rows):
        if n == 0:
            try:
                float(row[0])
            except ValueError:
                continue
        if len(row) != k + 1:
            raise ParseError(path, line, f"expected {k + 1} fields, got {len(row)}")
        nums = [_number(path, line, c + 1, t) for c, t in enumerate(row)]
        coeffs.append(nums[:k])
        bounds.append(nums[k])
    if not coeffs:
        raise ParseError(path, None, "no constraint rows")
    return PortfolioConstraints(np.array(coeffs), np.array(bounds))
