"""Parsing of delimiter-separated mixed-type tables against a schema.

Rows containing the schema's missing token anywhere are dropped (counted
in the parse report); everything retained is fully validated: numeric
fields are finite reals, categorical tokens come from the declared
domain, and the target is binarized by the schema's positive rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, SchemaError
from .schema import PositiveRule, SchemaSpec


@dataclass(frozen=True)
class ParseReport:
    """Row accounting for one parse: kept + dropped == total data rows."""

    total_rows: int
    kept_rows: int
    dropped_rows: int
    dropped_indices: tuple[int, ...]


@dataclass(frozen=True)
class RawDataset:
    """Validated rows: per-attribute parsed values plus 0/1 labels.

    ``rows[i]`` holds one entry per schema attribute, in schema order:
    floats for numeric attributes, domain tokens (str) for categorical ones.
    """

    schema: SchemaSpec
    rows: tuple[tuple[float | str, ...], ...]
    labels: np.ndarray

    @property
    def n(self) -> int:
        return len(self.rows)


def binarize_target(token: str, rule: PositiveRule) -> int:
    """Map a raw target token to 0 or 1 under the schema's positive rule."""
    return 1 if rule.matches(token) else 0


def parse_dataset(
    source: str | Path,
    schema: SchemaSpec,
    delimiter: str = ",",
    has_header: bool = False,
) -> tuple[RawDataset, ParseReport]:
    """Parse a delimiter-separated file into a validated RawDataset.

    Args:
        source: path to the text file. Blank lines are ignored; each data
            row must carry one field per schema attribute plus the target.
        schema: the table declaration to validate against.
        delimiter: field separator (comma by default, per the UCI layout).
        has_header: skip the first non-blank line when true.

    Returns:
        (dataset, report) where report counts rows dropped for containing
        the missing token. Row order is preserved.

    Raises:
        ParseError: wrong field count, non-finite numeric, bad target token.
        SchemaError: categorical token outside its declared domain.
    """
    with open(source, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n").rstrip("\r") for ln in fh]
    data_lines = [ln for ln in lines if ln.strip() != ""]
    if has_header and data_lines:
        data_lines = data_lines[1:]

    n_fields = schema.n_fields
    rows: list[tuple[float | str, ...]] = []
    labels: list[int] = []
    dropped: list[int] = []

    for idx, line in enumerate(data_lines):
        fields = [f.strip() for f in line.split(delimiter)]
        if len(fields) != n_fields:
            raise ParseError(
                f"row {idx}: expected {n_fields} fields, got {len(fields)}"
            )
        if schema.missing_token in fields:
            dropped.append(idx)
            continue
        parsed: list[float | str] = []
        for attr, token in zip(schema.attributes, fields[:-1]):
            if attr.kind == "numeric":
                try:
                    value = float(token)
                except ValueError:
                    raise ParseError(
                        f"row {idx}: attribute {attr.name!r}: {token!r} is not numeric"
                    ) from None
                if not math.isfinite(value):
                    raise ParseError(
                        f"row {idx}: attribute {attr.name!r}: non-finite value {token!r}"
                    )
                parsed.append(value)
            else:
                if token not in attr.domain:
                    raise SchemaError(
                        f"row {idx}: attribute {attr.name!r}: token {token!r} "
                        f"outside declared domain {list(attr.domain)}"
                    )
                parsed.append(token)
        try:
            labels.append(binarize_target(fields[-1], schema.positive_rule))
        except ParseError as exc:
            raise ParseError(f"row {idx}: {exc}") from None
        rows.append(tuple(parsed))

    dataset = RawDataset(
        schema=schema,
        rows=tuple(rows),
        labels=np.asarray(labels, dtype=np.int64),
    )
    report = ParseReport(
        total_rows=len(data_lines),
        kept_rows=len(rows),
        dropped_rows=len(dropped),
        dropped_indices=tuple(dropped),
    )
    return dataset, report
