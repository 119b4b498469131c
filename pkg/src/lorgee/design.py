"""Dummy coding of factor covariates for the CLI.

The numerical core accepts numeric design columns only; this small
layer expands ``factor:`` covariate specs into indicator columns before
the dataset is loaded.  The reference level is the smallest level under
the usual label ordering (numeric when all labels are numeric), so a
factor with levels 1, 2, 3 produces columns ``factor(x)2``,
``factor(x)3``.
"""
from __future__ import annotations

import math

from .data import _is_missing, _label_sort_key
from .errors import DataError, UsageError


def parse_covariate_specs(text):
    """Split a comma-separated covariate list into (kind, name) pairs."""
    specs = []
    if not text:
        return specs
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" in item:
            kind, name = item.split(":", 1)
            kind = kind.strip().lower()
            if kind not in ("factor", "numeric"):
                raise UsageError(
                    f"unknown covariate marker {kind!r} in {item!r}")
            specs.append((kind, name.strip()))
        else:
            specs.append(("numeric", item))
    return specs


def expand_covariates(columns, specs):
    """Expand covariate specs against raw table columns.

    Parameters
    ----------
    columns : dict of column name -> list of raw cell values
    specs : list of (kind, name) pairs from :func:`parse_covariate_specs`

    Returns
    -------
    (names, expanded) where ``expanded`` maps each design column name to
    a list of floats (nan marks a missing source cell, so listwise
    deletion downstream still sees it).
    """
    names = []
    expanded = {}
    for kind, name in specs:
        if name not in columns:
            raise DataError(f"covariate column {name!r} not found in input")
        raw = columns[name]
        if kind == "numeric":
            vals = []
            for cell in raw:
                if _is_missing(cell):
                    vals.append(math.nan)
                else:
                    try:
                        vals.append(float(cell))
                    except (TypeError, ValueError):
                        raise DataError(
                            f"non-numeric value {cell!r} in column {name!r}; "
                            "mark it as factor:") from None
            names.append(name)
            expanded[name] = vals
            continue
        levels = sorted({str(c) for c in raw if not _is_missing(c)},
                        key=_label_sort_key(
                            {str(c) for c in raw if not _is_missing(c)}))
        if len(levels) < 2:
            raise DataError(
                f"factor column {name!r} has fewer than two levels")
        for level in levels[1:]:
            col_name = f"factor({name}){level}"
            expanded[col_name] = [
                math.nan if _is_missing(c) else float(str(c) == level)
                for c in raw]
            names.append(col_name)
    return names, expanded
