"""Long-format multinomial panel data: loading, validation, canonical indices.

The loader turns a rectangular table (CSV file or mapping of columns)
into a :class:`LongDataset`: every subject, occasion and response label
is relabeled onto ``1..N``, ``1..T`` and ``1..J`` by ascending sort of
the original labels.  Downstream code only ever sees the canonical
indices; the original labels stay available through the stored maps.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DataError,
    DuplicateObservationError,
    EmptyDataError,
    InvalidResponseScaleError,
    SingleOccasionError,
)

_MISSING_STRINGS = {"", "NA"}


def _is_missing(value):
    if value is None:
        return True
    if isinstance(value, float) and math.isnan(value):
        return True
    if isinstance(value, str) and value.strip() in _MISSING_STRINGS:
        return True
    return False


def _label_sort_key(labels):
    """Sort key for opaque labels: numeric order when every label parses
    as a number, plain lexicographic order otherwise."""
    try:
        parsed = {lab: float(str(lab).strip()) for lab in labels}
    except (TypeError, ValueError):
        return lambda lab: str(lab)
    return lambda lab: parsed[lab]


def _canonical_map(labels):
    """Map distinct labels to 1..K by ascending sort."""
    distinct = sorted(set(labels), key=_label_sort_key(set(labels)))
    return {lab: k + 1 for k, lab in enumerate(distinct)}


@dataclass(frozen=True)
class LongDataset:
    """Validated long-format dataset with canonical integer indices.

    Attributes
    ----------
    n_subjects, n_times, n_categories : int
        N, T and J.  J > 2 always holds.
    subject_idx, time_idx, category_idx : ndarray of int
        Canonical 1-based indices, one entry per retained row.  Rows are
        sorted by (subject, time).
    covariates : ndarray of float, shape (n_rows, n_covariates)
        Numeric design columns (already dummy-expanded upstream).
    covariate_names : tuple of str
    id_map, time_map, category_map : dict
        Original label -> canonical index, ascending on original labels.
    """

    n_subjects: int
    n_times: int
    n_categories: int
    subject_idx: np.ndarray
    time_idx: np.ndarray
    category_idx: np.ndarray
    covariates: np.ndarray
    covariate_names: tuple = ()
    id_map: dict = field(default_factory=dict)
    time_map: dict = field(default_factory=dict)
    category_map: dict = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.subject_idx, self.time_idx, self.category_idx,
                    self.covariates):
            arr.flags.writeable = False

    @property
    def n_rows(self):
        return self.subject_idx.shape[0]

    @property
    def n_covariates(self):
        return self.covariates.shape[1]

    def inverse_maps(self):
        """Canonical index -> original label, for each of the three maps."""
        return (
            {v: k for k, v in self.id_map.items()},
            {v: k for k, v in self.time_map.items()},
            {v: k for k, v in self.category_map.items()},
        )


@dataclass(frozen=True)
class SubjectBlock:
    """All observations of one subject, ordered by occasion."""

    subject: int
    times: np.ndarray
    categories: np.ndarray
    covariates: np.ndarray
    row_indices: np.ndarray

    @property
    def n_obs(self):
        return self.times.shape[0]


@dataclass(frozen=True)
class PairGrouping:
    """The ordered time-pairs (t, t') with t < t', rightmost index fastest:
    (1,2), (1,3), ..., (1,T), (2,3), ..., (T-1,T)."""

    n_times: int
    pairs: tuple

    @property
    def n_pairs(self):
        return len(self.pairs)

    def index(self, t, tp):
        return self.pairs.index((t, tp))


def _read_table(source, delimiter=","):
    """Return (column names, dict name -> list of cell values)."""
    if isinstance(source, dict):
        names = list(source.keys())
        cols = {k: list(v) for k, v in source.items()}
        lengths = {len(v) for v in cols.values()}
        if len(lengths) > 1:
            raise DataError("columns have unequal lengths")
        return names, cols
    if hasattr(source, "read"):
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
        handle = io.StringIO(text)
    else:
        handle = open(source, "r", newline="", encoding="utf-8")
    try:
        reader = csv.reader(handle, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataError("input table is empty") from None
        names = [h.strip() for h in header]
        cols = {name: [] for name in names}
        for row in reader:
            if not row or (len(row) == 1 and row[0].strip() == ""):
                continue
            if len(row) != len(names):
                raise DataError(
                    f"row with {len(row)} fields does not match header "
                    f"({len(names)} columns)")
            for name, cell in zip(names, row):
                cols[name].append(cell.strip())
        return names, cols
    finally:
        handle.close()


def load_dataset(source, response_col, id_col, time_col=None,
                 covariate_cols=(), delimiter=","):
    """Load and canonicalize a long-format dataset.

    Parameters
    ----------
    source : path, file-like or dict of columns
        Rectangular table; CSV input needs a header row.  Missing values
        are empty cells or the literal ``NA``.
    response_col, id_col : str
        Column names of the multinomial response and the subject label.
    time_col : str, optional
        Column naming the measurement occasion.  When omitted, each
        subject's rows are numbered 1, 2, ... in file order, which is
        only sound for balanced designs or monotone dropout.
    covariate_cols : sequence of str
        Numeric design columns.  Dummy coding of factors happens before
        this call (see :mod:`lorgee.design`).

    Returns
    -------
    LongDataset

    Raises
    ------
    InvalidResponseScaleError
        Fewer than three distinct response categories.
    DuplicateObservationError
        A subject has two rows at one occasion.
    EmptyDataError
        Nothing left after dropping incomplete rows.
    """
    names, cols = _read_table(source, delimiter=delimiter)
    covariate_cols = tuple(covariate_cols)
    for col in (response_col, id_col) + covariate_cols + \
            ((time_col,) if time_col is not None else ()):
        if col not in cols:
            raise DataError(f"column {col!r} not found in input")

    n_raw = len(cols[id_col])
    checked = [cols[response_col], cols[id_col]] + \
        [cols[c] for c in covariate_cols]
    if time_col is not None:
        checked.append(cols[time_col])

    keep = [i for i in range(n_raw)
            if not any(_is_missing(col[i]) for col in checked)]
    if not keep:
        raise EmptyDataError("no complete rows after removing missing values")

    ids = [cols[id_col][i] for i in keep]
    responses = [cols[response_col][i] for i in keep]
    try:
        covs = np.array(
            [[float(cols[c][i]) for c in covariate_cols] for i in keep],
            dtype=float).reshape(len(keep), len(covariate_cols))
    except (TypeError, ValueError) as exc:
        raise DataError(f"non-numeric covariate value: {exc}") from None

    id_map = _canonical_map(ids)
    subj = np.array([id_map[v] for v in ids], dtype=np.intp)

    if time_col is not None:
        times_raw = [cols[time_col][i] for i in keep]
        time_map = _canonical_map(times_raw)
        time = np.array([time_map[v] for v in times_raw], dtype=np.intp)
    else:
        # occasion = running count within subject, in file order
        counter = {}
        time = np.empty(len(keep), dtype=np.intp)
        for r, s in enumerate(subj):
            counter[s] = counter.get(s, 0) + 1
            time[r] = counter[s]
        time_map = {t: t for t in range(1, int(time.max()) + 1)}

    category_map = _canonical_map(responses)
    if len(category_map) < 3:
        raise InvalidResponseScaleError(
            f"need more than 2 response categories, found {len(category_map)}")
    cat = np.array([category_map[v] for v in responses], dtype=np.intp)

    seen = set()
    inv_id = {v: k for k, v in id_map.items()}
    for s, t in zip(subj, time):
        if (s, t) in seen:
            raise DuplicateObservationError(
                f"subject {inv_id[int(s)]!r} has two rows at the same occasion")
        seen.add((s, t))

    order = np.lexsort((time, subj))
    return LongDataset(
        n_subjects=len(id_map),
        n_times=len(time_map),
        n_categories=len(category_map),
        subject_idx=subj[order],
        time_idx=time[order],
        category_idx=cat[order],
        covariates=covs[order],
        covariate_names=covariate_cols,
        id_map=id_map,
        time_map=time_map,
        category_map=category_map,
    )


def subject_blocks(data: LongDataset):
    """Split a dataset into per-subject blocks ordered by occasion."""
    blocks = []
    boundaries = np.flatnonzero(np.diff(data.subject_idx)) + 1
    for rows in np.split(np.arange(data.n_rows), boundaries):
        blocks.append(SubjectBlock(
            subject=int(data.subject_idx[rows[0]]),
            times=data.time_idx[rows],
            categories=data.category_idx[rows],
            covariates=data.covariates[rows],
            row_indices=rows,
        ))
    return blocks


def pair_grouping(n_times: int) -> PairGrouping:
    """Enumerate the T(T-1)/2 occasion pairs in canonical order."""
    if n_times < 2:
        raise SingleOccasionError(
            "association structures need at least two occasions")
    pairs = tuple((t, tp)
                  for t in range(1, n_times)
                  for tp in range(t + 1, n_times + 1))
    return PairGrouping(n_times=n_times, pairs=pairs)
