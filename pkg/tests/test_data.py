"""Dataset loading, canonical relabeling, blocks and pair grouping."""
import io

import numpy as np
import pytest

from lorgee import (
    DuplicateObservationError,
    EmptyDataError,
    InvalidResponseScaleError,
    SingleOccasionError,
    load_dataset,
    pair_grouping,
    subject_blocks,
)
from lorgee.errors import DataError


def test_arthritis_dimensions(arthritis_plain):
    assert arthritis_plain.n_subjects == 301
    assert arthritis_plain.n_times == 3
    assert arthritis_plain.n_categories == 5


def test_arthritis_missing_rows_dropped(arthritis_plain):
    # 906 raw rows, 18 missing responses, one subject entirely missing
    assert arthritis_plain.n_rows == 888


def test_two_categories_rejected():
    table = {"id": [1, 2, 3], "t": [1, 1, 1], "y": [1, 2, 1]}
    with pytest.raises(InvalidResponseScaleError):
        load_dataset(table, "y", "id", "t")


def test_lexicographic_id_sort():
    # non-numeric labels fall back to plain string order; the expected
    # ranks come from an independent reference sort
    labels = ["s2", "s10", "s1", "s3"]
    expected = {lab: k + 1 for k, lab in enumerate(sorted(labels))}
    table = {"id": labels * 2,
             "t": [1] * 4 + [2] * 4,
             "y": [1, 2, 3, 1, 2, 3, 1, 2]}
    data = load_dataset(table, "y", "id", "t")
    assert data.id_map == expected
    assert data.id_map["s1"] == 1 and data.id_map["s10"] == 2


def test_numeric_id_sort():
    labels = [2, 10, 1, 3]
    expected = {lab: k + 1 for k, lab in enumerate(sorted(labels))}
    table = {"id": labels, "y": [1, 2, 3, 1]}
    data = load_dataset(table, "y", "id")
    assert data.id_map == expected


def test_relabeling_bijection():
    rng = np.random.default_rng(11)
    ids = [f"subj{int(k)}" for k in rng.integers(0, 40, 120)]
    times, seen = [], {}
    for i in ids:
        seen[i] = seen.get(i, 0) + 1
        times.append(seen[i])
    ys = list(1 + rng.integers(0, 4, len(ids)))
    data = load_dataset({"id": ids, "t": times, "y": ys}, "y", "id", "t")
    inv_id, inv_time, inv_cat = data.inverse_maps()
    # recover original labels row by row (loader sorts rows, so compare sets
    # of (id, time, y) triples)
    original = {(str(i), t, y) for i, t, y in zip(ids, times, ys)}
    recovered = {(inv_id[int(s)], inv_time[int(t)], inv_cat[int(c)])
                 for s, t, c in zip(data.subject_idx, data.time_idx,
                                    data.category_idx)}
    assert recovered == original


def test_listwise_deletion_is_idempotent():
    messy = {"id": [1, 1, 2, 2, 3, 3],
             "t": [1, 2, 1, 2, 1, 2],
             "y": [1, "NA", 2, 3, 3, 1],
             "x": [0.5, 0.1, 0.7, 1.0, 2.0, ""]}
    clean = {"id": [1, 2, 2, 3], "t": [1, 1, 2, 1],
             "y": [1, 2, 3, 3], "x": [0.5, 0.7, 1.0, 2.0]}
    a = load_dataset(messy, "y", "id", "t", ["x"])
    b = load_dataset(clean, "y", "id", "t", ["x"])
    assert a.n_rows == b.n_rows == 4
    np.testing.assert_array_equal(a.category_idx, b.category_idx)
    np.testing.assert_array_equal(a.covariates, b.covariates)


def test_duplicate_occasion_rejected():
    table = {"id": [1, 1, 2], "t": [1, 1, 1], "y": [1, 2, 3]}
    with pytest.raises(DuplicateObservationError):
        load_dataset(table, "y", "id", "t")


def test_empty_after_na_removal():
    table = {"id": [1, 2, 3], "y": ["NA", "", None]}
    with pytest.raises(EmptyDataError):
        load_dataset(table, "y", "id")


def test_missing_column():
    with pytest.raises(DataError):
        load_dataset({"id": [1], "y": [1]}, "y", "id", covariate_cols=["zz"])


def test_csv_stream_input():
    text = "id,time,y\n1,1,1\n1,2,2\n2,1,3\n2,2,1\n3,1,2\n3,2,3\n"
    data = load_dataset(io.StringIO(text), "y", "id", "time")
    assert (data.n_subjects, data.n_times, data.n_categories) == (3, 2, 3)


def test_time_from_observation_order():
    table = {"id": [1, 1, 1, 2, 2], "y": [1, 2, 3, 2, 1]}
    data = load_dataset(table, "y", "id")
    assert data.n_times == 3
    blocks = subject_blocks(data)
    np.testing.assert_array_equal(blocks[0].times, [1, 2, 3])
    np.testing.assert_array_equal(blocks[1].times, [1, 2])


def test_subject_blocks_balanced():
    table = {"id": [1, 1, 1, 2, 2, 2], "t": [1, 2, 3, 1, 2, 3],
             "y": [1, 2, 3, 3, 2, 1]}
    blocks = subject_blocks(load_dataset(table, "y", "id", "t"))
    assert len(blocks) == 2
    assert all(b.n_obs == 3 for b in blocks)


def test_subject_blocks_unbalanced_gap():
    table = {"id": [1, 1, 2, 2, 2], "t": [1, 3, 1, 2, 3],
             "y": [1, 2, 3, 2, 1]}
    blocks = subject_blocks(load_dataset(table, "y", "id", "t"))
    np.testing.assert_array_equal(blocks[0].times, [1, 3])
    assert blocks[0].n_obs == 2


def test_subject_blocks_arthritis(arthritis_plain):
    blocks = subject_blocks(arthritis_plain)
    assert len(blocks) == 301
    for blk in blocks:
        assert np.all(np.diff(blk.times) > 0)


def test_pair_grouping_t3():
    g = pair_grouping(3)
    assert g.pairs == ((1, 2), (1, 3), (2, 3))
    assert g.n_pairs == 3


def test_pair_grouping_t2():
    g = pair_grouping(2)
    assert g.pairs == ((1, 2),)


def test_pair_grouping_t5_against_enumeration():
    # oracle: plain double loop
    expected = []
    for t in range(1, 6):
        for tp in range(t + 1, 6):
            expected.append((t, tp))
    g = pair_grouping(5)
    assert list(g.pairs) == expected
    assert g.n_pairs == 10
    assert g.pairs[0] == (1, 2) and g.pairs[-1] == (4, 5)


@pytest.mark.parametrize("T", [2, 3, 4, 7])
def test_pair_grouping_properties(T):
    g = pair_grouping(T)
    assert g.n_pairs == T * (T - 1) // 2
    assert len(set(g.pairs)) == g.n_pairs
    assert all(t < tp for t, tp in g.pairs)


def test_pair_grouping_single_occasion():
    with pytest.raises(SingleOccasionError):
        pair_grouping(1)


def test_dataset_immutable(arthritis_plain):
    with pytest.raises(ValueError):
        arthritis_plain.category_idx[0] = 2
