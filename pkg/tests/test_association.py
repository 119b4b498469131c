"""Pair tables, local odds ratios, structure fits, intrinsic parameters."""
import numpy as np
import pytest

from lorgee import (
    AssociationStructure,
    SparseTableError,
    UsageError,
    build_pair_tables,
    fit_structure,
    intrinsic_pars,
    load_dataset,
    local_or_of_table,
    matrix_lor,
    pair_grouping,
    theta_from_scores,
)
from lorgee.association import PairTables, build_pair_tables_auto
from lorgee.links import CUMULATIVE_LOGIT
from lorgee import MarginalModelSpec
from conftest import simulate_dataset

PUBLISHED_INTRINSIC = np.array([0.6517843, 0.9097341, 0.9022272])


def _tiny_dataset():
    table = {"id": [1, 1, 2, 2], "t": [1, 2, 1, 2], "y": [1, 1, 2, 3]}
    return load_dataset(table, "y", "id", "t")


def test_build_pair_tables_tiny():
    data = _tiny_dataset()
    tables = build_pair_tables(data, pair_grouping(2), 0.0)
    np.testing.assert_array_equal(
        tables.counts[0], [[1, 0, 0], [0, 0, 1], [0, 0, 0]])


def test_build_pair_tables_add_constant():
    data = _tiny_dataset()
    base = build_pair_tables(data, pair_grouping(2), 0.0).counts[0]
    added = build_pair_tables(data, pair_grouping(2), 1e-4).counts[0]
    np.testing.assert_allclose(added, base + 1e-4)


def test_pair_table_margins_match_occasion_tallies(arthritis_plain):
    # oracle: tally occasion-1 responses over subjects also observed at
    # occasion 2, straight from the canonical arrays
    data = arthritis_plain
    tables = build_pair_tables(data, pair_grouping(3), 0.0)
    cats = {}
    for s, t, c in zip(data.subject_idx, data.time_idx, data.category_idx):
        cats[(int(s), int(t))] = int(c)
    tally = np.zeros(5)
    for s in range(1, data.n_subjects + 1):
        if (s, 1) in cats and (s, 2) in cats:
            tally[cats[(s, 1)] - 1] += 1
    np.testing.assert_array_equal(tables.counts[0].sum(axis=1), tally)


def test_sparse_margin_raises_and_auto_retries():
    # category 3 never occurs at occasion 1 -> empty row margin; building
    # tolerates it, fitting rejects it, the auto path retries with 1e-4
    table = {"id": [1, 1, 2, 2, 3, 3], "t": [1, 2, 1, 2, 1, 2],
             "y": [1, 3, 2, 1, 1, 2]}
    data = load_dataset(table, "y", "id", "t")
    tables = build_pair_tables(data, pair_grouping(2), 0.0)
    with pytest.raises(SparseTableError) as exc:
        fit_structure(tables, AssociationStructure(kind="uniform"), "ordinal")
    assert exc.value.pair == (1, 2)
    with pytest.warns(UserWarning):
        auto = build_pair_tables_auto(data, pair_grouping(2), 0.0)
    assert auto.add == 1e-4
    assert np.all(auto.counts > 0)


def test_local_or_independence_is_one():
    r = np.array([0.2, 0.3, 0.5])
    c = np.array([0.4, 0.1, 0.5])
    np.testing.assert_allclose(local_or_of_table(np.outer(r, c)),
                               np.ones((2, 2)), rtol=1e-12)


def test_local_or_cross_ratio():
    assert local_or_of_table(np.array([[0.4, 0.1], [0.1, 0.4]]))[0, 0] == \
        pytest.approx(16.0)


def test_local_or_rejects_nonpositive():
    with pytest.raises(ValueError):
        local_or_of_table(np.array([[1.0, 0.0], [1.0, 1.0]]))


def test_matrix_lor_uniform_target():
    np.testing.assert_allclose(matrix_lor(np.ones((2, 2))),
                               np.full((3, 3), 1 / 9), rtol=1e-12)


def test_matrix_lor_2x2():
    np.testing.assert_allclose(matrix_lor(np.array([[2.0]])),
                               [[0.2, 0.2], [0.2, 0.4]], rtol=1e-12)


def test_matrix_lor_round_trip_from_scores():
    theta = theta_from_scores(1.0, [1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    table = matrix_lor(theta)
    np.testing.assert_allclose(local_or_of_table(table), theta, rtol=1e-10)
    assert table.sum() == pytest.approx(1.0)


def test_matrix_lor_random_round_trip():
    rng = np.random.default_rng(2)
    for J in (2, 3, 5):
        theta = np.exp(rng.normal(0.0, 0.7, (J - 1, J - 1)))
        table = matrix_lor(theta)
        np.testing.assert_allclose(local_or_of_table(table), theta,
                                   rtol=1e-10)


def test_matrix_lor_rejects_nonpositive():
    with pytest.raises(ValueError):
        matrix_lor(np.array([[1.0, -2.0], [1.0, 1.0]]))


def test_category_exch_matches_published_values(arthritis_plain):
    tables = build_pair_tables(arthritis_plain, pair_grouping(3), 0.0)
    alpha = fit_structure(tables, AssociationStructure(kind="category_exch"),
                          "ordinal")
    np.testing.assert_allclose(alpha.intrinsic, PUBLISHED_INTRINSIC, atol=5e-7)


def test_uniform_matches_published_value(arthritis_plain):
    tables = build_pair_tables(arthritis_plain, pair_grouping(3), 0.0)
    alpha = fit_structure(tables, AssociationStructure(kind="uniform"),
                          "ordinal")
    assert np.exp(alpha.intrinsic[0]) == pytest.approx(2.257, abs=5e-4)
    # the uniform structure pins every local odds ratio to one value
    assert np.ptp(alpha.theta) < 1e-8


def test_uniform_recovers_generating_parameter():
    # tables built exactly from the model: margins x uniform odds ratios
    rng = np.random.default_rng(8)
    phi_true = 0.7
    J, L = 4, 3
    grouping = pair_grouping(3)
    seed_theta = np.exp(np.full((J - 1, J - 1), phi_true))
    counts = np.empty((L, J, J))
    from lorgee import ipf_adjust
    for g in range(L):
        r = rng.uniform(0.5, 1.5, J)
        c = rng.uniform(0.5, 1.5, J)
        counts[g] = 5000.0 * ipf_adjust(
            matrix_lor(seed_theta), r / r.sum(), c / c.sum())
    tables = PairTables(grouping=grouping, n_categories=J, counts=counts,
                        add=0.0)
    alpha = fit_structure(tables, AssociationStructure(kind="uniform"),
                          "ordinal")
    assert alpha.intrinsic[0] == pytest.approx(phi_true, abs=1e-3)


def test_twoway_uniform_is_mean_of_category_exch(arthritis_plain):
    tables = build_pair_tables(arthritis_plain, pair_grouping(3), 0.0)
    ce = fit_structure(tables, AssociationStructure(kind="category_exch"),
                       "ordinal")
    u2 = fit_structure(tables, AssociationStructure(kind="uniform",
                                                    estimation="2way"),
                       "ordinal")
    assert u2.intrinsic[0] == pytest.approx(ce.intrinsic.mean(), abs=1e-10)


def test_2x2_linear_by_linear_equals_log_sample_or():
    # closed-form oracle: for a single 2x2 table the model is saturated
    counts = np.array([[[37.0, 14.0], [9.0, 28.0]]])
    tables = PairTables(grouping=pair_grouping(2), n_categories=2,
                        counts=counts, add=0.0)
    alpha = fit_structure(tables, AssociationStructure(kind="category_exch"),
                          "ordinal")
    expected = np.log(37.0 * 28.0 / (14.0 * 9.0))
    assert alpha.intrinsic[0] == pytest.approx(expected, abs=1e-8)


@pytest.mark.parametrize("kind,estimation,homogeneous", [
    ("uniform", "3way", True),
    ("uniform", "2way", True),
    ("category_exch", "3way", True),
    ("time_exch", "3way", True),
    ("time_exch", "3way", False),
    ("time_exch", "2way", True),
    ("time_exch", "2way", False),
    ("rc", "3way", True),
    ("rc", "3way", False),
    ("independence", "3way", True),
])
def test_structure_invariants(arthritis_plain, kind, estimation, homogeneous):
    tables = build_pair_tables(arthritis_plain, pair_grouping(3), 0.0)
    alpha = fit_structure(
        tables,
        AssociationStructure(kind=kind, estimation=estimation,
                             homogeneous=homogeneous),
        "ordinal")
    # stored theta equals the cross-ratios of the stored tables
    for g in range(alpha.n_pairs):
        np.testing.assert_allclose(local_or_of_table(alpha.tables[g]),
                                    alpha.theta[g], atol=1e-8, rtol=1e-8)
    # score-parametrized structures also satisfy the closed form
    cf = alpha.closed_form_theta()
    if cf is not None:
        np.testing.assert_allclose(cf, alpha.theta, atol=1e-8, rtol=1e-8)
    # fitted tables reproduce the margins of each pair table
    for g in range(alpha.n_pairs):
        total = tables.counts[g].sum()
        np.testing.assert_allclose(alpha.tables[g].sum(axis=1),
                                   tables.counts[g].sum(axis=1) / total,
                                   rtol=1e-6)
        np.testing.assert_allclose(alpha.tables[g].sum(axis=0),
                                   tables.counts[g].sum(axis=0) / total,
                                   rtol=1e-6)
    if kind in ("uniform", "time_exch"):
        for g in range(1, alpha.n_pairs):
            np.testing.assert_allclose(alpha.theta[g], alpha.theta[0],
                                       atol=1e-8)


def test_time_exch_heterogeneous_differs_from_homogeneous(arthritis_plain):
    tables = build_pair_tables(arthritis_plain, pair_grouping(3), 0.0)
    hom = fit_structure(tables, AssociationStructure(kind="time_exch"),
                        "ordinal")
    het = fit_structure(tables, AssociationStructure(kind="time_exch",
                                                     homogeneous=False),
                        "ordinal")
    assert not np.allclose(hom.row_scores[0], het.col_scores[0])
    np.testing.assert_allclose(het.row_scores[0], het.row_scores[1])


def test_fixed_structure_reads_tables_back():
    grouping = pair_grouping(2)
    theta = np.exp(np.array([[0.5, -0.2], [0.1, 0.4]]))
    flat = matrix_lor(theta).ravel()[None, :]
    st = AssociationStructure(kind="fixed", fixed_tables=flat)
    counts = np.full((1, 3, 3), 10.0)
    tables = PairTables(grouping=grouping, n_categories=3, counts=counts,
                        add=0.0)
    alpha = fit_structure(tables, st, "nominal")
    np.testing.assert_allclose(alpha.theta[0], theta, rtol=1e-10)
    assert alpha.closed_form_theta() is None


def test_fixed_structure_validation():
    grouping = pair_grouping(2)
    counts = np.full((1, 3, 3), 10.0)
    tables = PairTables(grouping=grouping, n_categories=3, counts=counts,
                        add=0.0)
    with pytest.raises(UsageError):
        st = AssociationStructure(kind="fixed",
                                  fixed_tables=np.ones((2, 9)))
        fit_structure(tables, st, "ordinal")
    with pytest.raises(UsageError):
        bad = np.ones((1, 9))
        bad[0, 3] = -1.0
        fit_structure(tables,
                      AssociationStructure(kind="fixed", fixed_tables=bad),
                      "ordinal")


def test_structure_scale_validation():
    with pytest.raises(UsageError):
        AssociationStructure(kind="uniform").validate_scale("nominal")
    with pytest.raises(UsageError):
        AssociationStructure(kind="category_exch").validate_scale("nominal")
    AssociationStructure(kind="time_exch").validate_scale("nominal")
    with pytest.raises(UsageError):
        AssociationStructure(kind="nope")
    with pytest.raises(UsageError):
        AssociationStructure(kind="uniform", estimation="4way")
    with pytest.raises(UsageError):
        AssociationStructure(kind="fixed")


def test_intrinsic_pars_matches_published(arthritis_plain):
    got = intrinsic_pars(arthritis_plain, scale="ordinal")
    np.testing.assert_allclose(got, PUBLISHED_INTRINSIC, atol=5e-7)
    assert np.ptp(got) == pytest.approx(0.26, abs=0.01)


def test_intrinsic_pars_near_zero_for_independent_occasions():
    rng = np.random.default_rng(42)
    spec = MarginalModelSpec(CUMULATIVE_LOGIT, 4, 1)
    beta = np.array([-1.0, 0.2, 1.3, 0.6])
    data = simulate_dataset(rng, spec, 3000, 3, beta)
    got = intrinsic_pars(data, scale="ordinal")
    assert got.shape == (3,)
    assert np.all(np.abs(got) < 0.1)


def test_intrinsic_pars_single_pair():
    rng = np.random.default_rng(43)
    spec = MarginalModelSpec(CUMULATIVE_LOGIT, 3, 1)
    data = simulate_dataset(rng, spec, 400, 2, np.array([-0.5, 0.8, 0.3]))
    got = intrinsic_pars(data, scale="ordinal")
    assert got.shape == (1,)


def test_intrinsic_pars_nominal_runs(arthritis_plain):
    got = intrinsic_pars(arthritis_plain, scale="nominal")
    assert got.shape == (3,)
    assert np.all(np.isfinite(got))


def test_intrinsic_pars_scale_validation(arthritis_plain):
    with pytest.raises(UsageError):
        intrinsic_pars(arthritis_plain, scale="weird")
