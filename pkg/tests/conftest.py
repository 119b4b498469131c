"""Shared fixtures and independent oracles used across test modules."""
import numpy as np
import pytest

from lorgee import MarginalModelSpec, load_dataset, probability_matrix
from lorgee.data import _read_table
from lorgee.datasets import arthritis_path
from lorgee.design import expand_covariates, parse_covariate_specs
from lorgee.links import CUMULATIVE_LOGIT


@pytest.fixture(scope="session")
def arthritis_columns():
    _, cols = _read_table(arthritis_path())
    return cols


@pytest.fixture(scope="session")
def arthritis_plain(arthritis_columns):
    """Arthritis without covariates (association-layer tests)."""
    return load_dataset(arthritis_columns, "y", "id", "time", [])


@pytest.fixture(scope="session")
def arthritis_model(arthritis_columns):
    """Arthritis with the worked-example design: factor(time), factor(trt),
    factor(baseline)."""
    specs = parse_covariate_specs("factor:time,factor:trt,factor:baseline")
    names, expanded = expand_covariates(arthritis_columns, specs)
    data = load_dataset({**arthritis_columns, **expanded},
                        "y", "id", "time", names)
    spec = MarginalModelSpec(CUMULATIVE_LOGIT, data.n_categories,
                             data.n_covariates)
    return data, spec


def closed_form_2x2(theta, r1, c1):
    """Unique 2x2 probability table with row margin (r1, 1-r1), column
    margin (c1, 1-c1) and odds ratio theta, via the quadratic equation.

    Independent oracle: p11 solves
        (theta - 1) p^2 - [1 + (r1 + c1)(theta - 1)] p + theta r1 c1 = 0
    on [max(0, r1 + c1 - 1), min(r1, c1)].
    """
    if abs(theta - 1.0) < 1e-12:
        p11 = r1 * c1
    else:
        a = theta - 1.0
        b = -(1.0 + (r1 + c1) * a)
        c = theta * r1 * c1
        disc = np.sqrt(b * b - 4.0 * a * c)
        lo, hi = max(0.0, r1 + c1 - 1.0), min(r1, c1)
        for cand in ((-b - disc) / (2 * a), (-b + disc) / (2 * a)):
            if lo - 1e-12 <= cand <= hi + 1e-12:
                p11 = cand
                break
        else:  # pragma: no cover
            raise AssertionError("no admissible root")
    table = np.array([[p11, r1 - p11], [c1 - p11, 1.0 - r1 - c1 + p11]])
    # self-check of the oracle
    assert np.all(table > -1e-12)
    got = table[0, 0] * table[1, 1] / (table[0, 1] * table[1, 0])
    assert abs(got - theta) < 1e-8 * max(1.0, theta)
    return table


def simulate_dataset(rng, spec, n_subjects, n_times, beta,
                     covariate_sampler=None):
    """Independent-occasions multinomial panel: each occasion is drawn
    from the marginal model, with no within-subject association."""
    px = spec.n_covariates
    rows = {"id": [], "time": [], "y": []}
    cov_cols = {f"x{k + 1}": [] for k in range(px)}
    for i in range(1, n_subjects + 1):
        if covariate_sampler is None:
            x = rng.normal(0.0, 1.0, px)
        else:
            x = covariate_sampler(rng)
        pi = probability_matrix(spec, beta, x[None, :])[0]
        for t in range(1, n_times + 1):
            y = 1 + rng.choice(spec.n_categories, p=pi)
            rows["id"].append(i)
            rows["time"].append(t)
            rows["y"].append(int(y))
            for k in range(px):
                cov_cols[f"x{k + 1}"].append(float(x[k]))
    table = {**rows, **cov_cols}
    return load_dataset(table, "y", "id", "time",
                        [f"x{k + 1}" for k in range(px)])
