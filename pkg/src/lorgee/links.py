"""Marginal models for multinomial responses: probabilities and Jacobians.

Supported links
---------------
Ordinal response scale (common slope vector across categories):

* ``cumulative-logit``, ``cumulative-probit``, ``cumulative-cauchit``,
  ``cumulative-cloglog`` -- the cumulative probability of category <= j
  equals ``F(intercept_j + slopes . x)`` for the named CDF,
* ``adjacent-categories-logit`` -- ``log(p_j / p_{j+1})`` is linear in x.

Nominal response scale (category-specific slope vectors):

* ``baseline-category-logit`` -- ``log(p_j / p_J)`` is linear in x.

All evaluation is done on flat parameter vectors laid out as
``[intercepts, slopes]`` (ordinal) or ``[intercepts, slopes for
category 1, ..., slopes for category J-1]`` (nominal).
:class:`Coefficients` converts between the flat and structured views.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, ndtr

from .errors import DegenerateProbabilityError, InvalidParameterError

CUMULATIVE_LOGIT = "cumulative-logit"
CUMULATIVE_PROBIT = "cumulative-probit"
CUMULATIVE_CAUCHIT = "cumulative-cauchit"
CUMULATIVE_CLOGLOG = "cumulative-cloglog"
ADJACENT_LOGIT = "adjacent-categories-logit"
BASELINE_LOGIT = "baseline-category-logit"

CUMULATIVE_LINKS = (CUMULATIVE_LOGIT, CUMULATIVE_PROBIT,
                    CUMULATIVE_CAUCHIT, CUMULATIVE_CLOGLOG)
ORDINAL_LINKS = CUMULATIVE_LINKS + (ADJACENT_LOGIT,)
ALL_LINKS = ORDINAL_LINKS + (BASELINE_LOGIT,)

# probability floor: fitted category probabilities are clamped here and
# renormalized; clamping that moves any entry by more than _FLOOR_BUDGET
# is treated as a degenerate model evaluation.
_PROB_FLOOR = 1e-10
_FLOOR_BUDGET = 1e-4

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def _cauchy_cdf(x):
    return 0.5 + np.arctan(x) / np.pi


def _cauchy_pdf(x):
    return 1.0 / (np.pi * (1.0 + x * x))


def _cloglog_cdf(x):
    return -np.expm1(-np.exp(np.minimum(x, 700.0)))


def _cloglog_pdf(x):
    xs = np.minimum(x, 700.0)
    return np.exp(xs - np.exp(xs))


def _normal_pdf(x):
    return _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def _logistic_pdf(x):
    p = expit(x)
    return p * (1.0 - p)


_CDF = {
    CUMULATIVE_LOGIT: (expit, _logistic_pdf),
    CUMULATIVE_PROBIT: (ndtr, _normal_pdf),
    CUMULATIVE_CAUCHIT: (_cauchy_cdf, _cauchy_pdf),
    CUMULATIVE_CLOGLOG: (_cloglog_cdf, _cloglog_pdf),
}


@dataclass(frozen=True)
class MarginalModelSpec:
    """Link choice plus the design dimensions of a marginal model.

    Parameters
    ----------
    link : str
        One of :data:`ALL_LINKS`.
    n_categories : int
        J, the number of response categories.
    n_covariates : int
        Covariates per occasion (after design expansion).
    """

    link: str
    n_categories: int
    n_covariates: int

    def __post_init__(self):
        if self.link not in ALL_LINKS:
            raise InvalidParameterError(f"unknown link {self.link!r}")
        if self.n_categories < 2:
            raise InvalidParameterError("need at least 2 response categories")

    @property
    def is_nominal(self):
        return self.link == BASELINE_LOGIT

    @property
    def n_cutpoints(self):
        return self.n_categories - 1

    @property
    def n_params(self):
        q = self.n_categories - 1
        if self.is_nominal:
            return q * (1 + self.n_covariates)
        return q + self.n_covariates

    def split(self, params):
        """Flat vector -> (intercepts, slopes); slopes is a matrix with
        one row per category for the baseline-category link."""
        params = np.asarray(params, dtype=float)
        if params.shape != (self.n_params,):
            raise InvalidParameterError(
                f"expected {self.n_params} parameters, got {params.shape}")
        q = self.n_cutpoints
        intercepts = params[:q]
        if self.is_nominal:
            slopes = params[q:].reshape(q, self.n_covariates)
        else:
            slopes = params[q:]
        return intercepts, slopes

    def validate_params(self, params):
        """Check the flat vector's shape and, for cumulative links, the
        cutpoint-ordering constraint."""
        intercepts, _ = self.split(params)
        if self.link in CUMULATIVE_LINKS and np.any(np.diff(intercepts) < 0):
            raise InvalidParameterError(
                "cumulative-link intercepts must be nondecreasing, got "
                f"{intercepts}")

    def param_names(self, covariate_names=None, category_labels=None):
        """Coefficient labels in flat-vector order."""
        q = self.n_cutpoints
        names = [f"beta{j:02d}" for j in range(1, q + 1)]
        covs = list(covariate_names) if covariate_names is not None else \
            [f"x{k + 1}" for k in range(self.n_covariates)]
        if self.is_nominal:
            cats = list(category_labels) if category_labels is not None else \
                [str(j) for j in range(1, q + 1)]
            for j in range(q):
                names.extend(f"{c}:{cats[j]}" for c in covs)
        else:
            names.extend(covs)
        return names


@dataclass(frozen=True)
class Coefficients:
    """Structured view of a marginal-model parameter vector."""

    intercepts: np.ndarray
    slopes: np.ndarray

    @classmethod
    def from_flat(cls, spec: MarginalModelSpec, params):
        intercepts, slopes = spec.split(params)
        return cls(intercepts=intercepts.copy(), slopes=np.array(slopes))

    def to_flat(self):
        return np.concatenate([np.ravel(self.intercepts),
                               np.ravel(self.slopes)])


def _eta_matrix(spec, params, X):
    """Linear predictors, shape (n, J-1)."""
    intercepts, slopes = spec.split(params)
    if spec.is_nominal:
        return intercepts[None, :] + X @ slopes.T
    return intercepts[None, :] + (X @ slopes)[:, None]


def _softmax_with_baseline(scores):
    """Softmax over [scores, 0] per row; returns all J probabilities."""
    z = np.concatenate([scores, np.zeros((scores.shape[0], 1))], axis=1)
    z -= z.max(axis=1, keepdims=True)
    ez = np.exp(z)
    return ez / ez.sum(axis=1, keepdims=True)


def _apply_floor(pi):
    low = pi < _PROB_FLOOR
    if not np.any(low):
        return pi
    floored = np.maximum(pi, _PROB_FLOOR)
    floored /= floored.sum(axis=1, keepdims=True)
    if np.max(np.abs(floored - pi)) > _FLOOR_BUDGET:
        raise DegenerateProbabilityError(
            "fitted probabilities degenerate beyond the clamping budget")
    return floored


def probability_matrix(spec: MarginalModelSpec, params, X):
    """Category probabilities for a batch of covariate rows.

    Parameters
    ----------
    params : ndarray, flat parameter vector
    X : ndarray, shape (n, n_covariates)

    Returns
    -------
    ndarray, shape (n, J); rows sum to one, all entries positive.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    spec.validate_params(params)
    eta = _eta_matrix(spec, params, X)
    if spec.link in CUMULATIVE_LINKS:
        cdf, _ = _CDF[spec.link]
        gamma = cdf(eta)
        n, q = gamma.shape
        pi = np.empty((n, q + 1))
        pi[:, 0] = gamma[:, 0]
        pi[:, 1:q] = np.diff(gamma, axis=1)
        pi[:, q] = 1.0 - gamma[:, q - 1]
    elif spec.link == ADJACENT_LOGIT:
        # log(p_j / p_{j+1}) = eta_j  =>  log p_j - log p_J = sum_{k>=j} eta_k
        scores = np.cumsum(eta[:, ::-1], axis=1)[:, ::-1]
        pi = _softmax_with_baseline(scores)
    else:
        pi = _softmax_with_baseline(eta)
    return _apply_floor(pi)


def jacobian_stack(spec: MarginalModelSpec, params, X):
    """Derivatives of the first J-1 category probabilities.

    Returns
    -------
    ndarray, shape (n, J-1, n_params)
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    spec.validate_params(params)
    eta = _eta_matrix(spec, params, X)
    n = X.shape[0]
    q = spec.n_cutpoints
    p = spec.n_params
    out = np.zeros((n, q, p))

    if spec.link in CUMULATIVE_LINKS:
        _, pdf = _CDF[spec.link]
        dens = pdf(eta)                                   # (n, q)
        for j in range(q):
            out[:, j, j] += dens[:, j]
            if j > 0:
                out[:, j, j - 1] -= dens[:, j - 1]
        diff = np.empty_like(dens)
        diff[:, 0] = dens[:, 0]
        diff[:, 1:] = dens[:, 1:] - dens[:, :-1]
        out[:, :, q:] = diff[:, :, None] * X[:, None, :]
        return out

    if spec.link == ADJACENT_LOGIT:
        scores = np.cumsum(eta[:, ::-1], axis=1)[:, ::-1]
        pi = _softmax_with_baseline(scores)
        cum = np.cumsum(pi, axis=1)[:, :q]                # P(Y <= k)
        tri = (np.arange(q)[:, None] <= np.arange(q)[None, :])
        deta = pi[:, :q, None] * (tri[None, :, :] - cum[:, None, :])
        out[:, :, :q] = deta
        out[:, :, q:] = deta.sum(axis=2)[:, :, None] * X[:, None, :]
        return out

    pi = _softmax_with_baseline(eta)
    dmix = pi[:, :q, None] * (np.eye(q)[None, :, :] - pi[:, None, :q])
    out[:, :, :q] = dmix
    slope_part = dmix[:, :, :, None] * X[:, None, None, :]
    out[:, :, q:] = slope_part.reshape(n, q, q * spec.n_covariates)
    return out


def category_probs(spec: MarginalModelSpec, params, x):
    """All J category probabilities at one covariate vector."""
    return probability_matrix(spec, params, np.asarray(x, dtype=float)[None, :])[0]


def jacobian_block(spec: MarginalModelSpec, params, x):
    """(J-1) x n_params derivative block at one covariate vector."""
    return jacobian_stack(spec, params, np.asarray(x, dtype=float)[None, :])[0]


def linear_predictor(spec: MarginalModelSpec, params, x, j):
    """Linear predictor for cutpoint/category j (1-based, j <= J-1)."""
    if not 1 <= j <= spec.n_cutpoints:
        raise ValueError(f"category index {j} outside 1..{spec.n_cutpoints}")
    intercepts, slopes = spec.split(params)
    x = np.asarray(x, dtype=float)
    if spec.is_nominal:
        return float(intercepts[j - 1] + slopes[j - 1] @ x)
    return float(intercepts[j - 1] + slopes @ x)
