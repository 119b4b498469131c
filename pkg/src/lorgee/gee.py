"""Fisher-scoring solver for the marginal-model estimating equations.

The regression vector solves

    sum_i  D_i' V_i^{-1} (Y_i - pi_i) = 0

where, per subject, ``pi_i`` stacks the first J-1 category
probabilities of each observed occasion, ``D_i`` their derivatives, and
``V_i`` is a weight matrix shaped like a covariance: multinomial
covariance blocks on the diagonal, and off-diagonal blocks built from
bivariate pseudo-probabilities obtained by raking the fitted
association tables onto the subject's model margins.  The association
structure is estimated once, up front, and held fixed while the
regression parameters iterate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .association import (
    AssociationStructure,
    CATEGORY_EXCH,
    INDEPENDENCE,
    LocalOddsRatios,
    TIME_EXCH,
    build_pair_tables_auto,
    fit_structure,
)
from .data import LongDataset, PairGrouping, pair_grouping, subject_blocks
from .errors import (
    DegenerateProbabilityError,
    EstimationError,
    InvalidParameterError,
    IpfNonconvergenceError,
    NonconvergenceError,
    SingleOccasionError,
    SingularInformationError,
    UsageError,
)
from .ipf import IpfConfig, ipf_adjust, ipf_adjust_batch
from .links import (
    ADJACENT_LOGIT,
    CUMULATIVE_CAUCHIT,
    CUMULATIVE_LINKS,
    CUMULATIVE_LOGIT,
    CUMULATIVE_PROBIT,
    Coefficients,
    MarginalModelSpec,
    jacobian_stack,
    probability_matrix,
)

INVERSION_METHODS = ("solve", "qr", "cholesky")


@dataclass(frozen=True)
class FitControl:
    """Fisher-scoring control.

    ``tolerance`` bounds the elementwise maximum relative change between
    consecutive estimates (denominator floored at one so coefficients
    near zero do not stall convergence).  ``inversion`` picks the matrix
    inversion routine used throughout the scoring loop.
    """

    tolerance: float = 0.001
    max_iterations: int = 15
    inversion: str = "solve"
    verbose: bool = False

    def __post_init__(self):
        if self.tolerance <= 0:
            raise UsageError("tolerance must be positive")
        if self.max_iterations < 1:
            raise UsageError("max_iterations must be at least 1")
        if self.inversion not in INVERSION_METHODS:
            raise UsageError(
                f"inversion must be one of {INVERSION_METHODS}")


@dataclass(frozen=True)
class GeeFit:
    """Converged fit: estimates, covariances, fitted values, echoes."""

    spec: MarginalModelSpec
    structure: AssociationStructure
    control: FitControl
    ipf_config: IpfConfig
    params: np.ndarray
    param_names: list
    iterations: int
    converged: bool
    alpha: LocalOddsRatios
    fitted_probs: np.ndarray    # (n_rows, J)
    residuals: np.ndarray       # (n_rows, J-1)
    sandwich: np.ndarray        # (p, p) covariance of the estimates
    naive: np.ndarray           # (p, p) model-based covariance
    n_subjects: int
    n_times: int
    n_categories: int
    add: float = 0.0
    call: str = ""

    @property
    def coefficients(self) -> Coefficients:
        return Coefficients.from_flat(self.spec, self.params)

    @property
    def std_errors(self):
        return np.sqrt(np.diag(self.sandwich))


def _batch_inverse(mats, method):
    """Invert a stack of symmetric matrices with the selected routine."""
    try:
        if method == "cholesky":
            chol = np.linalg.cholesky(mats)
            eye = np.broadcast_to(np.eye(mats.shape[-1]), mats.shape)
            li = np.linalg.solve(chol, np.array(eye))
            return np.einsum("...ki,...kj->...ij", li, li)
        if method == "qr":
            qmat, rmat = np.linalg.qr(mats)
            return np.linalg.solve(rmat, np.swapaxes(qmat, -1, -2))
        return np.linalg.inv(mats)
    except np.linalg.LinAlgError as exc:
        raise SingularInformationError(
            f"matrix inversion ({method}) failed: {exc}") from None


class _Engine:
    """Precomputed layout shared by the scoring iterations."""

    def __init__(self, spec, data):
        if spec.n_categories != data.n_categories:
            raise UsageError(
                f"model has {spec.n_categories} categories, data has "
                f"{data.n_categories}")
        if spec.n_covariates != data.n_covariates:
            raise UsageError(
                f"model has {spec.n_covariates} covariates, data has "
                f"{data.n_covariates}")
        self.spec = spec
        self.data = data
        self.q = spec.n_cutpoints
        self.p = spec.n_params
        q = self.q
        n = data.n_rows
        self.yind = np.zeros((n, q))
        visible = data.category_idx <= q
        self.yind[np.flatnonzero(visible),
                  data.category_idx[visible] - 1] = 1.0
        groups = {}
        for blk in subject_blocks(data):
            groups.setdefault(tuple(blk.times), []).append(blk.row_indices)
        self.patterns = [(times, np.vstack(rows))
                         for times, rows in sorted(groups.items())]

    def pair_index(self, grouping: PairGrouping):
        return {pair: g for g, pair in enumerate(grouping.pairs)}


def _accumulate(engine, P, D, alpha, ipf_config, inversion, need_meat):
    """One pass over subjects: score vector, information, and (optionally)
    the outer-product middle term of the sandwich."""
    q, p = engine.q, engine.p
    pair_idx = engine.pair_index(alpha.grouping)
    S0 = np.zeros((p, p))
    S1 = np.zeros((p, p))
    U = np.zeros(p)
    for times, rows in engine.patterns:
        k = len(times)
        K = k * q
        m = rows.shape[0]
        V = np.zeros((m, K, K))
        Dm = np.empty((m, K, p))
        R = np.empty((m, K))
        for a in range(k):
            ra = rows[:, a]
            pa = P[ra]
            blk = -pa[:, :q, None] * pa[:, None, :q]
            blk[:, np.arange(q), np.arange(q)] += pa[:, :q]
            V[:, a * q:(a + 1) * q, a * q:(a + 1) * q] = blk
            Dm[:, a * q:(a + 1) * q, :] = D[ra]
            R[:, a * q:(a + 1) * q] = engine.yind[ra] - pa[:, :q]
        for a in range(k):
            for b in range(a + 1, k):
                pair = (times[a], times[b])
                try:
                    joints = ipf_adjust_batch(
                        alpha.tables[pair_idx[pair]],
                        P[rows[:, a]], P[rows[:, b]], ipf_config)
                except IpfNonconvergenceError as exc:
                    raise IpfNonconvergenceError(
                        f"raking failed for occasion pair {pair}: {exc}",
                        deviation=exc.deviation) from None
                off = joints[:, :q, :q] - \
                    P[rows[:, a], :q, None] * P[rows[:, b], None, :q]
                V[:, a * q:(a + 1) * q, b * q:(b + 1) * q] = off
                V[:, b * q:(b + 1) * q, a * q:(a + 1) * q] = \
                    np.swapaxes(off, 1, 2)
        Vinv = _batch_inverse(V, inversion)
        DtVi = np.einsum("mkp,mkl->mpl", Dm, Vinv)
        S0 += np.einsum("mpk,mkb->pb", DtVi, Dm)
        W = np.einsum("mpk,mk->mp", DtVi, R)
        U += W.sum(axis=0)
        if need_meat:
            S1 += W.T @ W
    return U, S0, S1


def _default_structure(spec):
    """Default association structure per response scale."""
    if spec.is_nominal:
        return AssociationStructure(kind=TIME_EXCH)
    return AssociationStructure(kind=CATEGORY_EXCH)


def _start_intercepts(spec, data):
    counts = np.bincount(data.category_idx,
                         minlength=data.n_categories + 1)[1:].astype(float)
    freq = counts / counts.sum()
    q = spec.n_cutpoints
    if spec.link in CUMULATIVE_LINKS:
        c = np.cumsum(freq)[:q]
        if spec.link == CUMULATIVE_LOGIT:
            return np.log(c / (1.0 - c))
        if spec.link == CUMULATIVE_PROBIT:
            return ndtri(c)
        if spec.link == CUMULATIVE_CAUCHIT:
            return np.tan(np.pi * (c - 0.5))
        return np.log(-np.log1p(-c))
    if spec.link == ADJACENT_LOGIT:
        return np.log(freq[:q] / freq[1:])
    return np.log(freq[:q] / freq[q])


def _pooled_loglik(P, cat_idx):
    return float(np.sum(np.log(P[np.arange(P.shape[0]), cat_idx - 1])))


def initial_beta(spec: MarginalModelSpec, data: LongDataset, start=None):
    """Starting values: the working-independence maximum likelihood fit.

    All observations are treated as independent and the marginal model
    is fitted by Fisher scoring.  A user-supplied ``start`` bypasses the
    fit after a validity check.
    """
    if start is not None:
        start = np.asarray(start, dtype=float)
        spec.validate_params(start)
        probability_matrix(spec, start, data.covariates)
        return start
    engine = _Engine(spec, data)
    q = engine.q
    params = np.zeros(spec.n_params)
    params[:q] = _start_intercepts(spec, data)
    X = data.covariates
    ll = None
    for _ in range(100):
        P = probability_matrix(spec, params, X)
        D = jacobian_stack(spec, params, X)
        blk = -P[:, :q, None] * P[:, None, :q]
        blk[:, np.arange(q), np.arange(q)] += P[:, :q]
        Vinv = _batch_inverse(blk, "solve")
        resid = engine.yind - P[:, :q]
        score = np.einsum("nqp,nqr,nr->p", D, Vinv, resid)
        info = np.einsum("nqp,nqr,nrs->ps", D, Vinv, D)
        try:
            step = np.linalg.solve(info, score)
        except np.linalg.LinAlgError:
            raise EstimationError(
                "singular information in the independence fit; supply "
                "start values") from None
        ll = _pooled_loglik(P, data.category_idx)
        scale = 1.0
        for _ in range(11):
            cand = params + scale * step
            try:
                spec.validate_params(cand)
                Pc = probability_matrix(spec, cand, X)
            except (InvalidParameterError, DegenerateProbabilityError):
                scale *= 0.5
                continue
            if _pooled_loglik(Pc, data.category_idx) >= ll - 1e-10:
                break
            scale *= 0.5
        else:
            raise EstimationError(
                "independence fit diverged; supply start values")
        params = cand
        if np.max(np.abs(scale * step)) < 1e-10:
            return params
    raise EstimationError(
        "independence fit did not converge; supply start values")


def assemble_weight(spec, params, alpha, block, ipf_config=None):
    """Weight matrix of one subject at the given parameter values.

    Diagonal blocks are the multinomial covariances of each observed
    occasion; each off-diagonal block comes from raking the pair's
    association table onto the subject's model margins.
    """
    cfg = ipf_config or IpfConfig()
    q = spec.n_cutpoints
    k = block.n_obs
    P = probability_matrix(spec, params, block.covariates)
    V = np.zeros((k * q, k * q))
    pair_idx = {pair: g for g, pair in enumerate(alpha.grouping.pairs)}
    for a in range(k):
        pa = P[a, :q]
        V[a * q:(a + 1) * q, a * q:(a + 1) * q] = np.diag(pa) - np.outer(pa, pa)
        for b in range(a + 1, k):
            pair = (int(block.times[a]), int(block.times[b]))
            joint = ipf_adjust(alpha.tables[pair_idx[pair]], P[a], P[b], cfg)
            off = joint[:q, :q] - np.outer(P[a, :q], P[b, :q])
            V[a * q:(a + 1) * q, b * q:(b + 1) * q] = off
            V[b * q:(b + 1) * q, a * q:(a + 1) * q] = off.T
    return V


def estimating_function(spec, data, alpha, params, ipf_config=None,
                        inversion="solve"):
    """Mean per-subject score U(params, alpha): the quantity the solver
    drives to zero.  Useful for checking a fit independently."""
    engine = _Engine(spec, data)
    cfg = ipf_config or IpfConfig()
    P = probability_matrix(spec, params, data.covariates)
    D = jacobian_stack(spec, params, data.covariates)
    U, _, _ = _accumulate(engine, P, D, alpha, cfg, inversion,
                          need_meat=False)
    return U / data.n_subjects


def _independence_alpha(n_times, n_categories):
    """Trivial association object for single-occasion data."""
    q = n_categories - 1
    return LocalOddsRatios(
        structure=AssociationStructure(kind=INDEPENDENCE),
        grouping=PairGrouping(n_times=n_times, pairs=()),
        n_categories=n_categories,
        tables=np.zeros((0, n_categories, n_categories)),
        theta=np.zeros((0, q, q)),
        intrinsic=np.zeros(0),
        row_scores=np.zeros((0, n_categories)),
        col_scores=np.zeros((0, n_categories)))


def solve_gee(spec: MarginalModelSpec, data: LongDataset,
              structure: AssociationStructure | None = None,
              control: FitControl | None = None,
              ipf_config: IpfConfig | None = None,
              start=None, add: float = 0.0, call: str = "") -> GeeFit:
    """Fit the marginal model by Fisher scoring with a fixed association
    structure.

    The association structure is estimated once from the marginalized
    pair tables (adding ``add`` to every cell) and never updated.
    Scoring starts from ``start`` or the working-independence fit and
    stops when the elementwise maximum relative change of the estimates
    drops to ``control.tolerance``.  Steps that violate the cutpoint
    ordering or degenerate the fitted probabilities are halved, up to
    ten times.

    Returns
    -------
    GeeFit

    Raises
    ------
    NonconvergenceError
        Iteration budget exhausted (the last iterate is attached).
    SingularInformationError
        The information matrix could not be inverted.
    """
    control = control or FitControl()
    ipf_config = ipf_config or IpfConfig()
    structure = structure or _default_structure(spec)
    scale = "nominal" if spec.is_nominal else "ordinal"
    structure.validate_scale(scale)

    if data.n_times < 2:
        if structure.kind != INDEPENDENCE:
            raise SingleOccasionError(
                "association structures need at least two occasions; "
                "use the independence structure")
        alpha = _independence_alpha(data.n_times, data.n_categories)
    else:
        grouping = pair_grouping(data.n_times)
        tables = build_pair_tables_auto(data, grouping, add)
        alpha = fit_structure(tables, structure, scale)

    engine = _Engine(spec, data)
    params = initial_beta(spec, data, start=start)
    X = data.covariates

    converged = False
    iterations = 0
    for it in range(1, control.max_iterations + 1):
        P = probability_matrix(spec, params, X)
        D = jacobian_stack(spec, params, X)
        U, S0, _ = _accumulate(engine, P, D, alpha, ipf_config,
                               control.inversion, need_meat=False)
        try:
            step = np.linalg.solve(S0, U)
        except np.linalg.LinAlgError:
            raise SingularInformationError(
                "singular information matrix in Fisher scoring") from None
        scale_f = 1.0
        for _ in range(11):
            cand = params + scale_f * step
            try:
                spec.validate_params(cand)
                probability_matrix(spec, cand, X)
                break
            except (InvalidParameterError, DegenerateProbabilityError):
                scale_f *= 0.5
        else:
            raise NonconvergenceError(
                "no admissible step found after ten halvings",
                last_params=params, iterations=it)
        rel_change = np.max(np.abs(cand - params) /
                            np.maximum(np.abs(params), 1.0))
        params = cand
        iterations = it
        if control.verbose:
            print(f"iteration {it}: max relative change {rel_change:.3e}")
        if rel_change <= control.tolerance:
            converged = True
            break
    if not converged:
        raise NonconvergenceError(
            f"no convergence in {control.max_iterations} iterations",
            last_params=params, iterations=iterations)

    P = probability_matrix(spec, params, X)
    D = jacobian_stack(spec, params, X)
    _, S0, S1 = _accumulate(engine, P, D, alpha, ipf_config,
                            control.inversion, need_meat=True)
    S0inv = _batch_inverse(S0[None], control.inversion)[0]
    sandwich = S0inv @ S1 @ S0inv
    sandwich = 0.5 * (sandwich + sandwich.T)
    naive = 0.5 * (S0inv + S0inv.T)

    inv_id, _, inv_cat = data.inverse_maps()
    cat_labels = [str(inv_cat[j]) for j in range(1, spec.n_categories)]
    names = spec.param_names(data.covariate_names or None, cat_labels)

    return GeeFit(
        spec=spec, structure=structure, control=control,
        ipf_config=ipf_config, params=params, param_names=names,
        iterations=iterations, converged=converged, alpha=alpha,
        fitted_probs=P, residuals=engine.yind - P[:, :engine.q],
        sandwich=sandwich, naive=naive,
        n_subjects=data.n_subjects, n_times=data.n_times,
        n_categories=data.n_categories, add=add, call=call)
