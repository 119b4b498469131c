"""Association layer: marginalized pair tables and local-odds-ratio structures.

For every pair of occasions the responses are cross-classified over
subjects (covariates ignored) into a J x J table.  A log-linear model
with a multiplicative row-column term is fitted to those tables under
Poisson sampling, treating pairs as independent:

    log m[g, j, j'] = mains[g, j, j'] + phi_g * u_g[j] * v_g[j']

where ``mains`` holds per-table intercept, row and column effects.  The
structure choice pins which parameters are shared:

====================  ======================================================
kind                  constraint
====================  ======================================================
``independence``      all local odds ratios equal one
``uniform``           unit-spaced scores, one intrinsic parameter phi
``category_exch``     unit-spaced scores, phi per pair
``time_exch``         estimated scores and phi shared across pairs
``rc``                estimated scores and phi per pair
``fixed``             user-supplied probability tables
====================  ======================================================

``uniform`` and ``category_exch`` presume an ordinal response scale.
The fitted tables determine the local odds ratios used downstream as
raking seeds; the intrinsic parameters are also exposed directly
(:func:`intrinsic_pars`) to guide structure selection.

Identifiability of estimated scores
-----------------------------------
The multiplicative term is invariant under relocation/rescaling of the
scores.  Reported scores are normalized to weighted mean zero and
weighted variance one, weighting categories by the average fitted
margin of the tables sharing them, with the scale absorbed into phi and
the sign fixed so that scores ascend (phi carries the association
sign).  The normalization changes the printed phi, never the fitted
tables or odds ratios.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import LongDataset, PairGrouping, pair_grouping
from .errors import AssociationFitError, SparseTableError, UsageError
from .ipf import IpfConfig, ipf_adjust

INDEPENDENCE = "independence"
UNIFORM = "uniform"
CATEGORY_EXCH = "category_exch"
TIME_EXCH = "time_exch"
RC = "rc"
FIXED = "fixed"

STRUCTURE_KINDS = (INDEPENDENCE, UNIFORM, CATEGORY_EXCH, TIME_EXCH, RC, FIXED)
_ORDINAL_ONLY = (UNIFORM, CATEGORY_EXCH)

# automatic fallback constant for sparse pair tables
_AUTO_ADD = 1e-4


@dataclass(frozen=True)
class AssociationStructure:
    """Choice of local-odds-ratios structure.

    Parameters
    ----------
    kind : str
        One of :data:`STRUCTURE_KINDS`.
    homogeneous : bool
        Row scores equal column scores (``time_exch``/``rc`` only;
        ignored elsewhere).
    estimation : str
        ``"3way"`` fits one constrained model across all pair tables;
        ``"2way"`` fits each table separately and averages
        (``uniform``/``time_exch`` only; ignored elsewhere).
    fixed_tables : ndarray (L, J*J), optional
        Row-major vectorized probability tables, required for
        ``kind="fixed"``.
    """

    kind: str
    homogeneous: bool = True
    estimation: str = "3way"
    fixed_tables: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in STRUCTURE_KINDS:
            raise UsageError(f"unknown structure kind {self.kind!r}")
        if self.estimation not in ("3way", "2way"):
            raise UsageError(f"unknown estimation method {self.estimation!r}")
        if self.kind == FIXED and self.fixed_tables is None:
            raise UsageError("kind='fixed' needs fixed_tables")

    def validate_scale(self, scale):
        if scale not in ("ordinal", "nominal"):
            raise UsageError(f"unknown response scale {scale!r}")
        if self.kind in _ORDINAL_ONLY and scale == "nominal":
            raise UsageError(
                f"structure {self.kind!r} uses unit-spaced category scores, "
                "which are not meaningful for a nominal response scale")


@dataclass(frozen=True)
class PairTables:
    """Marginalized J x J contingency tables, one per time-pair."""

    grouping: PairGrouping
    n_categories: int
    counts: np.ndarray          # (L, J, J), includes the add constant
    add: float

    @property
    def n_pairs(self):
        return self.grouping.n_pairs


@dataclass(frozen=True)
class LocalOddsRatios:
    """Fitted association structure.

    ``tables`` holds the fitted probability table of each pair (used as
    raking seeds), ``theta`` the implied (J-1) x (J-1) local-odds-ratio
    matrices.  ``intrinsic``/``row_scores``/``col_scores`` carry the
    model parameters when the structure is score-parametrized (None for
    ``fixed`` and for 2-way averaged ``time_exch``, whose odds ratios
    are not generated by a single score vector).
    """

    structure: AssociationStructure
    grouping: PairGrouping
    n_categories: int
    tables: np.ndarray          # (L, J, J) probability tables
    theta: np.ndarray           # (L, J-1, J-1)
    intrinsic: np.ndarray | None = None    # (L,)
    row_scores: np.ndarray | None = None   # (L, J)
    col_scores: np.ndarray | None = None   # (L, J)

    @property
    def n_pairs(self):
        return self.grouping.n_pairs

    def closed_form_theta(self):
        """Odds ratios implied by (phi, scores), or None when the
        structure is not score-parametrized."""
        if self.intrinsic is None or self.row_scores is None:
            return None
        out = np.empty_like(self.theta)
        for g in range(self.theta.shape[0]):
            out[g] = theta_from_scores(self.intrinsic[g], self.row_scores[g],
                                       self.col_scores[g])
        return out


def theta_from_scores(phi, row_scores, col_scores):
    """Local odds ratios of the multiplicative association term:
    ``log theta[j, j'] = phi * (u[j] - u[j+1]) * (v[j'] - v[j'+1])``."""
    du = -np.diff(np.asarray(row_scores, dtype=float))
    dv = -np.diff(np.asarray(col_scores, dtype=float))
    return np.exp(phi * np.outer(du, dv))


def local_or_of_table(table):
    """(J-1) x (J-1) local odds ratios of a strictly positive table."""
    f = np.asarray(table, dtype=float)
    if np.any(f <= 0):
        raise ValueError("table must be strictly positive")
    return (f[:-1, :-1] * f[1:, 1:]) / (f[:-1, 1:] * f[1:, :-1])


def matrix_lor(target):
    """Probability table realizing the given local odds ratios.

    The cell (j, j') is proportional to the product of all target
    entries above and to the left of the cutpoint, which makes the
    cross-ratios reproduce the target exactly; the table is normalized
    to sum to one.  Margins are whatever the construction yields; pass
    the result through IPF to impose margins without losing the odds
    ratios.
    """
    theta = np.asarray(target, dtype=float)
    if theta.ndim != 2 or theta.shape[0] != theta.shape[1]:
        raise ValueError("target must be a square matrix")
    if np.any(~np.isfinite(theta)) or np.any(theta <= 0):
        raise ValueError("target odds ratios must be positive and finite")
    J = theta.shape[0] + 1
    logf = np.zeros((J, J))
    logf[1:, 1:] = np.cumsum(np.cumsum(np.log(theta), axis=0), axis=1)
    f = np.exp(logf - logf.max())
    return f / f.sum()


def build_pair_tables(data: LongDataset, grouping: PairGrouping,
                      add: float = 0.0) -> PairTables:
    """Cross-classify responses over subjects for every time-pair.

    Subjects missing either occasion of a pair are left out of that
    pair's table only.  ``add`` is added to every cell.  Empty margins
    are tolerated here; fitting raises :class:`SparseTableError` on
    them (see :func:`check_pair_margins`).
    """
    if add < 0:
        raise UsageError("add must be nonnegative")
    J = data.n_categories
    # (N+1, T+1) lookup of categories, 0 = not observed
    cat = np.zeros((data.n_subjects + 1, data.n_times + 1), dtype=np.intp)
    cat[data.subject_idx, data.time_idx] = data.category_idx
    counts = np.empty((grouping.n_pairs, J, J))
    for g, (t, tp) in enumerate(grouping.pairs):
        both = (cat[:, t] > 0) & (cat[:, tp] > 0)
        tab = np.zeros((J, J))
        np.add.at(tab, (cat[both, t] - 1, cat[both, tp] - 1), 1.0)
        counts[g] = tab + add
    return PairTables(grouping=grouping, n_categories=J, counts=counts,
                      add=add)


def check_pair_margins(tables: PairTables):
    """Raise :class:`SparseTableError` if any pair table has an all-zero
    row or column margin; association fits cannot proceed past one."""
    for g, pair in enumerate(tables.grouping.pairs):
        tab = tables.counts[g]
        if np.any(tab.sum(axis=1) <= 0) or np.any(tab.sum(axis=0) <= 0):
            raise SparseTableError(
                f"pair {pair} has an empty row or column margin; "
                "increase the add constant", pair=pair)


def build_pair_tables_auto(data, grouping, add=0.0):
    """:func:`build_pair_tables` plus margin checks, with the default
    sparse-table fallback: when ``add`` is zero and a margin is empty,
    retry once with 1e-4."""
    tables = build_pair_tables(data, grouping, add)
    try:
        check_pair_margins(tables)
    except SparseTableError:
        if add != 0.0:
            raise
        warnings.warn(
            f"sparse pair table; retrying with add={_AUTO_ADD:g}",
            stacklevel=2)
        tables = build_pair_tables(data, grouping, _AUTO_ADD)
        check_pair_margins(tables)
    return tables


# ---------------------------------------------------------------------------
# Poisson log-linear machinery
# ---------------------------------------------------------------------------

def _poisson_irls(X, y, max_iter=200, tol=1e-12):
    """IRLS for a Poisson GLM with log link.

    Returns (coef, mu, loglik, converged).  ``loglik`` omits the
    constant log(y!) term.
    """
    y = np.asarray(y, dtype=float)
    eta = np.log(np.maximum(y, 0.5))
    w = np.exp(eta)
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(X * sw[:, None], eta * sw, rcond=None)
    dev_old = np.inf
    converged = False
    for _ in range(max_iter):
        eta = np.clip(X @ coef, -300.0, 300.0)
        mu = np.exp(eta)
        z = eta + (y - mu) / mu
        XtW = X.T * mu
        try:
            coef = np.linalg.solve(XtW @ X, XtW @ z)
        except np.linalg.LinAlgError:
            raise AssociationFitError(
                "singular design in the log-linear fit") from None
        eta = np.clip(X @ coef, -300.0, 300.0)
        mu = np.exp(eta)
        with np.errstate(divide="ignore", invalid="ignore"):
            dev = 2.0 * np.sum(np.where(y > 0, y * np.log(y / mu), 0.0)
                               - (y - mu))
        if abs(dev - dev_old) <= tol * (abs(dev) + 1.0):
            converged = True
            break
        dev_old = dev
    loglik = float(np.sum(y * np.log(mu) - mu))
    return coef, mu, loglik, converged


def _mains_design(J, G):
    """Block-diagonal main effects: per-table intercept plus row and
    column dummies with the first level as reference."""
    m = 1 + 2 * (J - 1)
    block = np.zeros((J * J, m))
    block[:, 0] = 1.0
    rows, cols = np.divmod(np.arange(J * J), J)
    for level in range(1, J):
        block[rows == level, level] = 1.0
        block[cols == level, J - 1 + level] = 1.0
    out = np.zeros((G * J * J, G * m))
    for g in range(G):
        out[g * J * J:(g + 1) * J * J, g * m:(g + 1) * m] = block
    return out


def _centered_unit_scores(J):
    return np.arange(1, J + 1, dtype=float) - (J + 1) / 2.0


def _fit_unit_scores(counts, share_phi, pair_labels):
    """Fit the multiplicative model with unit-spaced scores.

    counts : (G, J, J); share_phi pools one intrinsic parameter across
    the G tables, otherwise each table gets its own.  Returns
    (phis (G,), fitted (G, J, J)).
    """
    G, J, _ = counts.shape
    s = _centered_unit_scores(J)
    inter = np.outer(s, s).ravel()
    X_main = _mains_design(J, G)
    if share_phi:
        X = np.column_stack([X_main, np.tile(inter, G)])
        n_phi = 1
    else:
        cols = np.zeros((G * J * J, G))
        for g in range(G):
            cols[g * J * J:(g + 1) * J * J, g] = inter
        X = np.column_stack([X_main, cols])
        n_phi = G
    coef, mu, _, converged = _poisson_irls(X, counts.ravel())
    if not converged:
        raise AssociationFitError(
            "log-linear fit did not converge",
            pair=None if share_phi else pair_labels[0])
    phis = coef[-n_phi:]
    if share_phi:
        phis = np.repeat(phis, G)
    return phis, mu.reshape(G, J, J)


def _normalize_scores(scores, weights):
    """Weighted mean 0 / variance 1; returns (scores, scale applied)."""
    w = weights / weights.sum()
    centered = scores - np.sum(w * scores)
    s = np.sqrt(np.sum(w * centered * centered))
    if s <= 0:
        raise AssociationFitError("degenerate score estimates")
    return centered / s, s


def _fit_rc(counts, homogeneous, pair_labels, max_outer=500, tol=1e-8):
    """Alternating fit of the multiplicative model with estimated scores
    shared across the G tables.

    Alternates a GLM step for (main effects, phi) with score updates:
    a GLM step per score vector when row and column scores are free,
    coordinate-wise Fisher scoring when they are tied.  Returns
    (phi, row_scores, col_scores, fitted (G, J, J)).
    """
    G, J, _ = counts.shape
    y = counts.ravel()
    X_main = _mains_design(J, G)
    rows = np.tile(np.divmod(np.arange(J * J), J)[0], G)
    cols = np.tile(np.divmod(np.arange(J * J), J)[1], G)

    u = _centered_unit_scores(J)
    u /= np.sqrt(np.mean(u * u))
    v = u.copy()

    def glm_step(u, v):
        z = (u[rows] * v[cols])
        coef, mu, ll, ok = _poisson_irls(np.column_stack([X_main, z]), y)
        if not ok:
            raise AssociationFitError("log-linear fit did not converge",
                                      pair=pair_labels[0])
        return coef[-1], mu, ll

    def score_glm(phi, fixed, current, which):
        """GLM update of one score vector, the other held fixed; the
        first score is pinned to its current value to break the shift
        aliasing with the main effects."""
        own = rows if which == "row" else cols
        other = fixed[cols] if which == "row" else fixed[rows]
        design_cols = np.zeros((y.size, J - 1))
        for k in range(1, J):
            design_cols[:, k - 1] = phi * other * (own == k)
        offset = phi * other * (own == 0) * current[0]
        Xs = np.column_stack([X_main, design_cols])
        coef, _, _, ok = _poisson_irls_offset(Xs, y, offset)
        if not ok:
            raise AssociationFitError("score update did not converge",
                                      pair=pair_labels[0])
        new = current.copy()
        new[1:] = coef[-(J - 1):]
        return new

    def coord_newton(phi, u, mu):
        """One sweep of coordinate-wise Fisher scoring on tied scores,
        starting from the fitted values of the last GLM step."""
        u = u.copy()
        eta = np.log(np.maximum(mu, 1e-300))
        for k in range(J):
            in_row = rows == k
            in_col = cols == k
            both = in_row & in_col
            d = np.zeros(y.size)
            d[in_row & ~both] = phi * u[cols[in_row & ~both]]
            d[in_col & ~both] = phi * u[rows[in_col & ~both]]
            d[both] = 2.0 * phi * u[k]
            m = np.exp(eta)
            score = np.sum((y - m) * d)
            info = np.sum(m * d * d)
            if info <= 1e-12:
                continue
            delta = score / info
            # exact eta update for the changed coordinate
            eta[in_row & ~both] += phi * delta * u[cols[in_row & ~both]]
            eta[in_col & ~both] += phi * delta * u[rows[in_col & ~both]]
            eta[both] += phi * (2.0 * u[k] * delta + delta * delta)
            u[k] += delta
        return u

    phi, mu, ll = glm_step(u, v)
    for _ in range(max_outer):
        ll_prev = ll
        if abs(phi) > 1e-10:
            if homogeneous:
                u = coord_newton(phi, u, mu)
                v = u
            else:
                u = score_glm(phi, v, u, "row")
                v = score_glm(phi, u, v, "col")
        w_row, w_col = _margin_weights(mu.reshape(G, J, J))
        if homogeneous:
            u, _ = _normalize_scores(u, 0.5 * (w_row + w_col))
            if u[0] > u[-1]:
                u = -u
            v = u
        else:
            u, _ = _normalize_scores(u, w_row)
            v, _ = _normalize_scores(v, w_col)
            if u[0] > u[-1]:
                u, v = -u, -v
            if v[0] > v[-1]:
                v = -v
                # sign moves into phi at the next GLM step
        phi, mu, ll = glm_step(u, v)
        if abs(ll - ll_prev) <= tol * (abs(ll) + 1.0):
            return phi, u, v, mu.reshape(G, J, J)
    raise AssociationFitError(
        "alternating score fit did not converge", pair=pair_labels[0])


def _poisson_irls_offset(X, y, offset, max_iter=200, tol=1e-12):
    """IRLS with a fixed offset in the linear predictor."""
    y = np.asarray(y, dtype=float)
    eta = np.log(np.maximum(y, 0.5))
    w = np.exp(eta)
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(X * sw[:, None], (eta - offset) * sw,
                               rcond=None)
    dev_old = np.inf
    converged = False
    for _ in range(max_iter):
        eta = np.clip(X @ coef + offset, -300.0, 300.0)
        mu = np.exp(eta)
        z = eta - offset + (y - mu) / mu
        XtW = X.T * mu
        try:
            coef = np.linalg.solve(XtW @ X, XtW @ z)
        except np.linalg.LinAlgError:
            raise AssociationFitError(
                "singular design in the score update") from None
        eta = np.clip(X @ coef + offset, -300.0, 300.0)
        mu = np.exp(eta)
        with np.errstate(divide="ignore", invalid="ignore"):
            dev = 2.0 * np.sum(np.where(y > 0, y * np.log(y / mu), 0.0)
                               - (y - mu))
        if abs(dev - dev_old) <= tol * (abs(dev) + 1.0):
            converged = True
            break
        dev_old = dev
    loglik = float(np.sum(y * np.log(mu) - mu))
    return coef, mu, loglik, converged


def _margin_weights(fitted):
    """Average fitted row and column margins across tables."""
    totals = fitted.sum(axis=(1, 2), keepdims=True)
    prob = fitted / totals
    return prob.sum(axis=2).mean(axis=0), prob.sum(axis=1).mean(axis=0)


def _normalize_tables(fitted):
    return fitted / fitted.sum(axis=(1, 2), keepdims=True)


def _tables_matching_margins(theta, counts, ipf_cfg=None):
    """Probability tables with the given odds ratios and the observed
    margins of each counts table."""
    cfg = ipf_cfg or IpfConfig(tolerance=1e-10, max_iterations=2000)
    seed = matrix_lor(theta)
    out = np.empty_like(counts)
    for g in range(counts.shape[0]):
        total = counts[g].sum()
        out[g] = ipf_adjust(seed, counts[g].sum(axis=1) / total,
                            counts[g].sum(axis=0) / total, cfg)
    return out


# ---------------------------------------------------------------------------
# Structure fitting
# ---------------------------------------------------------------------------

def fit_structure(tables: PairTables, structure: AssociationStructure,
                  scale: str) -> LocalOddsRatios:
    """Estimate the local-odds-ratios structure from pair tables.

    Parameters
    ----------
    tables : PairTables
    structure : AssociationStructure
    scale : {"ordinal", "nominal"}

    Returns
    -------
    LocalOddsRatios

    Raises
    ------
    UsageError
        Structure/scale mismatch or malformed fixed tables.
    AssociationFitError
        A log-linear fit failed to converge.
    """
    structure.validate_scale(scale)
    if structure.kind != FIXED:
        check_pair_margins(tables)
    J = tables.n_categories
    L = tables.n_pairs
    counts = tables.counts
    q = J - 1
    unit = np.tile(np.arange(1.0, J + 1.0), (L, 1))

    if structure.kind == INDEPENDENCE:
        fitted = np.empty_like(counts)
        for g in range(L):
            total = counts[g].sum()
            fitted[g] = np.outer(counts[g].sum(axis=1),
                                 counts[g].sum(axis=0)) / (total * total)
        return LocalOddsRatios(
            structure=structure, grouping=tables.grouping, n_categories=J,
            tables=fitted, theta=np.ones((L, q, q)),
            intrinsic=np.zeros(L), row_scores=unit, col_scores=unit)

    if structure.kind == FIXED:
        ft = np.asarray(structure.fixed_tables, dtype=float)
        if ft.shape != (L, J * J):
            raise UsageError(
                f"fixed_tables must have shape ({L}, {J * J}), got {ft.shape}")
        if np.any(ft <= 0):
            raise UsageError("fixed_tables entries must be strictly positive")
        prob = ft.reshape(L, J, J)
        prob = prob / prob.sum(axis=(1, 2), keepdims=True)
        theta = np.stack([local_or_of_table(prob[g]) for g in range(L)])
        return LocalOddsRatios(
            structure=structure, grouping=tables.grouping, n_categories=J,
            tables=prob, theta=theta)

    if structure.kind == UNIFORM:
        if structure.estimation == "3way":
            phis, fitted = _fit_unit_scores(counts, share_phi=True,
                                            pair_labels=tables.grouping.pairs)
            prob = _normalize_tables(fitted)
        else:
            per_pair = _per_pair_unit_fit(tables)
            phis = np.full(L, per_pair.mean())
            prob = _tables_matching_margins(
                np.exp(np.full((q, q), phis[0])), counts)
        theta = np.stack([theta_from_scores(phis[g], unit[g], unit[g])
                          for g in range(L)])
        return LocalOddsRatios(
            structure=structure, grouping=tables.grouping, n_categories=J,
            tables=prob, theta=theta, intrinsic=phis,
            row_scores=unit, col_scores=unit)

    if structure.kind == CATEGORY_EXCH:
        phis = np.empty(L)
        prob = np.empty_like(counts)
        for g in range(L):
            try:
                ph, fitted = _fit_unit_scores(
                    counts[g:g + 1], share_phi=False,
                    pair_labels=tables.grouping.pairs[g:g + 1])
            except AssociationFitError as exc:
                raise AssociationFitError(
                    str(exc), pair=tables.grouping.pairs[g]) from None
            phis[g] = ph[0]
            prob[g] = _normalize_tables(fitted)[0]
        theta = np.stack([theta_from_scores(phis[g], unit[g], unit[g])
                          for g in range(L)])
        return LocalOddsRatios(
            structure=structure, grouping=tables.grouping, n_categories=J,
            tables=prob, theta=theta, intrinsic=phis,
            row_scores=unit, col_scores=unit)

    if structure.kind == TIME_EXCH:
        if structure.estimation == "3way":
            phi, u, v, fitted = _fit_rc(counts, structure.homogeneous,
                                        tables.grouping.pairs)
            th = theta_from_scores(phi, u, v)
            return LocalOddsRatios(
                structure=structure, grouping=tables.grouping,
                n_categories=J, tables=_normalize_tables(fitted),
                theta=np.tile(th, (L, 1, 1)),
                intrinsic=np.full(L, phi),
                row_scores=np.tile(u, (L, 1)), col_scores=np.tile(v, (L, 1)))
        log_theta = np.zeros((q, q))
        for g in range(L):
            phi_g, u_g, v_g, _ = _fit_rc(counts[g:g + 1],
                                         structure.homogeneous,
                                         tables.grouping.pairs[g:g + 1])
            log_theta += np.log(theta_from_scores(phi_g, u_g, v_g))
        theta_common = np.exp(log_theta / L)
        prob = _tables_matching_margins(theta_common, counts)
        return LocalOddsRatios(
            structure=structure, grouping=tables.grouping, n_categories=J,
            tables=prob, theta=np.tile(theta_common, (L, 1, 1)))

    # RC: estimated scores per pair
    phis = np.empty(L)
    rows_sc = np.empty((L, J))
    cols_sc = np.empty((L, J))
    prob = np.empty_like(counts)
    theta = np.empty((L, q, q))
    for g in range(L):
        try:
            phi_g, u_g, v_g, fitted = _fit_rc(
                counts[g:g + 1], structure.homogeneous,
                tables.grouping.pairs[g:g + 1])
        except AssociationFitError as exc:
            raise AssociationFitError(str(exc),
                                      pair=tables.grouping.pairs[g]) from None
        phis[g] = phi_g
        rows_sc[g] = u_g
        cols_sc[g] = v_g
        prob[g] = _normalize_tables(fitted)[0]
        theta[g] = theta_from_scores(phi_g, u_g, v_g)
    return LocalOddsRatios(
        structure=structure, grouping=tables.grouping, n_categories=J,
        tables=prob, theta=theta, intrinsic=phis,
        row_scores=rows_sc, col_scores=cols_sc)


def _per_pair_unit_fit(tables: PairTables):
    """Intrinsic parameter of each pair under unit-spaced scores."""
    L = tables.n_pairs
    phis = np.empty(L)
    for g in range(L):
        try:
            ph, _ = _fit_unit_scores(tables.counts[g:g + 1], share_phi=False,
                                     pair_labels=tables.grouping.pairs[g:g + 1])
        except AssociationFitError as exc:
            raise AssociationFitError(str(exc),
                                      pair=tables.grouping.pairs[g]) from None
        phis[g] = ph[0]
    return phis


def intrinsic_pars(data: LongDataset, scale: str = "ordinal",
                   add: float = 0.0):
    """Per-pair intrinsic association parameters.

    Fits unit-spaced-score models per pair for an ordinal scale and
    estimated-score models per pair for a nominal scale, returning the
    L intrinsic parameters in canonical pair order.  A small range
    suggests a shared-parameter structure is adequate.
    """
    if scale not in ("ordinal", "nominal"):
        raise UsageError(f"unknown response scale {scale!r}")
    grouping = pair_grouping(data.n_times)
    tables = build_pair_tables_auto(data, grouping, add)
    if scale == "ordinal":
        return _per_pair_unit_fit(tables)
    phis = np.empty(tables.n_pairs)
    for g in range(tables.n_pairs):
        phi_g, _, _, _ = _fit_rc(tables.counts[g:g + 1], True,
                                 grouping.pairs[g:g + 1])
        phis[g] = phi_g
    return phis
