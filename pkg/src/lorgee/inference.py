"""Covariance estimation, Wald tests, and fit summaries.

Standard errors come from the usual sandwich construction: with
``B = sum_i D_i' V_i^{-1} D_i`` and
``M = sum_i D_i' V_i^{-1} r_i r_i' V_i^{-1} D_i`` (``r_i`` the residual
vector of subject i), the covariance of the estimates is
``B^{-1} M B^{-1}`` and the model-based (naive) covariance is
``B^{-1}``.  Both are stored directly as covariances of the estimated
coefficients, so Wald statistics need no extra sample-size scaling.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2, norm

from .errors import UsageError
from .gee import GeeFit, _Engine, _accumulate, _batch_inverse
from .ipf import IpfConfig
from .links import jacobian_stack, probability_matrix


@dataclass(frozen=True)
class WaldResult:
    """Wald test of a linear hypothesis C b = 0."""

    statistic: float
    df: int
    p_value: float
    constraint_description: str = ""


def sandwich_cov(spec, data, alpha, params, ipf_config=None,
                 inversion="solve"):
    """Recompute (sandwich, naive) covariances at the given estimates.

    This walks the data independently of any solver state, so it can
    audit a stored fit.
    """
    engine = _Engine(spec, data)
    cfg = ipf_config or IpfConfig()
    P = probability_matrix(spec, params, data.covariates)
    D = jacobian_stack(spec, params, data.covariates)
    _, S0, S1 = _accumulate(engine, P, D, alpha, cfg, inversion,
                            need_meat=True)
    S0inv = _batch_inverse(S0[None], inversion)[0]
    sandwich = S0inv @ S1 @ S0inv
    return 0.5 * (sandwich + sandwich.T), 0.5 * (S0inv + S0inv.T)


def wald_test(fit: GeeFit, constraint, description="") -> WaldResult:
    """Test C b = 0 against the fit's sandwich covariance.

    ``constraint`` is a q x p matrix of full row rank selecting (or
    combining) coefficients of the fitted model.
    """
    C = np.atleast_2d(np.asarray(constraint, dtype=float))
    p = fit.params.shape[0]
    if C.shape[1] != p:
        raise UsageError(
            f"constraint has {C.shape[1]} columns, model has {p} parameters")
    q = C.shape[0]
    if np.linalg.matrix_rank(C) != q:
        raise UsageError("constraint matrix does not have full row rank")
    cb = C @ fit.params
    middle = C @ fit.sandwich @ C.T
    try:
        stat = float(cb @ np.linalg.solve(middle, cb))
    except np.linalg.LinAlgError:
        raise UsageError(
            "constraint covariance is singular") from None
    return WaldResult(statistic=stat, df=q,
                      p_value=float(chi2.sf(stat, q)),
                      constraint_description=description)


def null_model_test(fit: GeeFit) -> WaldResult:
    """Wald test that every non-intercept coefficient is zero."""
    p = fit.params.shape[0]
    q = fit.spec.n_cutpoints
    if p == q:
        raise UsageError("intercept-only model has no covariates to test")
    C = np.zeros((p - q, p))
    C[np.arange(p - q), np.arange(q, p)] = 1.0
    names = fit.param_names[q:]
    return wald_test(fit, C, description="all of: " + ", ".join(names))


def theta_block_matrix(fit: GeeFit):
    """Estimated local odds ratios laid out as the symmetric
    T(J-1) x T(J-1) block matrix with zero diagonal blocks."""
    q = fit.spec.n_cutpoints
    T = fit.n_times
    out = np.zeros((T * q, T * q))
    for g, (t, tp) in enumerate(fit.alpha.grouping.pairs):
        block = fit.alpha.theta[g]
        out[(t - 1) * q:t * q, (tp - 1) * q:tp * q] = block
        out[(tp - 1) * q:tp * q, (t - 1) * q:t * q] = block.T
    return out


_LINK_LABELS = {
    "cumulative-logit": "cumulative logit",
    "cumulative-probit": "cumulative probit",
    "cumulative-cauchit": "cumulative cauchit",
    "cumulative-cloglog": "cumulative complementary log-log",
    "adjacent-categories-logit": "adjacent categories logit",
    "baseline-category-logit": "baseline category logit",
}


@dataclass(frozen=True)
class FitReport:
    """Serializable summary of a fit (text and key-value forms)."""

    scale: str
    link_label: str
    structure: str
    estimation: str
    call: str
    converged: bool
    iterations: int
    n_subjects: int
    residual_summary: dict
    coef_names: list
    estimates: np.ndarray
    std_errors: np.ndarray
    z_values: np.ndarray
    p_values: np.ndarray
    theta_block: np.ndarray
    null_p_value: float | None

    def to_dict(self):
        """Flat key-value document; floats keep full precision."""
        coefs = {
            name: {
                "estimate": float(self.estimates[i]),
                "san_se": float(self.std_errors[i]),
                "san_z": float(self.z_values[i]),
                "p_value": float(self.p_values[i]),
            }
            for i, name in enumerate(self.coef_names)
        }
        return {
            "scale": self.scale,
            "link": self.link_label,
            "structure": self.structure,
            "estimation": self.estimation,
            "call": self.call,
            "converged": self.converged,
            "iterations": self.iterations,
            "n_subjects": self.n_subjects,
            "residual_summary": {k: float(v)
                                 for k, v in self.residual_summary.items()},
            "coefficients": coefs,
            "theta_block": [[float(x) for x in row]
                            for row in self.theta_block],
            "null_model_p_value": (None if self.null_p_value is None
                                   else float(self.null_p_value)),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self):
        lines = []
        lines.append(f"GEE marginal model for multinomial responses "
                     f"({self.scale} scale)")
        lines.append("")
        lines.append(f"Link:       {self.link_label}")
        lines.append("Local odds ratios:")
        lines.append(f"  Structure:  {self.structure}")
        lines.append(f"  Estimation: {self.estimation}")
        if self.call:
            lines.append("")
            lines.append("Call:")
            lines.append(f"  {self.call}")
        lines.append("")
        lines.append("Summary of residuals:")
        keys = ["min", "q1", "median", "mean", "q3", "max"]
        head = ["Min.", "1st Qu.", "Median", "Mean", "3rd Qu.", "Max."]
        lines.append("  " + "".join(f"{h:>11}" for h in head))
        lines.append("  " + "".join(
            f"{self.residual_summary[k]:>11.5f}" for k in keys))
        lines.append("")
        lines.append(f"Number of iterations: {self.iterations}")
        lines.append("")
        lines.append("Coefficients:")
        width = max(len(n) for n in self.coef_names) + 2
        lines.append("  " + "".ljust(width) +
                     f"{'estimate':>11}{'san.se':>11}{'san.z':>11}"
                     f"{'Pr(>|san.z|)':>14}")
        for i, name in enumerate(self.coef_names):
            pv = self.p_values[i]
            ptxt = "<1e-05" if pv < 1e-5 else f"{pv:.5f}"
            lines.append(
                "  " + name.ljust(width) +
                f"{self.estimates[i]:>11.5f}{self.std_errors[i]:>11.5f}"
                f"{self.z_values[i]:>11.5f}{ptxt:>14}")
        lines.append("")
        lines.append("Local odds ratios estimates:")
        for row in self.theta_block:
            lines.append("  " + " ".join(f"{x:8.5f}" for x in row))
        if self.null_p_value is not None:
            lines.append("")
            ptxt = "<0.0001" if self.null_p_value < 1e-4 \
                else f"{self.null_p_value:.5f}"
            lines.append(f"p-value of null model: {ptxt}")
        lines.append("")
        return "\n".join(lines)


def summarize(fit: GeeFit) -> FitReport:
    """Assemble the presentation summary of a fit.

    Residual quantiles cover all subject-occasion-category triples of
    the stacked residual vectors (categories 1..J-1, the same vectors
    the estimating equations use).
    """
    res = fit.residuals.ravel()
    qs = np.percentile(res, [0, 25, 50, 75, 100])
    residual_summary = {
        "min": qs[0], "q1": qs[1], "median": qs[2],
        "mean": float(res.mean()), "q3": qs[3], "max": qs[4],
    }
    se = fit.std_errors
    z = fit.params / se
    pvals = 2.0 * norm.sf(np.abs(z))
    try:
        null_p = null_model_test(fit).p_value
    except UsageError:
        null_p = None
    return FitReport(
        scale="nominal" if fit.spec.is_nominal else "ordinal",
        link_label=_LINK_LABELS[fit.spec.link],
        structure=fit.structure.kind,
        estimation=fit.structure.estimation,
        call=fit.call,
        converged=fit.converged,
        iterations=fit.iterations,
        n_subjects=fit.n_subjects,
        residual_summary=residual_summary,
        coef_names=list(fit.param_names),
        estimates=fit.params,
        std_errors=se,
        z_values=z,
        p_values=pvals,
        theta_block=theta_block_matrix(fit),
        null_p_value=null_p,
    )
