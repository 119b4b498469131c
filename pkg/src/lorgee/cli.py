"""Command-line front end.

Subcommands
-----------
``fit-ordinal``     fit a cumulative-link or adjacent-categories model
``fit-nominal``     fit a baseline-category model
``intrinsic-pars``  per-pair intrinsic association parameters
``wald``            nested-model Wald test (base + added covariates)
``matrix-lor``      probability table realizing target local odds ratios

Exit codes: 0 success, 2 usage, 3 data, 4 association fit,
5 estimation/convergence, 6 internal numeric.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .association import AssociationStructure, intrinsic_pars, matrix_lor
from .data import _read_table, load_dataset
from .design import expand_covariates, parse_covariate_specs
from .errors import (
    AssociationError,
    DataError,
    EstimationError,
    LorgeeError,
    NumericError,
    UsageError,
)
from .gee import FitControl, solve_gee
from .inference import summarize, wald_test
from .ipf import IpfConfig
from .links import (
    ADJACENT_LOGIT,
    BASELINE_LOGIT,
    CUMULATIVE_CAUCHIT,
    CUMULATIVE_CLOGLOG,
    CUMULATIVE_LOGIT,
    CUMULATIVE_PROBIT,
    MarginalModelSpec,
)

_LINKS = {
    "logit": CUMULATIVE_LOGIT,
    "probit": CUMULATIVE_PROBIT,
    "cauchit": CUMULATIVE_CAUCHIT,
    "cloglog": CUMULATIVE_CLOGLOG,
    "acl": ADJACENT_LOGIT,
}

_STRUCTURES = ("independence", "uniform", "category-exch", "time-exch",
               "rc", "fixed")


class _Parser(argparse.ArgumentParser):
    """Raise instead of exiting so ``main`` owns the exit code."""

    def error(self, message):
        raise UsageError(message)


def _add_data_options(p, need_covariates=True):
    p.add_argument("--data", required=True, help="CSV file in long format")
    p.add_argument("--response", required=True, help="response column name")
    p.add_argument("--id", required=True, help="subject column name")
    p.add_argument("--time", default=None, help="occasion column name")
    if need_covariates:
        p.add_argument(
            "--covariates", default="",
            help="comma-separated columns; prefix factor: to dummy-code")
    p.add_argument("--delimiter", default=",", help="CSV delimiter")
    p.add_argument("--format", choices=("text", "structured"),
                   default="text", help="report format")


def _add_fit_options(p):
    p.add_argument("--structure", choices=_STRUCTURES, default=None,
                   help="local odds ratios structure")
    p.add_argument("--heterogeneous", action="store_true",
                   help="separate row/column scores (time-exch, rc)")
    p.add_argument("--estimation", choices=("3way", "2way"), default="3way",
                   help="association estimation method")
    p.add_argument("--add", type=float, default=0.0,
                   help="constant added to every pair-table cell")
    p.add_argument("--tolerance", type=float, default=0.001,
                   help="scoring convergence tolerance")
    p.add_argument("--max-iterations", type=int, default=15,
                   help="scoring iteration budget")
    p.add_argument("--ipf-tolerance", type=float, default=1e-6,
                   help="margin tolerance of the raking loop")
    p.add_argument("--ipf-max-iterations", type=int, default=200,
                   help="raking sweep budget")
    p.add_argument("--inversion", choices=("solve", "qr", "cholesky"),
                   default="solve", help="matrix inversion routine")
    p.add_argument("--start-values", default=None,
                   help="file of whitespace-separated starting values")
    p.add_argument("--fixed-tables", default=None,
                   help="CSV of L x J^2 vectorized tables (structure=fixed)")


def build_parser():
    parser = _Parser(prog="lorgee",
                     description="Marginal regression for correlated "
                                 "multinomial responses")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-ordinal", help="fit an ordinal marginal model",
                       parents=[], add_help=True)
    _add_data_options(p)
    p.add_argument("--link",
                   choices=("logit", "probit", "cauchit", "cloglog", "acl"),
                   default="logit")
    _add_fit_options(p)
    p.set_defaults(handler=_cmd_fit, nominal=False)

    p = sub.add_parser("fit-nominal", help="fit a nominal marginal model")
    _add_data_options(p)
    _add_fit_options(p)
    p.set_defaults(handler=_cmd_fit, nominal=True)

    p = sub.add_parser("intrinsic-pars",
                       help="per-pair intrinsic association parameters")
    _add_data_options(p, need_covariates=False)
    p.add_argument("--scale", choices=("ordinal", "nominal"),
                   default="ordinal")
    p.add_argument("--add", type=float, default=0.0)
    p.set_defaults(handler=_cmd_intrinsic)

    p = sub.add_parser("wald", help="Wald test for added covariates")
    _add_data_options(p)
    p.add_argument("--add-covariates", required=True,
                   help="covariates of the larger model, comma-separated")
    p.add_argument("--scale", choices=("ordinal", "nominal"),
                   default="ordinal")
    p.add_argument("--link",
                   choices=("logit", "probit", "cauchit", "cloglog", "acl"),
                   default="logit", help="link (ordinal scale only)")
    _add_fit_options(p)
    p.set_defaults(handler=_cmd_wald)

    p = sub.add_parser("matrix-lor",
                       help="probability table with target local odds ratios")
    p.add_argument("--target", required=True,
                   help="CSV of the (J-1) x (J-1) target matrix")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--format", choices=("text", "structured"),
                   default="text")
    p.set_defaults(handler=_cmd_matrix_lor)
    return parser


def _load(args, extra_covariates=""):
    _, cols = _read_table(args.data, delimiter=args.delimiter)
    base_specs = parse_covariate_specs(getattr(args, "covariates", ""))
    added_specs = parse_covariate_specs(extra_covariates)
    base_names, expanded = expand_covariates(cols, base_specs)
    added_names, expanded2 = expand_covariates(cols, added_specs)
    table = {**cols, **expanded, **expanded2}
    dataset = load_dataset(table, args.response, args.id, args.time,
                           base_names + added_names)
    return dataset, base_names, added_names


def _structure_from_args(args):
    if args.structure is None:
        return None
    fixed = None
    if args.structure == "fixed":
        if args.fixed_tables is None:
            raise UsageError("--structure fixed needs --fixed-tables")
        fixed = np.loadtxt(args.fixed_tables, delimiter=",", ndmin=2)
    return AssociationStructure(
        kind=args.structure.replace("-", "_"),
        homogeneous=not args.heterogeneous,
        estimation=args.estimation,
        fixed_tables=fixed)


def _controls_from_args(args):
    control = FitControl(tolerance=args.tolerance,
                         max_iterations=args.max_iterations,
                         inversion=args.inversion)
    ipf_cfg = IpfConfig(tolerance=args.ipf_tolerance,
                        max_iterations=args.ipf_max_iterations)
    return control, ipf_cfg


def _read_start(path):
    if path is None:
        return None
    with open(path, "r", encoding="utf-8") as fh:
        return np.array([float(tok)
                         for tok in fh.read().replace(",", " ").split()])


def _cmd_fit(args, argv):
    dataset, names, _ = _load(args)
    link = BASELINE_LOGIT if args.nominal else _LINKS[args.link]
    spec = MarginalModelSpec(link=link, n_categories=dataset.n_categories,
                             n_covariates=len(names))
    control, ipf_cfg = _controls_from_args(args)
    fit = solve_gee(spec, dataset,
                    structure=_structure_from_args(args),
                    control=control, ipf_config=ipf_cfg,
                    start=_read_start(args.start_values),
                    add=args.add,
                    call="lorgee " + " ".join(argv))
    report = summarize(fit)
    if args.format == "structured":
        print(report.to_json())
    else:
        print(report.to_text())
    return 0


def _cmd_intrinsic(args, argv):
    dataset, _, _ = _load(args)
    values = intrinsic_pars(dataset, scale=args.scale, add=args.add)
    if args.format == "structured":
        print(json.dumps({"intrinsic_parameters": [float(v) for v in values]},
                         indent=2))
    else:
        print(" ".join(f"{v:.7f}" for v in values))
    return 0


def _cmd_wald(args, argv):
    dataset, base_names, added_names = _load(
        args, extra_covariates=args.add_covariates)
    if not added_names:
        raise UsageError("--add-covariates expanded to no design columns")
    nominal = args.scale == "nominal"
    link = BASELINE_LOGIT if nominal else _LINKS[args.link]
    spec = MarginalModelSpec(link=link, n_categories=dataset.n_categories,
                             n_covariates=len(base_names) + len(added_names))
    control, ipf_cfg = _controls_from_args(args)
    fit = solve_gee(spec, dataset,
                    structure=_structure_from_args(args),
                    control=control, ipf_config=ipf_cfg,
                    start=_read_start(args.start_values),
                    add=args.add,
                    call="lorgee " + " ".join(argv))
    q = spec.n_cutpoints
    pb, pa = len(base_names), len(added_names)
    p = spec.n_params
    if nominal:
        added_idx = [q + j * (pb + pa) + pb + k
                     for j in range(q) for k in range(pa)]
    else:
        added_idx = [q + pb + k for k in range(pa)]
    C = np.zeros((len(added_idx), p))
    C[np.arange(len(added_idx)), added_idx] = 1.0
    result = wald_test(fit, C, description=", ".join(
        fit.param_names[i] for i in added_idx))
    h0 = f"{args.response} ~ {args.covariates or '1'}"
    h1 = f"{args.response} ~ {args.covariates or '1'} + {args.add_covariates}"
    if args.format == "structured":
        print(json.dumps({
            "h0": h0, "h1": h1,
            "statistic": result.statistic,
            "df": result.df,
            "p_value": result.p_value,
        }, indent=2))
    else:
        print("Goodness of fit based on the Wald test")
        print()
        print(f"Model under H0: {h0}")
        print(f"Model under H1: {h1}")
        print()
        print(f"Wald statistic = {result.statistic:.4f}, "
              f"df = {result.df}, p-value = {result.p_value:.4f}")
    return 0


def _cmd_matrix_lor(args, argv):
    target = np.loadtxt(args.target, delimiter=args.delimiter, ndmin=2)
    try:
        table = matrix_lor(target)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "structured":
        print(json.dumps({"table": [[float(x) for x in row]
                                    for row in table]}, indent=2))
    else:
        for row in table:
            print(" ".join(f"{x:.8f}" for x in row))
    return 0


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args, argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except AssociationError as exc:
        print(f"association fit error: {exc}", file=sys.stderr)
        return 4
    except EstimationError as exc:
        print(f"estimation error: {exc}", file=sys.stderr)
        return 5
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 6
    except LorgeeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 6
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
