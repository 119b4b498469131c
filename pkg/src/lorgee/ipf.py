"""Iterative proportional fitting for two-way probability tables.

``ipf_adjust`` rescales a positive seed table until its margins match
prescribed row and column targets.  Rescaling rows or columns never
touches the table's local odds ratios, so the output is the unique table
carrying the seed's association structure onto the target margins.

The inner loop runs either in the compiled kernel (built from
``_raking.pyx``) or in the numpy fallback, chosen once at import.  Set
``LORGEE_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _raking_py
from .errors import IpfNonconvergenceError

if os.environ.get("LORGEE_PURE_PYTHON"):
    _kernel = _raking_py
else:
    try:
        from . import _raking as _kernel
    except ImportError:
        _kernel = _raking_py

BACKEND = _kernel.NAME


@dataclass(frozen=True)
class IpfConfig:
    """Convergence control for the raking loop."""

    tolerance: float = 1e-6
    max_iterations: int = 200

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


_DEFAULT = IpfConfig()


def _check_inputs(seed, row_targets, col_targets):
    seed = np.asarray(seed, dtype=float)
    r = np.asarray(row_targets, dtype=float)
    c = np.asarray(col_targets, dtype=float)
    if seed.ndim != 2 or seed.shape[0] != seed.shape[1]:
        raise ValueError("seed must be a square matrix")
    if np.any(seed <= 0):
        raise ValueError("seed must be strictly positive")
    for name, t in (("row", r), ("column", c)):
        if t.shape[-1] != seed.shape[0]:
            raise ValueError(f"{name} targets do not match the seed dimension")
        if np.any(t <= 0):
            raise ValueError(f"{name} targets must be strictly positive")
        if np.any(np.abs(t.sum(axis=-1) - 1.0) > 1e-10):
            raise ValueError(f"{name} targets must sum to one")
    return seed, r, c


def ipf_adjust(seed, row_targets, col_targets, config: IpfConfig | None = None):
    """Match a positive seed table to target margins.

    Parameters
    ----------
    seed : ndarray (J, J)
        Strictly positive table; only its local odds ratios matter.
    row_targets, col_targets : ndarray (J,)
        Strictly positive margins, each summing to one within 1e-10.
    config : IpfConfig, optional

    Returns
    -------
    ndarray (J, J)
        Table with the seed's local odds ratios and the target margins;
        sums to one.

    Raises
    ------
    IpfNonconvergenceError
        Margins still deviate by more than the tolerance after the
        iteration budget; the final deviation is attached.
    """
    cfg = config or _DEFAULT
    seed, r, c = _check_inputs(seed, row_targets, col_targets)
    out, dev, _ = _kernel.rake(seed, r, c, cfg.tolerance, cfg.max_iterations)
    if dev > cfg.tolerance:
        raise IpfNonconvergenceError(
            f"margin deviation {dev:.3e} above tolerance {cfg.tolerance:.3e} "
            f"after {cfg.max_iterations} sweeps", deviation=dev)
    return out


def ipf_adjust_batch(seed, row_targets, col_targets,
                     config: IpfConfig | None = None):
    """Run :func:`ipf_adjust` for one seed against many margin pairs.

    ``row_targets`` and ``col_targets`` have shape (m, J); returns
    (m, J, J).  Used by the GEE engine, one call per time-pair.
    """
    cfg = config or _DEFAULT
    seed, r, c = _check_inputs(seed, row_targets, col_targets)
    r = np.atleast_2d(r)
    c = np.atleast_2d(c)
    out, devs, _ = _kernel.rake_batch(seed, r, c, cfg.tolerance,
                                      cfg.max_iterations)
    worst = int(np.argmax(devs))
    if devs[worst] > cfg.tolerance:
        raise IpfNonconvergenceError(
            f"margin deviation {devs[worst]:.3e} above tolerance "
            f"{cfg.tolerance:.3e} after {cfg.max_iterations} sweeps "
            f"(batch element {worst})", deviation=float(devs[worst]))
    return out
