"""Pure-numpy raking kernels (fallback for the compiled extension).

Both kernels alternate row scaling and column scaling; the deviation is
the maximum absolute difference between fitted and target margins,
measured after a full sweep (rows first, then columns).  They return the
final deviation and sweep count instead of raising so the wrapper in
:mod:`lorgee.ipf` owns the error policy.
"""
import numpy as np

NAME = "python"


def rake(seed, row_targets, col_targets, tol, max_iter):
    """Adjust one table.  Returns (table, deviation, sweeps)."""
    f = np.array(seed, dtype=float)
    r = np.asarray(row_targets, dtype=float)
    c = np.asarray(col_targets, dtype=float)
    dev = np.inf
    sweeps = 0
    for sweeps in range(1, max_iter + 1):
        f *= (r / f.sum(axis=1))[:, None]
        f *= (c / f.sum(axis=0))[None, :]
        dev = max(np.abs(f.sum(axis=1) - r).max(),
                  np.abs(f.sum(axis=0) - c).max())
        if dev <= tol:
            break
    return f, dev, sweeps


def rake_batch(seed, row_targets, col_targets, tol, max_iter):
    """Adjust one seed against a batch of margin pairs.

    Parameters
    ----------
    seed : (J, J)
    row_targets, col_targets : (m, J)

    Returns
    -------
    (tables (m, J, J), deviations (m,), sweeps (m,))

    Tables that reach the tolerance stop updating, so each table gets
    exactly the trajectory the single-table kernel would give it.
    """
    r = np.asarray(row_targets, dtype=float)
    c = np.asarray(col_targets, dtype=float)
    m = r.shape[0]
    f = np.repeat(np.asarray(seed, dtype=float)[None, :, :], m, axis=0)
    devs = np.full(m, np.inf)
    sweeps = np.zeros(m, dtype=np.intp)
    active = np.arange(m)
    for sweep in range(1, max_iter + 1):
        fa = f[active]
        fa *= (r[active] / fa.sum(axis=2))[:, :, None]
        fa *= (c[active] / fa.sum(axis=1))[:, None, :]
        f[active] = fa
        dev = np.maximum(
            np.abs(fa.sum(axis=2) - r[active]).max(axis=1),
            np.abs(fa.sum(axis=1) - c[active]).max(axis=1))
        devs[active] = dev
        sweeps[active] = sweep
        active = active[dev > tol]
        if active.size == 0:
            break
    return f, devs, sweeps
