"""Pure numpy implementations of the hot kernels.

These are the reference versions; ``psido._ckernels`` mirrors them in Cython.
"""
import numpy as np


def phase_sum(t, xi, table, coef):
    """out[j] = sum_k exp(2 pi i t[j].xi[k]) * table[j, k] * coef[k].

    ``t`` has shape (P, n), ``xi`` shape (Q, n), ``table`` shape (P, Q) and
    ``coef`` shape (Q,).
    """
    t = np.asarray(t, dtype=float)
    xi = np.asarray(xi, dtype=float)
    phase = np.exp(2j * np.pi * (t @ xi.T))
    return np.einsum("jk,jk,k->j", phase, np.asarray(table, dtype=complex),
                     np.asarray(coef, dtype=complex))


def pv_hilbert(f):
    """Alternating-node principal value sum on a uniform grid.

    out[j] = (2/pi) * sum_{l, j-l odd} f[l] / (j - l)

    The singular node is skipped and nodes are paired symmetrically around it.
    """
    f = np.asarray(f, dtype=complex)
    m = f.shape[0]
    d = np.arange(m)[:, None] - np.arange(m)[None, :]
    odd = (d % 2) != 0
    w = np.zeros((m, m))
    w[odd] = 2.0 / (np.pi * d[odd])
    return w @ f


def unwrap_phase_total(values):
    """Sum of principal-branch argument increments around a closed sample loop.

    Returns ``(total, max_step)`` where ``max_step`` is the largest absolute
    increment, used by callers to decide whether to refine the sampling.
    """
    v = np.asarray(values, dtype=complex)
    steps = np.angle(np.roll(v, -1) / v)
    return float(steps.sum()), float(np.abs(steps).max())
