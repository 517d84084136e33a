"""Independent numerical oracles shared by the test modules.

These stay deliberately dumb: central finite differences, extended-precision
brute force, quadrature on dense grids. They never call the code paths they
are used to check.
"""

import mpmath
import numpy as np


def finite_difference_grad(f, arrays, eps=1e-5):
    """Central-difference gradient of scalar f(*arrays) w.r.t. each array.

    ``f`` must be a pure function of the given float64 arrays. Returns a list
    of arrays with the same shapes.
    """
    grads = []
    for k, base in enumerate(arrays):
        g = np.zeros_like(base, dtype=np.float64)
        flat = g.reshape(-1)
        for i in range(base.size):
            bumped = [a.copy() for a in arrays]
            bumped[k].reshape(-1)[i] += eps
            hi = f(*bumped)
            bumped = [a.copy() for a in arrays]
            bumped[k].reshape(-1)[i] -= eps
            lo = f(*bumped)
            flat[i] = (hi - lo) / (2.0 * eps)
        grads.append(g)
    return grads


def max_rel_err(analytic, numeric, floor=1e-8):
    """max |a - n| / max(|a|, |n|, floor) over all entries."""
    a = np.asarray(analytic, dtype=np.float64).reshape(-1)
    n = np.asarray(numeric, dtype=np.float64).reshape(-1)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    return float(np.max(np.abs(a - n) / denom)) if a.size else 0.0


def mp_log_softmax_nll(logits, targets):
    """Sum of -log softmax(logits)[i, t_i] at 50-digit precision."""
    mpmath.mp.dps = 50
    total = mpmath.mpf(0)
    for row, t in zip(np.asarray(logits), targets):
        exps = [mpmath.exp(mpmath.mpf(float(x))) for x in row]
        z = mpmath.fsum(exps)
        total -= mpmath.log(exps[int(t)] / z)
    return float(total)


def gauss_logpdf(z, mean=None):
    """Closed-form log N(z; mean, I) summed over the last axis."""
    z = np.asarray(z, dtype=np.float64)
    mu = np.zeros_like(z) if mean is None else np.broadcast_to(mean, z.shape)
    d = z.shape[-1]
    return -0.5 * ((z - mu) ** 2).sum(axis=-1) - 0.5 * d * np.log(2.0 * np.pi)
