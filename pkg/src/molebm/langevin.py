"""Short-run Langevin MCMC over the latent space.

Update rule: z_{k+1} = z_k + s * score(z_k) + sqrt(2s) * noise_scale * eps_k
with eps_k ~ N(0, I_d). Chains run a fixed K steps from N(0, I_d) starts;
no Metropolis correction, no persistence.

Reproducibility contract: chain i derives its own Generator from
(seed, chain index) and consumes, in order, its start point (when not
supplied) and then one (K, d) noise block in a single draw. A chain's
result therefore depends only on the seed, its index, the config, and the
parameters — never on how many chains run alongside it or in what order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import model as md

PRIOR_TARGET = "prior"
POSTERIOR_TARGET = "posterior"


class LangevinError(RuntimeError):
    """Raised when a chain encounters a non-finite score."""

    def __init__(self, step, detail=""):
        self.step = step
        super().__init__(f"non-finite score at step {step}{detail}")


@dataclass(frozen=True)
class LangevinConfig:
    K: int
    s: float
    noise_scale: float = 1.0
    target: str = PRIOR_TARGET

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"chain length must be >= 1, got {self.K}")
        if not self.s > 0:
            raise ValueError(f"step size must be > 0, got {self.s}")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be >= 0")
        if self.target not in (PRIOR_TARGET, POSTERIOR_TARGET):
            raise ValueError(f"unknown target {self.target!r}")


# Paper-silent defaults; conventional for short-run latent chains.
PRIOR_DEFAULTS = LangevinConfig(K=20, s=0.4, target=PRIOR_TARGET)
POSTERIOR_DEFAULTS = LangevinConfig(K=40, s=0.1, target=POSTERIOR_TARGET)


def chain_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, index)))


def run_chain(target_score: Callable[[np.ndarray], np.ndarray], z0, cfg, rng,
              d: Optional[int] = None):
    """One chain. Returns (z_K, stats) with per-step score and z norms.

    z0 may be None, in which case the start is drawn from N(0, I_d) using
    rng (d must then be given). target_score maps (d,) -> (d,).
    """
    if z0 is None:
        if d is None:
            raise ValueError("need d to draw a start point")
        z0 = rng.standard_normal(d)
    z = np.array(z0, dtype=np.float64)
    noise = rng.standard_normal((cfg.K, z.shape[0]))
    score_norm = np.empty(cfg.K)
    z_norm = np.empty(cfg.K)
    amp = np.sqrt(2.0 * cfg.s) * cfg.noise_scale
    for k in range(cfg.K):
        g = target_score(z)
        if not np.all(np.isfinite(g)):
            raise LangevinError(k)
        score_norm[k] = np.linalg.norm(g)
        z = z + cfg.s * g + amp * noise[k]
        z_norm[k] = np.linalg.norm(z)
    return z, {"score_norm": score_norm, "z_norm": z_norm}


def run_chains(target_score: Callable[[np.ndarray], np.ndarray], d: int,
               n: int, cfg, seed: int, block_size=1024, z0=None,
               index_base=0):
    """n independent chains, vectorized in blocks.

    target_score maps (m, d) -> (m, d) and must act row-separably (each
    output row a function of the matching input row only), which both the
    prior and posterior scores do. Stats hold per-step means across all
    chains. z0, when given, is (n, d) and chain generators skip the start
    draw. index_base offsets the chain indices used for seed derivation,
    for callers that shard a larger chain population themselves.
    """
    out = np.empty((n, d))
    score_norm = np.zeros(cfg.K)
    z_norm = np.zeros(cfg.K)
    amp = np.sqrt(2.0 * cfg.s) * cfg.noise_scale
    for lo in range(0, n, block_size):
        hi = min(lo + block_size, n)
        m = hi - lo
        starts = np.empty((m, d))
        noise = np.empty((m, cfg.K, d))
        for i in range(m):
            g = chain_rng(seed, index_base + lo + i)
            starts[i] = z0[lo + i] if z0 is not None else g.standard_normal(d)
            noise[i] = g.standard_normal((cfg.K, d))
        z = starts
        for k in range(cfg.K):
            s = target_score(z)
            if not np.all(np.isfinite(s)):
                bad = int(np.flatnonzero(~np.isfinite(s).all(axis=1))[0])
                raise LangevinError(k, f" (chain {index_base + lo + bad})")
            score_norm[k] += np.linalg.norm(s, axis=1).sum()
            z = z + cfg.s * s + amp * noise[:, k, :]
            z_norm[k] += np.linalg.norm(z, axis=1).sum()
        out[lo:hi] = z
    return out, {"score_norm": score_norm / n, "z_norm": z_norm / n}


def sample_prior(params: md.ModelParams, n: int, cfg=PRIOR_DEFAULTS,
                 seed=0, block_size=1024):
    """n draws from the tilted prior via short-run chains from N(0, I)."""
    score = lambda zs: md.prior_score(params, zs)
    return run_chains(score, params.d, n, cfg, seed, block_size=block_size)


def sample_posterior(params: md.ModelParams, ids: np.ndarray, pad_id: int,
                     cfg=POSTERIOR_DEFAULTS, seed=0, block_size=256):
    """One chain per row of the padded index matrix ids (n, T)."""
    ids = np.asarray(ids, dtype=np.int64)
    n = ids.shape[0]
    out = np.empty((n, params.d))
    score_norm = np.zeros(cfg.K)
    z_norm = np.zeros(cfg.K)
    for lo in range(0, n, block_size):
        hi = min(lo + block_size, n)
        block = ids[lo:hi]
        # Trailing all-pad columns cost forward steps; trim per block.
        live_cols = np.flatnonzero((block != pad_id).any(axis=0))
        block = block[:, : live_cols[-1] + 1]
        score = lambda zs: md.posterior_score(params, zs, block, pad_id)
        z, stats = run_chains(score, params.d, hi - lo, cfg, seed,
                              block_size=block_size, index_base=lo)
        out[lo:hi] = z
        score_norm += stats["score_norm"] * (hi - lo)
        z_norm += stats["z_norm"] * (hi - lo)
    return out, {"score_norm": score_norm / n, "z_norm": z_norm / n}


def write_trace(path, stats):
    """Dump per-step chain diagnostics as CSV."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["step", "score_norm", "z_norm"])
        for k, (sn, zn) in enumerate(zip(stats["score_norm"],
                                         stats["z_norm"])):
            w.writerow([k, f"{sn:.8g}", f"{zn:.8g}"])
