"""Latent-variable generative model: energy-based prior over z, LSTM decoder over tokens.

The prior is an exponential tilt of a standard Gaussian: an energy MLP
f(z) corrects the reference density, so log p(z) = f(z) - ||z||^2/2 + const
up to the (never computed) normalizer. The decoder is a single-layer LSTM
conditioned on z through projected initial states and by concatenating z
to every input embedding.

Two calling surfaces: plain-array wrappers (energy, decode_logp, ...) for
scoring, and ``*_node`` graph builders on bound parameter Nodes for anything
that needs gradients. ``bind(params, trainable=...)`` chooses whether the
parameter leaves receive gradients; Langevin chains bind non-trainable so
backward only pays for the z path.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from types import SimpleNamespace
from typing import Optional

import numpy as np

from . import autodiff as ad

MAX_LEN = 128            # decoded tokens between the sentinels
LOG_2PI = float(np.log(2.0 * np.pi))

# Checkpoint layout. Shapes are derivable from the header dims, so the file
# stores raw arrays in exactly this order with no per-array framing.
PRIOR_FIELDS = ("pw1", "pb1", "pw2", "pb2", "pw3", "pb3")
DECODER_FIELDS = ("emb", "wh0", "bh0", "wc0", "bc0",
                  "wx", "wh", "b", "wout", "bout")
ALL_FIELDS = PRIOR_FIELDS + DECODER_FIELDS

_MAGIC = b"MLBM"
_VERSION = 1


class CheckpointError(Exception):
    pass


def _uniform(rng, fan_in, shape):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


@dataclass
class ModelParams:
    """All weights as float64 arrays, keyed by the checkpoint field names."""

    d: int
    vocab_size: int
    mlp_hidden: int
    lstm_hidden: int
    embed_dim: int
    seed: int
    arrays: dict = field(default_factory=dict)

    @classmethod
    def init(cls, vocab_size, d=32, mlp_hidden=200, lstm_hidden=1024,
             embed_dim=512, seed=0):
        rng = np.random.default_rng(np.random.SeedSequence((seed, 0xA11)))
        d, v, hm, hl, e = d, vocab_size, mlp_hidden, lstm_hidden, embed_dim
        a = {}
        a["pw1"] = _uniform(rng, d, (d, hm))
        a["pb1"] = np.zeros(hm)
        a["pw2"] = _uniform(rng, hm, (hm, hm))
        a["pb2"] = np.zeros(hm)
        # Zero output layer: training starts from exactly the Gaussian prior.
        a["pw3"] = np.zeros((hm, 1))
        a["pb3"] = np.zeros(1)
        a["emb"] = _uniform(rng, e, (v, e))
        a["wh0"] = _uniform(rng, d, (d, hl))
        a["bh0"] = np.zeros(hl)
        a["wc0"] = _uniform(rng, d, (d, hl))
        a["bc0"] = np.zeros(hl)
        a["wx"] = _uniform(rng, e + d, (e + d, 4 * hl))
        a["wh"] = _uniform(rng, hl, (hl, 4 * hl))
        b = np.zeros(4 * hl)
        b[hl:2 * hl] = 1.0   # forget-gate bias: retain state early in training
        a["b"] = b
        a["wout"] = _uniform(rng, hl, (hl, v))
        a["bout"] = np.zeros(v)
        return cls(d=d, vocab_size=v, mlp_hidden=hm, lstm_hidden=hl,
                   embed_dim=e, seed=seed, arrays=a)

    def shapes(self):
        d, v, hm, hl, e = (self.d, self.vocab_size, self.mlp_hidden,
                           self.lstm_hidden, self.embed_dim)
        return {
            "pw1": (d, hm), "pb1": (hm,), "pw2": (hm, hm), "pb2": (hm,),
            "pw3": (hm, 1), "pb3": (1,),
            "emb": (v, e), "wh0": (d, hl), "bh0": (hl,),
            "wc0": (d, hl), "bc0": (hl,),
            "wx": (e + d, 4 * hl), "wh": (hl, 4 * hl), "b": (4 * hl,),
            "wout": (hl, v), "bout": (v,),
        }

    def copy(self):
        return ModelParams(d=self.d, vocab_size=self.vocab_size,
                           mlp_hidden=self.mlp_hidden,
                           lstm_hidden=self.lstm_hidden,
                           embed_dim=self.embed_dim, seed=self.seed,
                           arrays={k: v.copy() for k, v in self.arrays.items()})

    # ---------------------------------------------------------- persistence

    def save(self, path):
        header = struct.pack(
            "<4sIIIIIIIQ", _MAGIC, _VERSION, self.d, self.vocab_size,
            self.mlp_hidden, self.lstm_hidden, self.embed_dim, 0,
            self.seed & 0xFFFFFFFFFFFFFFFF)
        with open(path, "wb") as f:
            f.write(header)
            for name in ALL_FIELDS:
                arr = np.ascontiguousarray(self.arrays[name], dtype="<f8")
                f.write(arr.tobytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as f:
            head = f.read(struct.calcsize("<4sIIIIIIIQ"))
            if len(head) != struct.calcsize("<4sIIIIIIIQ"):
                raise CheckpointError(f"{path}: truncated header")
            magic, ver, d, v, hm, hl, e, _res, seed = struct.unpack(
                "<4sIIIIIIIQ", head)
            if magic != _MAGIC:
                raise CheckpointError(f"{path}: not a checkpoint file")
            if ver != _VERSION:
                raise CheckpointError(f"{path}: unsupported version {ver}")
            params = cls(d=d, vocab_size=v, mlp_hidden=hm, lstm_hidden=hl,
                         embed_dim=e, seed=seed, arrays={})
            for name, shape in params.shapes().items():
                n = int(np.prod(shape))
                buf = f.read(8 * n)
                if len(buf) != 8 * n:
                    raise CheckpointError(f"{path}: truncated at {name}")
                params.arrays[name] = np.frombuffer(
                    buf, dtype="<f8").reshape(shape).copy()
            if f.read(1):
                raise CheckpointError(f"{path}: trailing bytes")
        return params


def bind(params: ModelParams, trainable=False) -> SimpleNamespace:
    """Wrap every weight as a graph leaf; trainable leaves receive gradients."""
    wrap = ad.param if trainable else ad.constant
    return SimpleNamespace(**{k: wrap(v) for k, v in params.arrays.items()})


# ------------------------------------------------------------------ prior

def energy_node(p: SimpleNamespace, z: ad.Node) -> ad.Node:
    """f(z) for a batch: (n, d) -> (n, 1). Smooth (tanh) so the score is continuous."""
    h = ad.tanh(z @ p.pw1 + p.pb1)
    h = ad.tanh(h @ p.pw2 + p.pb2)
    return h @ p.pw3 + p.pb3


def log_prior_unnorm_node(p: SimpleNamespace, z: ad.Node) -> ad.Node:
    """f(z) + log N(z; 0, I), unnormalized in the tilt: (n, d) -> (n, 1)."""
    d = z.shape[1]
    sq = ad.row_sum(ad.mul(z, z))
    return energy_node(p, z) + ad.scale(sq, -0.5) + (-0.5 * d * LOG_2PI)


def _as_batch(z, d):
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (d,):
        raise ValueError(f"latent vector must have shape ({d},), got {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError("latent vector contains non-finite entries")
    return z.reshape(1, d)


def energy(params: ModelParams, z) -> float:
    p = bind(params)
    return float(energy_node(p, ad.constant(_as_batch(z, params.d))).value[0, 0])


def log_prior_unnorm(params: ModelParams, z) -> float:
    p = bind(params)
    node = log_prior_unnorm_node(p, ad.constant(_as_batch(z, params.d)))
    return float(node.value[0, 0])


def prior_score(params: ModelParams, zs: np.ndarray) -> np.ndarray:
    """grad_z [f(z) - ||z||^2/2] for each row of zs: (n, d) -> (n, d)."""
    p = bind(params, trainable=False)
    z = ad.param(zs)
    total = ad.sum_all(energy_node(p, z))
    ad.backward(total)
    return z.grad - zs


# ---------------------------------------------------------------- decoder

def _lstm_init(p: SimpleNamespace, z: ad.Node):
    h = ad.tanh(z @ p.wh0 + p.bh0)
    c = ad.tanh(z @ p.wc0 + p.bc0)
    return h, c


def _lstm_step(p: SimpleNamespace, hl: int, x: ad.Node, h: ad.Node, c: ad.Node):
    gates = x @ p.wx + h @ p.wh + p.b
    i = ad.sigmoid(ad.slice_cols(gates, 0, hl))
    f = ad.sigmoid(ad.slice_cols(gates, hl, 2 * hl))
    g = ad.tanh(ad.slice_cols(gates, 2 * hl, 3 * hl))
    o = ad.sigmoid(ad.slice_cols(gates, 3 * hl, 4 * hl))
    c2 = ad.add(ad.mul(f, c), ad.mul(i, g))
    h2 = ad.mul(o, ad.tanh(c2))
    return h2, c2


def decode_logp_node(p: SimpleNamespace, hl: int, z: ad.Node,
                     ids: np.ndarray, pad_id: int):
    """Teacher-forced batch likelihood.

    ids is (n, T): begin sentinel, tokens, end sentinel, then pad. Returns
    (total_nll_node, per_row_logp, n_correct, n_live): the scalar node is the
    summed negative log-likelihood over non-pad targets (its gradient serves
    both training and posterior scores); the arrays are diagnostics computed
    outside the graph.
    """
    ids = np.asarray(ids, dtype=np.int64)
    n, T = ids.shape
    if T - 1 > MAX_LEN + 1:
        raise ValueError(f"sequence length {T} exceeds maximum {MAX_LEN + 2}")
    h, c = _lstm_init(p, z)
    total: Optional[ad.Node] = None
    per_row = np.zeros(n)
    correct = 0
    live_total = 0
    for t in range(T - 1):
        targets = ids[:, t + 1]
        x = ad.concat_cols(ad.rows(p.emb, ids[:, t]), z)
        h, c = _lstm_step(p, hl, x, h, c)
        logits = h @ p.wout + p.bout
        nll = ad.softmax_cross_entropy(logits, targets, ignore_index=pad_id,
                                       reduction="sum")
        total = nll if total is None else total + nll
        live = targets != pad_id
        if live.any():
            probs = ad.softmax(logits.value)
            rows_live = np.flatnonzero(live)
            per_row[rows_live] += np.log(
                probs[rows_live, targets[rows_live]])
            correct += int((probs[rows_live].argmax(axis=1)
                            == targets[rows_live]).sum())
            live_total += int(live.sum())
    return total, per_row, correct, live_total


def decode_logp(params: ModelParams, z, token_ids) -> float:
    """log p(x | z) for one sentinel-wrapped index sequence."""
    ids = np.asarray(token_ids, dtype=np.int64).reshape(1, -1)
    if ids.shape[1] < 2:
        raise ValueError("sequence must contain at least begin and end sentinels")
    if ids.min() < 0 or ids.max() >= params.vocab_size:
        raise ValueError("token index out of range")
    p = bind(params)
    zb = ad.constant(_as_batch(z, params.d))
    # pad_id -1 never matches: every position of a single sequence is live.
    _, per_row, _, _ = decode_logp_node(p, params.lstm_hidden, zb, ids, -1)
    return float(per_row[0])


def posterior_score(params: ModelParams, zs: np.ndarray, ids: np.ndarray,
                    pad_id: int) -> np.ndarray:
    """grad_z [log p(z) + log p(x|z)] per row; ids aligned with zs rows."""
    p = bind(params, trainable=False)
    z = ad.param(zs)
    nll, _, _, _ = decode_logp_node(p, params.lstm_hidden, z, ids, pad_id)
    total = ad.sum_all(log_prior_unnorm_node(p, z)) - nll
    ad.backward(total)
    return z.grad.copy()


def log_posterior_unnorm(params: ModelParams, z, token_ids) -> float:
    return log_prior_unnorm(params, z) + decode_logp(params, z, token_ids)


# ---------------------------------------------------------------- sampling

def decode_sample_batch(params: ModelParams, zs: np.ndarray, rng,
                        max_len=MAX_LEN, begin_id=1, end_id=2):
    """Ancestral sampling for each latent row; temperature 1.0.

    Returns (sequences, truncated): token id lists without sentinels, and a
    boolean per row set when max_len was hit before the end sentinel.
    Finished rows drop out of the batch. Deterministic for a given generator
    state and batch; rows in a different batch draw different variates.
    """
    a = params.arrays
    hl = params.lstm_hidden
    zs = np.asarray(zs, dtype=np.float64)
    n = zs.shape[0]
    h = np.tanh(zs @ a["wh0"] + a["bh0"])
    c = np.tanh(zs @ a["wc0"] + a["bc0"])
    tokens = np.full((n,), begin_id, dtype=np.int64)
    seqs = [[] for _ in range(n)]
    truncated = np.zeros(n, dtype=bool)
    active = np.arange(n)
    for _ in range(max_len + 1):
        if active.size == 0:
            break
        x = np.concatenate([a["emb"][tokens], zs[active]], axis=1)
        gates = x @ a["wx"] + h @ a["wh"] + a["b"]
        i = 1.0 / (1.0 + np.exp(-gates[:, :hl]))
        f = 1.0 / (1.0 + np.exp(-gates[:, hl:2 * hl]))
        g = np.tanh(gates[:, 2 * hl:3 * hl])
        o = 1.0 / (1.0 + np.exp(-gates[:, 3 * hl:]))
        c = f * c + i * g
        h = o * np.tanh(c)
        probs = ad.softmax(h @ a["wout"] + a["bout"])
        u = rng.random(active.size)
        cdf = probs.cumsum(axis=1)
        cdf[:, -1] = 1.0   # rounding must not push u past the last bucket
        next_tokens = (cdf > u[:, None]).argmax(axis=1)
        keep = np.ones(active.size, dtype=bool)
        for row, tok in zip(range(active.size), next_tokens):
            orig = active[row]
            if tok == end_id:
                keep[row] = False
            elif len(seqs[orig]) >= max_len:
                truncated[orig] = True
                keep[row] = False
            else:
                seqs[orig].append(int(tok))
        active = active[keep]
        tokens = next_tokens[keep]
        h, c = h[keep], c[keep]
    if active.size:
        truncated[active] = True
    return seqs, truncated


def decode_sample(params: ModelParams, z, rng, max_len=MAX_LEN,
                  begin_id=1, end_id=2):
    """Sample one token sequence from p(x | z). Returns (ids, truncated)."""
    zb = _as_batch(z, params.d)
    seqs, truncated = decode_sample_batch(params, zb, rng, max_len=max_len,
                                          begin_id=begin_id, end_id=end_id)
    return seqs[0], bool(truncated[0])
