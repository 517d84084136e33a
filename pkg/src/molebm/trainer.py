"""Maximum-likelihood training of the tilted prior and the decoder.

Per batch: one posterior chain per example yields z+, an equal count of
prior chains yields z-. The prior tilt descends mean f(z-) - mean f(z+)
(its true loss has no tractable value, only this gradient); the decoder
descends the mean teacher-forced NLL at the shared z+. Both gradients
come out of a single backward pass over one fused scalar, then a global-
norm clip and per-group Adam updates (separate learning rates).

Every random draw derives from (seed, purpose tag, counter), never from a
mutable stream, so a run resumed from saved counters continues bitwise
identically to the uninterrupted run. The saved state is three files in
the run directory: model.ckpt, trainer_state.npz (Adam moments), and
meta.json (counters).
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, field
from types import SimpleNamespace
from typing import Optional

import numpy as np

from . import autodiff as ad
from . import langevin as lv
from . import model as md
from .chem.vocab import Vocabulary
from .data import PAD, load_lines, pad_batch

log = logging.getLogger(__name__)

# Stream tags: shuffle order, posterior chains, prior chains.
_TAG_SHUFFLE, _TAG_POS, _TAG_NEG = 0x51AF, 0x905E, 0x9E6A

METRIC_COLUMNS = ("step", "recon_nll", "energy_pos", "energy_neg",
                  "grad_norm_alpha", "grad_norm_beta", "wallclock_s")


class NumericError(RuntimeError):
    """Non-finite loss or gradient; training aborted, last checkpoint kept."""


def derived_seed(seed, tag, counter):
    """Independent integer seed for one purpose at one step."""
    ss = np.random.SeedSequence((seed, tag, counter))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class TrainConfig:
    data_dir: str = "runs/data"
    out_dir: str = "runs/train"
    batch_size: int = 256
    epochs: int = 30
    max_steps: Optional[int] = None
    lr_alpha: float = 1e-4
    lr_beta: float = 1e-3
    clip_norm: float = 5.0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    prior_k: int = 20
    prior_s: float = 0.4
    posterior_k: int = 40
    posterior_s: float = 0.1
    d: int = 32
    mlp_hidden: int = 200
    lstm_hidden: int = 1024
    embed_dim: int = 512
    seed: int = 0
    checkpoint_every: int = 200
    log_every: int = 10
    freeze_alpha: bool = False
    length_bucketing: bool = True
    early_stop_acc: Optional[float] = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        for name in ("lr_alpha", "lr_beta", "clip_norm"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def prior_cfg(self):
        return lv.LangevinConfig(K=self.prior_k, s=self.prior_s,
                                 target=lv.PRIOR_TARGET)

    def posterior_cfg(self):
        return lv.LangevinConfig(K=self.posterior_k, s=self.posterior_s,
                                 target=lv.POSTERIOR_TARGET)


@dataclass
class TrainState:
    params: md.ModelParams
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    adam_t: int = 0
    step: int = 0
    epoch: int = 0
    pos: int = 0            # next batch index within the current epoch

    @classmethod
    def fresh(cls, params):
        zeros = lambda: {k: np.zeros_like(a) for k, a in params.arrays.items()}
        return cls(params=params, m=zeros(), v=zeros())


# ------------------------------------------------------------- persistence

def save_state(state: TrainState, out_dir):
    os.makedirs(out_dir, exist_ok=True)

    def _atomic(name, writer):
        tmp = os.path.join(out_dir, name + ".tmp")
        writer(tmp)
        os.replace(tmp, os.path.join(out_dir, name))

    _atomic("model.ckpt", state.params.save)
    moments = {f"m_{k}": state.m[k] for k in md.ALL_FIELDS}
    moments.update({f"v_{k}": state.v[k] for k in md.ALL_FIELDS})

    def _write_npz(path):
        # File handle, not path: savez must not append its own suffix.
        with open(path, "wb") as f:
            np.savez(f, **moments)

    _atomic("trainer_state.npz", _write_npz)
    meta = {"format": 1, "adam_t": state.adam_t, "step": state.step,
            "epoch": state.epoch, "pos": state.pos}
    _atomic("meta.json", lambda p: open(p, "w").write(json.dumps(meta) + "\n"))


def load_state(out_dir) -> TrainState:
    params = md.ModelParams.load(os.path.join(out_dir, "model.ckpt"))
    with np.load(os.path.join(out_dir, "trainer_state.npz")) as z:
        m = {k: z[f"m_{k}"].copy() for k in md.ALL_FIELDS}
        v = {k: z[f"v_{k}"].copy() for k in md.ALL_FIELDS}
    with open(os.path.join(out_dir, "meta.json")) as f:
        meta = json.load(f)
    if meta.get("format") != 1:
        raise md.CheckpointError(f"{out_dir}: unsupported trainer state")
    return TrainState(params=params, m=m, v=v, adam_t=meta["adam_t"],
                      step=meta["step"], epoch=meta["epoch"], pos=meta["pos"])


def has_state(out_dir):
    return all(os.path.exists(os.path.join(out_dir, n))
               for n in ("model.ckpt", "trainer_state.npz", "meta.json"))


# ---------------------------------------------------------------- gradients

def _bind_split(params, freeze_alpha):
    wrapped = {}
    for k, a in params.arrays.items():
        trainable = (k in md.DECODER_FIELDS) or \
                    (k in md.PRIOR_FIELDS and not freeze_alpha)
        wrapped[k] = ad.param(a) if trainable else ad.constant(a)
    return SimpleNamespace(**wrapped)


def grad_alpha(params, z_pos, z_neg):
    """Gradient of mean f(z-) - mean f(z+) w.r.t. the energy weights.

    Descending it raises f on posterior samples and lowers it on prior
    samples; zero exactly when the two sample sets coincide.
    """
    ns = _bind_split(params, freeze_alpha=False)
    n_pos, n_neg = z_pos.shape[0], z_neg.shape[0]
    e_neg = ad.sum_all(md.energy_node(ns, ad.constant(z_neg)))
    e_pos = ad.sum_all(md.energy_node(ns, ad.constant(z_pos)))
    loss = ad.scale(e_neg, 1.0 / n_neg) + ad.scale(e_pos, -1.0 / n_pos)
    ad.backward(loss)
    return {k: getattr(ns, k).grad.copy() for k in md.PRIOR_FIELDS}


def grad_beta(params, ids, pad_id, z_pos):
    """Gradient of the mean teacher-forced NLL at fixed z+, plus stats."""
    ns = _bind_split(params, freeze_alpha=True)
    n = ids.shape[0]
    nll, per_row, correct, live = md.decode_logp_node(
        ns, params.lstm_hidden, ad.constant(z_pos), ids, pad_id)
    loss = ad.scale(nll, 1.0 / n)
    ad.backward(loss)
    grads = {k: getattr(ns, k).grad.copy() for k in md.DECODER_FIELDS}
    stats = {"recon_nll": float(-per_row.mean()),
             "acc": correct / max(1, live)}
    return grads, stats


def _global_norm(grads):
    total = 0.0
    for g in grads.values():
        total += float(np.sum(g * g))
    return np.sqrt(total)


def train_step(state: TrainState, ids, cfg: TrainConfig):
    """One fused update. ids is the padded (B, T) batch. Returns metrics."""
    t0 = time.perf_counter()
    params = state.params
    n = ids.shape[0]
    pos_seed = derived_seed(cfg.seed, _TAG_POS, state.step)
    neg_seed = derived_seed(cfg.seed, _TAG_NEG, state.step)
    z_pos, post_stats = lv.sample_posterior(
        params, ids, PAD, cfg.posterior_cfg(), seed=pos_seed,
        block_size=min(n, 256))
    z_neg, _ = lv.sample_prior(params, n, cfg.prior_cfg(), seed=neg_seed)
    for name, z in (("posterior", z_pos), ("prior", z_neg)):
        if not np.all(np.isfinite(z)):
            raise NumericError(
                f"non-finite {name} latents at step {state.step}")

    ns = _bind_split(params, cfg.freeze_alpha)
    zp, zn = ad.constant(z_pos), ad.constant(z_neg)
    e_pos = md.energy_node(ns, zp)
    e_neg = md.energy_node(ns, zn)
    nll, per_row, correct, live = md.decode_logp_node(
        ns, params.lstm_hidden, zp, ids, PAD)
    loss = ad.scale(ad.sum_all(e_neg), 1.0 / n) + \
        ad.scale(ad.sum_all(e_pos), -1.0 / n) + ad.scale(nll, 1.0 / n)
    if not np.isfinite(loss.value):
        raise NumericError(f"non-finite loss at step {state.step}")
    ad.backward(loss)

    trainable = list(md.DECODER_FIELDS)
    if not cfg.freeze_alpha:
        trainable += list(md.PRIOR_FIELDS)
    grads = {k: getattr(ns, k).grad for k in trainable}
    for k, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for {k} at step {state.step}")

    gn_alpha = _global_norm({k: grads[k] for k in grads if k in md.PRIOR_FIELDS})
    gn_beta = _global_norm({k: grads[k] for k in grads if k in md.DECODER_FIELDS})
    gn = np.sqrt(gn_alpha ** 2 + gn_beta ** 2)
    scale = min(1.0, cfg.clip_norm / gn) if gn > 0 else 1.0

    state.adam_t += 1
    b1, b2, eps = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps
    bc1 = 1.0 - b1 ** state.adam_t
    bc2 = 1.0 - b2 ** state.adam_t
    for k in trainable:
        g = grads[k] * scale
        lr = cfg.lr_alpha if k in md.PRIOR_FIELDS else cfg.lr_beta
        state.m[k] = b1 * state.m[k] + (1 - b1) * g
        state.v[k] = b2 * state.v[k] + (1 - b2) * g * g
        params.arrays[k] -= lr * (state.m[k] / bc1) / \
            (np.sqrt(state.v[k] / bc2) + eps)

    return {
        "step": state.step,
        "recon_nll": float(-per_row.mean()),
        "energy_pos": float(e_pos.value.mean()),
        "energy_neg": float(e_neg.value.mean()),
        "grad_norm_alpha": gn_alpha,   # raw, before clipping
        "grad_norm_beta": gn_beta,
        "wallclock_s": time.perf_counter() - t0,
        "acc": correct / max(1, live),
        "posterior_score_norm": float(post_stats["score_norm"][-1]),
    }


# ------------------------------------------------------------- epoch loop

def _epoch_batches(lengths, cfg, epoch):
    """Deterministic batch index lists for one epoch.

    Seeded shuffle; with length bucketing the shuffled order is then
    stably sorted by sequence length, cut into batches, and the batch
    order reshuffled — compute drops with the padding, composition stays
    seeded-random within near-equal lengths.
    """
    rng = np.random.default_rng(
        np.random.SeedSequence((cfg.seed, _TAG_SHUFFLE, epoch)))
    perm = rng.permutation(len(lengths))
    if cfg.length_bucketing:
        perm = perm[np.argsort(lengths[perm], kind="stable")]
    batches = [perm[i:i + cfg.batch_size]
               for i in range(0, len(perm), cfg.batch_size)]
    if cfg.length_bucketing:
        rng.shuffle(batches)
    return batches


def _append_metrics(path, row, new_file):
    with open(path, "a") as f:
        if new_file:
            f.write(",".join(METRIC_COLUMNS) + "\n")
        f.write(",".join(
            str(row["step"]) if c == "step" else f"{row[c]:.8g}"
            for c in METRIC_COLUMNS) + "\n")


def train(cfg: TrainConfig, resume=False) -> TrainState:
    lines = load_lines(os.path.join(cfg.data_dir, "train.txt"))
    vocab = Vocabulary.load(os.path.join(cfg.data_dir, "vocab.txt"))
    seqs = [vocab.encode(s) for s in lines]
    lengths = np.array([len(s) for s in seqs])
    log.info("training on %d sequences, vocab %d, seed %d",
             len(seqs), len(vocab), cfg.seed)

    resuming = resume and has_state(cfg.out_dir)
    if resuming:
        state = load_state(cfg.out_dir)
        if state.params.vocab_size != len(vocab):
            raise md.CheckpointError("checkpoint vocabulary size mismatch")
        log.info("resuming at step %d (epoch %d, batch %d)",
                 state.step, state.epoch, state.pos)
    else:
        params = md.ModelParams.init(
            vocab_size=len(vocab), d=cfg.d, mlp_hidden=cfg.mlp_hidden,
            lstm_hidden=cfg.lstm_hidden, embed_dim=cfg.embed_dim,
            seed=cfg.seed)
        state = TrainState.fresh(params)

    metrics_path = os.path.join(cfg.out_dir, "metrics.csv")
    os.makedirs(cfg.out_dir, exist_ok=True)
    if not resuming and os.path.exists(metrics_path):
        os.remove(metrics_path)

    stop = False
    while state.epoch < cfg.epochs and not stop:
        batches = _epoch_batches(lengths, cfg, state.epoch)
        while state.pos < len(batches) and not stop:
            if cfg.max_steps is not None and state.step >= cfg.max_steps:
                stop = True
                break
            batch = batches[state.pos]
            ids = pad_batch([seqs[i] for i in batch])
            metrics = train_step(state, ids, cfg)
            state.step += 1
            state.pos += 1
            _append_metrics(metrics_path, metrics,
                            new_file=not os.path.exists(metrics_path))
            if cfg.log_every and state.step % cfg.log_every == 0:
                log.info(
                    "step %d  nll %.3f  acc %.3f  f+ %.3f  f- %.3f  %.1fs",
                    state.step, metrics["recon_nll"], metrics["acc"],
                    metrics["energy_pos"], metrics["energy_neg"],
                    metrics["wallclock_s"])
            if cfg.checkpoint_every and state.step % cfg.checkpoint_every == 0:
                save_state(state, cfg.out_dir)
            if cfg.max_steps is not None and state.step >= cfg.max_steps:
                stop = True
            if cfg.early_stop_acc is not None and \
                    metrics["acc"] >= cfg.early_stop_acc:
                log.info("accuracy target %.3f reached at step %d",
                         cfg.early_stop_acc, state.step)
                stop = True
        if state.pos >= len(batches):
            state.epoch += 1
            state.pos = 0
            save_state(state, cfg.out_dir)
    save_state(state, cfg.out_dir)
    return state
