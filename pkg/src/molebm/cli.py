"""Command-line entry point.

Subcommands: ingest, train, sample, eval, props, canon, check.

Settings resolve in three layers: dataclass defaults, then a flat
key=value config file (--config), then explicit command-line flags. Every
config key can be overridden on the command line; there are no
environment variables. Exit codes: 0 success, 2 usage, 3 bad data,
4 numeric failure, 5 I/O.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
import typing

import numpy as np

from . import autodiff as ad
from . import evalmetrics as ev
from . import langevin as lv
from . import model as md
from . import trainer as tr
from .chem.crippen import logp
from .chem.graph import ParseError, parse_smiles
from .chem.tokens import TokenizeError
from .chem.valence import check_valence
from .chem.vocab import Vocabulary, VocabError
from .data import DataError, ingest, load_lines

log = logging.getLogger("molebm")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4, 5


def read_config(path):
    """Flat key=value file; blank lines and '#' comments ignored."""
    out = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def _coerce(text, typ):
    if typ is bool:
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise DataError(f"not a boolean: {text!r}")
    origin = typing.get_origin(typ)
    if origin is typing.Union:          # Optional[int] and friends
        args = [a for a in typing.get_args(typ) if a is not type(None)]
        if text.lower() in ("none", ""):
            return None
        return _coerce(text, args[0])
    return typ(text)


def build_train_config(args, file_cfg):
    """Defaults <- config file <- explicit CLI flags, field by field."""
    values = {}
    for f in dataclasses.fields(tr.TrainConfig):
        if f.name in file_cfg:
            values[f.name] = _coerce(file_cfg[f.name], _field_type(f))
        cli = getattr(args, f.name, None)
        if cli is not None:
            values[f.name] = _coerce(cli, _field_type(f))
    unknown = set(file_cfg) - {f.name for f in dataclasses.fields(tr.TrainConfig)}
    if unknown:
        raise DataError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return tr.TrainConfig(**values)


def _field_type(f):
    # dataclass field types arrive as strings under `from __future__ import
    # annotations`; resolve the handful we use.
    table = {"int": int, "float": float, "str": str, "bool": bool,
             "Optional[int]": typing.Optional[int],
             "Optional[float]": typing.Optional[float]}
    return table.get(f.type, f.type) if isinstance(f.type, str) else f.type


def build_parser():
    p = argparse.ArgumentParser(
        prog="molebm",
        description="Latent-space energy-based prior model over SMILES.")
    p.add_argument("--threads", type=int, default=1,
                   help="worker cap (this build is single-threaded)")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("ingest", help="split corpus, build vocabulary/index")
    s.add_argument("corpus")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--val-frac", type=float, default=0.05)

    s = sub.add_parser("train", help="fit the prior tilt and decoder")
    s.add_argument("--config", help="flat key=value settings file")
    s.add_argument("--resume", action="store_true",
                   help="continue from the state in out_dir")
    for f in dataclasses.fields(tr.TrainConfig):
        s.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name,
                       default=None, metavar="V")

    s = sub.add_parser("sample", help="draw molecules from the prior")
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--vocab", required=True)
    s.add_argument("--n", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="output file (default stdout)")
    s.add_argument("--max-len", type=int, default=md.MAX_LEN)
    s.add_argument("--prior-k", type=int, default=lv.PRIOR_DEFAULTS.K)
    s.add_argument("--prior-s", type=float, default=lv.PRIOR_DEFAULTS.s)
    s.add_argument("--trace", help="write chain diagnostics CSV here")

    s = sub.add_parser("eval", help="generation report against a checkpoint")
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--vocab", required=True)
    s.add_argument("--train-index", required=True)
    s.add_argument("--n", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--prior-k", type=int, default=lv.PRIOR_DEFAULTS.K)
    s.add_argument("--prior-s", type=float, default=lv.PRIOR_DEFAULTS.s)

    s = sub.add_parser("props", help="native logP property table / KDE export")
    s.add_argument("--input", nargs=2, action="append", required=True,
                   metavar=("FILE", "SOURCE"),
                   help="SMILES file and its source tag; repeatable")
    s.add_argument("--out", required=True, help="property table CSV")
    s.add_argument("--kde", help="optional KDE grid CSV")

    s = sub.add_parser("canon", help="canonical spelling of SMILES")
    s.add_argument("smiles", nargs="*")
    s.add_argument("--in", dest="infile", help="read SMILES lines from file")

    s = sub.add_parser("check", help="validity verdict for SMILES")
    s.add_argument("smiles", nargs="*")
    s.add_argument("--in", dest="infile", help="read SMILES lines from file")
    s.add_argument("--csv", help="also write per-line verdict CSV "
                               "(smiles,valid,canonical,logp)")
    return p


def _inputs(args):
    lines = list(args.smiles)
    if args.infile:
        lines += load_lines(args.infile)
    if not lines:
        raise DataError("no SMILES given (positional or --in)")
    return lines


def _cmd_ingest(args):
    report = ingest(args.corpus, args.out_dir, seed=args.seed,
                    val_frac=args.val_frac)
    log.info("seed %d", args.seed)
    print(report.to_json())


def _cmd_train(args):
    file_cfg = read_config(args.config) if args.config else {}
    cfg = build_train_config(args, file_cfg)
    log.info("seed %d", cfg.seed)
    state = tr.train(cfg, resume=args.resume)
    print(json.dumps({"steps": state.step, "epochs": state.epoch,
                      "out_dir": cfg.out_dir}))


def _load_model(args):
    params = md.ModelParams.load(args.checkpoint)
    vocab = Vocabulary.load(args.vocab)
    if params.vocab_size != len(vocab):
        raise DataError(
            f"checkpoint vocabulary size {params.vocab_size} != "
            f"{len(vocab)} in {args.vocab}")
    return params, vocab


def _cmd_sample(args):
    params, vocab = _load_model(args)
    log.info("seed %d", args.seed)
    cfg = lv.LangevinConfig(K=args.prior_k, s=args.prior_s,
                            target=lv.PRIOR_TARGET)
    zs, stats = lv.sample_prior(params, args.n, cfg, seed=args.seed)
    rng = np.random.default_rng(
        np.random.SeedSequence((args.seed, ev.DECODE_TAG)))
    seqs, _ = md.decode_sample_batch(params, zs, rng, max_len=args.max_len)
    text = "".join(ev.render_ids(vocab, ids) + "\n" for ids in seqs)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    if args.trace:
        lv.write_trace(args.trace, stats)


def _cmd_eval(args):
    params, vocab = _load_model(args)
    log.info("seed %d", args.seed)
    train_index = set(load_lines(args.train_index))
    cfg = lv.LangevinConfig(K=args.prior_k, s=args.prior_s,
                            target=lv.PRIOR_TARGET)
    report, samples = ev.generate_and_score(
        params, vocab, args.n, train_index, seed=args.seed, prior_cfg=cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    ev.write_report(os.path.join(args.out_dir, "report.csv"), report)
    ev.write_samples(os.path.join(args.out_dir, "samples.csv"), samples)
    for k, v in report.rows():
        print(f"{k} = {v:.6g}" if isinstance(v, float) else f"{k} = {v}")


def _cmd_props(args):
    all_rows = []
    kde_samples = {}
    for path, source in args.input:
        rows, skipped = ev.property_table(load_lines(path), source)
        log.info("%s: %d rows, %d skipped", path, len(rows), skipped)
        all_rows.extend(rows)
        kde_samples[("logp", source)] = [lp for _, lp, _ in rows]
    ev.write_property_table(args.out, all_rows)
    if args.kde:
        ev.write_kde(args.kde, kde_samples)


def _cmd_canon(args):
    for s in _inputs(args):
        _, valid, canon = ev.classify(s)
        print(canon if valid else f"invalid: {_reason(s)}")


def _cmd_check(args):
    rows = []
    for s in _inputs(args):
        _, valid, canon = ev.classify(s)
        print("valid" if valid else f"invalid: {_reason(s)}")
        if args.csv:
            lp = f"{logp(parse_smiles(s)).value:.6g}" if valid else ""
            rows.append((s, int(valid), canon if valid else "", lp))
    if args.csv:
        with open(args.csv, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["smiles", "valid", "canonical", "logp"])
            w.writerows(rows)


def _reason(s):
    try:
        g = parse_smiles(s)
    except (TokenizeError, ParseError) as e:
        return e
    verdict = check_valence(g)
    return verdict.reason if not verdict.ok else "valid"


_DISPATCH = {"ingest": _cmd_ingest, "train": _cmd_train,
             "sample": _cmd_sample, "eval": _cmd_eval, "props": _cmd_props,
             "canon": _cmd_canon, "check": _cmd_check}


def main(argv=None):
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("--threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        _DISPATCH[args.cmd](args)
        return EXIT_OK
    except (DataError, VocabError, TokenizeError, ParseError,
            md.CheckpointError) as e:
        log.error("%s", e)
        return EXIT_DATA
    except (tr.NumericError, lv.LangevinError, ad.NonFiniteError) as e:
        log.error("%s", e)
        return EXIT_NUMERIC
    except OSError as e:
        log.error("%s", e)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
