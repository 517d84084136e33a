"""Command-line entry points.

  rdkit-oracle certify <in> <out>            certify SMILES, write OracleRow CSV
  rdkit-oracle compare <native> <oracle> <report>
                                             agreement report (+ optional KDEs)
  rdkit-oracle fit-table <corpus> <out>      refit the SAS fragment table

Exit codes: 0 success, 2 usage, 3 data or toolkit problem.
"""

import argparse
import csv
import pathlib
import sys

from . import compare as cmp
from . import qed as qd
from . import sas
from .toolkit import ToolkitError, featurize_file, find_toolkit

ORACLE_COLUMNS = ["smiles", "oracle_valid", "oracle_canonical",
                  "oracle_logp", "oracle_qed", "oracle_sas"]


def _qed_props(feat):
    return {"MW": feat["amw"], "ALOGP": feat["logp"], "HBA": feat["hba"],
            "HBD": feat["hbd"], "PSA": feat["tpsa"], "ROTB": feat["rotb"],
            "AROM": feat["arom"], "ALERTS": feat["alerts"]}


def _read_lines(path):
    with open(path) as f:
        return [ln.rstrip("\n") for ln in f]


def _cmd_certify(args):
    table = sas.load_table(args.table)
    toolkit = find_toolkit(args.toolkit)
    lines = _read_lines(args.infile)
    feats = featurize_file(args.infile, toolkit=toolkit)
    with open(args.outfile, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(ORACLE_COLUMNS)
        for line, feat in zip(lines, feats):
            if not feat.get("valid"):
                w.writerow([line, 0, "", "", "", ""])
                continue
            q = qd.qed(_qed_props(feat))
            s = sas.sa_score(feat, table)
            w.writerow([line, 1, feat["canonical"], f"{feat['logp']:.6g}",
                        f"{q:.6f}", f"{s:.6f}"])
    n_valid = sum(1 for f in feats if f.get("valid"))
    print(f"certified {len(lines)} lines: {n_valid} valid, "
          f"{len(lines) - n_valid} invalid -> {args.outfile}")


def _cmd_compare(args):
    native = cmp.load_native(args.native)
    oracle = cmp.load_oracle(args.oracle)
    report = cmp.compare_rows(native, oracle)
    with open(args.report, "w") as f:
        f.write(report.format())
    sys.stdout.write(report.format())
    if args.kde:
        source = args.source or pathlib.Path(args.oracle).stem
        for prop, col in (("qed", "oracle_qed"), ("sas", "oracle_sas")):
            vals = [float(r[col]) for r in oracle
                    if r.get("oracle_valid") == "1" and r.get(col)]
            if not vals:
                raise ValueError(f"--kde: no {prop} values in {args.oracle}")
            out = f"{args.kde}_{prop}.csv"
            cmp.write_kde(out, vals, source, prop)
            print(f"wrote {out} ({len(vals)} values)")


def _cmd_fit_table(args):
    toolkit = find_toolkit(args.toolkit)
    feats = featurize_file(args.corpus, toolkit=toolkit)
    table = sas.fit_table(feats)
    sas.save_table(table, args.outfile)
    print(f"fitted {len(table.scores)} fragment scores "
          f"(calibration [{table.raw_min:.3f}, {table.raw_max:.3f}]) "
          f"-> {args.outfile}")


def main(argv=None):
    p = argparse.ArgumentParser(prog="rdkit-oracle")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("certify", help="verdicts + properties for a SMILES file")
    s.add_argument("infile")
    s.add_argument("outfile")
    s.add_argument("--toolkit", help="directory whose node_modules has the toolkit")
    s.add_argument("--table", help="alternate SAS fragment table")
    s.set_defaults(func=_cmd_certify)

    s = sub.add_parser("compare", help="native-vs-oracle agreement report")
    s.add_argument("native")
    s.add_argument("oracle")
    s.add_argument("report")
    s.add_argument("--kde", metavar="PREFIX",
                   help="also write PREFIX_qed.csv / PREFIX_sas.csv densities")
    s.add_argument("--source", help="source label for the KDE rows")
    s.set_defaults(func=_cmd_compare)

    s = sub.add_parser("fit-table", help="refit the SAS fragment table")
    s.add_argument("corpus")
    s.add_argument("outfile")
    s.add_argument("--toolkit")
    s.set_defaults(func=_cmd_fit_table)

    args = p.parse_args(argv)
    try:
        args.func(args)
    except (ToolkitError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
