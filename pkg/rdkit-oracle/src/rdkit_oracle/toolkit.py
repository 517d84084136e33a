"""Locate and drive the reference cheminformatics toolkit.

The toolkit is the @rdkit/rdkit WASM build running under node. It is not
bundled: we look for a directory whose node_modules contains it, taking
in order an explicit --toolkit argument, $RDKIT_ORACLE_TOOLKIT, then a
walk upward from the working directory checking <dir>/tools and <dir>
itself. No toolkit or no node is an explicit abort (ToolkitError), never
a silent fallback -- this package exists to cross-check against the
reference implementation, so running without it would be meaningless.
"""

import importlib.resources
import json
import os
import pathlib
import shutil
import subprocess


class ToolkitError(RuntimeError):
    pass


def find_node():
    node = shutil.which("node")
    if node is None:
        raise ToolkitError(
            "node not found on PATH; the reference toolkit runs under node")
    return node


def _has_toolkit(directory):
    return (directory / "node_modules" / "@rdkit" / "rdkit").is_dir()


def find_toolkit(explicit=None):
    """Return the directory whose node_modules holds the toolkit."""
    if explicit is not None:
        p = pathlib.Path(explicit)
        if _has_toolkit(p):
            return p
        raise ToolkitError(f"no node_modules/@rdkit/rdkit under {p}")
    env = os.environ.get("RDKIT_ORACLE_TOOLKIT")
    if env:
        p = pathlib.Path(env)
        if _has_toolkit(p):
            return p
        raise ToolkitError(
            f"RDKIT_ORACLE_TOOLKIT={env} has no node_modules/@rdkit/rdkit")
    d = pathlib.Path.cwd()
    while True:
        for candidate in (d / "tools", d):
            if _has_toolkit(candidate):
                return candidate
        if d.parent == d:
            raise ToolkitError(
                "reference toolkit not found: set RDKIT_ORACLE_TOOLKIT or "
                "pass --toolkit (a directory whose node_modules contains "
                "@rdkit/rdkit)")
        d = d.parent


def _driver_path():
    return importlib.resources.files("rdkit_oracle").joinpath("driver.mjs")


def _patterns_path():
    return importlib.resources.files("rdkit_oracle").joinpath("patterns.json")


def featurize_file(smiles_path, toolkit=None, node=None, timeout=3600):
    """Run the driver over a SMILES file; one feature dict per input line."""
    toolkit_dir = toolkit if toolkit is not None else find_toolkit()
    node_bin = node if node is not None else find_node()
    cmd = [node_bin, str(_driver_path()), str(toolkit_dir),
           str(_patterns_path()), str(smiles_path)]
    proc = subprocess.run(cmd, capture_output=True, text=True,
                          timeout=timeout)
    if proc.returncode != 0:
        raise ToolkitError(
            f"toolkit driver failed (exit {proc.returncode}): "
            f"{proc.stderr.strip()[:2000]}")
    rows = [json.loads(line) for line in proc.stdout.splitlines() if line]
    n_in = _count_lines(smiles_path)
    if len(rows) != n_in:
        raise ToolkitError(
            f"driver emitted {len(rows)} rows for {n_in} input lines")
    return rows


def _count_lines(path):
    n = 0
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            n += chunk.count(b"\n")
        f.seek(0, os.SEEK_END)
        size = f.tell()
    if size:
        with open(path, "rb") as f:
            f.seek(size - 1)
            if f.read(1) != b"\n":
                n += 1
    return n
