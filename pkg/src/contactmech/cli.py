"""``contactmech <experiment> [--key value]... [--config path] [--out dir]``

Writes ``<experiment>_<label>.csv`` and ``<experiment>_report.txt`` into the
output directory (``--out``, else ``$CONTACTMECH_OUT``, else the cwd). Exit
status is 0 iff every check of the experiment passed.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from .core import ContractViolation, NumericalError
from .experiments import PARAMETERS, ExperimentResult, ExperimentSpec, run


def format_value(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def read_config(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ContractViolation(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def parse_pairs(tokens) -> dict:
    """``--key value`` / ``--key=value`` tokens to a dict."""
    out = {}
    it = iter(tokens)
    for tok in it:
        if not tok.startswith("--"):
            raise ContractViolation(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            try:
                value = next(it)
            except StopIteration:
                raise ContractViolation(f"missing value for --{key}") from None
        out[key] = value
    return out


def write_outputs(result: ExperimentResult, out_dir: Path) -> list:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for label, table in result.tables.items():
        path = out_dir / f"{result.name}_{label}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(table.header)
            for row in table.rows:
                w.writerow([format_value(v) for v in row])
        written.append(path)
    path = out_dir / f"{result.name}_report.txt"
    path.write_text("\n".join(result.report) + "\n")
    written.append(path)
    return written


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="contactmech",
        allow_abbrev=False,
        description="Contact Hamiltonian mechanics experiments.",
        epilog="Experiment parameters: "
        + "; ".join(f"{name}: {', '.join(keys)}" for name, keys in PARAMETERS.items()),
    )
    ap.add_argument("experiment", choices=sorted(PARAMETERS))
    ap.add_argument("--config", help="file of key=value lines")
    ap.add_argument("--out", help="output directory (default $CONTACTMECH_OUT or .)")
    return ap


def main(argv=None) -> int:
    args, rest = build_parser().parse_known_args(argv)
    try:
        raw = read_config(args.config) if args.config else {}
        raw.update(parse_pairs(rest))
        spec = ExperimentSpec.parse(args.experiment, raw)
        result = run(spec)
        out_dir = Path(args.out or os.environ.get("CONTACTMECH_OUT") or ".")
        write_outputs(result, out_dir)
    except (ContractViolation, NumericalError, OSError) as exc:
        print(f"contactmech: error: {exc}", file=sys.stderr)
        return 2
    print("\n".join(result.report))
    if not result.ok:
        failed = next(d for d, p in result.checks if not p)
        print(f"contactmech: check failed: {failed}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
