"""Shared CSV loading and schema checks for the plot scripts.

The plot scripts are read-only consumers of the solver package's CSV
outputs; they communicate with it exclusively through these files.
"""

import csv

import matplotlib

matplotlib.use("Agg")


class SchemaError(Exception):
    """Input CSV does not match the expected column layout."""


def _parse_cell(text):
    if text == "":
        return None
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return float(text)
    except ValueError:
        return text


def read_rows(path, required_columns):
    """Load a CSV into typed row dicts, enforcing the required columns."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required_columns if c not in header]
        if missing:
            raise SchemaError(
                f"{path}: missing column(s) {', '.join(missing)}; "
                f"found {', '.join(header)}"
            )
        return [{k: _parse_cell(v) for k, v in row.items()} for row in reader]


def save_figure(fig, out_path):
    fig.savefig(out_path, bbox_inches="tight")


def run_cli(parser_args, render, required_columns, default_suffix="_plot.svg"):
    """Common entry point: parse args, read, render, save; exit 1 on schema."""
    import argparse
    import sys

    parser = argparse.ArgumentParser(description=render.__doc__)
    parser.add_argument("csv", help="input CSV file")
    parser.add_argument("-o", "--output", default=None,
                        help="output image path (.svg or .png)")
    args = parser.parse_args(parser_args)
    out = args.output or args.csv.rsplit(".", 1)[0] + default_suffix
    try:
        rows = read_rows(args.csv, required_columns)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    fig = render(rows)
    save_figure(fig, out)
    print(f"wrote {out}")
    return 0
