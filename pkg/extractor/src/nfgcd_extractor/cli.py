"""Command line for feature extraction.

Exit codes: 0 success, 1 usage error, 2 data/weights error.
"""

from __future__ import annotations

import argparse
import sys

from .extract import extract
from .spec import DATASET_KINDS, DEFAULT_BACKBONE, ExtractSpec


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> _Parser:
    parser = _Parser(prog="nfgcd-extract", description=__doc__.splitlines()[0])
    parser.add_argument("--dataset", required=True, choices=DATASET_KINDS)
    parser.add_argument("--root", dest="data_root", default="data",
                        help="dataset location (cache root or class-directory tree)")
    parser.add_argument("--split", choices=("train", "test"), default="test")
    parser.add_argument("--backbone", default=DEFAULT_BACKBONE)
    parser.add_argument("--batch-size", type=int, default=64)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--limit", type=int, default=None,
                        help="cap on the number of images, for smoke runs")
    parser.add_argument("--out", required=True)
    return parser


def run_cli(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        spec = ExtractSpec(
            dataset=args.dataset,
            output_path=args.out,
            data_root=args.data_root,
            split=args.split,
            backbone=args.backbone,
            batch_size=args.batch_size,
            device=args.device,
            limit=args.limit,
        )
    except ValueError as exc:
        print(f"nfgcd-extract: {exc}", file=sys.stderr)
        return 1
    try:
        summary = extract(spec)
    except (FileNotFoundError, RuntimeError, OSError, ValueError) as exc:
        print(f"nfgcd-extract: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {summary.output_path}: n={summary.n}, d={summary.dim}, "
        f"c={summary.n_classes}"
    )
    return 0


def main():
    sys.exit(run_cli())
