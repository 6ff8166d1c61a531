"""The ``forge-insights`` command: offline reports and corpus validation."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .insights.corpus import validate_corpus
from .insights.reports import (
    InsightsError,
    behavior_categories,
    creation_heatmap,
    load_category_mapping,
    load_exports,
    reading_by_hour,
    render_table,
)

REPORT_KINDS = ("creation-heatmap", "reading-by-hour", "behavior-categories")


def cmd_report(args: argparse.Namespace) -> int:
    try:
        exports = load_exports(args.export)
        if args.kind == "creation-heatmap":
            report = creation_heatmap(exports)
        elif args.kind == "reading-by-hour":
            report = reading_by_hour(exports)
        else:
            if not args.categories:
                print("behavior-categories needs --categories <mapping.json>",
                      file=sys.stderr)
                return 2
            report = behavior_categories(exports, load_category_mapping(args.categories))
    except InsightsError as err:
        print(f"error ({err.code}): {err}", file=sys.stderr)
        return 2
    print(render_table(report))
    if args.out:
        Path(args.out).write_text(
            json.dumps(report, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        print(f"wrote series to {args.out}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    summary = validate_corpus(args.directory)
    print(summary.render())
    return 0 if summary.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="forge-insights",
                                     description="offline analysis of exported logs")
    sub = parser.add_subparsers(dest="command", required=True)

    report = sub.add_parser("report", help="render an engagement report")
    report.add_argument("export", help="export JSON file (one export or a list)")
    report.add_argument("--kind", required=True, choices=REPORT_KINDS)
    report.add_argument("--categories", default=None,
                        help="category mapping JSON for behavior-categories")
    report.add_argument("--out", default=None, help="also write the series as JSON")
    report.set_defaults(func=cmd_report)

    validate = sub.add_parser("validate", help="validate a directory of story files")
    validate.add_argument("directory")
    validate.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
