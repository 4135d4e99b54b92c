"""Command-line entry point: `featexport <job.json>`."""

from __future__ import annotations

import argparse
import logging
import sys

from .export import JobError, export, load_job


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="featexport",
        description="Export annotated videos as viewadapt feature containers.",
    )
    parser.add_argument("job", help="JSON job file: encoder, window params, output, videos+events")
    parser.add_argument("--verbose", action="store_true", help="log per-event skips too")
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        job = load_job(args.job)
        result = export(job)
    except (JobError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {result.records_written} records to {job.output} "
        f"({result.events_skipped} events skipped, {result.items_skipped} items skipped)"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
