#!/usr/bin/env python3
"""Convert the Statlib Irish wind file into the panel CSV read by kronocov_cli.

Input rows are whitespace separated: two-digit year, month, day, then one daily
mean speed per station in the order RPT VAL ROS KIL SHA BIR DUB CLA MUL CLO BEL
MAL. A leading header row is skipped if present. Output is
``date,<station>,...`` with ISO dates.

By default Rosslare (RPT) is dropped, leaving 11 stations. Use --stations to
pick a different subset or order.
"""

import argparse
import csv
import datetime
import sys

STATIONS = ["RPT", "VAL", "ROS", "KIL", "SHA", "BIR", "DUB", "CLA", "MUL", "CLO", "BEL", "MAL"]
DEFAULT_DROP = ["RPT"]


def parse_args(argv):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("input", help="Statlib wind.data file ('-' for stdin)")
    ap.add_argument("output", help="panel CSV to write ('-' for stdout)")
    ap.add_argument("--stations", help="comma-separated station codes to keep, in output order")
    ap.add_argument("--century", type=int, default=1900, help="added to two-digit years (default 1900)")
    return ap.parse_args(argv)


def read_rows(lines, century):
    for lineno, line in enumerate(lines, 1):
        fields = line.split()
        if not fields:
            continue
        if not fields[0].lstrip("-").isdigit():
            if lineno == 1:
                continue
            raise ValueError(f"line {lineno}: expected a numeric year, got {fields[0]!r}")
        if len(fields) != 3 + len(STATIONS):
            raise ValueError(f"line {lineno}: expected {3 + len(STATIONS)} fields, got {len(fields)}")
        year = int(fields[0])
        if year < 100:
            year += century
        try:
            date = datetime.date(year, int(fields[1]), int(fields[2]))
            speeds = [float(v) for v in fields[3:]]
        except ValueError as err:
            raise ValueError(f"line {lineno}: {err}") from None
        yield date, speeds


def main(argv=None):
    args = parse_args(argv if argv is not None else sys.argv[1:])
    if args.stations:
        keep = [s.strip().upper() for s in args.stations.split(",") if s.strip()]
        unknown = [s for s in keep if s not in STATIONS]
        if unknown:
            sys.exit(f"unknown station(s): {', '.join(unknown)}; known: {' '.join(STATIONS)}")
    else:
        keep = [s for s in STATIONS if s not in DEFAULT_DROP]
    cols = [STATIONS.index(s) for s in keep]

    src = sys.stdin if args.input == "-" else open(args.input, encoding="ascii", errors="replace")
    dst = sys.stdout if args.output == "-" else open(args.output, "w", newline="", encoding="ascii")
    try:
        writer = csv.writer(dst, lineterminator="\n")
        writer.writerow(["date"] + keep)
        previous = None
        for date, speeds in read_rows(src, args.century):
            if previous is not None and date <= previous:
                raise ValueError(f"dates not increasing at {date.isoformat()}")
            previous = date
            writer.writerow([date.isoformat()] + [repr(speeds[c]) for c in cols])
    except ValueError as err:
        sys.exit(f"statlib_to_csv: {err}")
    finally:
        if src is not sys.stdin:
            src.close()
        if dst is not sys.stdout:
            dst.close()


if __name__ == "__main__":
    main()
