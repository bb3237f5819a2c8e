#!/usr/bin/env python3
"""Convert the public two-year recidivism scores file into audit inputs.

Expects the ProPublica ``compas-scores-two-years.csv`` export. Applies the
standard row filters (screening within 30 days of arrest, known recidivism
flag, non-ordinary-traffic charge, scored), keeping 6172 defendants, then
emits a cleaned CSV plus a schema JSON:

  * sensitive: age (numeric), sex (binary, Male=1), race (categorical,
    6 levels) -- 8 encoded sensitive columns;
  * safe: priors_count, juvenile counts, length of stay, felony-charge flag,
    and one binary column per charge description occurring at least 10 times
    (rarer charge indicators are dropped entirely);
  * target: two_year_recid (default) or decile_score.

Usage:
  python scripts/prepare_compas.py --raw compas-scores-two-years.csv \
      --out data/compas_r.csv --schema-out data/compas_r.schema.json
"""

import argparse
import csv
import json
import sys
from collections import Counter
from datetime import datetime

MIN_CHARGE_COUNT = 10


def parse_days(start, end):
    fmt = "%Y-%m-%d %H:%M:%S"
    try:
        return (datetime.strptime(end, fmt) - datetime.strptime(start, fmt)).days
    except (ValueError, TypeError):
        return 0


def passes_filters(row):
    try:
        days = float(row["days_b_screening_arrest"])
    except ValueError:
        return False
    if not -30 <= days <= 30:
        return False
    if row["is_recid"] == "-1":
        return False
    if row["c_charge_degree"] == "O":
        return False
    if row["score_text"] == "N/A":
        return False
    return True


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--raw", required=True, help="compas-scores-two-years.csv")
    parser.add_argument("--out", required=True)
    parser.add_argument("--schema-out", required=True)
    parser.add_argument(
        "--target", default="two_year_recid", choices=["two_year_recid", "decile_score"]
    )
    args = parser.parse_args(argv)

    with open(args.raw, encoding="utf-8", newline="") as fh:
        rows = [row for row in csv.DictReader(fh) if passes_filters(row)]
    if not rows:
        print("no rows survived the filters; is this the right file?", file=sys.stderr)
        return 1

    charge_counts = Counter(row["c_charge_desc"].strip() for row in rows)
    charges = sorted(
        c for c, k in charge_counts.items() if k >= MIN_CHARGE_COUNT and c
    )

    columns = ["age", "sex", "race", "priors_count", "juv_fel_count", "juv_misd_count",
               "juv_other_count", "length_of_stay", "charge_degree_felony"]
    charge_cols = [f"charge={c}" for c in charges]
    header = columns + charge_cols + [args.target]

    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            desc = row["c_charge_desc"].strip()
            record = [
                row["age"],
                1 if row["sex"] == "Male" else 0,
                row["race"],
                row["priors_count"],
                row["juv_fel_count"],
                row["juv_misd_count"],
                row["juv_other_count"],
                parse_days(row["c_jail_in"], row["c_jail_out"]),
                1 if row["c_charge_degree"] == "F" else 0,
            ]
            record += [1 if f"charge={desc}" == col else 0 for col in charge_cols]
            record.append(row[args.target])
            writer.writerow(record)

    schema = [
        {"name": "age", "kind": "numeric", "sensitive": True},
        {"name": "sex", "kind": "binary", "sensitive": True},
        {"name": "race", "kind": "categorical", "sensitive": True},
        {"name": "priors_count", "kind": "numeric"},
        {"name": "juv_fel_count", "kind": "numeric"},
        {"name": "juv_misd_count", "kind": "numeric"},
        {"name": "juv_other_count", "kind": "numeric"},
        {"name": "length_of_stay", "kind": "numeric"},
        {"name": "charge_degree_felony", "kind": "binary"},
    ]
    schema += [{"name": col, "kind": "binary"} for col in charge_cols]
    target_kind = "binary" if args.target == "two_year_recid" else "numeric"
    schema.append({"name": args.target, "kind": target_kind, "target": True})
    with open(args.schema_out, "w", encoding="utf-8") as fh:
        json.dump(schema, fh, indent=2)

    races = sorted({row["race"] for row in rows})
    print(
        f"wrote {len(rows)} rows, {len(header) - 1} feature columns "
        f"({len(races)} race levels, {len(charges)} charge indicators) to {args.out}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
