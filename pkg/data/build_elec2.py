"""Rebuild data/elec2.csv from the ELEC2 copy shipped in scikit-multiflow 0.1.4.

That copy (``skmultiflow/data/datasets/elec.csv``) keeps the six normalized
market columns and a 0/1 target (1 = UP) but drops ``date`` and ``day``.
Rows are chronological, 48 half-hour periods per day starting on Tuesday
7 May 1996, so both columns are recovered from the row index:

* ``date``: day index scaled to [0, 1]. Monotone in calendar time, which is
  all a threshold-based learner can use.
* ``day``: ISO weekday, Monday = 1 ... Sunday = 7.

Usage: python build_elec2.py path/to/elec.csv > elec2.csv
"""
import csv
import datetime
import sys

START = datetime.date(1996, 5, 7)
COLUMNS = ["date", "day", "period", "nswprice", "nswdemand", "vicprice", "vicdemand", "transfer", "class"]


def main(src: str) -> None:
    with open(src, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    n_days = len(rows) // 48
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(COLUMNS)
    for i, row in enumerate(rows):
        k = i // 48
        period = float(row[0])
        if abs(period - (i % 48) / 47) > 1e-5:
            raise SystemExit(f"row {i + 2}: period {period} breaks the 48-per-day layout")
        date = round(k / (n_days - 1), 6)
        day = (START + datetime.timedelta(days=k)).isoweekday()
        out.writerow([date, day, *row[:6], "UP" if row[6] == "1" else "DOWN"])


if __name__ == "__main__":
    main(sys.argv[1])
