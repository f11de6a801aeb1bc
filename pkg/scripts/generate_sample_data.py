"""Regenerate data/sample_solar.csv, the synthetic hourly solar fixture.

Twenty years (1993-2012) of July and August afternoon output for a small
solar site, drawn from beta distributions whose shape varies by hour, with
a fixed seed so the file is reproducible. Real datasets with the same
schema (year,month,day,hour,output_mwh) drop in without code changes.
"""

import csv
import os

import numpy as np

SITE_CAPACITY_MWH = 2.5
HOUR_SHAPES = {15: (2.4, 1.6), 16: (2.0, 1.9), 17: (1.4, 2.4)}
MONTH_FACTOR = {7: 1.0, 8: 0.93}
SEED = 20230711


def main():
    rng = np.random.default_rng(SEED)
    out_path = os.path.join(os.path.dirname(__file__), "..", "data",
                            "sample_solar.csv")
    rows = []
    for year in range(1993, 2013):
        for month in (7, 8):
            for day in range(1, 32):
                for hour, (a, b) in sorted(HOUR_SHAPES.items()):
                    cloud = rng.beta(a, b)
                    output = SITE_CAPACITY_MWH * MONTH_FACTOR[month] * cloud
                    rows.append((year, month, day, hour, round(output, 4)))
    os.makedirs(os.path.dirname(out_path), exist_ok=True)
    with open(out_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["year", "month", "day", "hour", "output_mwh"])
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {os.path.normpath(out_path)}")


if __name__ == "__main__":
    main()
