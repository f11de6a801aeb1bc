"""Building empirical generation models from historical output records.

The expected input is an hourly generation CSV with a header row; the
default column names are ``year,month,day,hour,output_mwh`` (strict UTF-8,
plain decimal point). A model for one delivery hour is estimated from all
records matching a (month, hour) filter across the years in the file, so
twenty years of data yield several hundred sample points per hour.
"""

import csv
import logging
from dataclasses import dataclass

from .distributions import EmpiricalModel

__all__ = [
    "GenerationRecord",
    "MalformedRecordError",
    "InsufficientDataError",
    "DEFAULT_SCHEMA",
    "load_records",
    "build_empirical_model",
]

logger = logging.getLogger(__name__)

DEFAULT_SCHEMA = {
    "year": "year",
    "month": "month",
    "day": "day",
    "hour": "hour",
    "output": "output_mwh",
}


class MalformedRecordError(ValueError):
    """A CSV row failed validation; the message carries the line number."""


class InsufficientDataError(ValueError):
    """Too few records survive a filter to build a distribution."""


@dataclass(frozen=True)
class GenerationRecord:
    """One hourly generation observation."""

    year: int
    month: int
    day: int
    hour: int
    output_mwh: float

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise ValueError(f"month must be 1..12, got {self.month}")
        if not 1 <= self.day <= 31:
            raise ValueError(f"day must be 1..31, got {self.day}")
        if not 0 <= self.hour <= 23:
            raise ValueError(f"hour must be 0..23, got {self.hour}")
        if not self.output_mwh >= 0:
            raise ValueError(
                f"output must be non-negative, got {self.output_mwh}")


def _parse_row(row, schema, line_no):
    try:
        return GenerationRecord(
            year=int(row[schema["year"]]),
            month=int(row[schema["month"]]),
            day=int(row[schema["day"]]),
            hour=int(row[schema["hour"]]),
            output_mwh=float(row[schema["output"]]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedRecordError(f"line {line_no}: {exc}") from exc


def load_records(path, schema=None, strict=True):
    """Read generation records from a CSV file.

    ``schema`` maps the logical fields (year/month/day/hour/output) to the
    file's column names when they differ from the defaults. In strict mode
    the first malformed row aborts the load with its line number; in
    lenient mode malformed rows are skipped and counted in a warning.
    """
    schema = {**DEFAULT_SCHEMA, **(schema or {})}
    records = []
    skipped = 0
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        for line_no, row in enumerate(reader, start=2):
            try:
                records.append(_parse_row(row, schema, line_no))
            except MalformedRecordError:
                if strict:
                    raise
                skipped += 1
    if skipped:
        logger.warning("skipped %d malformed rows in %s", skipped, path)
    if not records:
        logger.warning("no generation records found in %s", path)
    return records


def build_empirical_model(records, month, hour, scale=1.0):
    """Empirical generation model for one (month, hour) delivery slot.

    Filters the records, scales the surviving outputs, and interpolates
    their order statistics into a continuous CDF (see EmpiricalModel for
    the interpolation convention). At least two matching records are
    required.
    """
    values = [r.output_mwh for r in records
              if r.month == month and r.hour == hour]
    if len(values) < 2:
        raise InsufficientDataError(
            f"only {len(values)} records match month={month} hour={hour}; "
            "at least 2 are required")
    return EmpiricalModel(values, scale=scale)
