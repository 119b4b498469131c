"""Bundled example data."""
from pathlib import Path

_HERE = Path(__file__).resolve().parent


def arthritis_path() -> Path:
    """Path of the bundled rheumatoid-arthritis trial CSV.

    Long format, 302 patients with self-assessment scores (1=poor ..
    5=very good) at follow-up months 1, 3 and 5; columns ``id``, ``y``,
    ``sex``, ``age``, ``trt`` (1=placebo, 2=drug), ``baseline`` and
    ``time``.  Eighteen score cells are missing.
    """
    return _HERE / "datasets" / "arthritis.csv"
