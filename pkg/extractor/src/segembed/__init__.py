"""Token embedding extraction over overlapping context segments."""

__version__ = "0.1.0"

from .segments import SegmentPlan, average_overlaps, plan_segments  # noqa: F401
from .extract import extract  # noqa: F401
