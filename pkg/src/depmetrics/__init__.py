"""Time-out-of-date (TOOD) and post-fix exposure time (PFET) metrics for dependency histories."""

__version__ = "0.1.0"
