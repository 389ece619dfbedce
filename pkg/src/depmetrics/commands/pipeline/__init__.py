"""Data pipeline commands: ingest, resolve, metrics and ttu."""
