"""Statistics commands over metrics.csv."""
