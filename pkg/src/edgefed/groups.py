"""Latency requirement groups (loose -> strict) for the three reference services."""

GROUP_IDS = ("1", "2", "3", "4", "5", "6", "7")

TABLE_GROUPS = {
    "1": {"facebook": 72.0, "valve": 36.0, "netflix": 54.0},
    "2": {"facebook": 68.0, "valve": 34.0, "netflix": 51.0},
    "3": {"facebook": 64.0, "valve": 32.0, "netflix": 48.0},
    "4": {"facebook": 60.0, "valve": 30.0, "netflix": 45.0},
    "5": {"facebook": 56.0, "valve": 28.0, "netflix": 42.0},
    "6": {"facebook": 52.0, "valve": 26.0, "netflix": 39.0},
    "7": {"facebook": 48.0, "valve": 24.0, "netflix": 36.0},
}
