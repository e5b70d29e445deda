"""RGB-D SLAM for simulated UAV construction-site surveys."""

__version__ = "0.1.0"
