"""Maintenance management for copper cathode plates.

Domain model, composable restriction policies, a journal-backed store,
a capture/report HTTP API, and an administration CLI.
"""

__version__ = "0.1.0"
