"""Shared state for the acceptance suite (one summary line per criterion)."""

ACCEPTANCE = {}
