"""Slotted-time link scheduling simulator with service-regularity analysis."""

__version__ = "0.1.0"
