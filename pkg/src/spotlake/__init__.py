"""Spot instance dataset archive toolkit."""

__version__ = "0.1.0"
