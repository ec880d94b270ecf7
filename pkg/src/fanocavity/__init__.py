"""Probe response and Fano lineshapes of a condensate-loaded cavity."""

__version__ = "0.1.0"
