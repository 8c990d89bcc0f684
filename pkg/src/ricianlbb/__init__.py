"""Secrecy outage analysis of location-based beamforming in Rician wiretap channels."""
from __future__ import annotations

__version__ = "0.1.0"
