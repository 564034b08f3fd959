"""EEG attention gateway: wire protocol, control events, scroll analytics, streaming service."""

__version__ = "0.1.0"
