"""Map plant electrophysiological time series to binary environmental conditions."""

__version__ = "0.1.0"
