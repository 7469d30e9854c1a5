"""ODHD-CiM

One-class hyperdimensional outlier detection (software and CiM-friendly
variants) plus a latency/energy simulator for the IM-ODHD compute-in-memory mat.
"""

__version__ = "0.1.0"
