"""Shipped mat designs, per-op cost tables and dataset shape metadata."""
