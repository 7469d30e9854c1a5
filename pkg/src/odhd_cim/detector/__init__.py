"""One-class HDC outlier detector (software and CiM-friendly variants)."""

from .model import DetectorConfig, Label, OneClassModel, Variant, load_model
from .pipeline import (
    compute_threshold,
    detect,
    detect_batch,
    encode,
    encode_batch,
    fine_tune,
    fit,
    mean_absolute_deviation,
    pad_to_power_of_two,
    threshold_from_scores,
    train,
)
from .quantizer import Quantizer, fit_quantizer, quantize, quantize_batch
from .seeds import SeedSet, generate_seeds

__all__ = [
    "DetectorConfig",
    "Label",
    "OneClassModel",
    "Quantizer",
    "SeedSet",
    "Variant",
    "compute_threshold",
    "detect",
    "detect_batch",
    "encode",
    "encode_batch",
    "fine_tune",
    "fit",
    "fit_quantizer",
    "generate_seeds",
    "load_model",
    "mean_absolute_deviation",
    "pad_to_power_of_two",
    "quantize",
    "quantize_batch",
    "threshold_from_scores",
    "train",
]
