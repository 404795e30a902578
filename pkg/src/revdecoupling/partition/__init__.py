"""Multiscale partition of the delta-neighborhood into essentially flat boxes."""

from .flatness import FlatnessReport, flatness_batch, flatness_check, flatness_report
from .geometry import AffineMap, BoxFrame, CapFootprint, CylinderSurface, RevolutionSurface, build_frames
from .manifest import PartitionManifest, build_partition, maximality_fraction
from .stages import (
    Annulus,
    LocalModel,
    dyadic_annuli,
    first_stage_caps,
    partition_cone_plates,
    partition_nondegenerate,
    rescale_map,
    second_stage_refine,
)

__all__ = [
    "AffineMap", "Annulus", "BoxFrame", "CapFootprint", "CylinderSurface", "FlatnessReport", "LocalModel",
    "PartitionManifest", "RevolutionSurface", "build_frames", "build_partition", "dyadic_annuli",
    "first_stage_caps", "flatness_batch", "flatness_check", "flatness_report", "maximality_fraction",
    "partition_cone_plates", "partition_nondegenerate", "rescale_map", "second_stage_refine",
]
