"""Named experiment setups on 3-D surfaces."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from ..partition.manifest import PartitionManifest, build_partition
from ..partition.stages import partition_cone_plates, partition_nondegenerate
from ..profile import Profile, make_profile
from .lattice import discretize_support
from .norms import DEFAULT_BUDGET, DEFAULT_OVERSAMPLE, ExperimentRecord, decoupling_ratio
from .testfunctions import synth_test_function

# a small sector around the degenerate circle keeps the 3-D DFT within budget
DEFAULT_REGION = {"r": (0.8, 1.2), "alpha": (-0.2, 0.2)}


@dataclass(frozen=True)
class Preset:
    name: str
    case: str
    profile: Profile
    region: dict = field(default_factory=lambda: dict(DEFAULT_REGION))

    def manifest(self, delta: float) -> PartitionManifest:
        if self.name == "cone-plates":
            return PartitionManifest(self.profile, delta, partition_cone_plates(delta, "cone", self.profile))
        if self.name == "cone-square":
            boxes = partition_nondegenerate(self.profile, self.profile.domain, delta, case="ConeSquare")
            return PartitionManifest(self.profile, delta, boxes)
        return build_partition(self.profile, delta)


def get_preset(name: str, profile: Profile = None) -> Preset:
    if name == "torus":
        return Preset(name, "QuasiTorus", profile or make_profile("torus"))
    if name == "perturbed-cone":
        return Preset(name, "PerturbedCone", profile or make_profile("perturbed_cone", n=3))
    if name in ("cone-plates", "cone-square"):
        return Preset(name, "Cone", profile or make_profile("cone", slope=1.0))
    raise ValueError(f"unknown preset {name!r}; expected torus, perturbed-cone, cone-plates or cone-square")


PRESETS = ("torus", "perturbed-cone", "cone-plates", "cone-square")


def run_experiment(preset: Preset, delta: float, p: float, q: float, family: str, seed: int = 0,
                   spacing: float = None, oversample: int = DEFAULT_OVERSAMPLE, budget: int = DEFAULT_BUDGET,
                   reduce2d: bool = False, workers: int = None, manifest: PartitionManifest = None) -> ExperimentRecord:
    t0 = time.perf_counter()
    manifest = manifest or preset.manifest(delta)
    lat = discretize_support(manifest, delta, spacing, preset.region, reduce2d)
    f = synth_test_function(lat, family, seed)
    rec = decoupling_ratio(f, p, q, surface=preset.name, case=preset.case, oversample=oversample, budget=budget,
                           workers=workers)
    rec.seconds = time.perf_counter() - t0
    return rec
