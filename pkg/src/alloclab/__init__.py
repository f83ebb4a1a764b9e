"""alloclab: stable allocation of torus volume to random centers, with the
tail-phenomenology experiment suite and closed-form bound overlays."""

from ._core import KERNEL_NAME
from .geometry import Domain, ball_volume, cell_centers, torus_distance
from .point_process import (
    CenterSet,
    derive_seed,
    palm_augment,
    sample_coupled,
    sample_poisson,
    sample_renewal_palm,
    splitmix64,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "KERNEL_NAME",
    "Domain",
    "torus_distance",
    "ball_volume",
    "cell_centers",
    "CenterSet",
    "sample_poisson",
    "palm_augment",
    "sample_renewal_palm",
    "sample_coupled",
    "splitmix64",
    "derive_seed",
]
