"""Lateral-interaction kernel and activation nonlinearity.

The interaction profile is a difference of Gaussians ("Mexican hat"):
excitatory within a finite radius of the stored position, weakly
inhibitory beyond it. The inhibitory Gaussian is three times wider than
the excitatory one, so the zero crossing has the closed form

    r = (3 * sigma / 2) * sqrt(ln(excite / inhibit))

With the default amplitudes 3/2 and 1/2 the peak value is exactly 1 and
the crossing sits at 1.5722 * sigma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class KernelParams:
    """Difference-of-Gaussians parameters.

    ``excite > inhibit > 0`` keeps the hat shape; ``sigma`` sets the
    interaction scale in feature-space distance units.
    """

    excite: float = 1.5
    inhibit: float = 0.5
    sigma: float = 1.0

    def __post_init__(self):
        if not (self.excite > self.inhibit > 0.0):
            raise ValueError(
                f"kernel amplitudes must satisfy excite > inhibit > 0, "
                f"got excite={self.excite}, inhibit={self.inhibit}"
            )
        if not self.sigma > 0.0:
            raise ValueError(f"kernel sigma must be positive, got {self.sigma}")

    def with_sigma(self, sigma: float) -> "KernelParams":
        return replace(self, sigma=sigma)


def activation(u):
    """Saturating rectifier: 1 - exp(-u) for u > 0, else 0.

    Monotone non-decreasing, bounded in [0, 1). Accepts scalars or
    arrays; scalars come back as float.
    """
    arr = np.asarray(u, dtype=float)
    out = np.zeros_like(arr)
    pos = arr > 0.0
    out[pos] = 1.0 - np.exp(-arr[pos])
    if np.ndim(u) == 0:
        return float(out)
    return out


def dog_kernel(dist, params: KernelParams):
    """Difference-of-Gaussians interaction strength at the given distance(s).

    The inhibitory lobe uses a width of 3 * sigma.
    """
    d2 = np.square(np.asarray(dist, dtype=float))
    s2 = params.sigma * params.sigma
    out = params.excite * np.exp(-d2 / (2.0 * s2)) - params.inhibit * np.exp(
        -d2 / (18.0 * s2)
    )
    if np.ndim(dist) == 0:
        return float(out)
    return out


def excitatory_radius(excite: float, inhibit: float, sigma: float = 1.0) -> float:
    """Distance at which the kernel crosses zero (excitation boundary).

    Closed form (3*sigma/2)*sqrt(ln(excite/inhibit)); linear in sigma.
    Degenerate amplitudes (excite <= inhibit) collapse the excitatory
    region to a point, so the radius is 0.
    """
    if excite <= inhibit:
        return 0.0
    return 1.5 * sigma * math.sqrt(math.log(excite / inhibit))
