"""Run configuration shared by the CLI subcommands."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional

from .classifier import NOVEL_FRACTIONS
from .kernel import KernelParams

METRIC_ALIASES = {"euc": "euclidean", "cos": "cosine", "mah": "mahalanobis"}


class ConfigError(ValueError):
    """Out-of-range or inconsistent configuration value; message names the flag."""


@dataclass
class RunConfig:
    features: str = ""
    episodes: int = 600
    n_old: int = 5
    n_new: int = 5
    shots: int = 10
    query_cap: Optional[int] = None
    metric: str = "euclidean"
    kernel_excite: float = 1.5
    kernel_inhibit: float = 0.5
    ratio: float = 0.4  # --lambda
    max_iters: int = 4  # --iters
    num_threshold: str = "half"
    sigma_escalations: int = 0
    le_k: int = 15
    le_heat: Optional[float] = None
    le_dims: Optional[int] = None
    per_episode_refit: bool = False
    mah_ridge: float = 1e-3
    seed: int = 0
    jobs: int = 1
    out: Optional[str] = None
    fmt: str = "json"

    def validate(self) -> "RunConfig":
        if self.episodes < 1:
            raise ConfigError(f"--episodes must be >= 1, got {self.episodes}")
        if self.n_old < 1:
            raise ConfigError(f"--old must be >= 1, got {self.n_old}")
        if self.n_new < 0:
            raise ConfigError(f"--new must be >= 0, got {self.n_new}")
        if self.shots < 1:
            raise ConfigError(f"--shots must be >= 1, got {self.shots}")
        if self.query_cap is not None and self.query_cap < 1:
            raise ConfigError(f"--query-cap must be >= 1, got {self.query_cap}")
        if self.metric not in ("euclidean", "cosine", "mahalanobis"):
            raise ConfigError(f"--metric must be one of euc, cos, mah, got {self.metric!r}")
        if not self.kernel_excite > self.kernel_inhibit > 0:
            raise ConfigError(
                f"--kernel-excite/--kernel-inhibit must satisfy excite > inhibit > 0, "
                f"got {self.kernel_excite}, {self.kernel_inhibit}"
            )
        if not 0.0 < self.ratio < 1.0:
            raise ConfigError(f"--lambda must be in (0, 1), got {self.ratio}")
        if self.max_iters < 1:
            raise ConfigError(f"--iters must be >= 1, got {self.max_iters}")
        if self.num_threshold not in NOVEL_FRACTIONS:
            raise ConfigError(
                f"--num-threshold must be one of {sorted(NOVEL_FRACTIONS)}, got {self.num_threshold!r}"
            )
        if self.sigma_escalations < 0:
            raise ConfigError(f"--sigma-escalations must be >= 0, got {self.sigma_escalations}")
        if self.le_k < 1:
            raise ConfigError(f"--le-k must be >= 1, got {self.le_k}")
        if self.le_heat is not None and self.le_heat <= 0:
            raise ConfigError(f"--le-heat must be positive, got {self.le_heat}")
        if self.le_dims is not None and self.le_dims < 0:
            raise ConfigError(f"--le-dims must be >= 0, got {self.le_dims}")
        if self.mah_ridge < 0:
            raise ConfigError(f"--mah-ridge must be >= 0, got {self.mah_ridge}")
        if self.jobs < 1:
            raise ConfigError(f"--jobs must be >= 1, got {self.jobs}")
        if self.fmt not in ("json", "csv"):
            raise ConfigError(f"--format must be json or csv, got {self.fmt!r}")
        return self

    @property
    def novel_fraction(self) -> float:
        return NOVEL_FRACTIONS[self.num_threshold]

    def kernel(self) -> KernelParams:
        return KernelParams(excite=self.kernel_excite, inhibit=self.kernel_inhibit)

    def echo(self) -> dict:
        """Flat dict of the resolved configuration, for report embedding."""
        out = {}
        for f in fields(self):
            out[f.name] = getattr(self, f.name)
        return out
