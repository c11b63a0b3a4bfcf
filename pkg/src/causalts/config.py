"""Run configuration shared by the pipeline, the CLI, and serialization."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class RunConfig:
    """Knobs for one end-to-end run.

    ``l_override`` skips spectral window detection and uses the given
    snippet length directly; ``bootstrap_b`` only matters when the
    number of uncertain-edge combinations exceeds the enumeration
    cutoff.
    """

    seed: int = 0
    alpha: float = 0.05
    n_clusters: int = 3
    k_snippets: int = 5
    theta_prec: float = 0.9
    bootstrap_b: int = 1000
    l_override: int | None = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if not 0.5 < self.theta_prec <= 1.0:
            raise ValueError("theta_prec must lie in (0.5, 1]")
        if self.k_snippets < 1:
            raise ValueError("k_snippets must be at least 1")
        if self.n_clusters < 1:
            raise ValueError("n_clusters must be at least 1")
        if self.bootstrap_b < 1:
            raise ValueError("bootstrap_b must be at least 1")
        if self.l_override is not None and self.l_override < 4:
            raise ValueError("l_override must be at least 4")
