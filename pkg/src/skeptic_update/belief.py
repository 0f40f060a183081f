"""Beta-Bernoulli belief structure for a single respondent.

All probabilities here live on [0, 1]; survey data on the percent scale is
converted in :mod:`skeptic_update.dataio`.

The posterior mean after an informational shock can be written two ways:
as the conjugate Beta update, or as a convex combination of the prior mean
and the perceived information value.  The weight on the information is
N / (alpha + beta + N); dividing through by the prior concentration gives
the quality ratio ``eta = N / (alpha + beta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class BetaBelief:
    """Subjective Beta(alpha, beta) distribution over the victimization risk."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(f"alpha and beta must be positive, got ({self.alpha}, {self.beta})")
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError("alpha and beta must be finite")

    @property
    def concentration(self) -> float:
        return self.alpha + self.beta

    @property
    def mean(self) -> float:
        return prior_mean(self)


@dataclass(frozen=True)
class EvidenceCounts:
    n1: int
    n0: int

    def __post_init__(self):
        if self.n1 < 0 or self.n0 < 0:
            raise ValueError("evidence counts must be non-negative")

    @property
    def total(self) -> int:
        return self.n1 + self.n0

    def as_shock(self) -> InfoShock:
        if self.total == 0:
            raise ValueError("empty evidence carries no information value")
        return InfoShock(self.n1 / self.total, float(self.total))


@dataclass(frozen=True)
class InfoShock:
    """Perceived information value and its effective sample size.

    ``weight`` is a real number; it need not be an integer count.
    """

    pi_star: float
    weight: float

    def __post_init__(self):
        if not 0.0 <= self.pi_star <= 1.0:
            raise ValueError(f"pi_star must lie in [0, 1], got {self.pi_star}")
        if not self.weight > 0:
            raise ValueError(f"weight must be positive, got {self.weight}")


@dataclass(frozen=True)
class QualityWeight:
    eta: float

    def __post_init__(self):
        if not (self.eta >= 0 and math.isfinite(self.eta)):
            raise ValueError(f"eta must be finite and non-negative, got {self.eta}")

    @classmethod
    def from_counts(cls, weight: float, concentration: float) -> QualityWeight:
        return cls(weight / concentration)


def prior_mean(belief: BetaBelief) -> float:
    return belief.alpha / (belief.alpha + belief.beta)


def update_conjugate(belief: BetaBelief, evidence: EvidenceCounts) -> BetaBelief:
    return BetaBelief(belief.alpha + evidence.n1, belief.beta + evidence.n0)


def posterior_mean_structural(pi0: float, shock: InfoShock, concentration: float) -> float:
    """Posterior mean as the weighted average of prior mean and shock value."""
    if not concentration > 0:
        raise ValueError(f"concentration must be positive, got {concentration}")
    if not shock.weight > 0:
        raise ValueError(f"shock weight must be positive, got {shock.weight}")
    total = concentration + shock.weight
    return shock.weight / total * shock.pi_star + concentration / total * pi0


def posterior_mean_quality(pi0: float, pi_star: float, q: QualityWeight | float) -> float:
    """Posterior mean in terms of the informational quality ratio.

    ``eta == 0`` returns ``pi0`` exactly (information is ignored).
    """
    eta = q.eta if isinstance(q, QualityWeight) else float(q)
    if eta < 0:
        raise ValueError(f"eta must be non-negative, got {eta}")
    if eta == 0.0:
        return pi0
    if math.isinf(eta):
        return pi_star
    # (1 + eta)^-1 = 1 - w; written as a single step so the result is monotone in eta
    w = 1.0 / (1.0 + 1.0 / eta)
    return pi0 + (pi_star - pi0) * w
