"""Sequence models: history-conditional inter-arrival distributions.

A sequence model describes a point process through the recursion
``x_i = x_{i-1} + d_i`` with ``d_i`` drawn from a distribution that may depend
on the whole history ``x_{<i}``.  Restricting to a horizon T means sampling
until the first point beyond T and keeping everything up to it.

Gap distributions expose ``pdf``, ``cdf`` (P(gap <= d)), ``survival``
(P(gap >= d)) and ``sample``.  For continuous laws survival and 1-cdf agree;
discrete models must override ``survival`` so that the mass at d itself is
retained — the importance weight at a clipped barrier divides by P(gap >= d).
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import IterationLimitError, SaturatedCdfError

SURVIVAL_FLOOR = 1e-300
MAX_EVENTS = 10 ** 6


class InterArrivalDistribution:
    """One-step gap law conditioned on a fixed history."""

    def pdf(self, d):
        raise NotImplementedError

    def cdf(self, d):
        raise NotImplementedError

    def survival(self, d):
        """P(gap >= d).  Default suits continuous laws; floored to avoid 0/0."""
        return max(1.0 - self.cdf(d), SURVIVAL_FLOOR)

    def sample(self, rng: np.random.Generator):
        raise NotImplementedError


class SequenceModel:
    """Maps a history of event times to the distribution of the next gap."""

    def gap_distribution(self, history: Sequence[float]) -> InterArrivalDistribution:
        raise NotImplementedError


class ExponentialGap(InterArrivalDistribution):
    def __init__(self, rate: float):
        self.rate = rate

    def pdf(self, d):
        if d < 0:
            return 0.0
        return self.rate * math.exp(-self.rate * d)

    def cdf(self, d):
        if d < 0:
            return 0.0
        return -math.expm1(-self.rate * d)

    def survival(self, d):
        if d < 0:
            return 1.0
        return math.exp(-self.rate * d)

    def sample(self, rng):
        return rng.exponential(1.0 / self.rate)


class WeibullGap(InterArrivalDistribution):
    def __init__(self, shape: float, scale: float):
        self.shape = shape
        self.scale = scale

    def pdf(self, d):
        if d < 0:
            return 0.0
        if d == 0:
            return 1.0 / self.scale if self.shape == 1 else (math.inf if self.shape < 1 else 0.0)
        u = (d / self.scale) ** self.shape
        return (self.shape / d) * u * math.exp(-u)

    def cdf(self, d):
        if d <= 0:
            return 0.0
        return -math.expm1(-((d / self.scale) ** self.shape))

    def survival(self, d):
        if d <= 0:
            return 1.0
        return math.exp(-((d / self.scale) ** self.shape))

    def sample(self, rng):
        return self.scale * rng.weibull(self.shape)


class UniformGap(InterArrivalDistribution):
    """Gaps uniform on [low, high]; zero density outside.

    Useful as a stress model: a barrier whose clipped gap falls outside the
    support kills the particle outright.
    """

    def __init__(self, low: float, high: float):
        if not 0 <= low < high:
            raise ValueError("need 0 <= low < high")
        self.low = low
        self.high = high

    def pdf(self, d):
        return 1.0 / (self.high - self.low) if self.low <= d <= self.high else 0.0

    def cdf(self, d):
        return min(max((d - self.low) / (self.high - self.low), 0.0), 1.0)

    def survival(self, d):
        return min(max((self.high - d) / (self.high - self.low), 0.0), 1.0)

    def sample(self, rng):
        return rng.uniform(self.low, self.high)


class PoissonProcessModel(SequenceModel):
    """Homogeneous Poisson process: memoryless exponential gaps."""

    def __init__(self, rate: float):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.rate = rate
        self._gap = ExponentialGap(rate)

    def gap_distribution(self, history):
        return self._gap


class WeibullRenewalModel(SequenceModel):
    """Renewal process with Weibull gaps (hazard k/c * (d/c)^(k-1))."""

    def __init__(self, shape: float, scale: float):
        if shape <= 0 or scale <= 0:
            raise ValueError("shape and scale must be positive")
        self.shape = shape
        self.scale = scale
        self._gap = WeibullGap(shape, scale)

    def gap_distribution(self, history):
        return self._gap


class UniformRenewalModel(SequenceModel):
    """Renewal process with uniform gaps on [low, high]."""

    def __init__(self, low: float, high: float):
        self._gap = UniformGap(low, high)
        self.low = low
        self.high = high

    def gap_distribution(self, history):
        return self._gap


def sample_restricted(model: SequenceModel, rng: np.random.Generator,
                      horizon: float = 1.0, initial_history: Sequence[float] = (),
                      max_events: int = MAX_EVENTS) -> tuple:
    """Sample the process restricted to (0, horizon].

    Draws gaps forward from the end of ``initial_history`` until the first
    point beyond the horizon, which is discarded.  Returns the full sequence
    (history included).  Raises IterationLimitError if the horizon is not
    crossed within ``max_events`` draws.
    """
    events = list(initial_history)
    last = events[-1] if events else 0.0
    for _ in range(max_events):
        d = model.gap_distribution(events).sample(rng)
        if d <= 0:
            raise ValueError(f"model produced a non-positive gap: {d!r}")
        last = last + d
        if last > horizon:
            return tuple(events)
        events.append(last)
    raise IterationLimitError(f"no point beyond horizon {horizon!r} after {max_events} draws")


def step_log_probabilities(model: SequenceModel, seq: Sequence[float],
                           initial_history: Sequence[float] = ()) -> list[float]:
    """Log density/mass of each gap in ``seq`` under the model, in order.

    A zero-density step yields -inf at its index; no exception is raised.
    """
    out = []
    history = list(initial_history)
    last = history[-1] if history else 0.0
    for t in seq:
        d = t - last
        if d <= 0:
            raise ValueError(f"times must strictly increase, got {t!r} after {last!r}")
        p = model.gap_distribution(history).pdf(d)
        out.append(math.log(p) if p > 0 else -math.inf)
        history.append(t)
        last = t
    return out


def log_probability(model: SequenceModel, seq: Sequence[float],
                    initial_history: Sequence[float] = ()) -> float:
    """Total log probability of a sequence: sum of its step log densities."""
    return sum(step_log_probabilities(model, seq, initial_history), 0.0)


def conditional_intensity(model: SequenceModel, history: Sequence[float], t) -> float:
    """Hazard of the next event at time t given the history: f(d) / P(gap >= d).

    Raises SaturatedCdfError when the survival probability has underflowed,
    making the hazard numerically undefined.
    """
    last = history[-1] if len(history) else 0.0
    d = t - last
    if d <= 0:
        raise ValueError(f"t={t!r} does not lie beyond the history end {last!r}")
    dist = model.gap_distribution(history)
    p = dist.pdf(d)
    if p == 0:
        return 0.0
    s = dist.survival(d)
    if s <= SURVIVAL_FLOOR:
        raise SaturatedCdfError(f"survival underflowed at gap {d!r}")
    return p / s
