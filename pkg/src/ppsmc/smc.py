"""Particle-filter sampling of a point process conditioned on required events.

A constraint set fixes times z_1 < ... < z_r that must appear in the sampled
sequence.  Flag b_i says whether free events are allowed in the open interval
(z_i, z_{i+1}); b_0 = True by convention (events before z_1 are always
allowed), and b_r = False forces the sequence to end exactly at z_r.

Sampling proceeds barrier to barrier.  In a free segment each particle runs
the model forward, clipping the first crossing to the barrier itself; the
particle's weight is the hazard f(d)/P(gap >= d) of the clipped gap, which
corrects for the clip.  In a forbidden segment the barrier is appended
directly with weight f(d).  After each interior barrier the ensemble is
systematically resampled.  The final open segment carries unit weights and is
not resampled.

All randomness is drawn from per-(barrier, particle) Philox streams derived
from one master seed, so results are bit-identical regardless of the number
of worker threads.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import IterationLimitError, SaturatedCdfError
from .models import MAX_EVENTS, SURVIVAL_FLOOR, SequenceModel
from .rng import KIND_PROPOSAL, KIND_RESAMPLE, stream

FORMAT_VERSION = 1


@dataclass(frozen=True)
class ConstraintSet:
    """Required event times plus per-gap freedom flags.

    ``b[i]`` governs the open interval after ``z[i]``: True allows free
    events between z_i and the next constraint (or the horizon for the last
    flag), False forbids them.
    """

    z: tuple
    b: tuple

    def __post_init__(self):
        z = tuple(self.z)
        b = tuple(bool(v) for v in self.b)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "b", b)
        if len(z) != len(b):
            raise ValueError(f"expected one flag per constraint, got {len(z)} times and {len(b)} flags")
        for i, t in enumerate(z):
            if isinstance(t, float) and not math.isfinite(t):
                raise ValueError(f"constraint time must be finite, got {t!r}")
            if t <= (z[i - 1] if i else 0):
                raise ValueError("constraint times must be strictly increasing and positive")

    @property
    def r(self) -> int:
        return len(self.z)

    def to_dict(self) -> dict:
        return {"version": FORMAT_VERSION, "z": list(self.z), "b": list(self.b)}

    @classmethod
    def from_dict(cls, d: dict) -> "ConstraintSet":
        version = d.get("version", 1)
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported constraint file version: {version}")
        return cls(z=tuple(d["z"]), b=tuple(d["b"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "ConstraintSet":
        return cls.from_dict(json.loads(Path(path).read_text()))


def read_constraint_file(path) -> tuple[ConstraintSet, dict]:
    """Load a constraint file, returning the core set plus any extra fields
    (e.g. a conditioning prefix or a horizon recorded by extraction)."""
    payload = json.loads(Path(path).read_text())
    return ConstraintSet.from_dict(payload), payload


def satisfies(seq: Sequence[float], constraints: ConstraintSet) -> bool:
    """Exact indicator: every z present, no events inside forbidden gaps."""
    present = set(seq)
    if any(z not in present for z in constraints.z):
        return False
    zs = constraints.z
    for i, allowed in enumerate(constraints.b):
        if allowed:
            continue
        lo = zs[i]
        hi = zs[i + 1] if i + 1 < len(zs) else math.inf
        if any(lo < t < hi for t in seq):
            return False
    return True


@dataclass(frozen=True)
class BarrierDiagnostics:
    barrier_index: int  # 1-based
    ess: float
    min_weight: float
    max_weight: float
    dead_count: int

    def to_dict(self) -> dict:
        return {"barrier_index": self.barrier_index, "ess": self.ess,
                "min_weight": self.min_weight, "max_weight": self.max_weight,
                "dead_count": self.dead_count}


@dataclass
class EnsembleResult:
    samples: list
    survived: bool
    failed_barrier: int | None
    diagnostics: list
    log_probs: list | None = field(default=None)  # filled by beam search


def propose_segment(model: SequenceModel, history: Sequence[float], z: float,
                    b_prev: bool, rng, horizon: float = 1.0,
                    max_events: int = MAX_EVENTS) -> tuple[list, float | None, bool]:
    """Extend one particle up to barrier ``z`` (math.inf for the open tail).

    Returns ``(segment, gap, clipped)``: the appended times, the final gap
    (None if nothing was appended), and whether the last element sits exactly
    on the barrier.  With ``b_prev`` False the barrier is appended directly
    (or nothing, for the final segment).
    """
    last = history[-1] if len(history) else 0.0
    if not b_prev:
        if math.isinf(z):
            return [], None, False
        return [z], z - last, True
    working = list(history)
    segment = []
    steps = 0
    while not (last == z or last >= horizon):
        if steps >= max_events:
            raise IterationLimitError(f"segment did not reach barrier {z!r} within {max_events} draws")
        d = model.gap_distribution(working).sample(rng)
        if d <= 0:
            raise ValueError(f"model produced a non-positive gap: {d!r}")
        candidate = last + d
        nxt = candidate if candidate < z else z
        segment.append(nxt)
        working.append(nxt)
        last = nxt
        steps += 1
    if not segment:
        return [], None, False
    prev = working[-2] if len(working) >= 2 else 0.0
    return segment, last - prev, last == z


def barrier_weight(model: SequenceModel, seq: Sequence[float], gap,
                   b_prev: bool, is_final: bool = False) -> float:
    """Importance weight of one particle whose last element is the barrier.

    Free segment: f(d)/P(gap >= d) — the hazard at the clipped gap.  Forbidden
    segment: f(d), the density of the forced append.  Final open segment: 1.
    A zero density gives weight 0 (a dead particle is legal); an underflowed
    survival raises SaturatedCdfError.
    """
    if is_final:
        return 1.0
    dist = model.gap_distribution(seq[:-1])
    p = dist.pdf(gap)
    if not b_prev:
        return p
    if p == 0:
        return 0.0
    s = dist.survival(gap)
    if s <= SURVIVAL_FLOOR:
        raise SaturatedCdfError(f"survival underflowed at barrier gap {gap!r}")
    return p / s


def effective_sample_size(weights: Sequence[float]) -> float:
    """(sum w)^2 / sum(w^2); ranges from 1 (degenerate) to len(weights)."""
    total = 0.0
    total_sq = 0.0
    for w in weights:
        if not (w >= 0) or (isinstance(w, float) and not math.isfinite(w)):
            raise ValueError(f"weights must be finite and non-negative, got {w!r}")
        total += w
        total_sq += w * w
    if total == 0:
        raise ValueError("all weights are zero")
    return total * total / total_sq


def systematic_indices(weights: Sequence[float], u: float) -> tuple[int, ...]:
    """Offspring indices for systematic resampling at offset u in (0, 1].

    One deterministic pass: the l-th of S evenly spaced pointers
    (u + l)/S picks the first index whose cumulative normalized weight
    reaches it.  Uniform weights reproduce the identity; every index's
    offspring count differs from S*w_normalized by strictly less than 1.

    The pointer-vs-cumsum comparisons run in exact integer arithmetic
    (floats decompose losslessly via as_integer_ratio), so neither
    guarantee can flip on an unlucky rounding boundary — float
    accumulation absorbs a small enough u into the pointer positions.
    """
    n = len(weights)
    for w in weights:
        if not (w >= 0) or (isinstance(w, float) and not math.isfinite(w)):
            raise ValueError(f"weights must be finite and non-negative, got {w!r}")
    if not (0.0 < u <= 1.0):
        raise ValueError(f"offset u must lie in (0, 1], got {u!r}")

    ratios = [float(w).as_integer_ratio() for w in weights]
    scale = max(den for _, den in ratios)  # dens are powers of two
    scaled = [num * (scale // den) for num, den in ratios]
    total = sum(scaled)
    if total == 0:
        raise ValueError("all weights are zero")

    # Pointer l sits at mass (u + l) * total / n; with u = p/q the
    # comparison n*cum < (u + l) * total becomes q*n*cum < (p + l*q) * total.
    p, q = u.as_integer_ratio()
    out = []
    j = 0
    cum = q * n * scaled[0]
    step = q * n
    for l in range(n):
        pointer = (p + l * q) * total
        while cum < pointer and j < n - 1:
            j += 1
            cum += step * scaled[j]
        out.append(j)
    return tuple(out)


def systematic_resample(weights: Sequence[float], rng) -> tuple[int, ...]:
    """Draw the offset and return offspring indices (ascending)."""
    u = 1.0 - rng.random()  # in (0, 1]: keeps the offspring-count bound strict
    return systematic_indices(weights, u)


def _validate_setup(constraints: ConstraintSet, horizon, initial_history) -> None:
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    start = initial_history[-1] if len(initial_history) else 0.0
    if constraints.z:
        if constraints.z[0] <= start:
            raise ValueError(f"first constraint {constraints.z[0]!r} does not lie beyond "
                             f"the history end {start!r}")
        if constraints.z[-1] > horizon:
            raise ValueError(f"constraint {constraints.z[-1]!r} lies beyond the horizon {horizon!r}")


def conditional_sample(model: SequenceModel, constraints: ConstraintSet,
                       num_particles: int, seed: int, *,
                       horizon: float = 1.0,
                       initial_history: Sequence[float] = (),
                       jobs: int = 1,
                       max_events: int = MAX_EVENTS) -> EnsembleResult:
    """Run the particle filter; returns S approximate conditional samples.

    ``survived`` is False when every particle weighted zero at some barrier;
    ``failed_barrier`` then holds its 1-based index and ``samples`` is empty.
    The result is a deterministic function of (model, constraints, seed,
    horizon, initial history) — ``jobs`` only adds worker threads.
    """
    if num_particles < 1:
        raise ValueError("need at least one particle")
    _validate_setup(constraints, horizon, initial_history)
    prefix = list(initial_history)
    barriers = [*constraints.z, math.inf]
    flags = [True, *constraints.b]
    particles = [list(prefix) for _ in range(num_particles)]
    diagnostics = []

    for i, z in enumerate(barriers):
        b_prev = flags[i]
        is_final = math.isinf(z)

        def advance(s: int) -> float:
            g = stream(seed, KIND_PROPOSAL, i, s)
            seg, gap, _ = propose_segment(model, particles[s], z, b_prev, g,
                                          horizon=horizon, max_events=max_events)
            particles[s].extend(seg)
            if is_final:
                return 1.0
            return barrier_weight(model, particles[s], gap, b_prev)

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                weights = list(pool.map(advance, range(num_particles)))
        else:
            weights = [advance(s) for s in range(num_particles)]

        if is_final:
            break
        dead = sum(1 for w in weights if w == 0)
        all_dead = dead == num_particles
        ess = 0.0 if all_dead else effective_sample_size(weights)
        diagnostics.append(BarrierDiagnostics(
            barrier_index=i + 1, ess=ess,
            min_weight=min(weights), max_weight=max(weights), dead_count=dead))
        if all_dead:
            return EnsembleResult(samples=[], survived=False,
                                  failed_barrier=i + 1, diagnostics=diagnostics)
        offspring = systematic_resample(weights, stream(seed, KIND_RESAMPLE, i))
        particles = [list(particles[k]) for k in offspring]

    samples = []
    for p in particles:
        while p and p[-1] > horizon:
            p.pop()
        samples.append(tuple(p))
    return EnsembleResult(samples=samples, survived=True,
                          failed_barrier=None, diagnostics=diagnostics)
