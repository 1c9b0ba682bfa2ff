"""Stochastic beam search over the same barrier decomposition.

Instead of weighting and resampling, each of f kept trajectories spawns b
sampled continuations per barrier; the b*f candidates are ranked by their
cumulative model log-probability from the start of the sequence (no length
normalization) and the top f survive.  Selection maximizes likelihood, so the
output concentrates on high-probability sequences rather than approximating
the conditional law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .models import MAX_EVENTS, SequenceModel, step_log_probabilities
from .rng import KIND_PROPOSAL, stream
from .smc import ConstraintSet, EnsembleResult, _validate_setup, propose_segment


@dataclass(frozen=True)
class BeamBarrierDiagnostics:
    barrier_index: int  # 1-based
    explored: int       # candidates considered at this barrier (= b*f)
    kept_min_logprob: float
    kept_max_logprob: float
    discarded_max_logprob: float  # -inf when nothing was discarded

    def to_dict(self) -> dict:
        return {"barrier_index": self.barrier_index, "explored": self.explored,
                "kept_min_logprob": self.kept_min_logprob,
                "kept_max_logprob": self.kept_max_logprob,
                "discarded_max_logprob": self.discarded_max_logprob}


def beam_search_sample(model: SequenceModel, constraints: ConstraintSet,
                       b: int, f: int, seed: int, *,
                       horizon: float = 1.0,
                       initial_history: Sequence[float] = (),
                       max_events: int = MAX_EVENTS) -> EnsembleResult:
    """Sample constraint-satisfying sequences by likelihood-ranked search.

    Returns the kept trajectories (f of them, fewer if not that many remained
    viable) in rank order, ties broken by lower trajectory index, with their
    total model log-probabilities in ``log_probs``.  ``survived`` is False
    when every candidate at some barrier scored -inf, i.e. every trajectory
    was forced through a zero-probability event.
    """
    if b < 1 or f < 1:
        raise ValueError("b and f must be at least 1")
    _validate_setup(constraints, horizon, initial_history)
    prefix = list(initial_history)
    barriers = [*constraints.z, math.inf]
    flags = [True, *constraints.b]
    # f copies of the empty continuation so every barrier explores b*f candidates
    kept: list[tuple[float, list]] = [(0.0, list(prefix)) for _ in range(f)]
    diagnostics = []

    for i, z in enumerate(barriers):
        b_prev = flags[i]
        is_final = math.isinf(z)
        if is_final:
            # one completion per kept trajectory; ranking is already fixed
            samples = []
            log_probs = []
            for t, (_, seq) in enumerate(kept):
                g = stream(seed, KIND_PROPOSAL, i, t)
                seg, _, _ = propose_segment(model, seq, z, b_prev, g,
                                            horizon=horizon, max_events=max_events)
                seq = seq + seg
                while seq and seq[-1] > horizon:
                    seq.pop()
                samples.append(tuple(seq))
                log_probs.append(_total_logprob(model, seq, prefix))
            return EnsembleResult(samples=samples, survived=True, failed_barrier=None,
                                  diagnostics=diagnostics, log_probs=log_probs)

        candidates: list[tuple[float, list]] = []
        for t, (lp, seq) in enumerate(kept):
            for j in range(b):
                g = stream(seed, KIND_PROPOSAL, i, t * b + j)
                seg, _, _ = propose_segment(model, seq, z, b_prev, g,
                                            horizon=horizon, max_events=max_events)
                seg_lp = sum(step_log_probabilities(model, seg, initial_history=seq))
                candidates.append((lp + seg_lp, seq + seg))
        order = sorted(range(len(candidates)), key=lambda k: -candidates[k][0])
        # a -inf candidate was forced through a zero-probability event; it is
        # not a viable trajectory, so it never enters the kept set
        viable = [k for k in order if candidates[k][0] > -math.inf]
        if not viable:
            diagnostics.append(BeamBarrierDiagnostics(
                barrier_index=i + 1, explored=len(candidates),
                kept_min_logprob=-math.inf, kept_max_logprob=-math.inf,
                discarded_max_logprob=-math.inf))
            return EnsembleResult(samples=[], survived=False, failed_barrier=i + 1,
                                  diagnostics=diagnostics)
        kept = [candidates[k] for k in viable[:f]]
        kept_lps = [lp for lp, _ in kept]
        discarded = [candidates[k][0] for k in viable[f:]]
        diagnostics.append(BeamBarrierDiagnostics(
            barrier_index=i + 1, explored=len(candidates),
            kept_min_logprob=min(kept_lps), kept_max_logprob=max(kept_lps),
            discarded_max_logprob=max(discarded) if discarded else -math.inf))
    raise AssertionError("unreachable: final segment always returns")


def _total_logprob(model: SequenceModel, seq: Sequence[float], prefix: list) -> float:
    suffix = seq[len(prefix):]
    return sum(step_log_probabilities(model, suffix, initial_history=prefix))
