"""Sequence-model adapter: a symbol step model becomes a process over codes.

The next event after a history ending at (tick t_x, action a_x) is reached
either by another action at t_x (one symbol) or by one shift then an action
(two symbols).  The per-event pdf/cdf follow directly:

  same tick:   pdf(z) = f(a_z)
               cdf(z) = sum of f(a) over a_x < a <= a_z
  later tick:  pdf(z) = f(shift dt) * f'(a_z)
               cdf(z) = sum of f(a) over a > a_x              (rest of t_x)
                      + sum of f(shift d) over d < dt          (earlier ticks)
                      + f(shift dt) * sum of f'(a) over a <= a_z

where f is the masked next-symbol PMF at the history and f' the one after
appending the shift.  Sums over a <= a_x contribute nothing because the mask
zeroes them; the lower bounds are exclusive of a_x.  Because a shift must be
followed by an action, summing a full f' gives 1 and the earlier-tick term
needs no action factor.

Gaps are integer code differences, so P(gap >= d) = 1 - cdf(d-1) exactly —
the mass at d itself stays in the denominator of the barrier hazard.
"""

from __future__ import annotations

import math
from typing import Sequence

from ..models import InterArrivalDistribution, SequenceModel
from .encoding import Vocabulary, codes_to_events, events_to_symbols
from .ngram import NGramModel


class _MusicGap(InterArrivalDistribution):
    def __init__(self, model: NGramModel, vocab: Vocabulary, history_codes: Sequence[int]):
        self.model = model
        self.vocab = vocab
        events = codes_to_events(history_codes, vocab)
        self.symbols = events_to_symbols(events, vocab)
        self.last_code = int(history_codes[-1]) if len(history_codes) else 0
        if events:
            self.cur_t = events[-1].t
            self.last_a = self.symbols[-1]  # final symbol is that event's action
        else:
            self.cur_t = 0
            self.last_a = None
        self.prev = self.symbols[-1] if self.symbols else None
        self.ctx = model.context_of(self.symbols)

    def _step_pmf(self):
        return self.model.masked_pmf(self.ctx, self.prev)

    def _after_shift(self, shift_sym: int):
        ctx2 = self.model.context_of(self.symbols + [shift_sym])
        return self.model.masked_pmf(ctx2, shift_sym)

    def _split(self, d):
        """Decompose a positive integer gap into (tick delta, target action)."""
        z = self.last_code + int(d)
        a_prime = z % self.vocab.actions
        t = z // self.vocab.actions
        if a_prime == 0:
            a_prime = self.vocab.actions
            t -= 1
        return t - self.cur_t, a_prime

    def pdf(self, d):
        if d < 1 or d != int(d):
            return 0.0
        dt, a_z = self._split(d)
        if dt < 0:
            return 0.0
        pmf = self._step_pmf()
        if dt == 0:
            return float(pmf[a_z - 1])
        if dt > self.vocab.s_max:
            return 0.0
        shift_sym = self.vocab.shift_symbol(dt)
        p_shift = float(pmf[shift_sym - 1])
        if p_shift == 0.0:
            return 0.0
        return p_shift * float(self._after_shift(shift_sym)[a_z - 1])

    def cdf(self, d):
        d = int(d)
        if d < 1:
            return 0.0
        dt, a_z = self._split(d)
        if dt < 0:
            return 0.0
        pmf = self._step_pmf()
        lo = self.last_a if self.last_a is not None else 0  # exclusive lower bound
        if dt == 0:
            return float(pmf[lo:a_z].sum())
        total = float(pmf[lo:self.vocab.actions].sum())  # rest of the current tick
        acts = self.vocab.actions
        full = min(dt - 1, self.vocab.s_max)  # shifts landing strictly earlier
        total += float(pmf[acts:acts + full].sum())
        if dt <= self.vocab.s_max:
            shift_sym = self.vocab.shift_symbol(dt)
            p_shift = float(pmf[shift_sym - 1])
            if p_shift > 0.0:
                total += p_shift * float(self._after_shift(shift_sym)[:a_z].sum())
        return total

    def survival(self, d):
        if d <= 1:
            return 1.0
        return max(1.0 - self.cdf(math.ceil(d) - 1), 0.0)

    def sample(self, rng):
        sym = self.model.sample_symbol(self.ctx, self.prev, rng)
        if self.vocab.is_action(sym):
            code = self.cur_t * self.vocab.actions + sym
        else:
            dt = self.vocab.shift_amount(sym)
            ctx2 = self.model.context_of(self.symbols + [sym])
            action = self.model.sample_symbol(ctx2, sym, rng)
            code = (self.cur_t + dt) * self.vocab.actions + action
        return code - self.last_code


class UnrolledMusicModel(SequenceModel):
    """Point process over unrolled codes driven by a symbol step model."""

    def __init__(self, step_model: NGramModel, vocab: Vocabulary | None = None):
        self.step_model = step_model
        self.vocab = vocab if vocab is not None else step_model.vocab

    def gap_distribution(self, history):
        return _MusicGap(self.step_model, self.vocab, history)


def _unwrap(model, vocab: Vocabulary | None):
    step = model.step_model if isinstance(model, UnrolledMusicModel) else model
    return step, (vocab if vocab is not None else step.vocab)


def next_code_pmf(model, history_codes: Sequence[int], z_code: int,
                  vocab: Vocabulary | None = None) -> float:
    """P(next event code == z_code | history)."""
    step, vocab = _unwrap(model, vocab)
    gap = _MusicGap(step, vocab, history_codes)
    return gap.pdf(z_code - gap.last_code)


def next_code_cdf(model, history_codes: Sequence[int], z_code: int,
                  vocab: Vocabulary | None = None) -> float:
    """P(next event code <= z_code | history)."""
    step, vocab = _unwrap(model, vocab)
    gap = _MusicGap(step, vocab, history_codes)
    return gap.cdf(z_code - gap.last_code)
