"""Event encoding, symbol streams, and the canonical-order mask.

An event is (tick t, action a, part): actions 1..128 are note-ons of pitch a,
129..256 note-offs of pitch a-128; ticks run at 2400 per quarter note.  With
P parts the action space expands to A = P*256, ordering part 0's actions
before part 1's within a tick.  The unrolled code of an event is

    e = t*A + a'        (a' the expanded action, 1-based)

so codes order events by (tick, part, action) and strictly increase along a
piece.  Decoding uses the residue convention: e % A == 0 means a' = A at tick
e//A - 1.

A piece is generated as a symbol stream over a vocabulary of A actions and
s_max time shifts.  Canonical form: shifts never follow shifts, and within a
tick actions strictly ascend.  The mask encodes exactly that — after a shift
all shifts are forbidden; after action a' all actions <= a' are forbidden; at
the very start nothing is forbidden.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TICKS_PER_QUARTER = 2400
NOTE_ACTIONS = 256  # per part: 128 note-ons then 128 note-offs


@dataclass(frozen=True)
class Vocabulary:
    """Symbol layout: actions 1..A, then shifts A+1..A+s_max."""

    a_max: int = NOTE_ACTIONS
    s_max: int = TICKS_PER_QUARTER
    parts: int = 1

    def __post_init__(self):
        if self.a_max < 1 or self.s_max < 1 or self.parts < 1:
            raise ValueError("a_max, s_max and parts must all be positive")

    @property
    def actions(self) -> int:
        return self.a_max * self.parts

    @property
    def size(self) -> int:
        return self.actions + self.s_max

    def is_action(self, sym: int) -> bool:
        return 1 <= sym <= self.actions

    def is_shift(self, sym: int) -> bool:
        return self.actions < sym <= self.size

    def shift_symbol(self, dt: int) -> int:
        if not 1 <= dt <= self.s_max:
            raise ValueError(f"shift of {dt} ticks outside [1, {self.s_max}]")
        return self.actions + dt

    def shift_amount(self, sym: int) -> int:
        if not self.is_shift(sym):
            raise ValueError(f"symbol {sym} is not a shift")
        return sym - self.actions


@dataclass(frozen=True)
class MusicEvent:
    t: int
    a: int
    part: int = 0

    def __post_init__(self):
        if self.t < 0 or self.a < 1 or self.part < 0:
            raise ValueError(f"invalid event ({self.t}, {self.a}, part={self.part})")


def expanded_action(ev: MusicEvent, vocab: Vocabulary) -> int:
    if ev.a > vocab.a_max:
        raise ValueError(f"action {ev.a} exceeds a_max={vocab.a_max}")
    if ev.part >= vocab.parts:
        raise ValueError(f"part {ev.part} exceeds part count {vocab.parts}")
    return ev.part * vocab.a_max + ev.a


def encode_event(ev: MusicEvent, vocab: Vocabulary = Vocabulary()) -> int:
    """Unrolled code e = t*A + a' (always >= 1)."""
    return ev.t * vocab.actions + expanded_action(ev, vocab)


def decode_event(code: int, vocab: Vocabulary = Vocabulary()) -> MusicEvent:
    """Inverse of encode_event; a residue of 0 means the last action of the
    previous tick."""
    if code < 1:
        raise ValueError(f"codes are positive, got {code}")
    a_prime = code % vocab.actions
    t = code // vocab.actions
    if a_prime == 0:
        a_prime = vocab.actions
        t -= 1
    part, a = divmod(a_prime - 1, vocab.a_max)
    return MusicEvent(t=t, a=a + 1, part=part)


def events_to_codes(events, vocab: Vocabulary = Vocabulary()) -> list[int]:
    codes = [encode_event(ev, vocab) for ev in events]
    for i in range(1, len(codes)):
        if codes[i] <= codes[i - 1]:
            raise ValueError(f"events are not in strictly ascending code order at index {i}")
    return codes


def codes_to_events(codes, vocab: Vocabulary = Vocabulary()) -> list[MusicEvent]:
    return [decode_event(int(c), vocab) for c in codes]


def events_to_symbols(events, vocab: Vocabulary = Vocabulary()) -> list[int]:
    """Canonical symbol stream of an event list (shift-then-action unrolling).

    Rejects events out of canonical order and tick gaps beyond s_max.
    """
    symbols = []
    cur_t = 0
    last_a = None  # expanded action of the previous event at cur_t
    for ev in events:
        a_prime = expanded_action(ev, vocab)
        if ev.t < cur_t:
            raise ValueError(f"event at tick {ev.t} appears after tick {cur_t}")
        if ev.t == cur_t:
            if last_a is not None and a_prime <= last_a:
                raise ValueError(f"actions within tick {cur_t} must strictly ascend "
                                 f"({a_prime} after {last_a})")
        else:
            dt = ev.t - cur_t
            if dt > vocab.s_max:
                raise ValueError(f"tick gap {dt} exceeds s_max={vocab.s_max}; "
                                 "re-ingest with a larger s_max")
            symbols.append(vocab.shift_symbol(dt))
            cur_t = ev.t
        symbols.append(a_prime)
        last_a = a_prime
    return symbols


def symbols_to_events(symbols, vocab: Vocabulary = Vocabulary()) -> list[MusicEvent]:
    """Decode a symbol stream, enforcing the canonical-order rules."""
    events = []
    cur_t = 0
    last_a = None
    prev_shift = False
    for sym in symbols:
        if vocab.is_shift(sym):
            if prev_shift:
                raise ValueError("shift after shift is not canonical")
            cur_t += vocab.shift_amount(sym)
            last_a = None
            prev_shift = True
        elif vocab.is_action(sym):
            if last_a is not None and sym <= last_a:
                raise ValueError(f"action {sym} does not ascend past {last_a} within tick {cur_t}")
            part, a = divmod(sym - 1, vocab.a_max)
            events.append(MusicEvent(t=cur_t, a=a + 1, part=part))
            last_a = sym
            prev_shift = False
        else:
            raise ValueError(f"symbol {sym} outside vocabulary of size {vocab.size}")
    if prev_shift:
        raise ValueError("dangling shift: a symbol stream may not end on a shift")
    return events


def allowed_symbols(prev: int | None, vocab: Vocabulary = Vocabulary()) -> np.ndarray:
    """Boolean mask (index sym-1) of symbols permitted after ``prev``.

    None (start of stream) permits everything.
    """
    mask = np.ones(vocab.size, dtype=bool)
    if prev is None:
        return mask
    if vocab.is_shift(prev):
        mask[vocab.actions:] = False
    elif vocab.is_action(prev):
        mask[:prev] = False  # actions <= prev, i.e. indices 0..prev-1
    else:
        raise ValueError(f"symbol {prev} outside vocabulary of size {vocab.size}")
    return mask


def mask_column(prev: int | None, vocab: Vocabulary = Vocabulary()) -> np.ndarray:
    """Additive mask column: 0 where permitted, -inf where forbidden."""
    col = np.zeros(vocab.size)
    col[~allowed_symbols(prev, vocab)] = -np.inf
    return col


def apply_mask(logits, prev: int | None, vocab: Vocabulary = Vocabulary()) -> np.ndarray:
    """Add the mask column for ``prev`` to a logit vector (index sym-1)."""
    logits = np.asarray(logits, dtype=float)
    if logits.shape != (vocab.size,):
        raise ValueError(f"expected {vocab.size} logits, got shape {logits.shape}")
    return logits + mask_column(prev, vocab)
