"""Minimal standard-MIDI-file subset: note on/off events only.

Import maps channels to parts, rescales ticks to 2400 per quarter, sorts into
canonical code order, and rejects anything the event domain cannot represent
faithfully: SMPTE time division, overlapping or zero-length same-pitch notes
on one channel, and dangling note-ons/offs.  Export writes a format-0 file at
2400 ppq; exporting then importing reproduces the event list exactly.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Sequence

from .encoding import TICKS_PER_QUARTER, MusicEvent

logger = logging.getLogger(__name__)

NOTE_ON_VELOCITY = 64


def _read_vlq(data: bytes, pos: int) -> tuple[int, int]:
    value = 0
    while True:
        byte = data[pos]
        pos += 1
        value = (value << 7) | (byte & 0x7F)
        if not byte & 0x80:
            return value, pos


def _write_vlq(value: int) -> bytes:
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


def _parse_track(data: bytes) -> list[tuple[int, int, int, bool]]:
    """(tick, channel, pitch, is_on) triples of one track chunk body."""
    notes = []
    pos = 0
    tick = 0
    status = None
    while pos < len(data):
        delta, pos = _read_vlq(data, pos)
        tick += delta
        byte = data[pos]
        if byte >= 0x80:
            pos += 1
            if byte == 0xFF:  # meta
                length, pos = _read_vlq(data, pos + 1)
                pos += length
                status = None
                continue
            if byte in (0xF0, 0xF7):  # sysex
                length, pos = _read_vlq(data, pos)
                pos += length
                status = None
                continue
            status = byte
        elif status is None:
            raise ValueError("running status without a prior status byte")
        kind = status & 0xF0
        channel = status & 0x0F
        if kind in (0x80, 0x90, 0xA0, 0xB0, 0xE0):
            d1, d2 = data[pos], data[pos + 1]
            pos += 2
        elif kind in (0xC0, 0xD0):
            d1, d2 = data[pos], 0
            pos += 1
        else:
            raise ValueError(f"unsupported status byte 0x{status:02x}")
        if kind == 0x90:
            notes.append((tick, channel, d1, d2 > 0))
        elif kind == 0x80:
            notes.append((tick, channel, d1, False))
    return notes


def _check_note_pairing(events: Sequence[MusicEvent]) -> None:
    state: dict[tuple[int, int], tuple[bool, int]] = {}
    for ev in events:
        is_on = ev.a <= 128
        pitch = ev.a - 1 if is_on else ev.a - 129
        key = (ev.part, pitch)
        on_now, last_t = state.get(key, (False, None))
        if last_t == ev.t:
            raise ValueError(f"pitch {pitch} on part {ev.part} has simultaneous events "
                             f"at tick {ev.t}: zero-length or retriggered note")
        if is_on and on_now:
            raise ValueError(f"pitch {pitch} on part {ev.part} re-triggered at tick {ev.t} "
                             "while still sounding: overlapping notes are not representable")
        if not is_on and not on_now:
            raise ValueError(f"pitch {pitch} on part {ev.part} released at tick {ev.t} "
                             "without a matching note-on")
        state[key] = (is_on, ev.t)
    hanging = [k for k, (on, _) in state.items() if on]
    if hanging:
        part, pitch = hanging[0]
        raise ValueError(f"pitch {pitch} on part {part} is never released")


def read_midi(path) -> list[MusicEvent]:
    """Parse the note on/off content of a MIDI file into canonical events."""
    data = Path(path).read_bytes()
    if data[:4] != b"MThd":
        raise ValueError(f"{path}: not a MIDI file")
    header_len = int.from_bytes(data[4:8], "big")
    fmt = int.from_bytes(data[8:10], "big")
    ntrks = int.from_bytes(data[10:12], "big")
    division = int.from_bytes(data[12:14], "big")
    if fmt not in (0, 1):
        raise ValueError(f"{path}: unsupported MIDI format {fmt}")
    if division & 0x8000:
        raise ValueError(f"{path}: SMPTE time division is not supported")
    ppq = division
    if ppq == 0:
        raise ValueError(f"{path}: zero ticks-per-quarter division")
    pos = 8 + header_len
    notes = []
    for _ in range(ntrks):
        if data[pos:pos + 4] != b"MTrk":
            raise ValueError(f"{path}: malformed track chunk at byte {pos}")
        length = int.from_bytes(data[pos + 4:pos + 8], "big")
        body = data[pos + 8:pos + 8 + length]
        notes.extend(_parse_track(body))
        pos += 8 + length
    if ppq != TICKS_PER_QUARTER:
        logger.info("rescaling %s from %d to %d ticks per quarter", path, ppq, TICKS_PER_QUARTER)
    events = []
    for tick, channel, pitch, is_on in notes:
        t = int(round(tick * TICKS_PER_QUARTER / ppq))
        a = pitch + 1 if is_on else pitch + 129
        events.append(MusicEvent(t=t, a=a, part=channel))
    events.sort(key=lambda ev: (ev.t, ev.part, ev.a))
    _check_note_pairing(events)
    return events


def write_midi(path, events: Sequence[MusicEvent]) -> None:
    """Write canonical events as a format-0 MIDI file at 2400 ppq.

    Rejects event lists the reader would reject (unpaired or overlapping
    notes), so a written file can always be read back.
    """
    _check_note_pairing(events)
    track = bytearray()
    prev_t = 0
    for ev in events:
        if ev.a > 256:
            raise ValueError(f"action {ev.a} has no MIDI note representation")
        if ev.part > 15:
            raise ValueError(f"part {ev.part} exceeds the 16 MIDI channels")
        if ev.t < prev_t:
            raise ValueError("events must be in canonical order")
        track += _write_vlq(ev.t - prev_t)
        prev_t = ev.t
        if ev.a <= 128:
            track += bytes([0x90 | ev.part, ev.a - 1, NOTE_ON_VELOCITY])
        else:
            track += bytes([0x80 | ev.part, ev.a - 129, NOTE_ON_VELOCITY])
    track += b"\x00\xff\x2f\x00"  # end of track
    out = bytearray()
    out += b"MThd" + (6).to_bytes(4, "big")
    out += (0).to_bytes(2, "big") + (1).to_bytes(2, "big")
    out += TICKS_PER_QUARTER.to_bytes(2, "big")
    out += b"MTrk" + len(track).to_bytes(4, "big") + track
    Path(path).write_bytes(bytes(out))
