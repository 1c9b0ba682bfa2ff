"""Event files, corpora, and constraint extraction.

Event files are JSON lines: a header object, then one object per event in
canonical code order.  Constraint files extend the generic {z, b} schema with
the conditioning prefix (codes before the split) and a tick horizon.
"""

from __future__ import annotations

import json
import logging
import warnings
from pathlib import Path
from typing import Sequence

from ..smc import ConstraintSet
from .encoding import MusicEvent, Vocabulary, events_to_codes

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def write_events(path, events: Sequence[MusicEvent], vocab: Vocabulary = Vocabulary()) -> None:
    events_to_codes(events, vocab)  # canonical-order check before writing
    lines = [json.dumps({"version": FORMAT_VERSION, "kind": "events",
                         "ppq": 2400, "parts": vocab.parts}, sort_keys=True)]
    lines += [json.dumps({"t": ev.t, "a": ev.a, "part": ev.part}, sort_keys=True)
              for ev in events]
    Path(path).write_text("\n".join(lines) + "\n")


def read_events(path) -> tuple[list[MusicEvent], int]:
    """Read an event file; returns (events, part count from the header)."""
    raw = [line for line in Path(path).read_text().splitlines() if line.strip()]
    if not raw:
        raise ValueError(f"{path}: empty event file")
    header = json.loads(raw[0])
    if header.get("kind") != "events":
        raise ValueError(f"{path}: not an event file (kind={header.get('kind')!r})")
    if header.get("version", 1) != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported event file version {header.get('version')!r}")
    parts = int(header.get("parts", 1))
    events = []
    for line in raw[1:]:
        d = json.loads(line)
        events.append(MusicEvent(t=d["t"], a=d["a"], part=d.get("part", 0)))
    events_to_codes(events, Vocabulary(parts=max(parts, 1)))  # canonical order check
    return events, parts


def read_corpus(directory, vocab: Vocabulary) -> list[list[int]]:
    """Symbol streams of every event file (*.jsonl) in a directory."""
    from .encoding import events_to_symbols

    paths = sorted(Path(directory).glob("*.jsonl"))
    if not paths:
        raise ValueError(f"no event files (*.jsonl) found in {directory}")
    streams = []
    for p in paths:
        events, _ = read_events(p)
        streams.append(events_to_symbols(events, vocab))
    logger.info("read %d event files from %s", len(streams), directory)
    return streams


def extract_constraints(events: Sequence[MusicEvent], split_tick: int, part: int,
                        vocab: Vocabulary = Vocabulary(),
                        hold_fixed: bool = False) -> tuple[list[int], ConstraintSet]:
    """Conditioning data from a reference piece.

    Events before ``split_tick`` become the prefix (as codes); the chosen
    part's events from the split onward become required times.  Other parts'
    events after the split are discarded — they are what sampling regenerates.
    ``hold_fixed`` forbids free events between (and after) the constraints.
    """
    prefix = events_to_codes([ev for ev in events if ev.t < split_tick], vocab)
    kept = [ev for ev in events if ev.t >= split_tick and ev.part == part]
    if not kept:
        warnings.warn(f"part {part} has no events at or after tick {split_tick}; "
                      "constraint set is empty", stacklevel=2)
    z = tuple(events_to_codes(kept, vocab))
    b = (not hold_fixed,) * len(z)
    return prefix, ConstraintSet(z=z, b=b)


def write_constraint_file(path, constraints: ConstraintSet, prefix: Sequence[int] = (),
                          horizon_ticks: int | None = None) -> None:
    payload = constraints.to_dict()
    payload["prefix"] = [int(c) for c in prefix]
    if horizon_ticks is not None:
        payload["horizon_ticks"] = int(horizon_ticks)
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n")
