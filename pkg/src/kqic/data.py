"""Survival-data containers and CSV ingestion.

A subject is a triple (entry, observed, event): ``entry`` is the time the
subject becomes observable, ``observed`` is the event or censoring time,
whichever came first, and ``event`` records which one it was.  Entry must
strictly precede the observed time; ties are rejected rather than jittered,
so data with tied times must be perturbed upstream.  Times are unit-free
64-bit floats.

Datasets are immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ParseError, ValidationError

#: canonical CSV header; the group column is optional
CSV_COLUMNS = ("entry", "time", "event", "group")


def _triple_problems(entry, observed, event) -> list[str]:
    """Invariant violations of a raw (entry, observed, event) triple."""
    msgs = []
    try:
        e = float(entry)
        t = float(observed)
    except (TypeError, ValueError):
        return ["entry and observed time must be real numbers"]
    if not math.isfinite(e) or not math.isfinite(t):
        msgs.append("times must be finite")
        return msgs
    if isinstance(event, bool):
        pass
    elif event not in (0, 1):
        msgs.append(f"event value {event!r} not in {{0, 1}}")
    if e < 0:
        msgs.append(f"entry {e!r} is negative")
    if math.isfinite(e) and math.isfinite(t) and not e < t:
        msgs.append(f"entry {e!r} not strictly below observed {t!r}")
    return msgs


@dataclass(frozen=True)
class SurvivalSample:
    """One subject: entry time, observed time, and event indicator."""

    entry: float
    observed: float
    event: bool

    def __post_init__(self):
        problems = _triple_problems(self.entry, self.observed, self.event)
        if problems:
            raise ValidationError([(0, m) for m in problems])
        object.__setattr__(self, "entry", float(self.entry))
        object.__setattr__(self, "observed", float(self.observed))
        object.__setattr__(self, "event", bool(self.event))


@dataclass(frozen=True)
class TruncatedDataset:
    """Validated collection of subjects, stored column-wise.

    Arrays are read-only; ``group`` is an optional per-subject label used by
    the harness to split cohorts.
    """

    entry: np.ndarray
    observed: np.ndarray
    event: np.ndarray
    group: tuple[str, ...] | None = None

    def __post_init__(self):
        entry = np.ascontiguousarray(self.entry, dtype=np.float64)
        observed = np.ascontiguousarray(self.observed, dtype=np.float64)
        event = np.ascontiguousarray(self.event, dtype=bool)
        if entry.ndim != 1 or entry.shape != observed.shape or entry.shape != event.shape:
            raise ValidationError([(0, "entry/observed/event must be equal-length 1-d arrays")])
        if entry.size == 0:
            raise ValidationError([(0, "dataset must contain at least one sample")])
        if self.group is not None and len(self.group) != entry.size:
            raise ValidationError([(0, "group labels must match the sample count")])
        violations = []
        bad = ~np.isfinite(entry) | ~np.isfinite(observed)
        for i in np.flatnonzero(bad):
            violations.append((int(i), "times must be finite"))
        ok = ~bad
        for i in np.flatnonzero(ok & (entry < 0)):
            violations.append((int(i), f"entry {entry[i]!r} is negative"))
        for i in np.flatnonzero(ok & ~(entry < observed)):
            violations.append(
                (int(i), f"entry {entry[i]!r} not strictly below observed {observed[i]!r}")
            )
        if violations:
            raise ValidationError(sorted(violations))
        for arr, name in ((entry, "entry"), (observed, "observed"), (event, "event")):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.group is not None:
            object.__setattr__(self, "group", tuple(str(g) for g in self.group))

    @property
    def n(self) -> int:
        return int(self.entry.size)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> SurvivalSample:
        return SurvivalSample(float(self.entry[i]), float(self.observed[i]), bool(self.event[i]))

    @property
    def samples(self) -> tuple[SurvivalSample, ...]:
        return tuple(self[i] for i in range(self.n))

    def subset(self, indices) -> "TruncatedDataset":
        """Dataset restricted to ``indices`` (order preserved)."""
        idx = np.asarray(indices, dtype=np.intp)
        group = None if self.group is None else tuple(self.group[i] for i in idx)
        return TruncatedDataset(self.entry[idx], self.observed[idx], self.event[idx], group)

    def with_entries(self, new_entry) -> "TruncatedDataset":
        """Same (observed, event, group) with replaced entry times (revalidated)."""
        return TruncatedDataset(np.asarray(new_entry, dtype=np.float64), self.observed, self.event, self.group)

    def by_group(self) -> dict[str, "TruncatedDataset"]:
        """Split into per-label datasets; empty dict when there is no group column."""
        if self.group is None:
            return {}
        labels = list(dict.fromkeys(self.group))
        out = {}
        for lab in labels:
            idx = [i for i, g in enumerate(self.group) if g == lab]
            out[lab] = self.subset(idx)
        return out


@dataclass(frozen=True)
class DatasetSummary:
    """Counts, event fraction and time ranges of a dataset."""

    n: int
    event_fraction: float
    censoring_fraction: float
    entry_range: tuple[float, float]
    observed_range: tuple[float, float]


def validate(samples: Iterable, group: Sequence[str] | None = None) -> TruncatedDataset:
    """Build a dataset from raw (entry, observed, event) triples.

    Every violation is reported, not just the first; the error carries
    (index, message) pairs.  Order of the input is preserved.
    """
    triples = list(samples)
    violations = []
    for i, triple in enumerate(triples):
        try:
            entry, observed, event = triple
        except (TypeError, ValueError):
            violations.append((i, f"expected an (entry, observed, event) triple, got {triple!r}"))
            continue
        for msg in _triple_problems(entry, observed, event):
            violations.append((i, msg))
    if not triples:
        violations.append((0, "dataset must contain at least one sample"))
    if violations:
        raise ValidationError(violations)
    entry = np.array([float(t[0]) for t in triples])
    observed = np.array([float(t[1]) for t in triples])
    event = np.array([bool(t[2]) for t in triples])
    return TruncatedDataset(entry, observed, event, None if group is None else tuple(group))


def summarize(dataset: TruncatedDataset) -> DatasetSummary:
    """Event/censoring fractions and time ranges."""
    frac = float(np.count_nonzero(dataset.event)) / dataset.n
    return DatasetSummary(
        n=dataset.n,
        event_fraction=frac,
        censoring_fraction=1.0 - frac,
        entry_range=(float(dataset.entry.min()), float(dataset.entry.max())),
        observed_range=(float(dataset.observed.min()), float(dataset.observed.max())),
    )


def _as_text(source) -> io.StringIO:
    if isinstance(source, (str, Path)):
        try:
            raw = Path(source).read_bytes()
        except OSError as exc:
            raise ParseError([(1, f"cannot read {source!r}: {exc}")]) from None
    elif isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    elif hasattr(source, "read"):
        raw = source.read()
        if isinstance(raw, str):
            raw = raw.encode("utf-8")
    else:
        raise ParseError([(1, f"unsupported source {type(source).__name__}")])
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError([(1, f"not valid UTF-8: {exc}")]) from None
    return io.StringIO(text, newline="")


def load_csv(source, schema: Mapping[str, str] | None = None) -> TruncatedDataset:
    """Parse a CSV file into a validated dataset.

    ``source`` is a path, bytes, or a (binary or text) file object holding
    UTF-8 text with a header row; LF and CRLF are both accepted.  ``schema``
    optionally remaps the roles ``entry``/``time``/``event``/``group`` to
    other column names.  Row order is preserved.  Malformed rows raise
    :class:`ParseError` and invariant violations raise
    :class:`ValidationError`, both carrying file line numbers (header = 1).
    """
    colmap = {"entry": "entry", "time": "time", "event": "event", "group": "group"}
    if schema:
        colmap.update(schema)
    reader = csv.reader(_as_text(source))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError([(1, "empty input, header row required")]) from None
    header = [h.strip() for h in header]
    positions = {}
    for role in ("entry", "time", "event"):
        name = colmap[role]
        if name not in header:
            raise ParseError([(1, f"missing required column {name!r} in header {header!r}")])
        positions[role] = header.index(name)
    group_pos = header.index(colmap["group"]) if colmap["group"] in header else None

    rows, groups = [], []
    parse_problems, invariant_problems = [], []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < len(header):
            parse_problems.append((line_no, f"expected {len(header)} columns, got {len(row)}"))
            continue
        try:
            entry = float(row[positions["entry"]])
            observed = float(row[positions["time"]])
        except ValueError:
            parse_problems.append((line_no, "non-numeric time value"))
            continue
        raw_event = row[positions["event"]].strip()
        if raw_event not in ("0", "1"):
            parse_problems.append((line_no, f"event value {raw_event!r} not in {{0, 1}}"))
            continue
        problems = _triple_problems(entry, observed, int(raw_event))
        if problems:
            invariant_problems.extend((line_no, msg) for msg in problems)
            continue
        rows.append((entry, observed, int(raw_event)))
        groups.append(row[group_pos].strip() if group_pos is not None else None)
    if parse_problems:
        raise ParseError(parse_problems)
    if invariant_problems:
        raise ValidationError(invariant_problems, where="line")
    if not rows:
        raise ParseError([(1, "no data rows")])
    group = tuple(g for g in groups) if group_pos is not None else None
    entry = np.array([r[0] for r in rows])
    observed = np.array([r[1] for r in rows])
    event = np.array([bool(r[2]) for r in rows])
    return TruncatedDataset(entry, observed, event, group)


def to_csv(dataset: TruncatedDataset) -> str:
    """Serialize a dataset in the canonical CSV schema.

    Times are written with 17 significant digits so that a load/emit round
    trip reproduces the text bit for bit.
    """
    has_group = dataset.group is not None
    lines = ["entry,time,event" + (",group" if has_group else "")]
    for i in range(dataset.n):
        cells = [
            format(float(dataset.entry[i]), ".17g"),
            format(float(dataset.observed[i]), ".17g"),
            str(int(dataset.event[i])),
        ]
        if has_group:
            cells.append(dataset.group[i])
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
