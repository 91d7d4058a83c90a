"""Direct-estimate probability tables over T-gram events."""
from __future__ import annotations

import json
import math
import struct
import zlib
from collections import Counter
from fractions import Fraction
from typing import Iterable, Optional

from .history import History, HistoryDep, HistoryH, dep_history, history_from_text
from .tgram import Role, TGram, extract_treebank, format_fragment, parse_fragment
from .treebank import TagLexicon

__all__ = [
    "CountTable", "ModelFormatError", "HistoryH", "HistoryDep", "dep_history",
    "observe_corpus", "prob", "adjacency_flag", "save_model", "load_model",
]

MAGIC = b"TGRAMMDL"
VERSION = 1
_HEADER = struct.Struct(">8sHII")


class ModelFormatError(ValueError):
    pass


class CountTable:
    """(role, history) -> {T-gram: count}, with per-key totals.

    ``meta`` holds the training settings the parser must reproduce (pre-head
    order, Markov flag, extraction limits); ``lexicon`` the tag lexicon.
    """

    def __init__(self, meta: Optional[dict] = None, lexicon: Optional[TagLexicon] = None):
        self.counts: dict[tuple[Role, History], Counter] = {}
        self.totals: dict[tuple[Role, History], int] = {}
        self.meta = dict(meta or {})
        self.lexicon = lexicon
        self._cache = {}

    @property
    def markov(self) -> bool:
        return bool(self.meta.get("markov", False))

    def add(self, t: TGram, history: History, n: int = 1) -> None:
        if n <= 0:
            raise ValueError("counts must be positive")
        key = (t.role, history)
        self.counts.setdefault(key, Counter())[t] += n
        self.totals[key] = self.totals.get(key, 0) + n
        self._cache.clear()

    def count(self, role: Role, history: History, t: TGram) -> int:
        bucket = self.counts.get((role, history))
        return bucket.get(t, 0) if bucket else 0

    def fraction(self, role: Role, history: History, t: TGram) -> Fraction:
        n = self.count(role, history, t)
        return Fraction(n, self.totals[(role, history)]) if n else Fraction(0)

    def prob(self, role: Role, history: History, t: TGram) -> float:
        n = self.count(role, history, t)
        return n / self.totals[(role, history)] if n else 0.0

    def logprob(self, role: Role, history: History, t: TGram) -> float:
        n = self.count(role, history, t)
        if not n:
            return -math.inf
        return math.log(n) - math.log(self.totals[(role, history)])

    def distribution(self, role: Role, history: History) -> dict[TGram, float]:
        """All T-grams with nonzero probability under a key, as log-probabilities."""
        key = (role, history)
        if key not in self._cache:
            bucket = self.counts.get(key, {})
            if bucket:
                log_total = math.log(self.totals[key])
                self._cache[key] = {t: math.log(n) - log_total for t, n in bucket.items()}
            else:
                self._cache[key] = {}
        return self._cache[key]

    def keys(self):
        return self.counts.keys()

    def events(self):
        for (role, hist), bucket in self.counts.items():
            for t, n in bucket.items():
                yield t, hist, n

    def tgrams(self) -> set:
        return {t for bucket in self.counts.values() for t in bucket}

    def __len__(self) -> int:
        return sum(len(b) for b in self.counts.values())

    def __eq__(self, other) -> bool:
        return (isinstance(other, CountTable) and self.counts == other.counts
                and self.meta == other.meta and self.lexicon == other.lexicon)

    def restricted(self, keep) -> "CountTable":
        """A table holding only the events whose T-gram satisfies ``keep``."""
        out = CountTable(self.meta, self.lexicon)
        for t, hist, n in self.events():
            if keep(t):
                out.add(t, hist, n)
        return out

    def to_text(self) -> str:
        """Line dump: ``ROLE TAB history TAB fragment TAB count``, sorted."""
        return "".join("\t".join(row[:3] + (str(row[3]),)) + "\n" for row in self._rows())

    @classmethod
    def from_text(cls, text: str, meta=None, lexicon=None) -> "CountTable":
        out = cls(meta, lexicon)
        for line in text.splitlines():
            if line.strip():
                role, hist, frag, n = line.split("\t")
                out.add(TGram(Role(role), parse_fragment(frag)), history_from_text(hist), int(n))
        return out

    def _rows(self):
        rows = [(t.role.value, hist.to_text(), format_fragment(t.root), n)
                for t, hist, n in self.events()]
        rows.sort()
        return rows


def observe_corpus(events, meta=None, lexicon=None) -> CountTable:
    """Build a table from (T-gram, history) events; ``events`` maps events to counts
    or is an iterable of events."""
    table = CountTable(meta, lexicon)
    items = events.items() if hasattr(events, "items") else ((e, 1) for e in events)
    merged: Counter = Counter()
    for event, n in items:
        merged[event] += n
    for (t, hist), n in sorted(merged.items(), key=_event_key):
        table.add(t, hist, n)
    return table


def _event_key(item):
    (t, hist), _ = item
    return (t.role.value, hist.to_text(), format_fragment(t.root))


def prob(table: CountTable, role: Role, history: History, t: TGram) -> float:
    return table.prob(role, history, t)


def adjacency_flag(t: TGram, state) -> bool:
    """Whether ``t`` would attach directly next to the head child of ``state``'s node."""
    if t.role is Role.LEFT:
        return not state.left_material
    if t.role is Role.RIGHT:
        return not state.right_material
    raise ValueError("adjacency is defined for dependent T-grams only")


def save_model(table: CountTable) -> bytes:
    payload = {
        "meta": table.meta,
        "lexicon": table.lexicon.to_text() if table.lexicon is not None else None,
        "events": [list(row) for row in table._rows()],
    }
    body = json.dumps(payload, sort_keys=True, ensure_ascii=False,
                      separators=(",", ":")).encode("utf-8")
    packed = zlib.compress(body, 9)
    return _HEADER.pack(MAGIC, VERSION, len(packed), zlib.crc32(packed)) + packed


def load_model(data: bytes) -> CountTable:
    if len(data) < _HEADER.size:
        raise ModelFormatError("truncated model header")
    magic, version, size, crc = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ModelFormatError("not a T-gram model file")
    if version != VERSION:
        raise ModelFormatError(f"model version {version}, expected {VERSION}")
    packed = data[_HEADER.size:]
    if len(packed) != size or zlib.crc32(packed) != crc:
        raise ModelFormatError("truncated or corrupted model body")
    payload = json.loads(zlib.decompress(packed).decode("utf-8"))
    lexicon = TagLexicon.from_text(payload["lexicon"]) if payload["lexicon"] is not None else None
    table = CountTable(payload["meta"], lexicon)
    for role, hist, frag, n in payload["events"]:
        table.add(TGram(Role(role), parse_fragment(frag)), history_from_text(hist), n)
    return table


def read_model(path) -> CountTable:
    with open(path, "rb") as f:
        return load_model(f.read())


def write_model(table: CountTable, path) -> None:
    with open(path, "wb") as f:
        f.write(save_model(table))


def train(treebank: Iterable, cfg, markov: bool = False, meta=None, lexicon=None) -> CountTable:
    """Extract events from a preprocessed treebank and count them."""
    meta = dict(meta or {})
    meta.setdefault("markov", markov)
    return observe_corpus(extract_treebank(treebank, cfg, markov), meta, lexicon)
