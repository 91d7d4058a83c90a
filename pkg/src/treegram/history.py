"""Conditioning histories for head and dependent T-gram events."""
from __future__ import annotations

from typing import NamedTuple, Optional, Union


class HistoryH(NamedTuple):
    """Head generation at a node labeled ``A`` whose parent has WSJ label ``P``."""

    A: str
    P: str

    def to_text(self) -> str:
        return f"A={self.A} P={self.P}"


class HistoryDep(NamedTuple):
    """Dependent generation on one side of node ``A`` with head child ``H``.

    ``SC`` is the sorted multiset of complements still owed on that side,
    ``F`` the adjacency flag, ``ADJ`` the label of the sibling the new
    material attaches next to (None when Markov conditioning is inactive).
    """

    side: str
    A: str
    H: str
    SC: tuple
    F: bool
    ADJ: Optional[str]

    def to_text(self) -> str:
        adj = "-" if self.ADJ is None else self.ADJ
        return (f"{self.side} A={self.A} H={self.H} SC={','.join(self.SC)} "
                f"F={int(self.F)} ADJ={adj}")


History = Union[HistoryH, HistoryDep]


def history_from_text(text: str) -> History:
    parts = text.split(" ")
    if parts[0] in ("L", "R"):
        side, a, h, sc, f, adj = parts
        sc = sc[len("SC="):]
        adj = adj[len("ADJ="):]
        return HistoryDep(side, a[2:], h[2:], tuple(sc.split(",")) if sc else (),
                          f == "F=1", None if adj == "-" else adj)
    a, p = parts
    return HistoryH(a[2:], p[2:])


def dep_history(side: str, A: str, H: str, frame, adjacent: bool, sibling: Optional[str],
                markov: bool) -> HistoryDep:
    """Build a dependent history, applying the Markov gate."""
    frame = tuple(sorted(frame))
    adj = sibling if (markov and not frame) else None
    return HistoryDep(side, A, H, frame, adjacent, adj)
