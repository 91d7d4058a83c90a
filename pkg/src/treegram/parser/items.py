"""Chart items and the two derivation steps that build them."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

from ..history import HistoryDep, HistoryH, dep_history
from ..tgram import Completeness, FNode, Open, Role, TGram, completeness_of
from ..trees import raw_label


class OpenLeaf(NamedTuple):
    """A nonterminal leaf awaiting a head T-gram; ``parent`` is the parent's WSJ label."""

    label: str
    parent: str


class NodeState(NamedTuple):
    """Everything about a node under construction that later steps condition on."""

    sc_left: tuple
    sc_right: tuple
    lc: bool
    rc: bool
    left_material: bool
    right_material: bool
    leftmost: Optional[str]
    rightmost: Optional[str]


def _raw(child) -> str:
    return child.raw if isinstance(child, (FNode, Open)) else child


def head_state(node: FNode) -> NodeState:
    """State of a node right after its head T-gram (rooted at ``node``) is generated."""
    kids = node.children
    return NodeState(node.sc_left, node.sc_right, node.lc, node.rc,
                     node.head > 0, node.head < len(kids) - 1,
                     _raw(kids[0]), _raw(kids[-1]))


def dep_key(state: NodeState, side: str, label: str, head_label: str,
            markov: bool) -> HistoryDep:
    if side == "L":
        return dep_history("L", label, head_label, state.sc_left,
                           not state.left_material, state.leftmost, markov)
    return dep_history("R", label, head_label, state.sc_right,
                       not state.right_material, state.rightmost, markov)


def _remove(frame: tuple, used: tuple) -> Optional[tuple]:
    out = list(frame)
    for label in used:
        if label not in out:
            return None
        out.remove(label)
    return tuple(out)


def attach(state: NodeState, side: str, window: FNode) -> Optional[NodeState]:
    """State after attaching a dependent window, or None if the step is illegal.

    Illegal: the side is already complete, the window supplies a complement
    the frame does not owe, or it closes the side while complements remain.
    """
    used = window.complements()
    if side == "L":
        if state.lc:
            return None
        frame = _remove(state.sc_left, used)
        if frame is None or (window.lc and frame):
            return None
        return state._replace(sc_left=frame, lc=window.lc, left_material=True,
                              leftmost=_raw(window.children[0]))
    if state.rc:
        return None
    frame = _remove(state.sc_right, used)
    if frame is None or (window.rc and frame):
        return None
    return state._replace(sc_right=frame, rc=window.rc, right_material=True,
                          rightmost=_raw(window.children[-1]))


@dataclass(frozen=True)
class ChartItem:
    """A node under construction.

    ``head_label`` is the WSJ label of the node's head child; ``score`` the
    log-probability of the steps that built it.
    """

    label: str
    state: NodeState
    head_label: str
    score: float = 0.0
    span: Optional[tuple] = None
    head_pos: Optional[int] = None
    back: tuple = ()

    @property
    def completeness(self) -> Completeness:
        return completeness_of(self.state)

    @property
    def lc(self) -> bool:
        return self.state.lc

    @property
    def rc(self) -> bool:
        return self.state.rc

    @property
    def sc_left(self) -> tuple:
        return self.state.sc_left

    @property
    def sc_right(self) -> tuple:
        return self.state.sc_right

    @property
    def left_material(self) -> bool:
        return self.state.left_material

    @property
    def right_material(self) -> bool:
        return self.state.right_material

    @property
    def complete(self) -> bool:
        return self.state.lc and self.state.rc


def apply_head(leaf, t: TGram, table) -> Optional[ChartItem]:
    """Rewrite an open leaf with a head T-gram; None when P_H is zero."""
    if t.role is not Role.HEAD:
        raise ValueError("apply_head needs a head T-gram")
    if t.root.label != leaf.label:
        raise ValueError(f"label mismatch: leaf {leaf.label}, T-gram root {t.root.label}")
    hist = HistoryH(leaf.label, raw_label(leaf.parent))
    lp = table.logprob(Role.HEAD, hist, t)
    if lp == float("-inf"):
        return None
    root = t.root.with_comp(False)
    return ChartItem(root.label, head_state(root), _raw(root.children[root.head]), lp,
                     back=(("H", hist, t, lp),))


def apply_dep(item: ChartItem, t: TGram, table, markov: Optional[bool] = None
              ) -> Optional[ChartItem]:
    """Attach a dependent T-gram to ``item``; None when the step is rejected."""
    if t.role is Role.HEAD:
        raise ValueError("apply_dep needs a dependent T-gram")
    if t.root.label != item.label:
        raise ValueError(f"label mismatch: item {item.label}, T-gram root {t.root.label}")
    if markov is None:
        markov = table.markov
    side = t.role.value
    state = attach(item.state, side, t.root)
    if state is None:
        return None
    hist = dep_key(item.state, side, item.label, item.head_label, markov)
    lp = table.logprob(t.role, hist, t)
    if lp == float("-inf"):
        return None
    return replace(item, state=state, score=item.score + lp,
                   back=item.back + ((side, hist, t, lp),))
