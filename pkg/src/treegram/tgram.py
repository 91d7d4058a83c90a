"""T-gram fragments and their extraction from head-marked trees.

A fragment node holds a contiguous window of its source node's children.
Children are open nonterminal leaves (:class:`Open`), nested fragment nodes
(which always contain their own head child), or, under a POS node, a word.
Stop symbols are not stored as children: ``lc``/``rc`` record whether the
window reaches the left/right boundary of the source constituent.
"""
from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, NamedTuple, Optional, Union

from .history import HistoryH, dep_history
from .trees import ParseTree, raw_label


class Role(str, Enum):
    HEAD = "H"
    LEFT = "L"
    RIGHT = "R"


class Completeness(Enum):
    OPEN = "A"
    LEFT_COMPLETE = "[A"
    RIGHT_COMPLETE = "A]"
    COMPLETE = "[A]"


class Open:
    """An open nonterminal leaf, to be rewritten by a head T-gram."""

    __slots__ = ("label", "comp", "_hash")

    def __init__(self, label: str, comp: bool = False):
        self.label = label
        self.comp = comp
        self._hash = hash(("open", label, comp))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return (self is other or isinstance(other, Open)
                and self.label == other.label and self.comp == other.comp)

    def __repr__(self):
        return f"Open({self.label!r}{', comp=True' if self.comp else ''})"

    @property
    def raw(self) -> str:
        return raw_label(self.label)

    def with_comp(self, comp: bool) -> "Open":
        return self if comp == self.comp else Open(self.label, comp)


Child = Union["FNode", Open, str]


class FNode:
    """A non-leaf fragment node.

    ``head`` is the 0-based index of the head child, None for the root of a
    dependent T-gram. ``sc_left``/``sc_right`` are the residual subcat frames:
    complements of the source node on that side that fall outside the window.
    ``comp`` marks the node as a complement child of its parent.
    """

    __slots__ = ("label", "children", "head", "lc", "rc", "sc_left", "sc_right", "comp",
                 "_key", "_hash")

    def __init__(self, label: str, children: tuple, head: Optional[int], lc: bool, rc: bool,
                 sc_left: tuple = (), sc_right: tuple = (), comp: bool = False):
        self.label = label
        self.children = tuple(children)
        self.head = head
        self.lc = lc
        self.rc = rc
        self.sc_left = tuple(sc_left)
        self.sc_right = tuple(sc_right)
        self.comp = comp
        self._key = (label, self.children, head, lc, rc, self.sc_left, self.sc_right, comp)
        self._hash = hash(self._key)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other or (isinstance(other, FNode) and self._hash == other._hash
                                 and self._key == other._key)

    def __repr__(self):
        return f"FNode<{format_fragment(self)}>"

    @property
    def raw(self) -> str:
        return raw_label(self.label)

    @property
    def is_pos(self) -> bool:
        return len(self.children) == 1 and isinstance(self.children[0], str)

    @property
    def completeness(self) -> Completeness:
        return completeness_of(self)

    def with_comp(self, comp: bool) -> "FNode":
        if comp == self.comp:
            return self
        return FNode(self.label, self.children, self.head, self.lc, self.rc,
                     self.sc_left, self.sc_right, comp)

    def nodes(self) -> Iterator["FNode"]:
        yield self
        for c in self.children:
            if isinstance(c, FNode):
                yield from c.nodes()

    def complements(self) -> tuple:
        """Sorted labels of the complement children in this window."""
        return tuple(sorted(c.raw for c in self.children
                            if not isinstance(c, str) and c.comp))


class TGram(NamedTuple):
    role: Role
    root: FNode

    def __str__(self):
        return format_tgram(self)


def completeness_of(node: FNode) -> Completeness:
    if node.lc and node.rc:
        return Completeness.COMPLETE
    if node.lc:
        return Completeness.LEFT_COMPLETE
    if node.rc:
        return Completeness.RIGHT_COMPLETE
    return Completeness.OPEN


# -- measures ---------------------------------------------------------------

def _root(t) -> FNode:
    return t.root if isinstance(t, TGram) else t


def open_budget(t) -> int:
    """Open nonterminal leaves plus open sides of fragment nodes."""
    total = 0
    for node in _root(t).nodes():
        total += (not node.lc) + (not node.rc)
        total += sum(isinstance(c, Open) for c in node.children)
    return total


def word_count(t) -> int:
    return sum(node.is_pos for node in _root(t).nodes())


def branching(t) -> int:
    return max(len(node.children) for node in _root(t).nodes())


def tgram_depth(t, mode: str = "flat") -> int:
    """Longest root-to-leaf edge count.

    ``flat`` counts edges of the fragment as stored. ``spine`` first
    binarizes every node around its head child, attaching dependents
    inside-out (left side first, then right side), and counts edges in
    the binarized tree.
    """
    if mode == "flat":
        return _flat_depth(_root(t))
    if mode == "spine":
        return _spine_depth(_root(t))
    raise ValueError(f"unknown depth mode {mode!r}")


def _flat_depth(node) -> int:
    if not isinstance(node, FNode):
        return 0
    return 1 + max(_flat_depth(c) for c in node.children)


def _spine_depth(node) -> int:
    if not isinstance(node, FNode):
        return 0
    kids = node.children
    if node.head is not None:
        h = node.head
        attach = list(range(h - 1, -1, -1)) + list(range(h + 1, len(kids)))
    elif node.rc and not node.lc:
        # right-dependent window: innermost child is the leftmost
        h, attach = 0, list(range(1, len(kids)))
    else:
        h, attach = len(kids) - 1, list(range(len(kids) - 2, -1, -1))
    deps = len(attach)
    depths = {h: max(deps, 1)}
    for t, i in enumerate(attach, 1):
        depths[i] = deps - t + 1
    return max(depths[i] + _spine_depth(c) for i, c in enumerate(kids))


# -- text format ------------------------------------------------------------
#
#   tgram   := ROLE ": " node
#   node    := "(" ["["] LABEL ["]"] [frames] (" " child)+ ")"
#   frames  := "{" LABELS "|" LABELS "}"          omitted when both are empty
#   child   := ["*" | "+"] (node | LABEL | WORD)
#
# "[" / "]" mark left / right completeness, "*" the head child, "+" a
# complement child, and WORD is a JSON string literal.

def format_fragment(node: Child) -> str:
    if isinstance(node, str):
        return json.dumps(node, ensure_ascii=False)
    if isinstance(node, Open):
        return node.label
    label = ("[" if node.lc else "") + node.label + ("]" if node.rc else "")
    if node.sc_left or node.sc_right:
        label += "{" + ",".join(node.sc_left) + "|" + ",".join(node.sc_right) + "}"
    parts = []
    for i, c in enumerate(node.children):
        if isinstance(c, str):
            prefix = ""
        else:
            prefix = "*" if i == node.head else ("+" if c.comp else "")
        parts.append(prefix + format_fragment(c))
    return f"({label} {' '.join(parts)})"


def format_tgram(t: TGram) -> str:
    return f"{t.role.value}: {format_fragment(t.root)}"


_FRAG_TOKEN = re.compile(r'"(?:[^"\\]|\\.)*"|[()]|[*+]+|[^\s()"*+][^\s()"]*')
_HEADER = re.compile(r"^(\[?)([^\[\]{}]+)(\]?)(?:\{([^|]*)\|([^}]*)\})?$")


def parse_fragment(text: str) -> FNode:
    tokens = _FRAG_TOKEN.findall(text)
    pos = 0

    def node(comp: bool) -> FNode:
        nonlocal pos
        if tokens[pos] != "(":
            raise ValueError(f"expected '(' in fragment {text!r}")
        m = _HEADER.match(tokens[pos + 1])
        if m is None:
            raise ValueError(f"bad node header {tokens[pos + 1]!r}")
        lc, label, rc, scl, scr = m.groups()
        pos += 2
        kids, head = [], None
        while tokens[pos] != ")":
            prefix = ""
            if tokens[pos][0] in "*+":
                prefix = tokens[pos]
                pos += 1
            if prefix == "*":
                head = len(kids)
            tok = tokens[pos]
            if tok == "(":
                kids.append(node(prefix == "+"))
                continue
            if tok.startswith('"'):
                kids.append(json.loads(tok))
            else:
                kids.append(Open(tok, prefix == "+"))
            pos += 1
        pos += 1
        if len(kids) == 1 and isinstance(kids[0], str):
            head = 0
        split = lambda s: tuple(s.split(",")) if s else ()  # noqa: E731
        return FNode(label, tuple(kids), head, bool(lc), bool(rc),
                     split(scl or ""), split(scr or ""), comp)

    out = node(False)
    if pos != len(tokens):
        raise ValueError(f"trailing input in fragment {text!r}")
    return out


def parse_tgram(text: str) -> TGram:
    role, _, frag = text.partition(": ")
    return TGram(Role(role), parse_fragment(frag))


# -- extraction -------------------------------------------------------------

@dataclass(frozen=True)
class ExtractionConfig:
    """Size limits; None means unlimited."""

    max_depth: Optional[int] = 5
    max_branching: Optional[int] = None
    max_open: Optional[int] = 4
    max_words: Optional[int] = 3
    min_frequency: int = 1
    depth_mode: str = "flat"

    @classmethod
    def unlimited(cls, **kw) -> "ExtractionConfig":
        base = dict(max_depth=None, max_branching=None, max_open=None, max_words=None)
        base.update(kw)
        return cls(**base)

    def admits(self, t) -> bool:
        return ((self.max_depth is None or tgram_depth(t, self.depth_mode) <= self.max_depth)
                and (self.max_branching is None or branching(t) <= self.max_branching)
                and (self.max_open is None or open_budget(t) <= self.max_open)
                and (self.max_words is None or word_count(t) <= self.max_words))


_INF = float("inf")


class _Option(NamedTuple):
    child: Child
    opens: int
    words: int
    depth: int


class Extractor:
    """Head-fragment enumeration with per-tree memoization.

    All size limits are hereditary (a fragment embedded in an admissible
    fragment is itself admissible), so children are filtered before they
    are combined and partial combinations are cut as soon as the open or
    word budget is exceeded.
    """

    def __init__(self, cfg: ExtractionConfig):
        self.cfg = cfg
        self.memo: dict[int, list[FNode]] = {}
        self.opts: dict[int, list[_Option]] = {}
        self._n = _INF if cfg.max_open is None else cfg.max_open
        self._w = _INF if cfg.max_words is None else cfg.max_words
        self._b = _INF if cfg.max_branching is None else cfg.max_branching
        self._d = _INF if cfg.max_depth is None else cfg.max_depth

    def head_fragments(self, node: ParseTree) -> list[FNode]:
        key = id(node)
        if key not in self.memo:
            self.memo[key] = self._head_fragments(node)
        return self.memo[key]

    def _head_fragments(self, node: ParseTree) -> list[FNode]:
        if node.is_pos:
            frag = FNode(node.symbol, (node.children[0].word,), 0, True, True)
            return [frag] if self.cfg.admits(frag) else []
        h = node.head_child - 1
        n, m = h, len(node.children) - h - 1
        out = []
        for i in range(n + 1):
            for j in range(m + 1):
                out.extend(self.window(node, h - i, h + j + 1, h))
        return out

    def options(self, child: ParseTree) -> list[_Option]:
        key = id(child)
        if key not in self.opts:
            self.opts[key] = self._options(child)
        return self.opts[key]

    def _options(self, child: ParseTree) -> list[_Option]:
        comp = child.complement
        opts = [_Option(Open(child.symbol, comp), 1, 0, 0)]
        for frag in self.head_fragments(child):
            depth = tgram_depth(frag, self.cfg.depth_mode)
            if depth + 1 <= self._d:
                opts.append(_Option(frag.with_comp(comp), open_budget(frag),
                                    word_count(frag), depth))
        return opts

    def window(self, node: ParseTree, a: int, b: int, head: Optional[int]) -> list[FNode]:
        """All fragments rooted at ``node`` over children[a:b]."""
        kids = node.children
        if b - a > self._b or self._d < 1:
            return []
        h = node.head_child - 1
        if head is not None:
            lc, rc = a == 0, b == len(kids)
        elif b <= h:
            lc, rc = a == 0, False
        else:
            lc, rc = False, b == len(kids)
        sc_left = tuple(sorted(c.label for i, c in enumerate(kids[:h])
                               if c.complement and not a <= i < b))
        sc_right = tuple(sorted(c.label for i, c in enumerate(kids[h + 1:], h + 1)
                                if c.complement and not a <= i < b))
        base_open = (not lc) + (not rc)
        if base_open > self._n:
            return []
        opts = [self.options(c) for c in kids[a:b]]
        out = []
        local_head = None if head is None else head - a
        for combo in _combine(opts, base_open, 0, self._n, self._w):
            frag = FNode(node.symbol, combo, local_head, lc, rc, sc_left, sc_right)
            if self.cfg.depth_mode == "flat" or self.cfg.admits(frag):
                out.append(frag)
        return out


def _combine(opts, opens, words, max_open, max_words, prefix=()):
    if len(prefix) == len(opts):
        yield prefix
        return
    for opt in opts[len(prefix)]:
        o, w = opens + opt.opens, words + opt.words
        if o <= max_open and w <= max_words:
            yield from _combine(opts, o, w, max_open, max_words, prefix + (opt.child,))


def extract_node(node: ParseTree, cfg: ExtractionConfig,
                 extractor: Optional[Extractor] = None) -> tuple[set, set, set]:
    """The head, left-dependent and right-dependent T-gram sets of ``node``."""
    if node.is_leaf:
        raise ValueError("cannot extract T-grams from a leaf")
    heads, lefts, rights = set(), set(), set()
    for role, _, frag in _node_fragments(node, extractor or Extractor(cfg)):
        {Role.HEAD: heads, Role.LEFT: lefts, Role.RIGHT: rights}[role].add(TGram(role, frag))
    return heads, lefts, rights


def _node_fragments(node: ParseTree, ex: Extractor):
    """Yield (role, window-info, fragment) for every T-gram of ``node``.

    Window info is the (start, stop) child slice of a dependent window.
    """
    for frag in ex.head_fragments(node):
        yield Role.HEAD, None, frag
    if node.is_pos:
        return
    h = node.head_child - 1
    size = len(node.children)
    for a in range(h):
        for b in range(a + 1, h + 1):
            for frag in ex.window(node, a, b, None):
                yield Role.LEFT, (a, b), frag
    for a in range(h + 1, size):
        for b in range(a + 1, size + 1):
            for frag in ex.window(node, a, b, None):
                yield Role.RIGHT, (a, b), frag


def node_events(node: ParseTree, parent_label: str, ex: Extractor,
                markov: bool = False) -> Iterator[tuple[TGram, object]]:
    """Extraction events of one node, each paired with its source history.

    Dependent histories are those of the canonical inside-out derivation:
    the material between the window and the head child is already present.
    """
    kids = node.children
    h = (node.head_child or 1) - 1
    hist_h = HistoryH(node.symbol, parent_label)
    for role, win, frag in _node_fragments(node, ex):
        if role is Role.HEAD:
            yield TGram(role, frag), hist_h
            continue
        a, b = win
        if role is Role.LEFT:
            frame = [c.label for c in kids[:b] if c.complement]
            hist = dep_history("L", node.symbol, kids[h].label, frame, b == h,
                               kids[b].label, markov)
        else:
            frame = [c.label for c in kids[a:] if c.complement]
            hist = dep_history("R", node.symbol, kids[h].label, frame, a == h + 1,
                               kids[a - 1].label, markov)
        yield TGram(role, frag), hist


def tree_events(tree: ParseTree, cfg: ExtractionConfig, markov: bool = False) -> Counter:
    ex = Extractor(cfg)
    events: Counter = Counter()
    stack = [(tree, None)]
    while stack:
        node, parent = stack.pop()
        if node.is_leaf:
            continue
        if parent is not None:
            for event in node_events(node, parent.label, ex, markov):
                events[event] += 1
        stack.extend((c, node) for c in reversed(node.children))
    return events


def extract_treebank(treebank, cfg: ExtractionConfig, markov: bool = False) -> Counter:
    """Counter over (TGram, history) for every non-leaf node below TOP.

    T-grams whose total frequency is below ``cfg.min_frequency`` are dropped.
    """
    events: Counter = Counter()
    for tree in treebank:
        events.update(tree_events(tree, cfg, markov))
    if cfg.min_frequency > 1:
        freq: Counter = Counter()
        for (t, _), n in events.items():
            freq[t] += n
        events = Counter({e: n for e, n in events.items() if freq[e[0]] >= cfg.min_frequency})
    return events
