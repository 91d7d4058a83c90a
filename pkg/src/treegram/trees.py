"""Parse trees and the Penn-Treebank bracketed format."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional

TOP = "TOP"


class BracketError(ValueError):
    """Malformed bracketed input; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


@dataclass(frozen=True)
class PreHead:
    order: int
    head_pos: Optional[str] = None
    head_pos_mother: Optional[str] = None

    def __post_init__(self):
        if self.order == 0:
            ok = self.head_pos is None and self.head_pos_mother is None
        elif self.order == 1:
            ok = self.head_pos is not None and self.head_pos_mother is None
        elif self.order == 2:
            ok = self.head_pos is not None and self.head_pos_mother is not None
        else:
            ok = False
        if not ok:
            raise ValueError(f"inconsistent pre-head {self!r}")

    def suffix(self) -> str:
        if self.order == 0:
            return ""
        if self.order == 1:
            return "^" + self.head_pos
        return f"^{self.head_pos}/{self.head_pos_mother}"


def raw_label(symbol: str) -> str:
    """Strip a pre-head decoration from a model symbol: ``NP^NN/NP`` -> ``NP``."""
    return symbol.split("^", 1)[0]


def split_symbol(symbol: str) -> tuple[str, Optional[PreHead]]:
    label, sep, rest = symbol.partition("^")
    if not sep:
        return label, None
    pos, slash, mother = rest.partition("/")
    if slash:
        return label, PreHead(2, pos, mother)
    return label, PreHead(1, pos)


@dataclass(eq=False)
class ParseTree:
    """An ordered labeled tree.

    Leaves carry ``word`` and have no children; their ``label`` is the word
    itself. ``head_child`` is a 1-based index into ``children``.
    ``complement`` marks a node as a complement child of its parent, and
    ``sc_left``/``sc_right`` are the (sorted) labels of this node's left and
    right complement children.
    """

    label: str
    children: list["ParseTree"] = field(default_factory=list)
    word: Optional[str] = None
    head_child: Optional[int] = None
    span: tuple[int, int] = (0, 0)
    sc_left: tuple[str, ...] = ()
    sc_right: tuple[str, ...] = ()
    prehead: Optional[PreHead] = None
    functags: tuple[str, ...] = ()
    index: Optional[str] = None
    complement: bool = False

    @classmethod
    def leaf(cls, word: str) -> "ParseTree":
        return cls(word, word=word)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def is_pos(self) -> bool:
        return len(self.children) == 1 and self.children[0].is_leaf

    @property
    def is_phrasal(self) -> bool:
        return bool(self.children) and not self.is_pos

    @property
    def symbol(self) -> str:
        """The label as seen by the model: WSJ label plus pre-head."""
        if self.prehead is None:
            return self.label
        return self.label + self.prehead.suffix()

    @property
    def head(self) -> "ParseTree":
        return self.children[self.head_child - 1]

    def subtrees(self) -> Iterator["ParseTree"]:
        """Pre-order traversal over non-leaf nodes."""
        stack = [self]
        while stack:
            node = stack.pop()
            if node.children:
                yield node
                stack.extend(reversed(node.children))

    def leaves(self) -> list["ParseTree"]:
        if self.is_leaf:
            return [self]
        out = []
        for child in self.children:
            out.extend(child.leaves())
        return out

    def words(self) -> list[str]:
        return [leaf.word for leaf in self.leaves()]

    def pos_tags(self) -> list[str]:
        return [node.label for node in self.subtrees() if node.is_pos]

    def head_pos_node(self) -> "ParseTree":
        """Follow head children down to the POS node of the head word."""
        node = self
        while not node.is_pos:
            node = node.head
        return node

    def copy(self) -> "ParseTree":
        return ParseTree(
            self.label, [c.copy() for c in self.children], self.word,
            self.head_child, self.span, self.sc_left, self.sc_right,
            self.prehead, self.functags, self.index, self.complement)

    def set_spans(self, start: int = 0) -> int:
        if self.is_leaf:
            self.span = (start, start + 1)
            return start + 1
        end = start
        for child in self.children:
            end = child.set_spans(end)
        self.span = (start, end)
        return end

    def full_label(self) -> str:
        """The label with function tags and index restored."""
        if self.is_leaf:
            return self.label
        out = "-".join((self.label,) + self.functags)
        if self.index is not None:
            out += self.index
        return out

    def to_string(self, functags: bool = True, symbols: bool = False) -> str:
        if self.is_leaf:
            return self.word
        if symbols:
            label = self.symbol
        elif functags:
            label = self.full_label()
        else:
            label = self.label
        inner = " ".join(c.to_string(functags, symbols) for c in self.children)
        return f"({label} {inner})"

    def __str__(self) -> str:
        return self.to_string()

    def same_shape(self, other: "ParseTree") -> bool:
        """Equality of labels and words (function tags ignored)."""
        if self.is_leaf or other.is_leaf:
            return self.is_leaf and other.is_leaf and self.word == other.word
        return (self.label == other.label
                and len(self.children) == len(other.children)
                and all(a.same_shape(b) for a, b in zip(self.children, other.children)))


def split_label(full: str) -> tuple[str, tuple[str, ...], Optional[str]]:
    """``NP-SBJ-1`` -> (``NP``, (``SBJ``,), ``-1``). ``-NONE-``/``-LRB-`` kept whole."""
    if full.startswith("-") and full.endswith("-") and len(full) > 1:
        return full, (), None
    index = None
    m = re.search(r"[-=]\d+$", full)
    if m and m.start() > 0:
        index = m.group()
        full = full[:m.start()]
    label, *tags = full.split("-")
    if not label:
        return full, (), index
    return label, tuple(t for t in tags if t), index


def _tokens(text: str) -> Iterator[tuple[str, int]]:
    # byte offsets, so errors can be located in the raw file
    data = text.encode("utf-8")
    for m in re.finditer(rb"\(|\)|[^\s()]+", data):
        yield m.group().decode("utf-8"), m.start()


def parse_bracketed(text: str, add_top: bool = True) -> list[ParseTree]:
    """Read every tree in ``text``.

    An unlabeled outermost bracket (``( (S ...))``) or one labeled TOP/ROOT
    becomes the TOP node; otherwise a TOP node is added above the tree.
    """
    trees = []
    stack: list[ParseTree] = []
    pending_label = False
    open_offset = 0
    end = 0
    for tok, off in _tokens(text):
        end = off + len(tok.encode("utf-8"))
        if tok == "(":
            if pending_label:
                # "((" : the outer bracket is unlabeled
                if stack:
                    raise BracketError("empty label", off - 1)
                stack.append(ParseTree(""))
            pending_label = True
            open_offset = off
        elif tok == ")":
            if pending_label:
                raise BracketError("empty label", open_offset)
            if not stack:
                raise BracketError("unbalanced ')'", off)
            node = stack.pop()
            if not node.children:
                raise BracketError("empty constituent", off)
            if stack:
                stack[-1].children.append(node)
            else:
                trees.append(_finish(node, add_top, off))
        else:
            if pending_label:
                label, tags, index = split_label(tok)
                stack.append(ParseTree(label, functags=tags, index=index))
                pending_label = False
            elif stack:
                stack[-1].children.append(ParseTree.leaf(tok))
            else:
                raise BracketError(f"word {tok!r} outside brackets", off)
    if pending_label or stack:
        raise BracketError("unbalanced '('", end)
    return trees


def _finish(root: ParseTree, add_top: bool, off: int) -> ParseTree:
    if root.label == "":
        if len(root.children) != 1 or root.children[0].is_leaf:
            raise BracketError("empty label", off)
        root.label = TOP
    elif root.label == "ROOT" and len(root.children) == 1:
        root.label = TOP
    if add_top and root.label != TOP:
        root = ParseTree(TOP, [root])
    if root.label == TOP:
        root.head_child = 1
    root.set_spans()
    return root


def read_treebank(path) -> list[ParseTree]:
    with open(path, encoding="utf-8") as f:
        return parse_bracketed(f.read())


def write_treebank(trees, path, functags: bool = True) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for tree in trees:
            f.write(tree.to_string(functags) + "\n")


def strip_empty(tree: ParseTree) -> Optional[ParseTree]:
    """Drop -NONE- elements and constituents left empty; None if nothing remains."""
    if tree.is_leaf:
        return tree.copy()
    if tree.label == "-NONE-":
        return None
    kids = [k for k in (strip_empty(c) for c in tree.children) if k is not None]
    if not kids:
        return None
    out = tree.copy()
    out.children = kids
    out.head_child = None
    if tree.label == TOP:
        out.head_child = 1
        out.set_spans()
    return out
