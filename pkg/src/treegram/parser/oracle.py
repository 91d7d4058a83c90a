"""Exhaustive enumeration for small instances.

Nothing here shares code with the chart: histories are read off the
finished tree (as during training), and candidate trees are grown top-down
from the fragments without any probability bookkeeping.
"""
from __future__ import annotations

import itertools
import math
from typing import Optional

from ..history import HistoryH, dep_history
from ..tgram import (Extractor, ExtractionConfig, FNode, Open, Role, TGram, branching,
                     open_budget, tgram_depth, word_count)
from ..trees import TOP, ParseTree, split_symbol
from .cky import Derivation, Step

MAX_WORDS = 12


def table_limits(table) -> ExtractionConfig:
    """The tightest size limits every T-gram in ``table`` satisfies.

    The limits are hereditary, so extracting under them loses no fragment
    the table could score and skips the (exponentially many) that it cannot.
    """
    tgrams = table.tgrams()
    if not tgrams:
        return ExtractionConfig(0, 0, 0, 0)
    return ExtractionConfig(max(tgram_depth(t) for t in tgrams),
                            max(branching(t) for t in tgrams),
                            max(open_budget(t) for t in tgrams),
                            max(word_count(t) for t in tgrams))


def _root(tree: ParseTree) -> ParseTree:
    return tree.children[0] if tree.label == TOP else tree


def enumerate_derivations(tree: ParseTree, table, markov: Optional[bool] = None,
                          max_words: int = MAX_WORDS) -> list[tuple[Derivation, float]]:
    """Every canonical-order derivation of ``tree`` with nonzero probability.

    ``tree`` must carry the same annotation (pre-heads, heads, complements)
    the table was trained with.
    """
    if len(tree.words()) > max_words:
        raise ValueError(f"oracle limited to {max_words} words")
    markov = table.markov if markov is None else markov
    ex = Extractor(table_limits(table))

    def logp(role, hist, t):
        return table.logprob(role, hist, t)

    def from_open(node, addr, parent_label):
        hist = HistoryH(node.symbol, parent_label)
        out = []
        for frag in ex.head_fragments(node):
            t = TGram(Role.HEAD, frag)
            lp = logp(Role.HEAD, hist, t)
            if lp == -math.inf:
                continue
            for rest in from_fragment(node, addr, frag):
                out.append([Step(addr, Role.HEAD, t, hist, lp)] + rest)
        return out

    def from_fragment(node, addr, frag):
        if node.is_pos:
            return [[]]
        kids = node.children
        h = node.head_child - 1
        a0 = h - frag.head
        b0 = a0 + len(frag.children)
        pieces = [(a0, frag)]
        results = []
        for lefts in side_sequences(node, "L", a0):
            for rights in side_sequences(node, "R", b0):
                own = [s for s, _, _ in lefts] + [s for s, _, _ in rights]
                placed = sorted(pieces + [(a, w) for _, a, w in lefts + rights],
                                key=lambda p: p[0])
                child_opts = []
                for start, piece in placed:
                    for k, c in enumerate(piece.children, start):
                        if isinstance(c, Open):
                            child_opts.append(from_open(kids[k], addr + (k,), node.label))
                        elif isinstance(c, FNode):
                            child_opts.append(from_fragment(kids[k], addr + (k,), c))
                for combo in itertools.product(*child_opts):
                    results.append(own + [s for part in combo for s in part])
        return results

    def side_sequences(node, side, edge):
        """Inside-out dependent sequences covering the rest of one side."""
        kids = node.children
        h = node.head_child - 1
        addr_of = addresses[id(node)]
        if side == "L":
            if edge == 0:
                yield []
                return
            for a in range(edge - 1, -1, -1):
                frame = [c.label for c in kids[:edge] if c.complement]
                hist = dep_history("L", node.symbol, kids[h].label, frame, edge == h,
                                   kids[edge].label, markov)
                for w in ex.window(node, a, edge, None):
                    t = TGram(Role.LEFT, w)
                    lp = logp(Role.LEFT, hist, t)
                    if lp == -math.inf:
                        continue
                    for rest in side_sequences(node, side, a):
                        yield [(Step(addr_of, Role.LEFT, t, hist, lp), a, w)] + rest
        else:
            if edge == len(kids):
                yield []
                return
            for b in range(edge + 1, len(kids) + 1):
                frame = [c.label for c in kids[edge:] if c.complement]
                hist = dep_history("R", node.symbol, kids[h].label, frame, edge == h + 1,
                                   kids[edge - 1].label, markov)
                for w in ex.window(node, edge, b, None):
                    t = TGram(Role.RIGHT, w)
                    lp = logp(Role.RIGHT, hist, t)
                    if lp == -math.inf:
                        continue
                    for rest in side_sequences(node, side, b):
                        yield [(Step(addr_of, Role.RIGHT, t, hist, lp), edge, w)] + rest

    root = _root(tree)
    addresses = {}
    stack = [(root, (0,))]
    while stack:
        node, addr = stack.pop()
        addresses[id(node)] = addr
        stack.extend((c, addr + (k,)) for k, c in enumerate(node.children) if not c.is_leaf)

    out = []
    for steps in from_open(root, (0,), TOP):
        d = Derivation(steps)
        out.append((d, d.probability))
    return out


def tree_logprob(tree: ParseTree, table, markov: Optional[bool] = None) -> float:
    """log P(T): the sum over all derivations of ``tree``."""
    lps = [d.logprob for d, _ in enumerate_derivations(tree, table, markov)]
    if not lps:
        return -math.inf
    top = max(lps)
    return top + math.log(math.fsum(math.exp(x - top) for x in lps))


def best_derivation(tree: ParseTree, table, markov: Optional[bool] = None):
    derivations = enumerate_derivations(tree, table, markov)
    if not derivations:
        return None
    return max(derivations, key=lambda pair: pair[0].logprob)[0]


def candidate_trees(sentence, table, max_words: int = MAX_WORDS) -> list[ParseTree]:
    """Every annotated tree over ``sentence`` assembled from the table's fragments.

    A superset of the trees with a nonzero-probability derivation: window
    and head fragments are glued structurally, ignoring histories. A
    (label, span) that recurs on its own unary chain is cut.
    """
    if len(sentence) > max_words:
        raise ValueError(f"oracle limited to {max_words} words")
    lexicon = table.lexicon
    forms = [lexicon.normalize(w) for w in sentence] if lexicon is not None else list(sentence)
    heads: dict[str, list] = {}
    windows: dict[tuple, list] = {}
    tops = []
    for (role, hist), bucket in sorted(table.counts.items(), key=lambda kv: kv[0][1].to_text()):
        for t in sorted(bucket, key=str):
            if role is Role.HEAD:
                box = heads.setdefault(t.root.label, [])
                if t.root not in box:
                    box.append(t.root)
                if hist.P == TOP and hist.A not in tops:
                    tops.append(hist.A)
            else:
                box = windows.setdefault((t.root.label, role), [])
                if t.root not in box:
                    box.append(t.root)

    memo: dict = {}
    # (label, span) keys open on the current path; only same-span ones can recur
    active: dict = {}

    def full(symbol, i, j):
        same = active.setdefault((i, j), set())
        if symbol in same:
            return []
        key = (symbol, i, j, frozenset(same))
        if key not in memo:
            same.add(symbol)
            memo[key] = [tree for f in heads.get(symbol, ()) for tree in grow(f, i, j)]
            same.discard(symbol)
        return memo[key]

    def kid_lists(children, i, j):
        if not children:
            if i == j:
                yield []
            return
        first, rest = children[0], children[1:]
        for b in range(i + 1, j - len(rest) + 1):
            if isinstance(first, str):
                opts = [ParseTree.leaf(sentence[i])] if b == i + 1 and forms[i] == first else []
            elif isinstance(first, Open):
                opts = [_flagged(x, first.comp) for x in full(first.label, i, b)]
            else:
                opts = [_flagged(x, first.comp) for x in grow(first, i, b)]
            if not opts:
                continue
            tails = list(kid_lists(rest, b, j))
            for x in opts:
                for tail in tails:
                    yield [x] + tail

    def side_lists(label, role, i, j):
        """Dependent material for one side over [i, j), outermost window closing."""
        leftward = role is Role.LEFT
        for w in windows.get((label, role), ()):
            closes = w.lc if leftward else w.rc
            spans = ([(i, j)] if closes else
                     [(a, j) for a in range(i + 1, j)] if leftward else
                     [(i, b) for b in range(i + 1, j)])
            for a, b in spans:
                mine = list(kid_lists(w.children, a, b))
                if not mine:
                    continue
                if closes:
                    yield from mine
                    continue
                more = (list(side_lists(label, role, i, a)) if leftward
                        else list(side_lists(label, role, b, j)))
                for kids in mine:
                    for other in more:
                        yield other + kids if leftward else kids + other

    def grow(f: FNode, i, j):
        out = []
        for k in range(i, j):
            if f.lc and k != i:
                break
            for l in range(j, k, -1):
                if f.rc and l != j:
                    continue
                core = list(kid_lists(f.children, k, l))
                if not core:
                    continue
                lefts = [[]] if k == i and f.lc else list(side_lists(f.label, Role.LEFT, i, k))
                rights = [[]] if l == j and f.rc else list(side_lists(f.label, Role.RIGHT, l, j))
                for left in lefts:
                    for kids in core:
                        for right in rights:
                            out.append(_make(f, left, kids, right))
        return out

    results, seen = [], set()
    for symbol in tops:
        for tree in full(symbol, 0, len(sentence)):
            top = ParseTree(TOP, [tree], head_child=1)
            top.set_spans()
            key = _key(top)
            if key not in seen:
                seen.add(key)
                results.append(top)
    return results


def _flagged(tree: ParseTree, comp: bool) -> ParseTree:
    # shallow: finished subtrees are shared between candidates, never mutated
    return ParseTree(tree.label, tree.children, tree.word, tree.head_child, tree.span,
                     tree.sc_left, tree.sc_right, tree.prehead, tree.functags, tree.index, comp)


def _make(f: FNode, left, kids, right) -> ParseTree:
    label, prehead = split_symbol(f.label)
    children = left + kids + right
    node = ParseTree(label, children, head_child=len(left) + f.head + 1, prehead=prehead)
    if node.is_phrasal:
        h = node.head_child - 1
        node.sc_left = tuple(sorted(c.label for c in children[:h] if c.complement))
        node.sc_right = tuple(sorted(c.label for c in children[h + 1:] if c.complement))
    return node


def _key(tree: ParseTree) -> str:
    if tree.is_leaf:
        return tree.word
    mark = ("+" if tree.complement else "") + tree.symbol + f"*{tree.head_child}"
    return "(" + mark + " " + " ".join(_key(c) for c in tree.children) + ")"


def oracle_mpd(sentence, table, markov: Optional[bool] = None):
    """(best log-probability, tree) over all candidate trees, or (-inf, None)."""
    best, best_tree = -math.inf, None
    for tree in candidate_trees(sentence, table):
        for d, _ in enumerate_derivations(tree, table, markov):
            if d.logprob > best:
                best, best_tree = d.logprob, tree
    return best, best_tree
