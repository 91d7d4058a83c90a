"""Two-pass CKY search for the most probable derivation (MPD).

Every fragment node of every T-gram in the table becomes a *pattern*: a
node label plus a sequence of child descriptors

    ("w", word)          a terminal
    ("c", symbol, P)     an open leaf, later rewritten by a head T-gram
                         conditioned on (symbol, P)
    ("n", pid)           a nested fragment node, itself a pattern

Patterns are recognized left to right over adjacent spans (prefix items).
A completed head pattern starts a node under construction whose state
(residual frames, completeness, adjacency, outermost children) is what
later steps condition on; dependent windows attach inside-out on each
side. Pass 1 runs the same recognizer on one-level projections of the
patterns with no state and no scores, and records which WSJ labels can
span each cell. Pass 2 only builds node items whose label survived.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from ..tgram import FNode, Open, Role, TGram, format_fragment, format_tgram
from ..treebank import UntaggableWord
from ..trees import ParseTree, raw_label, split_symbol
from .items import attach, dep_key, head_state

NEG_INF = float("-inf")


@dataclass(frozen=True)
class ParserConfig:
    """``beam_width``/``beam_margin`` prune node items per cell (off when None).

    ``markov`` overrides the model's training flag; leave None to follow it.
    """

    beam_width: Optional[int] = None
    beam_margin: Optional[float] = None
    prune: bool = True
    markov: Optional[bool] = None


class Step(NamedTuple):
    """One rewrite: ``address`` is the child-index path from TOP to the node."""

    address: tuple
    role: Role
    tgram: TGram
    history: object
    logprob: float


@dataclass
class Derivation:
    steps: list = field(default_factory=list)

    @property
    def logprob(self) -> float:
        return math.fsum(s.logprob for s in self.steps)

    @property
    def probability(self) -> float:
        return math.exp(self.logprob)

    def __len__(self) -> int:
        return len(self.steps)


@dataclass
class ParseResult:
    words: list
    tree: Optional[ParseTree] = None
    logprob: float = NEG_INF
    derivation: Optional[Derivation] = None
    annotated: Optional[ParseTree] = None
    error: Optional[str] = None
    cells: Optional[dict] = None

    @property
    def ok(self) -> bool:
        return self.tree is not None

    def bracketed(self) -> str:
        return self.tree.to_string(functags=False) if self.tree is not None else "(())"


def tag_lattice(sentence, lexicon) -> list[set]:
    """POS tags each word co-occurred with; unknown words go through their signature."""
    out = []
    for i, word in enumerate(sentence):
        try:
            out.append(set(lexicon.lookup(word)))
        except UntaggableWord:
            raise UntaggableWord(word, i) from None
    return out


# -- grammar ----------------------------------------------------------------

class _Pattern:
    __slots__ = ("node", "kids", "label", "raw", "kind", "init", "text", "roles")

    def __init__(self, node: FNode, kids: tuple, kind: str):
        self.node = node
        self.kids = kids
        self.label = node.label
        self.raw = node.raw
        self.kind = kind
        self.init = head_state(node) if kind == "head" else None
        self.text = format_fragment(node)
        self.roles: list[Role] = []


class Grammar:
    """A count table compiled for chart parsing."""

    def __init__(self, table, markov: bool):
        self.table = table
        self.markov = markov
        self.patterns: list[_Pattern] = []
        self._ids: dict = {}
        self.first: dict = defaultdict(list)
        self.hrules: dict = defaultdict(list)
        for (role, hist), bucket in table.counts.items():
            for t in bucket:
                if role is Role.HEAD:
                    sid = self._pattern(t.root.with_comp(False), "head")
                    self.hrules[sid].append(((hist.A, hist.P), table.logprob(role, hist, t),
                                             t, hist))
                else:
                    pid = self._pattern(t.root, "window")
                    if role not in self.patterns[pid].roles:
                        self.patterns[pid].roles.append(role)
        for rules in self.hrules.values():
            rules.sort(key=lambda r: (r[0], format_tgram(r[2])))
        self._build_projections()

    def _pattern(self, node: FNode, kind: str) -> int:
        key = (kind, node)
        if key in self._ids:
            return self._ids[key]
        kids = []
        for c in node.children:
            if isinstance(c, str):
                kids.append(("w", c))
            elif isinstance(c, Open):
                kids.append(("c", c.label, node.raw))
            else:
                kids.append(("n", self._pattern(c.with_comp(False), "head")))
        pid = len(self.patterns)
        self.patterns.append(_Pattern(node, tuple(kids), kind))
        self._ids[key] = pid
        self.first[kids[0]].append(pid)
        return pid

    def _build_projections(self):
        """One-level, stateless images of the patterns, for pass 1."""
        self.projs = []
        ids = {}
        self.first1 = defaultdict(list)
        for pat in self.patterns:
            kids = tuple(("w", d[1]) if d[0] == "w"
                         else ("s", d[1] if d[0] == "c" else self.patterns[d[1]].label)
                         for d in pat.kids)
            if pat.kind == "head":
                tail = (("N", pat.node.lc, pat.node.rc),)
            else:
                tail = tuple(("L", pat.node.lc) if r is Role.LEFT else ("R", pat.node.rc)
                             for r in pat.roles)
            key = (pat.kind, pat.label, kids, tail)
            if key not in ids:
                ids[key] = len(self.projs)
                self.projs.append((pat.label, kids, pat.kind, tail))
                self.first1[kids[0]].append(ids[key])

    # -- pass 1 -----------------------------------------------------------

    def reachable(self, words) -> dict:
        """(i, j) -> WSJ labels of constituents or partial nodes spanning [i, j)."""
        n = len(words)
        cells = {}
        for length in range(1, n + 1):
            for i in range(n - length + 1):
                j = i + length
                pre, nodes, avail, wins = set(), set(), set(), set()
                todo = []

                def add(item, box):
                    if item not in box:
                        box.add(item)
                        todo.append(item)

                if length == 1:
                    add(("a", ("w", words[i])), avail)
                for p in range(i + 1, j):
                    lp, lnodes, _, lwins = cells[(i, p)]
                    _, rnodes, ravail, rwins = cells[(p, j)]
                    for q, m in lp:
                        if self.projs[q][1][m] in ravail:
                            add(("p", q, m + 1), pre)
                    for _, label, side, closes in lwins:
                        if side == "L":
                            for _, lab, lc, rc in rnodes:
                                if lab == label and not lc:
                                    add(("N", label, closes, rc), nodes)
                    for _, label, lc, rc in lnodes:
                        if lc and not rc:
                            for _, lab, side, closes in rwins:
                                if lab == label and side == "R":
                                    add(("N", label, True, closes), nodes)
                while todo:
                    item = todo.pop()
                    if item[0] == "a":
                        for q in self.first1[item[1]]:
                            add(("p", q, 1), pre)
                    elif item[0] == "p":
                        _, q, m = item
                        label, kids, kind, tail = self.projs[q]
                        if m == len(kids):
                            for t in tail:
                                if t[0] == "N":
                                    add(("N", label, t[1], t[2]), nodes)
                                else:
                                    add(("W", label, t[0], t[1]), wins)
                    elif item[0] == "N":
                        if item[2] and item[3]:
                            add(("a", ("s", item[1])), avail)
                cells[(i, j)] = (
                    {(q, m) for _, q, m in pre if m < len(self.projs[q][1])},
                    nodes, {a[1] for a in avail}, wins)
        return {span: {raw_label(x[1]) for x in c[1]} | {raw_label(d[1]) for d in c[2]
                                                         if d[0] == "s"}
                for span, c in cells.items()}


# -- pass 2 -----------------------------------------------------------------

class _Entry:
    __slots__ = ("logp", "steps", "rule", "parts", "info", "_trace")

    def __init__(self, logp, steps, rule, parts, info):
        self.logp = logp
        self.steps = steps
        self.rule = rule
        self.parts = parts
        self.info = info
        self._trace = None

    def trace(self, g: Grammar) -> str:
        if self._trace is None:
            rule, info = self.rule, self.info
            if rule in ("P", "N0", "F"):
                pid = info[0] if rule == "P" else info
                tag = g.patterns[pid].text + (f"@{info[1]}" if rule == "P" else "")
            elif rule == "W":
                tag = str(info)
            else:
                tag = format_tgram(info[0])
            inner = ",".join(p.trace(g) for p in self.parts)
            self._trace = f"{rule}<{tag}>({inner})"
        return self._trace


def _better(g: Grammar, a: _Entry, b: _Entry) -> bool:
    if a.logp != b.logp:
        return a.logp > b.logp
    if a.steps != b.steps:
        return a.steps < b.steps
    return a.trace(g) < b.trace(g)


class _Cell:
    __slots__ = ("pre", "N", "avail", "need", "wins_l", "wins_r", "n_left", "n_right")

    def __init__(self):
        self.pre: dict = {}
        self.N: dict = {}
        self.avail: dict = {}

    def index(self, g: Grammar):
        self.need = defaultdict(list)
        self.wins_l = defaultdict(list)
        self.wins_r = defaultdict(list)
        for (pid, m), e in self.pre.items():
            pat = g.patterns[pid]
            if m < len(pat.kids):
                self.need[pat.kids[m]].append((pid, m, e))
            elif pat.kind == "window":
                for role in pat.roles:
                    box = self.wins_l if role is Role.LEFT else self.wins_r
                    box[pat.label].append((pid, e))
        self.n_left = defaultdict(list)
        self.n_right = defaultdict(list)
        for (sid, st), e in self.N.items():
            label = g.patterns[sid].label
            if not st.lc:
                self.n_left[label].append((sid, st, e))
            elif not st.rc:
                self.n_right[label].append((sid, st, e))


class Parser:
    """MPD parser over a fixed count table; reusable across sentences."""

    def __init__(self, table, cfg: Optional[ParserConfig] = None):
        self.table = table
        self.cfg = cfg or ParserConfig()
        markov = self.cfg.markov if self.cfg.markov is not None else table.markov
        self.grammar = Grammar(table, markov)
        self._head_label = {}

    def head_label(self, sid: int) -> str:
        if sid not in self._head_label:
            node = self.grammar.patterns[sid].node
            c = node.children[node.head]
            self._head_label[sid] = c if isinstance(c, str) else c.raw
        return self._head_label[sid]

    def parse(self, sentence) -> ParseResult:
        words = list(sentence)
        result = ParseResult(words)
        if not words:
            result.error = "empty sentence"
            return result
        lexicon = self.table.lexicon
        if lexicon is not None:
            try:
                tag_lattice(words, lexicon)
            except UntaggableWord as exc:
                result.error = str(exc.args[0])
                return result
            forms = [lexicon.normalize(w) for w in words]
        else:
            forms = words
        allowed = self.grammar.reachable(forms) if self.cfg.prune else None
        chart = self._fill(forms, allowed)
        best = None
        for d, e in chart[(0, len(words))].avail.items():
            if d[0] == "c" and d[2] == "TOP" and (best is None or _better(self.grammar, e, best)):
                best = e
        if best is None:
            result.error = "no complete derivation"
            return result
        annotated, derivation = _Rebuilder(self, words).run(best)
        result.annotated = annotated
        result.tree = _strip(annotated)
        result.derivation = derivation
        result.logprob = best.logp
        result.cells = chart
        return result

    def _fill(self, forms, allowed) -> dict:
        g = self.grammar
        n = len(forms)
        chart: dict = {}
        for length in range(1, n + 1):
            for i in range(n - length + 1):
                j = i + length
                cell = _Cell()
                ok = None if allowed is None else allowed[(i, j)]
                todo = []
                if length == 1:
                    self._offer(cell.avail, ("w", forms[i]), _Entry(0.0, 0, "W", (), i), todo,
                                "a")
                for p in range(i + 1, j):
                    self._binary(chart[(i, p)], chart[(p, j)], cell, ok, todo)
                self._close(cell, ok, todo)
                self._beam(cell)
                cell.index(g)
                chart[(i, j)] = cell
        return chart

    def _offer(self, box, key, entry, todo, kind):
        old = box.get(key)
        if old is None or _better(self.grammar, entry, old):
            box[key] = entry
            todo.append((kind, key))

    def _binary(self, left: _Cell, right: _Cell, cell: _Cell, ok, todo):
        g = self.grammar
        for desc, waiting in left.need.items():
            child = right.avail.get(desc)
            if child is None:
                continue
            for pid, m, e in waiting:
                self._offer(cell.pre, (pid, m + 1),
                            _Entry(e.logp + child.logp, e.steps + child.steps, "P",
                                   (e, child), (pid, m)), todo, "p")
        table = self.table
        for label, wins in left.wins_l.items():
            nodes = right.n_left.get(label)
            if not nodes or (ok is not None and raw_label(label) not in ok):
                continue
            for sid, st, ne in nodes:
                hist = dep_key(st, "L", label, self.head_label(sid), g.markov)
                dist = table.distribution(Role.LEFT, hist)
                if not dist:
                    continue
                for pid, we in wins:
                    t = TGram(Role.LEFT, g.patterns[pid].node)
                    lp = dist.get(t)
                    if lp is None:
                        continue
                    new = attach(st, "L", t.root)
                    if new is not None:
                        self._offer(cell.N, (sid, new),
                                    _Entry(we.logp + ne.logp + lp, we.steps + ne.steps + 1,
                                           "L", (we, ne), (t, hist, lp)), todo, "n")
        for label, nodes in left.n_right.items():
            wins = right.wins_r.get(label)
            if not wins or (ok is not None and raw_label(label) not in ok):
                continue
            for sid, st, ne in nodes:
                hist = dep_key(st, "R", label, self.head_label(sid), g.markov)
                dist = table.distribution(Role.RIGHT, hist)
                if not dist:
                    continue
                for pid, we in wins:
                    t = TGram(Role.RIGHT, g.patterns[pid].node)
                    lp = dist.get(t)
                    if lp is None:
                        continue
                    new = attach(st, "R", t.root)
                    if new is not None:
                        self._offer(cell.N, (sid, new),
                                    _Entry(ne.logp + we.logp + lp, ne.steps + we.steps + 1,
                                           "R", (ne, we), (t, hist, lp)), todo, "n")

    def _close(self, cell: _Cell, ok, todo):
        g = self.grammar
        while todo:
            kind, key = todo.pop()
            if kind == "p":
                e = cell.pre[key]
                pid, m = key
                pat = g.patterns[pid]
                if m == len(pat.kids) and pat.kind == "head":
                    if ok is None or pat.raw in ok:
                        self._offer(cell.N, (pid, pat.init),
                                    _Entry(e.logp, e.steps, "N0", (e,), pid), todo, "n")
            elif kind == "n":
                e = cell.N[key]
                sid, st = key
                if st.lc and st.rc:
                    self._offer(cell.avail, ("n", sid),
                                _Entry(e.logp, e.steps, "F", (e,), sid), todo, "a")
            else:
                e = cell.avail[key]
                if key[0] == "n":
                    for (a, parent), lp, t, hist in g.hrules.get(key[1], ()):
                        self._offer(cell.avail, ("c", a, parent),
                                    _Entry(e.logp + lp, e.steps + 1, "H", (e,), (t, hist, lp)),
                                    todo, "a")
                for pid in g.first.get(key, ()):
                    self._offer(cell.pre, (pid, 1), _Entry(e.logp, e.steps, "P", (e,), (pid, 0)),
                                todo, "p")

    def _beam(self, cell: _Cell):
        width, margin = self.cfg.beam_width, self.cfg.beam_margin
        if width is None and margin is None:
            return
        for box in (cell.N, cell.avail):
            keys = [k for k in box if not (box is cell.avail and k[0] == "w")]
            if not keys:
                continue
            keys.sort(key=lambda k: (-box[k].logp, box[k].steps, box[k].trace(self.grammar)))
            keep = keys if width is None else keys[:width]
            if margin is not None:
                top = box[keys[0]].logp
                keep = [k for k in keep if box[k].logp >= top - margin]
            for k in set(keys) - set(keep):
                del box[k]


class _Rebuilder:
    """Turns the winning backpointer structure into a tree and its derivation."""

    def __init__(self, parser: Parser, words):
        self.g = parser.grammar
        self.words = words
        self.steps: dict[int, list] = {}

    def run(self, best: _Entry):
        child = self.build_c(best)
        top = ParseTree("TOP", [child], head_child=1)
        top.set_spans()
        derivation = Derivation()
        stack = [(child, (0,))]
        while stack:
            node, addr = stack.pop()
            for role, t, hist, lp in self.steps.get(id(node), ()):
                derivation.steps.append(Step(addr, role, t, hist, lp))
            stack.extend((c, addr + (k,)) for k, c in reversed(list(enumerate(node.children)))
                         if not c.is_leaf)
        return top, derivation

    def build_c(self, e: _Entry) -> ParseTree:
        t, hist, lp = e.info
        node = self.build_f(e.parts[0])
        self.steps[id(node)].insert(0, (Role.HEAD, t, hist, lp))
        return node

    def build_f(self, e: _Entry) -> ParseTree:
        sid = e.info
        kids, head, steps = self.build_n(e.parts[0], sid)
        label, prehead = split_symbol(self.g.patterns[sid].label)
        node = ParseTree(label, kids, head_child=head + 1, prehead=prehead)
        if node.is_phrasal:
            h = head
            node.sc_left = tuple(sorted(c.label for c in kids[:h] if c.complement))
            node.sc_right = tuple(sorted(c.label for c in kids[h + 1:] if c.complement))
        self.steps[id(node)] = steps
        return node

    def build_n(self, e: _Entry, sid: int):
        if e.rule == "N0":
            return self.build_prefix(e.parts[0]), self.g.patterns[sid].node.head, []
        t, hist, lp = e.info
        if e.rule == "L":
            window, inner = e.parts
            kids, head, steps = self.build_n(inner, sid)
            extra = self.build_prefix(window)
            return extra + kids, head + len(extra), steps + [(Role.LEFT, t, hist, lp)]
        inner, window = e.parts
        kids, head, steps = self.build_n(inner, sid)
        return kids + self.build_prefix(window), head, steps + [(Role.RIGHT, t, hist, lp)]

    def build_prefix(self, e: _Entry) -> list:
        pid, m = e.info
        pat = self.g.patterns[pid]
        if m == 0:
            done, child = [], e.parts[0]
        else:
            done, child = self.build_prefix(e.parts[0]), e.parts[1]
        desc = pat.kids[m]
        if desc[0] == "w":
            return done + [ParseTree.leaf(self.words[child.info])]
        node = self.build_c(child) if desc[0] == "c" else self.build_f(child)
        node.complement = pat.node.children[m].comp
        return done + [node]


def _strip(tree: ParseTree) -> ParseTree:
    out = tree.copy()
    for node in out.subtrees():
        node.prehead = None
    return out


_PARSERS: dict = {}


def parse_mpd(sentence, table, cfg: Optional[ParserConfig] = None) -> ParseResult:
    """Parse with a cached :class:`Parser` for ``table``."""
    key = (id(table), cfg)
    entry = _PARSERS.get(key)
    if entry is None or entry[0] is not table:
        _PARSERS.clear()
        entry = _PARSERS[key] = (table, Parser(table, cfg))
    return entry[1].parse(sentence)
