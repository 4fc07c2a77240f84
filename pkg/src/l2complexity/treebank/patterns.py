"""A small tree-pattern language for counting constituents.

A pattern is a predicate on a single node; :func:`match_count` counts the nodes
of a tree that satisfy it. Grammar::

    expr     := and_expr ("or" and_expr)*
    and_expr := unary ("and" unary)*
    unary    := "not" unary | node
    node     := head relation*
    head     := "(" expr ")" | "@" NAME | labels
    relation := ["!"] REL target
    target   := "(" expr ")" | "@" NAME | labels
    labels   := LABEL | "{" LABEL ("," LABEL)* "}" | "*"
              | "label" "==" LABEL | "label" "in" "{" ... "}"

Relations (``A REL B`` holds of an A-node when some related node satisfies B;
``!`` negates that):

    immediately-dominates       B is a child
    dominates                   B is a proper descendant
    immediately-dominated-by    B is the parent
    dominated-by                B is a proper ancestor
    headed-by                   B is a child, or the head chain continues through
                                a child carrying the node's own label
    conjoins                    B is a child whose nearest non-punctuation siblings
                                on both sides carry the node's own label
    premodifies                 the parent satisfies B and this node precedes the
                                parent's nominal head
    postmodifies                as premodifies, but following the head

Labels are compared after stripping function tags and indices, so ``NP-SBJ-1``
matches ``NP``. Leaves use their surface text as label, which lets a pattern test
a word: ``IN immediately-dominates {that,whether}``.

A rule file holds ``name := expr`` lines; indented lines continue the previous
rule, ``#`` starts a comment, and ``version = X`` tags the set. Earlier rules can
be referenced as ``@name``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..errors import PatternSyntaxError
from .tree import PUNCT_TAGS, TreeNode

RELATIONS = (
    "immediately-dominates",
    "dominates",
    "immediately-dominated-by",
    "dominated-by",
    "headed-by",
    "conjoins",
    "premodifies",
    "postmodifies",
)
KEYWORDS = {"and", "or", "not", "label", "in"} | set(RELATIONS)

NOMINAL_HEAD_TAGS = frozenset({"NN", "NNS", "NNP", "NNPS", "NX", "NML", "PRP", "CD", "EX"})


def base_label(label: str) -> str:
    """``NP-SBJ-1`` -> ``NP``; ``-LRB-`` and ``-NONE-`` stay as they are."""
    if label.startswith("-"):
        return label
    for sep in "-=":
        head, _, _ = label.partition(sep)
        if head:
            label = head
    return label


class _Indexed:
    """Pre-order node table with parent/child links and a per-tree memo."""

    def __init__(self, tree: TreeNode):
        self.nodes: list[TreeNode] = []
        self.parent: list[int] = []
        self.children: list[list[int]] = []
        self.labels: list[str] = []
        stack = [(tree, -1)]
        while stack:
            node, par = stack.pop()
            idx = len(self.nodes)
            self.nodes.append(node)
            self.parent.append(par)
            self.children.append([])
            self.labels.append(node.label if node.is_leaf else base_label(node.label))
            if par >= 0:
                self.children[par].append(idx)
            for child in reversed(node.children):
                stack.append((child, idx))
        self.memo: dict[tuple[int, int], bool] = {}
        self._heads: dict[int, int | None] = {}

    def descendants(self, i: int):
        stack = list(self.children[i])
        while stack:
            j = stack.pop()
            yield j
            stack.extend(self.children[j])

    def ancestors(self, i: int):
        j = self.parent[i]
        while j >= 0:
            yield j
            j = self.parent[j]

    def nominal_head(self, i: int) -> int | None:
        """Rightmost nominal child; else leftmost NP child; else none."""
        if i not in self._heads:
            kids = self.children[i]
            head = None
            for j in reversed(kids):
                if self.labels[j] in NOMINAL_HEAD_TAGS:
                    head = j
                    break
            if head is None:
                head = next((j for j in kids if self.labels[j] == "NP"), None)
            self._heads[i] = head
        return self._heads[i]


# --- AST -------------------------------------------------------------------


class Pattern:
    def test(self, ix: _Indexed, i: int) -> bool:
        key = (id(self), i)
        hit = ix.memo.get(key)
        if hit is None:
            hit = ix.memo[key] = self._test(ix, i)
        return hit

    def _test(self, ix: _Indexed, i: int) -> bool:
        raise NotImplementedError


@dataclass(eq=False)
class LabelIn(Pattern):
    labels: frozenset | None  # None is the wildcard

    def _test(self, ix, i):
        return self.labels is None or ix.labels[i] in self.labels

    def __str__(self):
        if self.labels is None:
            return "*"
        return "{" + ",".join(sorted(self.labels)) + "}"


@dataclass(eq=False)
class Not(Pattern):
    inner: Pattern

    def _test(self, ix, i):
        return not self.inner.test(ix, i)


@dataclass(eq=False)
class And(Pattern):
    parts: list[Pattern]

    def _test(self, ix, i):
        return all(p.test(ix, i) for p in self.parts)


@dataclass(eq=False)
class Or(Pattern):
    parts: list[Pattern]

    def _test(self, ix, i):
        return any(p.test(ix, i) for p in self.parts)


def _flanking(ix: _Indexed, siblings: list[int], pos: int, step: int) -> int | None:
    k = pos + step
    while 0 <= k < len(siblings):
        if ix.labels[siblings[k]] not in PUNCT_TAGS:
            return siblings[k]
        k += step
    return None


@dataclass(eq=False)
class Relation(Pattern):
    name: str
    target: Pattern
    negated: bool = False

    def _test(self, ix, i):
        hit = self._holds(ix, i)
        return not hit if self.negated else hit

    def _holds(self, ix, i):
        t = self.target
        name = self.name
        if name == "immediately-dominates":
            return any(t.test(ix, j) for j in ix.children[i])
        if name == "dominates":
            return any(t.test(ix, j) for j in ix.descendants(i))
        if name == "immediately-dominated-by":
            p = ix.parent[i]
            return p >= 0 and t.test(ix, p)
        if name == "dominated-by":
            return any(t.test(ix, j) for j in ix.ancestors(i))
        if name == "headed-by":
            return self._headed(ix, i)
        if name == "conjoins":
            kids = ix.children[i]
            own = ix.labels[i]
            for pos, j in enumerate(kids):
                if not t.test(ix, j):
                    continue
                left = _flanking(ix, kids, pos, -1)
                right = _flanking(ix, kids, pos, +1)
                if left is not None and right is not None:
                    if ix.labels[left] == own and ix.labels[right] == own:
                        return True
            return False
        if name in ("premodifies", "postmodifies"):
            p = ix.parent[i]
            if p < 0 or not t.test(ix, p):
                return False
            head = ix.nominal_head(p)
            if head is None or head == i:
                return False
            kids = ix.children[p]
            before = kids.index(i) < kids.index(head)
            return before if name == "premodifies" else not before
        raise AssertionError(name)

    def _headed(self, ix, i):
        own = ix.labels[i]
        for j in ix.children[i]:
            if self.target.test(ix, j):
                return True
        for j in ix.children[i]:
            if ix.labels[j] == own and not ix.nodes[j].is_leaf and self._headed(ix, j):
                return True
        return False


# --- parser ----------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(==|[(){},!@]|[^\s(){},!@=]+)")


def _lex(text: str) -> list[str]:
    tokens, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise PatternSyntaxError(f"unexpected character at offset {pos} in {text!r}")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, macros: dict[str, Pattern]):
        self.text = text
        self.tokens = _lex(text)
        self.pos = 0
        self.macros = macros

    def error(self, msg):
        where = " ".join(self.tokens[: self.pos]) + " <here> " + " ".join(self.tokens[self.pos :])
        return PatternSyntaxError(f"{msg}: {where.strip()}")

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None:
            raise self.error(f"expected {expected or 'more input'}, got end of pattern")
        if expected is not None and tok != expected:
            raise self.error(f"expected {expected!r}, got {tok!r}")
        self.pos += 1
        return tok

    def parse(self) -> Pattern:
        if not self.tokens:
            raise PatternSyntaxError("empty pattern")
        expr = self.expr()
        if self.peek() is not None:
            raise self.error(f"unexpected {self.peek()!r}")
        return expr

    def expr(self):
        parts = [self.and_expr()]
        while self.peek() == "or":
            self.take()
            parts.append(self.and_expr())
        return parts[0] if len(parts) == 1 else Or(parts)

    def and_expr(self):
        parts = [self.unary()]
        while self.peek() == "and":
            self.take()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(parts)

    def unary(self):
        if self.peek() == "not":
            self.take()
            return Not(self.unary())
        return self.node()

    def node(self):
        head = self.operand()
        rels = []
        while True:
            tok = self.peek()
            negated = False
            if tok == "!":
                self.take()
                negated = True
                tok = self.peek()
            if tok in RELATIONS:
                self.take()
                rels.append(Relation(tok, self.operand(), negated))
            elif negated:
                raise self.error("'!' must precede a relation")
            else:
                break
        return head if not rels else And([head, *rels])

    def operand(self):
        tok = self.peek()
        if tok == "(":
            self.take()
            inner = self.expr()
            self.take(")")
            return inner
        if tok == "@":
            self.take()
            name = self.take()
            if name not in self.macros:
                raise self.error(f"unknown reference @{name}")
            return self.macros[name]
        return self.labels()

    def labels(self):
        tok = self.peek()
        if tok == "label":
            self.take()
            op = self.take()
            if op == "==":
                return LabelIn(frozenset({self.label_token()}))
            if op == "in":
                return self.label_set()
            raise self.error(f"expected '==' or 'in' after 'label', got {op!r}")
        if tok == "{":
            return self.label_set()
        if tok == "*":
            self.take()
            return LabelIn(None)
        return LabelIn(frozenset({self.label_token()}))

    def label_set(self):
        self.take("{")
        items = [self.label_token()]
        while self.peek() == ",":
            self.take()
            items.append(self.label_token())
        self.take("}")
        return LabelIn(frozenset(items))

    def label_token(self):
        tok = self.peek()
        if tok is None or tok in KEYWORDS or tok in {"(", ")", "{", "}", ",", "!", "@", "=="}:
            raise self.error(f"expected a label, got {tok!r}")
        return self.take()


def compile_pattern(text: str, macros: dict[str, Pattern] | None = None) -> Pattern:
    pattern = _Parser(text, macros or {}).parse()
    pattern.source = text
    return pattern


def match_count(tree: TreeNode, pattern: Pattern | str, macros=None) -> int:
    """Number of nodes in ``tree`` satisfying ``pattern``; each node counts once."""
    if isinstance(pattern, str):
        pattern = compile_pattern(pattern, macros)
    ix = _Indexed(tree)
    return sum(1 for i in range(len(ix.nodes)) if pattern.test(ix, i))


def match_nodes(tree: TreeNode, pattern: Pattern | str, macros=None) -> list[TreeNode]:
    if isinstance(pattern, str):
        pattern = compile_pattern(pattern, macros)
    ix = _Indexed(tree)
    return [ix.nodes[i] for i in range(len(ix.nodes)) if pattern.test(ix, i)]


@dataclass
class PatternSet:
    """Named patterns read from a rule file, in file order."""

    version: str
    rules: dict[str, Pattern] = field(default_factory=dict)
    sources: dict[str, str] = field(default_factory=dict)

    def __getitem__(self, name: str) -> Pattern:
        return self.rules[name]

    def count_all(self, tree: TreeNode, names) -> dict[str, int]:
        ix = _Indexed(tree)
        n = len(ix.nodes)
        return {name: sum(1 for i in range(n) if self.rules[name].test(ix, i)) for name in names}


_RULE_RE = re.compile(r"^([A-Za-z_][\w]*)\s*:=\s*(.+)$")


def parse_pattern_set(text: str, origin: str = "<patterns>") -> PatternSet:
    logical: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if raw[:1].isspace() and logical:
            first, prev = logical[-1]
            logical[-1] = (first, prev + " " + line.strip())
        else:
            logical.append((lineno, line.strip()))

    version = "unversioned"
    pset = PatternSet(version)
    for lineno, line in logical:
        if line.startswith("version"):
            key, _, value = line.partition("=")
            if key.strip() == "version" and value.strip():
                pset.version = value.strip()
                continue
        m = _RULE_RE.match(line)
        if not m:
            raise PatternSyntaxError(f"{origin}:{lineno}: expected 'name := pattern'")
        name, body = m.groups()
        if name in pset.rules:
            raise PatternSyntaxError(f"{origin}:{lineno}: rule {name!r} defined twice")
        try:
            pset.rules[name] = compile_pattern(body, pset.rules)
        except PatternSyntaxError as exc:
            raise PatternSyntaxError(f"{origin}:{lineno}: {exc}") from None
        pset.sources[name] = body
    return pset


def load_pattern_set(path: str | Path | None = None) -> PatternSet:
    """Load a rule file; without a path, the packaged default set."""
    if path is None:
        text = resources.files("l2complexity").joinpath("data/patterns.txt").read_text("utf-8")
        return parse_pattern_set(text, "patterns.txt")
    path = Path(path)
    return parse_pattern_set(path.read_text(encoding="utf-8"), str(path))
