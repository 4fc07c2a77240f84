"""Penn Treebank bracketed trees."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from ..errors import TreeParseError

PUNCT_TAGS = frozenset({".", ",", ":", "``", "''", "-LRB-", "-RRB-"})
# Empty elements in gold treebanks; never words.
NONE_TAG = "-NONE-"


@dataclass(frozen=True)
class TreeNode:
    """A constituent, a preterminal, or a leaf.

    Leaves carry ``leaf_text`` and use it as their label; inner nodes carry
    children and no text.
    """

    label: str
    children: tuple[TreeNode, ...] = ()
    leaf_text: str | None = None

    def __post_init__(self):
        if not self.label:
            raise ValueError("tree labels must be non-empty")
        if (self.leaf_text is None) == (not self.children):
            raise ValueError("a node has either children or leaf text, not both or neither")

    @classmethod
    def leaf(cls, text: str) -> TreeNode:
        return cls(text, (), text)

    @classmethod
    def pre(cls, tag: str, word: str) -> TreeNode:
        """Preterminal shortcut: ``pre("NN", "dog")`` is ``(NN dog)``."""
        return cls(tag, (cls.leaf(word),))

    @property
    def is_leaf(self) -> bool:
        return self.leaf_text is not None

    @property
    def is_preterminal(self) -> bool:
        return len(self.children) == 1 and self.children[0].is_leaf

    def iter_nodes(self) -> Iterator[TreeNode]:
        """Pre-order traversal, leaves included."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def leaves(self) -> list[str]:
        return [n.leaf_text for n in self.iter_nodes() if n.is_leaf]

    def preterminals(self) -> list[TreeNode]:
        return [n for n in self.iter_nodes() if n.is_preterminal]

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(c.depth() for c in self.children)

    def __str__(self) -> str:
        return to_string(self)


def to_string(tree: TreeNode) -> str:
    if tree.is_leaf:
        return tree.leaf_text
    return "(" + tree.label + " " + " ".join(to_string(c) for c in tree.children) + ")"


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            tokens.append((ch, i))
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            tokens.append((text[i:j], i))
            i = j
    return tokens


def parse_ptb(text: str) -> TreeNode:
    """Parse one bracketed tree such as ``(S (NP (DT The) (NN dog)) (VP (VBD barked)))``.

    An unlabeled outermost bracket, as in ``( (S ...) )``, becomes ``ROOT``.
    Raises :class:`TreeParseError` with the character offset of the problem.
    """
    tokens = _tokenize(text)
    if not tokens:
        raise TreeParseError("empty tree string", 0)
    if tokens[0][0] != "(":
        raise TreeParseError("tree must start with '('", tokens[0][1])

    # stack of [label, children, open_offset]
    stack: list[list] = []
    root = None
    pos = 0
    while pos < len(tokens):
        tok, off = tokens[pos]
        if root is not None:
            raise TreeParseError(f"trailing input {tok!r} after complete tree", off)
        if tok == "(":
            label = None
            if pos + 1 < len(tokens) and tokens[pos + 1][0] not in "()":
                label = tokens[pos + 1][0]
                pos += 1
            elif pos + 1 < len(tokens) and tokens[pos + 1][0] == ")":
                raise TreeParseError("empty constituent '()'", off)
            if label is None and stack:
                raise TreeParseError("unlabeled constituent", off)
            stack.append([label or "ROOT", [], off])
        elif tok == ")":
            if not stack:
                raise TreeParseError("unbalanced ')'", off)
            label, children, open_off = stack.pop()
            if not children:
                raise TreeParseError(f"empty constituent ({label})", open_off)
            node = TreeNode(label, tuple(children))
            if stack:
                stack[-1][1].append(node)
            else:
                root = node
        else:
            if not stack:
                raise TreeParseError(f"bare token {tok!r} outside brackets", off)
            stack[-1][1].append(TreeNode.leaf(tok))
        pos += 1
    if stack:
        raise TreeParseError(f"unbalanced brackets: {len(stack)} unclosed", stack[-1][2])
    return root


def is_word_tag(tag: str) -> bool:
    return tag not in PUNCT_TAGS and tag != NONE_TAG


def word_count(tree: TreeNode) -> int:
    """Leaves whose parent is neither punctuation nor an empty element."""
    return sum(
        1
        for node in tree.iter_nodes()
        for child in node.children
        if child.is_leaf and is_word_tag(node.label)
    )
